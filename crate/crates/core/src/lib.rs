//! Geometric frequency of multi-phase electrical signals.
//!
//! An n-phase signal is a curve in `R^n`. This crate differentiates it with
//! respect to arc length, builds the moving frame and its curvatures, and
//! assembles the Darboux bivector whose first blade is the instantaneous
//! angular velocity of the signal.
//!
//! ```
//! use geofreq::curves::balanced_sinusoid;
//! use geofreq::darboux::DarbouxResult;
//! use geofreq::frames::{FrameOptions, FrameState};
//!
//! let omega = 2.0 * std::f64::consts::PI * 50.0;
//! let signal = balanced_sinusoid(3, 230.0, omega)?;
//! let frame = FrameState::at(&signal, 0.001, FrameOptions::for_model(&signal))?;
//! let darboux = DarbouxResult::from_frame(&frame)?;
//! assert!((darboux.omega1_norm - omega).abs() < 1e-9 * omega);
//! # Ok::<(), geofreq::Error>(())
//! ```

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod curves;
pub mod darboux;
pub mod derivatives;
pub mod error;
pub mod frames;
pub mod ga;
pub mod io;
pub mod validation;

pub use error::{Error, Result};
