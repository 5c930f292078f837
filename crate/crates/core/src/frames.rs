//! Moving frames and curvature coefficients.
//!
//! The arc-length derivatives `v̇, v̈, ..` are orthogonalized into
//! `u_1 .. u_m` and normalized into `e_1 .. e_m`. Three orthogonalizers are
//! available: classical Gram-Schmidt, modified Gram-Schmidt (the default) and
//! a blade-based variant that rejects each vector from the outer product of
//! its predecessors. The frame stops growing at the first vector whose
//! rejection is below [`RANK_TOLERANCE`] of its own length, so a planar
//! curve yields `m = 2`.
//!
//! Curvatures follow from the norm ratios `κ_i = ‖u_{i+1}‖ / ‖u_i‖`, and the
//! time-scaled coefficients are `k_i = s' κ_i` (rad/s).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::curves::CurveModel;
use crate::derivatives::{arc_data_at, ArcData, Regularity};
use crate::error::{Error, Result};
use crate::ga::{dot_unchecked, VecN};

pub const RANK_TOLERANCE: f64 = 1e-10;
pub const MAX_GAGS_VECTORS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orthogonalizer {
    Cgs,
    #[default]
    Mgs,
    Gags,
}

impl fmt::Display for Orthogonalizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orthogonalizer::Cgs => "cgs",
            Orthogonalizer::Mgs => "mgs",
            Orthogonalizer::Gags => "gags",
        })
    }
}

impl FromStr for Orthogonalizer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cgs" => Ok(Self::Cgs),
            "mgs" => Ok(Self::Mgs),
            "gags" => Ok(Self::Gags),
            other => Err(Error::InvalidInput(format!(
                "unknown orthogonalizer '{other}' (cgs, mgs, gags)"
            ))),
        }
    }
}

fn check_inputs(vs: &[VecN]) -> Result<()> {
    let Some(first) = vs.first() else {
        return Err(Error::InvalidInput("nothing to orthogonalize".into()));
    };
    if let Some(bad) = vs.iter().find(|v| v.dim() != first.dim()) {
        return Err(Error::DimensionMismatch {
            expected: first.dim(),
            found: bad.dim(),
        });
    }
    let norm = first.norm();
    if !(norm.is_finite() && norm > f64::MIN_POSITIVE) {
        return Err(Error::Regularity {
            t: f64::NAN,
            speed: norm,
            threshold: f64::MIN_POSITIVE,
        });
    }
    Ok(())
}

/// True when the rejection `u` of `v` is too small to extend the frame.
fn is_dependent(u: &VecN, v: &VecN) -> bool {
    !(u.norm() > RANK_TOLERANCE * v.norm())
}

/// Classical Gram-Schmidt: every projection uses the original vector,
/// `u_i = v_i - Σ_{j<i} (v_i·u_j)/(u_j·u_j) u_j`.
pub fn orthogonalize_cgs(vs: &[VecN]) -> Result<Vec<VecN>> {
    check_inputs(vs)?;
    let mut us: Vec<VecN> = Vec::with_capacity(vs.len());
    for v in vs {
        let coeffs: Vec<f64> = us
            .iter()
            .map(|u| dot_unchecked(v, u) / dot_unchecked(u, u))
            .collect();
        let mut w = v.clone();
        for (u, c) in us.iter().zip(coeffs) {
            w.axpy(-c, u);
        }
        if is_dependent(&w, v) {
            break;
        }
        us.push(w);
    }
    Ok(us)
}

/// Modified Gram-Schmidt: each projection is removed from the running
/// remainder before the next one is computed.
pub fn orthogonalize_mgs(vs: &[VecN]) -> Result<Vec<VecN>> {
    check_inputs(vs)?;
    let mut us: Vec<VecN> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        for u in &us {
            let c = dot_unchecked(&w, u) / dot_unchecked(u, u);
            w.axpy(-c, u);
        }
        if is_dependent(&w, v) {
            break;
        }
        us.push(w);
    }
    Ok(us)
}

/// Blade-based Gram-Schmidt. With `A = v_1 ∧ .. ∧ v_{i-1}`, the new vector
/// is the rejection `u_i = A⁻¹ ⌋ (A ∧ v_i)`, evaluated through
/// `u_i · σ_k = ⟨A ∧ v_i, A ∧ σ_k⟩ / ⟨A, A⟩`.
pub fn orthogonalize_gags(vs: &[VecN]) -> Result<Vec<VecN>> {
    check_inputs(vs)?;
    if vs.len() > MAX_GAGS_VECTORS {
        return Err(Error::Unsupported(format!(
            "blade-based Gram-Schmidt handles at most {MAX_GAGS_VECTORS} vectors ({} given); use mgs",
            vs.len()
        )));
    }
    let dim = vs[0].dim();
    let mut blade = Blade::scalar();
    let mut us = Vec::with_capacity(vs.len());
    for v in vs {
        let raised = blade.wedge(v);
        let w = blade
            .contract_into(&raised, dim)
            .scaled(1.0 / blade.norm_squared());
        if is_dependent(&w, v) {
            break;
        }
        us.push(w);
        // normalized factors keep the blade magnitude near one
        blade = blade.wedge(&v.scaled(1.0 / v.norm()));
    }
    Ok(us)
}

pub fn orthogonalize(vs: &[VecN], method: Orthogonalizer) -> Result<Vec<VecN>> {
    match method {
        Orthogonalizer::Cgs => orthogonalize_cgs(vs),
        Orthogonalizer::Mgs => orthogonalize_mgs(vs),
        Orthogonalizer::Gags => orthogonalize_gags(vs),
    }
}

/// Homogeneous exterior-algebra element, keyed by basis bitmask.
#[derive(Debug, Clone)]
struct Blade {
    comps: BTreeMap<u32, f64>,
}

impl Blade {
    fn scalar() -> Self {
        Self {
            comps: BTreeMap::from([(0, 1.0)]),
        }
    }

    /// `(-1)^{#indices in mask above j}`: sign of `σ_T ∧ σ_j` relative to
    /// the sorted blade `σ_{T ∪ j}`.
    fn sign(mask: u32, j: usize) -> f64 {
        if (mask >> (j + 1)).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    fn wedge(&self, v: &VecN) -> Blade {
        let mut out = BTreeMap::new();
        for (&mask, &a) in &self.comps {
            for (j, &x) in v.comps().iter().enumerate() {
                if mask & (1 << j) != 0 || x == 0.0 {
                    continue;
                }
                *out.entry(mask | (1 << j)).or_insert(0.0) += Self::sign(mask, j) * a * x;
            }
        }
        Blade { comps: out }
    }

    fn norm_squared(&self) -> f64 {
        self.comps.values().map(|c| c * c).sum()
    }

    /// The vector `x` with `x_k = ⟨self ∧ σ_k, higher⟩`.
    fn contract_into(&self, higher: &Blade, dim: usize) -> VecN {
        let mut x = vec![0.0; dim];
        for (&mask, &a) in &self.comps {
            for (k, xk) in x.iter_mut().enumerate() {
                if mask & (1 << k) != 0 {
                    continue;
                }
                if let Some(b) = higher.comps.get(&(mask | (1 << k))) {
                    *xk += Self::sign(mask, k) * a * b;
                }
            }
        }
        VecN::from_vec(x)
    }
}

/// `κ_i = ‖u_{i+1}‖/‖u_i‖` and `k_i = s' κ_i` for `i = 1..m-1`.
pub fn curvatures(u: &[VecN], speed: f64) -> (Vec<f64>, Vec<f64>) {
    let kappa: Vec<f64> = u.windows(2).map(|w| w[1].norm() / w[0].norm()).collect();
    let k = kappa.iter().map(|c| speed * c).collect();
    (kappa, k)
}

/// How to build a frame at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOptions {
    /// Number of arc-length derivatives fed to the orthogonalizer; bounds
    /// the frame size.
    pub order: usize,
    pub method: Orthogonalizer,
    pub regularity: Regularity,
}

impl FrameOptions {
    pub fn new(order: usize, method: Orthogonalizer) -> Self {
        Self {
            order,
            method,
            regularity: Regularity::default(),
        }
    }

    /// Full frame for the model's dimension, capped at four closed-form orders
    /// and at what the model can differentiate.
    pub fn for_model(model: &dyn CurveModel) -> Self {
        Self::new(
            model.dim().min(4).min(model.max_order()).max(2),
            Orthogonalizer::default(),
        )
    }

    pub fn with_regularity(mut self, regularity: Regularity) -> Self {
        self.regularity = regularity;
        self
    }
}

/// Moving frame and curvatures at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    pub t: f64,
    pub speed: f64,
    pub u: Vec<VecN>,
    pub e: Vec<VecN>,
    pub kappa: Vec<f64>,
    pub k: Vec<f64>,
}

impl FrameState {
    pub fn from_arc(arc: &ArcData, method: Orthogonalizer) -> Result<Self> {
        let u = orthogonalize(&arc.sdot, method).map_err(|e| match e {
            Error::Regularity {
                speed, threshold, ..
            } => Error::Regularity {
                t: arc.t,
                speed,
                threshold,
            },
            other => other,
        })?;
        let e = u.iter().map(|x| x.scaled(1.0 / x.norm())).collect();
        let (kappa, k) = curvatures(&u, arc.speed());
        Ok(Self {
            t: arc.t,
            speed: arc.speed(),
            u,
            e,
            kappa,
            k,
        })
    }

    pub fn at(model: &dyn CurveModel, t: f64, opts: FrameOptions) -> Result<Self> {
        let arc = arc_data_at(model, t, opts.order, opts.regularity)?;
        Self::from_arc(&arc, opts.method)
    }

    /// Achieved frame size.
    pub fn size(&self) -> usize {
        self.e.len()
    }

    /// `max_{i≠j} |e_i · e_j|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.e.len() {
            for j in i + 1..self.e.len() {
                worst = worst.max(dot_unchecked(&self.e[i], &self.e[j]).abs());
            }
        }
        worst
    }
}

/// Frame at `t` together with `e_i'(t)` from central differences of
/// sign-aligned frames at `t ± h`.
#[derive(Debug, Clone)]
pub struct FrameMotion {
    pub frame: FrameState,
    /// Time derivatives `e_i'`.
    pub e_prime: Vec<VecN>,
}

impl FrameMotion {
    /// Arc-length derivatives `ė_i = e_i' / s'`.
    pub fn e_dot(&self) -> Vec<VecN> {
        self.e_prime
            .iter()
            .map(|d| d.scaled(1.0 / self.frame.speed))
            .collect()
    }
}

pub fn frame_motion(
    model: &dyn CurveModel,
    t: f64,
    h: f64,
    opts: FrameOptions,
) -> Result<FrameMotion> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidInput(format!(
            "difference step must be positive, got {h}"
        )));
    }
    let frame = FrameState::at(model, t, opts)?;
    let fwd = FrameState::at(model, t + h, opts)?;
    let bwd = FrameState::at(model, t - h, opts)?;
    for other in [&fwd, &bwd] {
        if other.size() != frame.size() {
            return Err(Error::Comparability(frame.size(), other.size()));
        }
    }
    let e_prime = frame
        .e
        .iter()
        .zip(fwd.e.iter().zip(&bwd.e))
        .map(|(e, (f, b))| {
            let f = if dot_unchecked(f, e) < 0.0 {
                -f
            } else {
                f.clone()
            };
            let b = if dot_unchecked(b, e) < 0.0 {
                -b
            } else {
                b.clone()
            };
            (f - b).scaled(0.5 / h)
        })
        .collect();
    Ok(FrameMotion { frame, e_prime })
}

/// Per-index comparison of `ė_i · e_{i+1}` with the norm-ratio `κ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrenetReport {
    pub t: f64,
    /// `ė_i · e_{i+1}`; may be negative, unlike `κ_i`.
    pub projected: Vec<f64>,
    pub kappa: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl FrenetReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub fn frenet_curvatures_check(
    model: &dyn CurveModel,
    t: f64,
    h: f64,
    opts: FrameOptions,
) -> Result<FrenetReport> {
    let motion = frame_motion(model, t, h, opts)?;
    let e_dot = motion.e_dot();
    let e = &motion.frame.e;
    let projected: Vec<f64> = (0..e.len().saturating_sub(1))
        .map(|i| dot_unchecked(&e_dot[i], &e[i + 1]))
        .collect();
    let kappa = motion.frame.kappa.clone();
    let residuals = projected
        .iter()
        .zip(&kappa)
        .map(|(p, k)| (p - k).abs())
        .collect();
    Ok(FrenetReport {
        t,
        projected,
        kappa,
        residuals,
    })
}
