//! Differentiable curve models.
//!
//! An n-phase signal is treated as a curve `v(t)` in `R^n`. Analytic models
//! expose exact derivatives of every order; [`SplineCurve`] is built from
//! sampled data and supports derivatives up to order 4.
//!
//! A frame of size `m` needs t-derivatives up to order `m`, so callers that
//! want the full frame in `n` dimensions need `max_order() >= n`.

mod spline;

pub use spline::{fit_sampled, SplineCurve, EDGE_TRIM};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::ga::{wedge_unchecked, VecN};

/// A curve `v(t)` with t-derivatives available up to [`CurveModel::max_order`].
pub trait CurveModel: Send + Sync {
    /// Number of phases.
    fn dim(&self) -> usize;

    /// Highest t-derivative order that [`CurveModel::eval`] accepts.
    /// Analytic models return `usize::MAX`.
    fn max_order(&self) -> usize;

    /// Time span the model is meant to be evaluated on, in seconds. Analytic
    /// models report one period but accept any `t`.
    fn domain(&self) -> (f64, f64);

    /// `d^order v / dt^order` at `t`.
    fn eval(&self, t: f64, order: usize) -> Result<VecN>;

    /// `[v(t), v'(t), .., v^(max)(t)]`.
    fn derivatives(&self, t: f64, max: usize) -> Result<Vec<VecN>> {
        (0..=max).map(|k| self.eval(t, k)).collect()
    }
}

impl<M: CurveModel + ?Sized> CurveModel for Box<M> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn max_order(&self) -> usize {
        (**self).max_order()
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn eval(&self, t: f64, order: usize) -> Result<VecN> {
        (**self).eval(t, order)
    }
    fn derivatives(&self, t: f64, max: usize) -> Result<Vec<VecN>> {
        (**self).derivatives(t, max)
    }
}

/// `d^k/dθ^k cos θ` and `d^k/dθ^k sin θ` without accumulating `kπ/2` into the
/// argument.
#[inline]
fn cos_sin_derivative(theta: f64, k: usize) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    match k % 4 {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

/// `v(t) = cos(ωt) a + sin(ωt) b`: a circle when `a ⟂ b` and `|a| = |b|`,
/// an ellipse otherwise.
#[derive(Debug, Clone)]
pub struct EllipticCurve {
    a: VecN,
    b: VecN,
    omega: f64,
}

impl EllipticCurve {
    pub fn a(&self) -> &VecN {
        &self.a
    }

    pub fn b(&self) -> &VecN {
        &self.b
    }

    /// Angular frequency in rad/s.
    pub fn omega(&self) -> f64 {
        self.omega
    }
}

impl CurveModel for EllipticCurve {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * PI / self.omega)
    }

    fn eval(&self, t: f64, order: usize) -> Result<VecN> {
        let (c, s) = cos_sin_derivative(self.omega * t, order);
        let scale = self.omega.powi(order as i32);
        let mut out = self.a.scaled(c * scale);
        out.axpy(s * scale, &self.b);
        Ok(out)
    }
}

/// Superposition `v(t) = Σ_j cos(ω_j t) a_j + sin(ω_j t) b_j`. With
/// incommensurate `ω_j` the curve never closes and is generally not confined
/// to a plane.
#[derive(Debug, Clone)]
pub struct SinusoidSum {
    terms: Vec<(VecN, VecN, f64)>,
}

impl SinusoidSum {
    pub fn new(terms: Vec<(VecN, VecN, f64)>) -> Result<Self> {
        let Some((a0, _, _)) = terms.first() else {
            return Err(Error::InvalidInput(
                "a sinusoid sum needs at least one term".into(),
            ));
        };
        let dim = a0.dim();
        for (a, b, omega) in &terms {
            check_omega(*omega)?;
            for x in [a, b] {
                if x.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: x.dim(),
                    });
                }
            }
        }
        Ok(Self { terms })
    }

    /// `(r1 cos ω1 t, r1 sin ω1 t, r2 cos ω2 t, r2 sin ω2 t)`.
    pub fn two_circles(r1: f64, omega1: f64, r2: f64, omega2: f64) -> Result<Self> {
        let circle = |r: f64, lo: usize| {
            (
                VecN::basis(4, lo).scaled(r),
                VecN::basis(4, lo + 1).scaled(r),
            )
        };
        let (a1, b1) = circle(r1, 0);
        let (a2, b2) = circle(r2, 2);
        Self::new(vec![(a1, b1, omega1), (a2, b2, omega2)])
    }
}

impl CurveModel for SinusoidSum {
    fn dim(&self) -> usize {
        self.terms[0].0.dim()
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn domain(&self) -> (f64, f64) {
        let slowest = self.terms.iter().map(|t| t.2).fold(f64::INFINITY, f64::min);
        (0.0, 2.0 * PI / slowest)
    }

    fn eval(&self, t: f64, order: usize) -> Result<VecN> {
        let mut out = VecN::zeros(self.dim());
        for (a, b, omega) in &self.terms {
            let (c, s) = cos_sin_derivative(omega * t, order);
            let scale = omega.powi(order as i32);
            out.axpy(c * scale, a);
            out.axpy(s * scale, b);
        }
        Ok(out)
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidInput(format!(
            "angular frequency must be positive, got {omega}"
        )));
    }
    Ok(())
}

/// Balanced n-phase set `v_m(t) = V cos(ωt - 2πm/n)`, m = 0..n-1.
pub fn balanced_sinusoid(n: usize, amplitude: f64, omega: f64) -> Result<EllipticCurve> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(Error::InvalidInput(format!(
            "amplitude must be positive, got {amplitude}"
        )));
    }
    let amplitudes = vec![amplitude; n];
    let phases: Vec<f64> = (0..n).map(|m| 2.0 * PI * m as f64 / n as f64).collect();
    unbalanced_sinusoid(&amplitudes, &phases, omega)
}

/// General sinusoidal set `v_m(t) = V_m cos(ωt - φ_m)`; phases in radians.
pub fn unbalanced_sinusoid(
    amplitudes: &[f64],
    phases: &[f64],
    omega: f64,
) -> Result<EllipticCurve> {
    check_omega(omega)?;
    if amplitudes.len() != phases.len() {
        return Err(Error::DimensionMismatch {
            expected: amplitudes.len(),
            found: phases.len(),
        });
    }
    if amplitudes.len() < 2 {
        return Err(Error::InvalidDimension(amplitudes.len()));
    }
    if amplitudes.iter().any(|a| !a.is_finite() || *a < 0.0)
        || phases.iter().any(|p| !p.is_finite())
    {
        return Err(Error::InvalidInput(
            "amplitudes must be finite and non-negative".into(),
        ));
    }
    if amplitudes.iter().filter(|a| **a > 0.0).count() < 2 {
        return Err(Error::InvalidInput(
            "at least two phases need a nonzero amplitude".into(),
        ));
    }
    let a = VecN::new(
        amplitudes
            .iter()
            .zip(phases)
            .map(|(v, p)| v * p.cos())
            .collect(),
    )?;
    let b = VecN::new(
        amplitudes
            .iter()
            .zip(phases)
            .map(|(v, p)| v * p.sin())
            .collect(),
    )?;
    let area = wedge_unchecked(&a, &b).norm();
    if area <= 1e-12 * (a.norm_squared() + b.norm_squared()) {
        return Err(Error::DegenerateEllipse(area));
    }
    Ok(EllipticCurve { a, b, omega })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicTerm {
    /// Harmonic order, ≥ 1.
    pub order: u32,
    /// RMS amplitude in volts; may be negative.
    pub amplitude: f64,
    /// Phase offset in radians.
    pub phase: f64,
}

/// Harmonic content shared by every phase of a symmetric multi-phase set.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSpec {
    /// Fundamental angular frequency, rad/s.
    pub omega: f64,
    pub terms: Vec<HarmonicTerm>,
}

impl HarmonicSpec {
    /// Three harmonics at orders 1, 2 and 7 with RMS amplitudes 200, 20 and
    /// -30 V, the distorted test signal used throughout the docs.
    pub fn three_phase_distorted(omega: f64) -> Self {
        let term = |order, amplitude| HarmonicTerm {
            order,
            amplitude,
            phase: 0.0,
        };
        Self {
            omega,
            terms: vec![term(1, 200.0), term(2, 20.0), term(7, -30.0)],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct SineTerm {
    amplitude: f64,
    order: f64,
    shift: f64,
    phase: f64,
}

/// Symmetric harmonic set: phase m is
/// `Σ_h √2 A_h sin(h (ωt - mΔ) + φ_h)`.
#[derive(Debug, Clone)]
pub struct HarmonicCurve {
    omega: f64,
    phases: Vec<Vec<SineTerm>>,
}

impl HarmonicCurve {
    pub fn omega(&self) -> f64 {
        self.omega
    }
}

pub fn harmonic_multiphase(
    spec: &HarmonicSpec,
    n: usize,
    phase_step: f64,
) -> Result<HarmonicCurve> {
    check_omega(spec.omega)?;
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if spec.terms.is_empty() {
        return Err(Error::InvalidInput("harmonic spec has no terms".into()));
    }
    if let Some(bad) = spec
        .terms
        .iter()
        .find(|h| h.order == 0 || !h.amplitude.is_finite() || !h.phase.is_finite())
    {
        return Err(Error::InvalidInput(format!(
            "invalid harmonic term {bad:?}"
        )));
    }
    let phases = (0..n)
        .map(|m| {
            spec.terms
                .iter()
                .map(|h| SineTerm {
                    amplitude: 2f64.sqrt() * h.amplitude,
                    order: h.order as f64,
                    shift: m as f64 * phase_step,
                    phase: h.phase,
                })
                .collect()
        })
        .collect();
    Ok(HarmonicCurve {
        omega: spec.omega,
        phases,
    })
}

impl CurveModel for HarmonicCurve {
    fn dim(&self) -> usize {
        self.phases.len()
    }

    fn max_order(&self) -> usize {
        usize::MAX
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * PI / self.omega)
    }

    fn eval(&self, t: f64, order: usize) -> Result<VecN> {
        let comps = self
            .phases
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|h| {
                        let theta = h.order * (self.omega * t - h.shift) + h.phase;
                        let (_, s) = cos_sin_derivative(theta, order);
                        h.amplitude * (h.order * self.omega).powi(order as i32) * s
                    })
                    .sum()
            })
            .collect();
        Ok(VecN::from_vec(comps))
    }
}

/// Uniformly (or at least monotonically) sampled multi-phase data.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    times: Vec<f64>,
    values: Vec<VecN>,
}

impl SampledSignal {
    pub fn new(times: Vec<f64>, values: Vec<VecN>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: values.len(),
            });
        }
        if let Some(first) = values.first() {
            if let Some(bad) = values.iter().find(|v| v.dim() != first.dim()) {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: bad.dim(),
                });
            }
        }
        if let Some(k) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(format!(
                "times must be strictly increasing (sample {} at {} follows {})",
                k + 1,
                times[k + 1],
                times[k]
            )));
        }
        Ok(Self { times, values })
    }

    /// Samples `model` at `t_k = t0 + k / rate`, `k = 0..count`.
    pub fn from_model(model: &dyn CurveModel, t0: f64, rate: f64, count: usize) -> Result<Self> {
        let times: Vec<f64> = (0..count).map(|k| t0 + k as f64 / rate).collect();
        let values = times
            .iter()
            .map(|&t| model.eval(t, 0))
            .collect::<Result<_>>()?;
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[VecN] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.values.first().map_or(0, VecN::dim)
    }

    /// Mean sample rate in Hz.
    pub fn sample_rate(&self) -> f64 {
        match self.times.len() {
            0 | 1 => 0.0,
            n => (n - 1) as f64 / (self.times[n - 1] - self.times[0]),
        }
    }
}
