//! Quintic smoothing splines for sampled signals.
//!
//! Each phase is fitted independently with a degree-5 B-spline whose
//! interior knots sit on the sample times, except the two samples next to
//! each end (the quintic analogue of not-a-knot end conditions). With `N`
//! samples this leaves exactly `N` basis functions, so `smoothing = 0`
//! interpolates. For `smoothing = λ > 0` the coefficients minimise
//!
//! ```text
//! Σ_k (y_k - f(u_k))² + λ ∫ f'''(u)² du
//! ```
//!
//! where `u` is time measured in mean sample intervals, which makes `λ`
//! independent of the sample rate and of the signal amplitude.

use super::{CurveModel, SampledSignal};
use crate::error::{Error, Result};
use crate::ga::VecN;

const DEGREE: usize = 5;
const ORDER: usize = DEGREE + 1;
/// Highest derivative order with a continuous spline representation.
const MAX_DERIVATIVE: usize = 4;
const MIN_SAMPLES: usize = 8;
/// Samples dropped from each end of the evaluation domain.
pub const EDGE_TRIM: usize = 2;

/// Fitted per-phase quintic spline. See [`fit_sampled`].
#[derive(Debug, Clone)]
pub struct SplineCurve {
    knots: Vec<f64>,
    /// `coeffs[phase][basis]`
    coeffs: Vec<Vec<f64>>,
    t0: f64,
    step: f64,
    domain: (f64, f64),
    smoothing: f64,
}

impl SplineCurve {
    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    /// Mean sample interval in seconds.
    pub fn step(&self) -> f64 {
        self.step
    }

    fn span(&self, u: f64) -> usize {
        let n = self.coeffs[0].len();
        if u >= self.knots[n] {
            return n - 1;
        }
        // knots[DEGREE..=n] are the span boundaries
        let upper = self.knots[DEGREE + 1..=n].partition_point(|&k| k <= u);
        (DEGREE + upper).min(n - 1)
    }

    fn check(&self, t: f64, order: usize) -> Result<()> {
        if order > MAX_DERIVATIVE {
            return Err(Error::OrderTooHigh {
                requested: order,
                max: MAX_DERIVATIVE,
            });
        }
        let slack = 1e-9 * self.step;
        if !(t >= self.domain.0 - slack && t <= self.domain.1 + slack) {
            return Err(Error::OutOfDomain {
                t,
                start: self.domain.0,
                end: self.domain.1,
            });
        }
        Ok(())
    }

    fn combine(&self, span: usize, ders: &[[f64; ORDER]], k: usize) -> VecN {
        let first = span - DEGREE;
        let scale = self.step.powi(-(k as i32));
        VecN::from_vec(
            self.coeffs
                .iter()
                .map(|c| {
                    ders[k]
                        .iter()
                        .zip(&c[first..first + ORDER])
                        .map(|(b, c)| b * c)
                        .sum::<f64>()
                        * scale
                })
                .collect(),
        )
    }
}

impl CurveModel for SplineCurve {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn max_order(&self) -> usize {
        MAX_DERIVATIVE
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn eval(&self, t: f64, order: usize) -> Result<VecN> {
        self.check(t, order)?;
        let u = (t - self.t0) / self.step;
        let span = self.span(u);
        let ders = basis_derivatives(&self.knots, span, u, order);
        Ok(self.combine(span, &ders, order))
    }

    fn derivatives(&self, t: f64, max: usize) -> Result<Vec<VecN>> {
        self.check(t, max)?;
        let u = (t - self.t0) / self.step;
        let span = self.span(u);
        let ders = basis_derivatives(&self.knots, span, u, max);
        Ok((0..=max).map(|k| self.combine(span, &ders, k)).collect())
    }
}

/// Fits a quintic smoothing spline to every phase of `signal`.
///
/// `smoothing = 0` gives the interpolating spline. The returned model's
/// domain excludes the first and last [`EDGE_TRIM`] samples.
pub fn fit_sampled(signal: &SampledSignal, smoothing: f64) -> Result<SplineCurve> {
    let n = signal.len();
    if n < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            found: n,
            required: MIN_SAMPLES,
        });
    }
    if !(smoothing.is_finite() && smoothing >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "smoothing must be finite and >= 0, got {smoothing}"
        )));
    }
    let times = signal.times();
    let t0 = times[0];
    let step = (times[n - 1] - t0) / (n - 1) as f64;
    let sites: Vec<f64> = times.iter().map(|t| (t - t0) / step).collect();

    let mut knots = Vec::with_capacity(n + ORDER);
    knots.extend(std::iter::repeat_n(sites[0], ORDER));
    knots.extend_from_slice(&sites[3..n - 3]);
    knots.extend(std::iter::repeat_n(sites[n - 1], ORDER));
    debug_assert_eq!(knots.len(), n + ORDER);

    let mut normal = BandedSpd::zeros(n, DEGREE);
    let mut rows = Vec::with_capacity(n);
    for &u in &sites {
        let span = span_of(&knots, n, u);
        let basis = basis_derivatives(&knots, span, u, 0)[0];
        let first = span - DEGREE;
        for r in 0..ORDER {
            for c in 0..=r {
                normal.add(first + r, first + c, basis[r] * basis[c]);
            }
        }
        rows.push((first, basis));
    }
    if smoothing > 0.0 {
        add_third_derivative_penalty(&mut normal, &knots, n, smoothing);
    }
    let chol = normal.cholesky()?;

    let coeffs = (0..signal.dim())
        .map(|phase| {
            let mut rhs = vec![0.0; n];
            for ((first, basis), y) in rows.iter().zip(signal.values()) {
                for (r, b) in basis.iter().enumerate() {
                    rhs[first + r] += b * y[phase];
                }
            }
            chol.solve(rhs)
        })
        .collect();

    Ok(SplineCurve {
        knots,
        coeffs,
        t0,
        step,
        domain: (times[EDGE_TRIM], times[n - 1 - EDGE_TRIM]),
        smoothing,
    })
}

fn span_of(knots: &[f64], n_basis: usize, u: f64) -> usize {
    if u >= knots[n_basis] {
        return n_basis - 1;
    }
    let upper = knots[DEGREE + 1..=n_basis].partition_point(|&k| k <= u);
    (DEGREE + upper).min(n_basis - 1)
}

/// Adds `λ ∫ B_i''' B_j'''` using 3-point Gauss-Legendre per knot span, exact
/// for the degree-4 integrand.
fn add_third_derivative_penalty(
    normal: &mut BandedSpd,
    knots: &[f64],
    n_basis: usize,
    lambda: f64,
) {
    let nodes = [-(0.6f64.sqrt()), 0.0, 0.6f64.sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    for span in DEGREE..n_basis {
        let (lo, hi) = (knots[span], knots[span + 1]);
        if hi <= lo {
            continue;
        }
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let first = span - DEGREE;
        for (x, w) in nodes.iter().zip(weights) {
            let d3 = basis_derivatives(knots, span, mid + half * x, 3)[3];
            for r in 0..ORDER {
                for c in 0..=r {
                    normal.add(first + r, first + c, lambda * w * half * d3[r] * d3[c]);
                }
            }
        }
    }
}

/// Derivatives `0..=nders` of the `DEGREE + 1` nonzero basis functions on
/// `span` at `u` (de Boor / Cox recursion with derivative table).
fn basis_derivatives(knots: &[f64], span: usize, u: f64, nders: usize) -> Vec<[f64; ORDER]> {
    let p = DEGREE;
    let mut ndu = [[0.0f64; ORDER]; ORDER];
    let mut left = [0.0f64; ORDER];
    let mut right = [0.0f64; ORDER];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![[0.0f64; ORDER]; nders + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = [[0.0f64; ORDER]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nders.min(p) {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                let rk = rk as usize;
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize {
                k - 1
            } else {
                p - r
            };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=nders.min(p) {
        for v in ders[k].iter_mut() {
            *v *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

/// Symmetric positive definite band matrix, lower triangle stored as
/// `band[i][d] = A[i][i - d]`.
struct BandedSpd {
    band: Vec<Vec<f64>>,
    width: usize,
}

impl BandedSpd {
    fn zeros(n: usize, width: usize) -> Self {
        Self {
            band: vec![vec![0.0; width + 1]; n],
            width,
        }
    }

    fn add(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(j <= i && i - j <= self.width);
        self.band[i][i - j] += value;
    }

    /// In-place banded Cholesky, `A = L Lᵀ`.
    fn cholesky(mut self) -> Result<Self> {
        let n = self.band.len();
        let w = self.width;
        for i in 0..n {
            let lo = i.saturating_sub(w);
            for j in lo..=i {
                let mut sum = self.band[i][i - j];
                for k in lo.max(j.saturating_sub(w))..j {
                    sum -= self.band[i][i - k] * self.band[j][j - k];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return Err(Error::InvalidInput(
                            "spline system is not positive definite; check sample times".into(),
                        ));
                    }
                    self.band[i][0] = sum.sqrt();
                } else {
                    self.band[i][i - j] = sum / self.band[j][0];
                }
            }
        }
        Ok(self)
    }

    fn solve(&self, mut x: Vec<f64>) -> Vec<f64> {
        let n = x.len();
        let w = self.width;
        for i in 0..n {
            let mut sum = x[i];
            for k in i.saturating_sub(w)..i {
                sum -= self.band[i][i - k] * x[k];
            }
            x[i] = sum / self.band[i][0];
        }
        for i in (0..n).rev() {
            let mut sum = x[i];
            for k in i + 1..(i + w + 1).min(n) {
                sum -= self.band[k][k - i] * x[k];
            }
            x[i] = sum / self.band[i][0];
        }
        x
    }
}
