//! Darboux bivector and geometric frequency.
//!
//! For a frame `e_1 .. e_m` with scaled curvatures `k_i`, the Darboux
//! bivector is `Ω = Σ k_i e_i ∧ e_{i+1}` (rad/s). Its first blade
//! `Ω_1 = k_1 e_1 ∧ e_2 = v' ∧ v'' / s'^2` is the instantaneous angular
//! velocity of the signal; `‖Ω_1‖` is the geometric frequency. Frames rotate
//! by `Ω` in the time domain: `e_i' = e_i ⌋ Ω`.

use rayon::prelude::*;

use crate::curves::CurveModel;
use crate::derivatives::{Regularity, REL_REGULARITY};
use crate::error::{Error, Result};
use crate::frames::{FrameOptions, FrameState};
use crate::ga::{left_contract, wedge_unchecked, BivecN, VecN};

pub const MIN_QUADRATURE_STEPS: usize = 16;

fn check_frame(e: &[VecN], coeffs: usize) -> Result<usize> {
    let m = e.len();
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "a Darboux bivector needs a frame of size 2 or more, got {m}"
        )));
    }
    if coeffs != m - 1 {
        return Err(Error::DimensionMismatch {
            expected: m - 1,
            found: coeffs,
        });
    }
    let dim = e[0].dim();
    if let Some(bad) = e.iter().find(|x| x.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    Ok(dim)
}

/// `Ω = Σ_{i<m} k_i e_i ∧ e_{i+1}`.
pub fn darboux_from_frame(e: &[VecN], k: &[f64]) -> Result<BivecN> {
    let dim = check_frame(e, k.len())?;
    let mut omega = BivecN::zeros(dim);
    for (i, ki) in k.iter().enumerate() {
        omega.axpy(*ki, &wedge_unchecked(&e[i], &e[i + 1]));
    }
    Ok(omega)
}

/// `Ω = s' Σ u_i ∧ u_{i+1} / ‖u_i‖²`, from the unnormalized frame.
pub fn darboux_from_u(u: &[VecN], speed: f64) -> Result<BivecN> {
    let dim = check_frame(u, u.len().saturating_sub(1))?;
    let mut omega = BivecN::zeros(dim);
    for w in u.windows(2) {
        omega.axpy(speed / w[0].norm_squared(), &wedge_unchecked(&w[0], &w[1]));
    }
    Ok(omega)
}

/// `Ω = (s'/2) Σ_{i≤m} e_i ∧ ė_i`, with `ė_i` the arc-length derivatives.
pub fn darboux_from_frame_derivs(e: &[VecN], e_dot: &[VecN], speed: f64) -> Result<BivecN> {
    if e.len() != e_dot.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            found: e_dot.len(),
        });
    }
    let dim = check_frame(e, e.len() - 1)?;
    let mut omega = BivecN::zeros(dim);
    for (ei, di) in e.iter().zip(e_dot) {
        if di.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: di.dim(),
            });
        }
        omega.axpy(0.5 * speed, &wedge_unchecked(ei, di));
    }
    Ok(omega)
}

/// Darboux blades `Ω_1 = k_1 e_1∧e_2`, `Ω_i = k_{i-1} e_{i-1}∧e_i + k_i e_i∧e_{i+1}`
/// and the closing `Ω_m = k_{m-1} e_{m-1}∧e_m`, so that `Σ Ω_i = 2Ω`.
pub fn darboux_blades(e: &[VecN], k: &[f64]) -> Result<Vec<BivecN>> {
    check_frame(e, k.len())?;
    let terms: Vec<BivecN> = k
        .iter()
        .enumerate()
        .map(|(i, ki)| wedge_unchecked(&e[i], &e[i + 1]).scaled(*ki))
        .collect();
    let m = e.len();
    let mut blades = Vec::with_capacity(m);
    blades.push(terms[0].clone());
    for i in 1..m - 1 {
        blades.push(&terms[i - 1] + &terms[i]);
    }
    blades.push(terms[m - 2].clone());
    Ok(blades)
}

/// `Ω_1 = v' ∧ v'' / s'^2`; needs no orthogonalization.
pub fn omega1_direct(v1: &VecN, v2: &VecN, regularity: Regularity) -> Result<BivecN> {
    if v1.dim() != v2.dim() {
        return Err(Error::DimensionMismatch {
            expected: v1.dim(),
            found: v2.dim(),
        });
    }
    let speed = v1.norm();
    if !(speed.is_finite() && speed > regularity.threshold() && speed > 0.0) {
        return Err(Error::Regularity {
            t: f64::NAN,
            speed,
            threshold: regularity.threshold(),
        });
    }
    Ok(wedge_unchecked(v1, v2).scaled(1.0 / (speed * speed)))
}

/// Residual of the rotation relation `e_i' = e_i ⌋ Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationReport {
    /// `‖e_i' - e_i ⌋ Ω‖` per frame vector.
    pub per_vector: Vec<f64>,
    /// `max_i per_vector[i] / max(1, ‖Ω‖)`.
    pub residual: f64,
}

/// Compares time derivatives `e_i'` of the frame with `e_i ⌋ Ω`.
pub fn rotation_relation_check(
    e: &[VecN],
    e_prime: &[VecN],
    omega: &BivecN,
) -> Result<RotationReport> {
    if e.len() != e_prime.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            found: e_prime.len(),
        });
    }
    let per_vector = e
        .iter()
        .zip(e_prime)
        .map(|(ei, di)| Ok((di - &left_contract(ei, omega)?).norm()))
        .collect::<Result<Vec<f64>>>()?;
    let residual = per_vector.iter().copied().fold(0.0, f64::max) / omega.norm().max(1.0);
    Ok(RotationReport {
        per_vector,
        residual,
    })
}

/// Darboux quantities at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct DarbouxResult {
    pub t: f64,
    /// `Ω` in rad/s.
    pub omega: BivecN,
    /// `Ω_1` in rad/s.
    pub omega1: BivecN,
    pub omega1_norm: f64,
    pub blades: Vec<BivecN>,
    /// `‖Ω - Ω_1‖`; zero for planar curves.
    pub planar_residual: f64,
}

impl DarbouxResult {
    /// A frame of size one (straight motion) gives `Ω = 0` and no blades.
    pub fn from_frame(frame: &FrameState) -> Result<Self> {
        let dim = frame
            .e
            .first()
            .map(VecN::dim)
            .ok_or_else(|| Error::InvalidInput("empty frame".into()))?;
        if frame.size() < 2 {
            return Ok(Self {
                t: frame.t,
                omega: BivecN::zeros(dim),
                omega1: BivecN::zeros(dim),
                omega1_norm: 0.0,
                blades: Vec::new(),
                planar_residual: 0.0,
            });
        }
        let omega = darboux_from_frame(&frame.e, &frame.k)?;
        let blades = darboux_blades(&frame.e, &frame.k)?;
        let omega1 = blades[0].clone();
        let planar_residual = (&omega - &omega1).norm();
        Ok(Self {
            t: frame.t,
            omega1_norm: omega1.norm(),
            omega,
            omega1,
            blades,
            planar_residual,
        })
    }
}

/// Time average of `Ω_1` over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedBivector {
    pub window: (f64, f64),
    pub mean: BivecN,
    pub mean_norm: f64,
    pub steps: usize,
}

/// Largest `‖v'‖` over `times`, the scale for relative regularity thresholds.
pub fn speed_scale(model: &dyn CurveModel, times: &[f64]) -> Result<f64> {
    let speeds = times
        .par_iter()
        .map(|&t| Ok(model.eval(t, 1)?.norm()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(speeds.into_iter().fold(0.0, f64::max))
}

fn effective_regularity(base: Regularity, scale: f64) -> Regularity {
    Regularity::absolute(base.threshold().max(REL_REGULARITY * scale))
}

/// Composite trapezoid average of `Ω_1(t)` over `[t0, t1]` with `steps`
/// intervals, followed by the norm of the mean.
pub fn average_bivector(
    model: &dyn CurveModel,
    t0: f64,
    t1: f64,
    steps: usize,
) -> Result<AveragedBivector> {
    if steps < MIN_QUADRATURE_STEPS {
        return Err(Error::InvalidInput(format!(
            "quadrature needs at least {MIN_QUADRATURE_STEPS} steps, got {steps}"
        )));
    }
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidInput(format!(
            "averaging window [{t0}, {t1}] is empty"
        )));
    }
    let h = (t1 - t0) / steps as f64;
    let nodes: Vec<f64> = (0..=steps)
        .map(|i| if i == steps { t1 } else { t0 + i as f64 * h })
        .collect();
    let regularity = effective_regularity(Regularity::default(), speed_scale(model, &nodes)?);
    let values = nodes
        .par_iter()
        .map(|&t| {
            let v1 = model.eval(t, 1)?;
            let v2 = model.eval(t, 2)?;
            omega1_direct(&v1, &v2, regularity).map_err(|e| with_time(e, t))
        })
        .collect::<Result<Vec<BivecN>>>()?;
    let mut sum = BivecN::zeros(model.dim());
    for (i, value) in values.iter().enumerate() {
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        sum.axpy(w, value);
    }
    let mean = sum.scaled(1.0 / steps as f64);
    Ok(AveragedBivector {
        window: (t0, t1),
        mean_norm: mean.norm(),
        mean,
        steps,
    })
}

fn with_time(err: Error, t: f64) -> Error {
    match err {
        Error::Regularity {
            speed, threshold, ..
        } => Error::Regularity {
            t,
            speed,
            threshold,
        },
        other => other,
    }
}

/// Frame and Darboux data of one regular sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSample {
    pub frame: FrameState,
    pub darboux: DarbouxResult,
}

/// One entry of a geometric frequency series. Irregular instants keep their
/// slot and carry the error instead of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GeomFreqSample {
    pub t: f64,
    pub outcome: Result<FrameSample>,
}

impl GeomFreqSample {
    pub fn flags(&self) -> Vec<&'static str> {
        match &self.outcome {
            Err(_) => vec!["irregular"],
            Ok(s) if s.frame.size() < 2 => vec!["straight"],
            Ok(_) => Vec::new(),
        }
    }
}

/// Runs derivatives, frame, curvatures and Darboux assembly at every time in
/// `times`, in parallel, preserving order. The regularity threshold is at
/// least `REL_REGULARITY` times the largest speed over `times`.
pub fn geometric_frequency_series(
    model: &dyn CurveModel,
    times: &[f64],
    opts: FrameOptions,
) -> Result<Vec<GeomFreqSample>> {
    if times.is_empty() {
        return Err(Error::InvalidInput("no sample times given".into()));
    }
    let regularity = effective_regularity(opts.regularity, speed_scale(model, times)?);
    let opts = opts.with_regularity(regularity);
    times
        .par_iter()
        .map(|&t| {
            let outcome = FrameState::at(model, t, opts).and_then(|frame| {
                let darboux = DarbouxResult::from_frame(&frame)?;
                Ok(FrameSample { frame, darboux })
            });
            match outcome {
                Err(e @ Error::Regularity { .. }) => Ok(GeomFreqSample { t, outcome: Err(e) }),
                Err(e) => Err(e),
                Ok(s) => Ok(GeomFreqSample { t, outcome: Ok(s) }),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{
        balanced_sinusoid, harmonic_multiphase, unbalanced_sinusoid, HarmonicSpec, SinusoidSum,
    };
    use crate::frames::{frame_motion, orthogonalize_mgs, Orthogonalizer};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const W50: f64 = 2.0 * PI * 50.0;

    fn e(n: usize, i: usize) -> VecN {
        VecN::basis(n, i)
    }

    fn harmonic() -> impl CurveModel {
        harmonic_multiphase(&HarmonicSpec::three_phase_distorted(W50), 3, 2.0 * PI / 3.0).unwrap()
    }

    fn unbalanced() -> impl CurveModel {
        unbalanced_sinusoid(
            &[2.0, 1.0, 1.0],
            &[0.0, -2.0 * PI / 3.0, 2.0 * PI / 3.0],
            W50,
        )
        .unwrap()
    }

    #[test]
    fn trivial_forms() {
        let frame = [e(2, 0), e(2, 1)];
        assert_eq!(
            darboux_from_frame(&frame, &[W50]).unwrap(),
            BivecN::basis(2, 0, 1).scaled(W50)
        );
        assert_eq!(darboux_from_u(&frame, 1.0).unwrap(), BivecN::basis(2, 0, 1));
        let frozen = [VecN::zeros(2), VecN::zeros(2)];
        assert_eq!(
            darboux_from_frame_derivs(&frame, &frozen, 3.0).unwrap(),
            BivecN::zeros(2)
        );
        assert!(darboux_from_frame(&frame, &[1.0, 2.0]).is_err());
        assert!(darboux_from_frame(&frame[..1], &[]).is_err());
    }

    #[test]
    fn blade_completion_sums_to_twice_omega() {
        let blades = darboux_blades(&[e(2, 0), e(2, 1)], &[4.0]).unwrap();
        assert_eq!(blades, vec![BivecN::basis(2, 0, 1).scaled(4.0); 2]);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let raw: Vec<VecN> = (0..4)
            .map(|_| VecN::new((0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap())
            .collect();
        let frame: Vec<VecN> = orthogonalize_mgs(&raw)
            .unwrap()
            .iter()
            .map(|u| u.scaled(1.0 / u.norm()))
            .collect();
        let k = [2.0, 3.0, 5.0];
        let blades = darboux_blades(&frame, &k).unwrap();
        let mut sum = BivecN::zeros(4);
        for b in &blades {
            assert!(b.blade_defect() < 1e-14);
            sum = &sum + b;
        }
        let omega = darboux_from_frame(&frame, &k).unwrap();
        assert!((&sum - &omega.scaled(2.0)).norm() < 1e-14);
        assert_relative_eq!(blades[0].norm(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn balanced_omega_closed_form() {
        for (n, amp) in [(3, 1.0), (5, 230.0)] {
            let c = balanced_sinusoid(n, amp, W50).unwrap();
            let expect = wedge_unchecked(c.a(), c.b()).scaled(2.0 * W50 / (n as f64 * amp * amp));
            for t in [0.0, 0.0041, 0.017] {
                let f = FrameState::at(&c, t, FrameOptions::new(3, Orthogonalizer::Mgs)).unwrap();
                let d = DarbouxResult::from_frame(&f).unwrap();
                assert!((&d.omega - &expect).norm() < 1e-12 * W50);
                assert_eq!(d.omega, d.omega1);
                let direct = omega1_direct(
                    &c.eval(t, 1).unwrap(),
                    &c.eval(t, 2).unwrap(),
                    Regularity::default(),
                )
                .unwrap();
                assert_relative_eq!(direct.norm(), W50, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn unbalanced_omega_at_zero() {
        let c = unbalanced_sinusoid(
            &[2.0, 1.0, 1.0],
            &[0.0, -2.0 * PI / 3.0, 2.0 * PI / 3.0],
            W50,
        )
        .unwrap();
        let (a, b) = (c.a(), c.b());
        let g2 = b.norm_squared() - a.norm_squared() + b.norm_squared() + a.norm_squared();
        let expect = wedge_unchecked(a, b).scaled(2.0 * W50 / g2);
        let f = FrameState::at(&c, 0.0, FrameOptions::new(3, Orthogonalizer::Mgs)).unwrap();
        let from_u = darboux_from_u(&f.u, f.speed).unwrap();
        assert!((&from_u - &expect).norm() < 1e-10 * expect.norm());
    }

    #[test]
    fn circle_fd_form() {
        let (r, w) = (2.5, 3.0);
        let c = unbalanced_sinusoid(&[r, r], &[0.0, PI / 2.0], w).unwrap();
        let m = frame_motion(&c, 0.3, 1e-5, FrameOptions::new(2, Orthogonalizer::Mgs)).unwrap();
        let fd = darboux_from_frame_derivs(&m.frame.e, &m.e_dot(), m.frame.speed).unwrap();
        assert!((&fd - &BivecN::basis(2, 0, 1).scaled(w)).norm() < 1e-8);
    }

    #[test]
    fn straight_line_has_zero_omega1() {
        let v1 = VecN::new(vec![1.0, 2.0, 3.0]).unwrap();
        let w = omega1_direct(&v1, &v1.scaled(-4.0), Regularity::default()).unwrap();
        assert_eq!(w.norm(), 0.0);
        assert!(omega1_direct(&VecN::zeros(3), &v1, Regularity::default()).is_err());
    }

    #[test]
    fn rotation_relation_static() {
        let frame = [e(3, 0), e(3, 1)];
        let zero = [VecN::zeros(3), VecN::zeros(3)];
        let r = rotation_relation_check(&frame, &zero, &BivecN::zeros(3)).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    fn check_forms(model: &dyn CurveModel, order: usize, times: &[f64]) {
        let opts = FrameOptions::new(order, Orthogonalizer::Mgs);
        for &t in times {
            let m = frame_motion(model, t, 1e-7, opts).unwrap();
            let f = &m.frame;
            let canonical = darboux_from_frame(&f.e, &f.k).unwrap();
            let scale = canonical.norm();
            assert!((&darboux_from_u(&f.u, f.speed).unwrap() - &canonical).norm() < 1e-10 * scale);
            let fd = darboux_from_frame_derivs(&f.e, &m.e_dot(), f.speed).unwrap();
            assert!((&fd - &canonical).norm() < 1e-4 * scale, "t={t}");
            let rot = rotation_relation_check(&f.e, &m.e_prime, &canonical).unwrap();
            assert!(rot.residual < 1e-4, "t={t}: {rot:?}");
        }
    }

    #[test]
    fn forms_agree_on_all_models() {
        let times = [0.0013, 0.0061, 0.0117, 0.0188];
        check_forms(&balanced_sinusoid(3, 230.0, W50).unwrap(), 3, &times);
        check_forms(&unbalanced(), 3, &times);
        check_forms(&harmonic(), 3, &times);
        check_forms(
            &SinusoidSum::two_circles(1.0, W50, 0.7, W50 * 2f64.sqrt()).unwrap(),
            4,
            &times,
        );
    }

    #[test]
    fn planar_and_non_planar() {
        let c = harmonic();
        let f = FrameState::at(&c, 0.0042, FrameOptions::new(4, Orthogonalizer::Mgs)).unwrap();
        assert_eq!(f.size(), 2);
        let d = DarbouxResult::from_frame(&f).unwrap();
        assert!(d.planar_residual <= 1e-9 * d.omega.norm());

        let c = SinusoidSum::two_circles(1.0, W50, 0.7, W50 * 3f64.sqrt()).unwrap();
        let f = FrameState::at(&c, 0.0042, FrameOptions::new(4, Orthogonalizer::Mgs)).unwrap();
        assert_eq!(f.size(), 4);
        let d = DarbouxResult::from_frame(&f).unwrap();
        assert!(d.planar_residual > 1e-3 * d.omega.norm());
        let rest = &d.omega - &d.omega1;
        assert!(left_contract(&f.e[0], &rest).unwrap().norm() < 1e-9 * d.omega.norm());
        assert_relative_eq!(d.omega1_norm, f.k[0].abs(), max_relative = 1e-12);
    }

    #[test]
    fn averages() {
        let c = balanced_sinusoid(3, 1.0, W50).unwrap();
        let avg = average_bivector(&c, 0.0013, 0.0071, 64).unwrap();
        let at0 = omega1_direct(
            &c.eval(0.0, 1).unwrap(),
            &c.eval(0.0, 2).unwrap(),
            Regularity::default(),
        )
        .unwrap();
        assert!((&avg.mean - &at0).norm() < 1e-12 * W50);

        // h(t) has period π/ω and unit mean
        let avg = average_bivector(&unbalanced(), 0.0, PI / W50, 4096).unwrap();
        assert_relative_eq!(avg.mean_norm / W50, 1.0, max_relative = 1e-9);

        assert!(average_bivector(&c, 0.0, 1.0, 8).is_err());
        assert!(average_bivector(&c, 1.0, 1.0, 64).is_err());
    }

    #[test]
    fn harmonic_average_is_four_omega() {
        // independent check: Simpson's rule on the closed-form ratio
        let ratio = |x: f64| {
            let c = f64::cos;
            (16.0 * c(3.0 * x) + 672.0 * c(6.0 * x) + 84.0 * c(9.0 * x) - 691.0)
                / (-160.0 * c(3.0 * x) + 840.0 * c(6.0 * x) + 168.0 * c(9.0 * x) - 857.0)
        };
        let n = 20000;
        let h = 2.0 * PI / n as f64;
        let simpson: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * ratio(i as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0
            / (2.0 * PI);
        let coeff = 5.0 / 3f64.sqrt() * simpson;
        let avg = average_bivector(&harmonic(), 0.0, 2.0 * PI / W50, 4096).unwrap();
        let mean = avg.mean.comps();
        assert_relative_eq!(mean[0] / W50, coeff, max_relative = 1e-9);
        assert_relative_eq!(avg.mean_norm, 4.0 * W50, max_relative = 1e-9);
    }

    struct Cusp;

    impl CurveModel for Cusp {
        fn dim(&self) -> usize {
            2
        }
        fn max_order(&self) -> usize {
            usize::MAX
        }
        fn domain(&self) -> (f64, f64) {
            (-1.0, 1.0)
        }
        fn eval(&self, t: f64, order: usize) -> Result<VecN> {
            let mono = |p: i32| -> f64 {
                let mut c = 1.0;
                for j in 0..order as i32 {
                    c *= (p - j) as f64;
                }
                if order as i32 > p {
                    0.0
                } else {
                    c * t.powi(p - order as i32)
                }
            };
            VecN::new(vec![mono(3), mono(2)])
        }
    }

    #[test]
    fn series_flags_irregular_samples() {
        let times = [-0.5, -0.25, 0.0, 0.25, 0.5];
        let s =
            geometric_frequency_series(&Cusp, &times, FrameOptions::new(2, Orthogonalizer::Mgs))
                .unwrap();
        assert_eq!(s.len(), 5);
        for (i, sample) in s.iter().enumerate() {
            assert_eq!(sample.t, times[i]);
            assert_eq!(sample.outcome.is_err(), i == 2);
        }
        assert_eq!(s[2].flags(), vec!["irregular"]);
        assert!(
            geometric_frequency_series(&Cusp, &[], FrameOptions::new(2, Orthogonalizer::Mgs))
                .is_err()
        );
    }

    #[test]
    fn series_on_balanced() {
        let c = balanced_sinusoid(4, 10.0, W50).unwrap();
        let times: Vec<f64> = (0..100).map(|i| i as f64 * 2e-4).collect();
        let s = geometric_frequency_series(&c, &times, FrameOptions::for_model(&c)).unwrap();
        for sample in &s {
            let d = &sample.outcome.as_ref().unwrap().darboux;
            assert_relative_eq!(d.omega1_norm, W50, max_relative = 1e-9);
        }
    }

    /// Random orthogonal matrix from MGS on a random square matrix.
    fn rotation(n: usize, rng: &mut ChaCha8Rng) -> Vec<VecN> {
        loop {
            let raw: Vec<VecN> = (0..n)
                .map(|_| VecN::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap())
                .collect();
            let us = orthogonalize_mgs(&raw).unwrap();
            if us.len() == n {
                return us.iter().map(|u| u.scaled(1.0 / u.norm())).collect();
            }
        }
    }

    fn apply(rows: &[VecN], x: &VecN) -> VecN {
        VecN::new(rows.iter().map(|r| crate::ga::dot(r, x).unwrap()).collect()).unwrap()
    }

    /// Induced map `σ_i∧σ_j ↦ Rσ_i ∧ Rσ_j`.
    fn apply_bivec(rows: &[VecN], b: &BivecN) -> BivecN {
        let n = b.dim();
        let col = |j: usize| VecN::new(rows.iter().map(|r| r[j]).collect()).unwrap();
        let mut out = BivecN::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                out.axpy(b.get(i, j), &wedge_unchecked(&col(i), &col(j)));
            }
        }
        out
    }

    struct Rotated<M> {
        inner: M,
        rows: Vec<VecN>,
    }

    impl<M: CurveModel> CurveModel for Rotated<M> {
        fn dim(&self) -> usize {
            self.inner.dim()
        }
        fn max_order(&self) -> usize {
            self.inner.max_order()
        }
        fn domain(&self) -> (f64, f64) {
            self.inner.domain()
        }
        fn eval(&self, t: f64, order: usize) -> Result<VecN> {
            Ok(apply(&self.rows, &self.inner.eval(t, order)?))
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn rotation_invariance(seed in any::<u64>(), four in any::<bool>(), t in 0.0..0.02f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (inner, n): (Box<dyn CurveModel>, usize) = if four {
                (Box::new(SinusoidSum::two_circles(1.0, W50, 0.6, W50 * 2f64.sqrt()).unwrap()), 4)
            } else {
                (Box::new(unbalanced()), 3)
            };
            let rows = rotation(n, &mut rng);
            let opts = FrameOptions::new(n, Orthogonalizer::Mgs);
            let f = FrameState::at(&inner, t, opts).unwrap();
            let d = DarbouxResult::from_frame(&f).unwrap();
            let rotated = Rotated { inner, rows: rows.clone() };
            let g = FrameState::at(&rotated, t, opts).unwrap();
            let dg = DarbouxResult::from_frame(&g).unwrap();
            let scale = d.omega.norm();
            prop_assert!((&apply_bivec(&rows, &d.omega) - &dg.omega).norm() < 1e-9 * scale);
            prop_assert!((d.omega1_norm - dg.omega1_norm).abs() < 1e-9 * d.omega1_norm);
            prop_assert!((f.speed - g.speed).abs() < 1e-12 * f.speed);
            for (a, b) in f.k.iter().zip(&g.k) {
                prop_assert!((a - b).abs() < 1e-8 * scale);
            }
        }

        #[test]
        fn planar_curves_have_no_higher_blades(
            amps in prop::collection::vec(0.5..3.0f64, 3..6),
            t in 0.0..0.02f64,
        ) {
            let n = amps.len();
            let phases: Vec<f64> = (0..n).map(|m| 1.3 * m as f64).collect();
            let c = unbalanced_sinusoid(&amps, &phases, W50).unwrap();
            let f = FrameState::at(&c, t, FrameOptions::new(n.min(4), Orthogonalizer::Mgs)).unwrap();
            let d = DarbouxResult::from_frame(&f).unwrap();
            prop_assert!(d.planar_residual <= 1e-9 * d.omega.norm());
            let direct = omega1_direct(&c.eval(t, 1).unwrap(), &c.eval(t, 2).unwrap(), Regularity::default()).unwrap();
            prop_assert!((&direct - &d.omega1).norm() < 1e-10 * direct.norm());
        }
    }
}
