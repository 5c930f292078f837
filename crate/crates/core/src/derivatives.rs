//! Arc-length quantities from t-derivatives.
//!
//! Given `v', v'', v''', v''''` at one instant this module produces the speed
//! derivatives `s', s'', s''', s''''` and the arc-length derivatives
//! `v̇, v̈, v⃛, v⃜` through the chain rule. Orders above four have no closed
//! form here; [`arc_data_at`] obtains them by central differences of the
//! previous order, which costs accuracy.

use crate::curves::CurveModel;
use crate::error::{Error, Result};
use crate::ga::{dot_unchecked, VecN};

/// Relative factor for the regularity threshold: `s'` below
/// `REL_REGULARITY * max‖v'‖` counts as a stationary point.
pub const REL_REGULARITY: f64 = 1e-12;

/// Highest arc-length derivative with a closed-form expression.
pub const CLOSED_FORM_ORDER: usize = 4;

/// Minimum curve speed accepted before the frame is declared undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularity {
    threshold: f64,
}

impl Regularity {
    pub fn absolute(threshold: f64) -> Self {
        Self {
            threshold: threshold.max(0.0),
        }
    }

    /// `REL_REGULARITY * speed_scale`, where `speed_scale` is the largest
    /// `‖v'‖` over the analysis window.
    pub fn relative_to(speed_scale: f64) -> Self {
        Self::absolute(REL_REGULARITY * speed_scale.abs())
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn check(&self, t: f64, speed: f64) -> Result<()> {
        if !(speed.is_finite() && speed > self.threshold && speed > 0.0) {
            return Err(Error::Regularity {
                t,
                speed,
                threshold: self.threshold,
            });
        }
        Ok(())
    }
}

impl Default for Regularity {
    /// Rejects only exactly stationary points.
    fn default() -> Self {
        Self::absolute(0.0)
    }
}

/// `v^(k)(t)` for `k = 1..=m`; `derivs[0]` is `v'`.
#[derive(Debug, Clone, PartialEq)]
pub struct TDerivStack {
    pub t: f64,
    pub derivs: Vec<VecN>,
}

impl TDerivStack {
    pub fn new(t: f64, derivs: Vec<VecN>) -> Result<Self> {
        let Some(first) = derivs.first() else {
            return Err(Error::InvalidInput("derivative stack is empty".into()));
        };
        if let Some(bad) = derivs.iter().find(|d| d.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                expected: first.dim(),
                found: bad.dim(),
            });
        }
        Ok(Self { t, derivs })
    }

    /// Evaluates `v', .., v^(m)` from a model.
    pub fn from_model(model: &dyn CurveModel, t: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput(
                "derivative stack needs at least v'".into(),
            ));
        }
        let mut all = model.derivatives(t, m)?;
        all.remove(0);
        Self::new(t, all)
    }

    pub fn order(&self) -> usize {
        self.derivs.len()
    }

    pub fn dim(&self) -> usize {
        self.derivs[0].dim()
    }

    /// `v^(k)`, one-based.
    #[inline]
    pub fn d(&self, k: usize) -> &VecN {
        &self.derivs[k - 1]
    }
}

/// Speed derivatives `s', s'', s''', s''''` (as many as the stack allows,
/// at most four).
pub fn arc_speed_derivs(td: &TDerivStack, regularity: Regularity) -> Result<Vec<f64>> {
    let m = td.order().min(CLOSED_FORM_ORDER);
    let d1 = td.d(1);
    let s1 = dot_unchecked(d1, d1).sqrt();
    regularity.check(td.t, s1)?;
    let mut sd = vec![s1];
    if m >= 2 {
        let d2 = td.d(2);
        let s2 = dot_unchecked(d1, d2) / s1;
        sd.push(s2);
        if m >= 3 {
            let d3 = td.d(3);
            let s3 = (dot_unchecked(d2, d2) + dot_unchecked(d1, d3) - s2 * s2) / s1;
            sd.push(s3);
            if m >= 4 {
                let d4 = td.d(4);
                let s4 = (3.0 * dot_unchecked(d2, d3) + dot_unchecked(d1, d4) - 3.0 * s2 * s3) / s1;
                sd.push(s4);
            }
        }
    }
    Ok(sd)
}

/// Arc-length derivatives `v̇, v̈, v⃛, v⃜` from the t-derivative stack and
/// the matching speed derivatives.
pub fn s_derivs(td: &TDerivStack, sd: &[f64]) -> Result<Vec<VecN>> {
    let m = td.order().min(sd.len()).min(CLOSED_FORM_ORDER);
    if m == 0 {
        return Err(Error::InvalidInput("no speed derivatives supplied".into()));
    }
    let s1 = sd[0];
    if !(s1.is_finite() && s1 > 0.0) {
        return Err(Error::Regularity {
            t: td.t,
            speed: s1,
            threshold: 0.0,
        });
    }
    let mut out = Vec::with_capacity(m);
    out.push(td.d(1).scaled(1.0 / s1));
    if m >= 2 {
        let s2 = sd[1];
        let mut v = td.d(2).scaled(s1);
        v.axpy(-s2, td.d(1));
        out.push(v.scaled(s1.powi(-3)));
        if m >= 3 {
            let s3 = sd[2];
            let mut v = td.d(3).scaled(s1 * s1);
            v.axpy(-3.0 * s1 * s2, td.d(2));
            v.axpy(-(s1 * s3 - 3.0 * s2 * s2), td.d(1));
            out.push(v.scaled(s1.powi(-5)));
            if m >= 4 {
                let s4 = sd[3];
                let mut v = td.d(4).scaled(s1.powi(3));
                v.axpy(-6.0 * s1 * s1 * s2, td.d(3));
                v.axpy(-(4.0 * s1 * s1 * s3 - 15.0 * s1 * s2 * s2), td.d(2));
                v.axpy(
                    10.0 * s1 * s2 * s3 - 15.0 * s2.powi(3) - s1 * s1 * s4,
                    td.d(1),
                );
                out.push(v.scaled(s1.powi(-7)));
            }
        }
    }
    Ok(out)
}

/// `‖v̈‖ = (1/s'²) √(‖v''‖² - 2 (s''/s') (v'·v'') + s''²)`.
pub fn second_s_derivative_norm(td: &TDerivStack, sd: &[f64]) -> f64 {
    let (s1, s2) = (sd[0], sd[1]);
    let (d1, d2) = (td.d(1), td.d(2));
    let radicand = dot_unchecked(d2, d2) - 2.0 * (s2 / s1) * dot_unchecked(d1, d2) + s2 * s2;
    radicand.max(0.0).sqrt() / (s1 * s1)
}

/// Arc-length data at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcData {
    pub t: f64,
    /// `[s', s'', s''', s'''']`, truncated to the available orders.
    pub sd: Vec<f64>,
    /// `[v̇, v̈, ..]`, one entry per requested order.
    pub sdot: Vec<VecN>,
}

impl ArcData {
    pub fn from_stack(td: &TDerivStack, regularity: Regularity) -> Result<Self> {
        let sd = arc_speed_derivs(td, regularity)?;
        let sdot = s_derivs(td, &sd)?;
        Ok(Self { t: td.t, sd, sdot })
    }

    pub fn speed(&self) -> f64 {
        self.sd[0]
    }
}

/// Arc-length derivatives of orders `1..=order` at `t`. Orders up to
/// `min(4, model.max_order())` use the closed forms; higher ones are central
/// differences of the previous order.
pub fn arc_data_at(
    model: &dyn CurveModel,
    t: f64,
    order: usize,
    regularity: Regularity,
) -> Result<ArcData> {
    if order == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    let closed = order.min(CLOSED_FORM_ORDER).min(model.max_order());
    if closed == 0 {
        return Err(Error::OrderTooHigh {
            requested: 1,
            max: 0,
        });
    }
    let td = TDerivStack::from_model(model, t, closed.max(2).min(model.max_order()))?;
    let mut data = ArcData::from_stack(&td, regularity)?;
    data.sdot.truncate(closed);
    if order > closed {
        let speed = data.speed();
        let h = difference_step(&td, model);
        for k in closed + 1..=order {
            let fwd = fd_s_derivative(model, t + h, k - 1, closed, h, regularity)?;
            let bwd = fd_s_derivative(model, t - h, k - 1, closed, h, regularity)?;
            data.sdot.push((fwd - bwd).scaled(0.5 / (h * speed)));
        }
    }
    Ok(data)
}

/// Step for differencing s-derivatives: a small fraction of the time the
/// tangent needs to turn one radian.
fn difference_step(td: &TDerivStack, model: &dyn CurveModel) -> f64 {
    let speed = td.d(1).norm();
    let accel = if td.order() >= 2 { td.d(2).norm() } else { 0.0 };
    let (a, b) = model.domain();
    let fallback = 1e-6 * (b - a).abs().max(f64::MIN_POSITIVE);
    if accel > 0.0 && speed > 0.0 {
        (1e-4 * speed / accel).min(1e3 * fallback)
    } else {
        fallback
    }
}

fn fd_s_derivative(
    model: &dyn CurveModel,
    t: f64,
    k: usize,
    closed: usize,
    h: f64,
    regularity: Regularity,
) -> Result<VecN> {
    if k <= closed {
        let td = TDerivStack::from_model(model, t, closed.max(2).min(model.max_order()))?;
        let data = ArcData::from_stack(&td, regularity)?;
        return Ok(data.sdot[k - 1].clone());
    }
    let speed = model.eval(t, 1)?.norm();
    regularity.check(t, speed)?;
    let fwd = fd_s_derivative(model, t + h, k - 1, closed, h, regularity)?;
    let bwd = fd_s_derivative(model, t - h, k - 1, closed, h, regularity)?;
    Ok((fwd - bwd).scaled(0.5 / (h * speed)))
}

/// Residuals of the per-component chain-rule formulas against [`s_derivs`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRuleReport {
    pub t: f64,
    /// Max absolute deviation for `v̇, v̈, v⃛`.
    pub deviation: [f64; 3],
}

impl ChainRuleReport {
    pub fn max(&self) -> f64 {
        self.deviation.iter().copied().fold(0.0, f64::max)
    }
}

/// Re-derives `v̇_i, v̈_i, v⃛_i` one component at a time and compares with the
/// vector-level output of [`s_derivs`].
pub fn component_chain_rule_check(model: &dyn CurveModel, t: f64) -> Result<ChainRuleReport> {
    if model.max_order() < 3 {
        return Err(Error::OrderTooHigh {
            requested: 3,
            max: model.max_order(),
        });
    }
    let td = TDerivStack::from_model(model, t, 3)?;
    let sd = arc_speed_derivs(&td, Regularity::default())?;
    let vector = s_derivs(&td, &sd)?;
    let (s1, s2, s3) = (sd[0], sd[1], sd[2]);
    let mut deviation = [0.0f64; 3];
    for i in 0..td.dim() {
        let (d1, d2, d3) = (td.d(1)[i], td.d(2)[i], td.d(3)[i]);
        let first = d1 / s1;
        let second = (s1 * d2 - s2 * d1) / s1.powi(3);
        let third =
            ((3.0 * s2 * s2 - s1 * s3) * d1 - 3.0 * s1 * s2 * d2 + s1 * s1 * d3) / s1.powi(5);
        for (k, c) in [first, second, third].into_iter().enumerate() {
            deviation[k] = deviation[k].max((c - vector[k][i]).abs());
        }
    }
    Ok(ChainRuleReport { t, deviation })
}
