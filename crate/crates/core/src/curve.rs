//! Curve parameters and the three blended invariants.
//!
//! A 2D market is anchored at an initial state `(x0, y0)` with linear weights
//! `(a, b)`. The constant-sum component is `A0 = (ax + by) / (a x0 + b y0)` and
//! the constant-product component is `A1 = x^α y^β / (x0^α y0^β)`, with the
//! exponents calibrated so both components quote the same rate `a / b` at the
//! anchor. Every blended invariant is normalized so the curve is `A(x, y) = 1`.
//!
//! All three families are evaluated in an orientation that increases away from
//! the origin, so gradients point outward and the spot rate is the plain ratio
//! of partial derivatives. For the homotopy family this means the value is the
//! weighted harmonic mean `1 / ((1 - t) / A0 + t A1^(-1/deg))`; its level set
//! `A = 1` is the homotopy curve itself.

use serde::Serialize;

use crate::error::{positive, unit_interval, Error, Result};
use crate::nonuniform::TSchedule;

/// Exponents `(α, β)` for weights `(a, b)` anchored at `(x0, y0)`, normalized to `α + β = 1`.
///
/// `(a, b)` is then parallel to `(α / x0, β / y0)`, so the constant-sum and
/// constant-product components share their exchange rate at the anchor.
pub fn calibrate_weights(a: f64, b: f64, x0: f64, y0: f64) -> Result<(f64, f64)> {
    let a = positive("a", a)?;
    let b = positive("b", b)?;
    let x0 = positive("x0", x0)?;
    let y0 = positive("y0", y0)?;
    let c = a * x0 + b * y0;
    Ok((a * x0 / c, b * y0 / c))
}

/// The constants of a 2D blended market.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveParams {
    a: f64,
    b: f64,
    x0: f64,
    y0: f64,
    alpha: f64,
    beta: f64,
    c: f64,
    s0: f64,
}

impl CurveParams {
    /// Calibrated curve with `α + β = 1`.
    pub fn new(a: f64, b: f64, x0: f64, y0: f64) -> Result<Self> {
        Self::with_degree(a, b, x0, y0, 1.0)
    }

    /// Calibrated curve whose product component has total degree `α + β = degree`.
    ///
    /// `degree = 1` is the normalized convention used everywhere by default. Other
    /// degrees keep the exponents parallel to the calibrated ones; `degree = 2` on
    /// the unit anchor gives the textbook `A1 = xy`.
    pub fn with_degree(a: f64, b: f64, x0: f64, y0: f64, degree: f64) -> Result<Self> {
        let (alpha, beta) = calibrate_weights(a, b, x0, y0)?;
        let degree = positive("degree", degree)?;
        let c = a * x0 + b * y0;
        Ok(CurveParams {
            a,
            b,
            x0,
            y0,
            alpha: alpha * degree,
            beta: beta * degree,
            c,
            s0: a * x0 / c,
        })
    }

    /// `a = b = 1` anchored at `(1, 1)`: the curves `x + y = 2` and `xy = 1`.
    pub fn unit() -> Self {
        Self::new(1.0, 1.0, 1.0, 1.0).expect("unit params are valid")
    }

    /// The simulation pool: anchor `(3000, 1000)` with initial rate `a / b = 0.5`.
    pub fn reference_pool() -> Self {
        Self::new(1.0, 2.0, 3000.0, 1000.0).expect("reference params are valid")
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn y0(&self) -> f64 {
        self.y0
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    /// `a x0 + b y0`.
    pub fn c(&self) -> f64 {
        self.c
    }
    /// Ray parameter of the anchor, `a x0 / C`.
    pub fn s0(&self) -> f64 {
        self.s0
    }
    /// Total degree of the product component, `α + β`.
    pub fn degree(&self) -> f64 {
        self.alpha + self.beta
    }

    pub fn initial_state(&self) -> MarketState {
        MarketState { x: self.x0, y: self.y0 }
    }

    /// Price of currency 1 in units of currency 2 at the anchor.
    pub fn initial_rate(&self) -> f64 {
        self.a / self.b
    }

    /// `α ln(x/x0) + β ln(y/y0)`, i.e. `ln A1`.
    pub(crate) fn log_product(&self, x: f64, y: f64) -> f64 {
        self.alpha * (x / self.x0).ln() + self.beta * (y / self.y0).ln()
    }
}

/// Reserves `(x, y)` of the two currencies; both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketState {
    x: f64,
    y: f64,
}

impl MarketState {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        Ok(MarketState { x: positive("x", x)?, y: positive("y", y)? })
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
}

/// Which blending rule combines the two components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    Arithmetic,
    Geometric,
    Homotopy,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Arithmetic, Family::Geometric, Family::Homotopy];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Arithmetic => "arith",
            Family::Geometric => "geo",
            Family::Homotopy => "hom",
        }
    }
}

/// A blending family together with its `t` rule.
///
/// Arithmetic and geometric blends only take a constant `t`; the homotopy blend
/// accepts any schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixSpec {
    family: Family,
    schedule: TSchedule,
}

impl MixSpec {
    pub fn new(family: Family, schedule: TSchedule) -> Result<Self> {
        match (family, schedule) {
            (_, TSchedule::Uniform { t }) => {
                unit_interval("t", t)?;
            }
            (Family::Homotopy, _) => {}
            (_, _) => return Err(Error::UnsupportedSchedule("only homotopy blends take a t(s) schedule")),
        }
        Ok(MixSpec { family, schedule })
    }

    pub fn uniform(family: Family, t: f64) -> Result<Self> {
        Self::new(family, TSchedule::uniform(t)?)
    }

    pub fn arithmetic(t: f64) -> Result<Self> {
        Self::uniform(Family::Arithmetic, t)
    }

    pub fn geometric(t: f64) -> Result<Self> {
        Self::uniform(Family::Geometric, t)
    }

    pub fn homotopy(t: f64) -> Result<Self> {
        Self::uniform(Family::Homotopy, t)
    }

    pub fn scheduled(schedule: TSchedule) -> Self {
        MixSpec { family: Family::Homotopy, schedule }
    }

    /// Pure constant-sum curve.
    pub fn csmm() -> Self {
        MixSpec { family: Family::Arithmetic, schedule: TSchedule::Uniform { t: 0.0 } }
    }

    /// Pure constant-product curve.
    pub fn cpmm() -> Self {
        MixSpec { family: Family::Arithmetic, schedule: TSchedule::Uniform { t: 1.0 } }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn schedule(&self) -> TSchedule {
        self.schedule
    }

    /// The constant `t`, if the schedule is uniform.
    pub fn uniform_t(&self) -> Option<f64> {
        match self.schedule {
            TSchedule::Uniform { t } => Some(t),
            _ => None,
        }
    }
}

/// Normalized component values `(A0, A1)`; both equal 1 at the anchor.
pub fn eval_component(params: &CurveParams, state: &MarketState) -> (f64, f64) {
    let a0 = (params.a * state.x + params.b * state.y) / params.c;
    let a1 = params.log_product(state.x, state.y).exp();
    (a0, a1)
}

/// Ray parameter `s = ax / (ax + by)` of a state.
pub(crate) fn ray_param(params: &CurveParams, x: f64, y: f64) -> f64 {
    let ax = params.a * x;
    ax / (ax + params.b * y)
}

/// Blend weight at a state, with its gradient when `with_grad` is set.
fn blend_weight(
    params: &CurveParams,
    schedule: &TSchedule,
    state: &MarketState,
    with_grad: bool,
) -> Result<(f64, Option<(f64, f64)>)> {
    let (x, y) = (state.x, state.y);
    match *schedule {
        TSchedule::Uniform { t } => Ok((t, with_grad.then_some((0.0, 0.0)))),
        TSchedule::StableswapDynamic { amp, d } => {
            let q = 16.0 * amp * x * y;
            let t = d * d / (q + d * d);
            let grad = with_grad.then(|| {
                let k = -16.0 * amp * d * d / ((q + d * d) * (q + d * d));
                (k * y, k * x)
            });
            Ok((t, grad))
        }
        _ => {
            let s = ray_param(params, x, y);
            let t = schedule.value(params, s)?;
            if !with_grad {
                return Ok((t, None));
            }
            let dt_ds = match schedule.slope(params, s) {
                Ok(v) => v,
                // Only the power law at s0 lands here. On the anchor ray the factor
                // multiplying dt (A1^(-1/deg) - 1/A0) vanishes to second order, so
                // the schedule contributes nothing to the gradient.
                Err(Error::NonDifferentiable { .. }) => 0.0,
                Err(e) => return Err(e),
            };
            let u = params.a * x + params.b * y;
            let ds_dx = params.a * params.b * y / (u * u);
            let ds_dy = -params.a * params.b * x / (u * u);
            Ok((t, Some((dt_ds * ds_dx, dt_ds * ds_dy))))
        }
    }
}

/// Value of the blended invariant at `state`; the state is on the curve iff it equals 1.
pub fn eval_mixed(params: &CurveParams, mix: &MixSpec, state: &MarketState) -> Result<f64> {
    let (t, _) = blend_weight(params, &mix.schedule, state, false)?;
    let (a0, _) = eval_component(params, state);
    let log_a1 = params.log_product(state.x, state.y);
    Ok(match mix.family {
        Family::Arithmetic => a0 * (1.0 - t) + log_a1.exp() * t,
        Family::Geometric => ((1.0 - t) * a0.ln() + t * log_a1).exp(),
        Family::Homotopy => {
            let inv_a1 = (-log_a1 / params.degree()).exp();
            1.0 / ((1.0 - t) / a0 + t * inv_a1)
        }
    })
}

/// Analytic gradient `(∂A/∂x, ∂A/∂y)` of [`eval_mixed`].
pub fn grad_mixed(params: &CurveParams, mix: &MixSpec, state: &MarketState) -> Result<(f64, f64)> {
    let (x, y) = (state.x, state.y);
    let (t, dt) = blend_weight(params, &mix.schedule, state, true)?;
    let (dt_dx, dt_dy) = dt.unwrap_or((0.0, 0.0));
    let (a0, _) = eval_component(params, state);
    let log_a1 = params.log_product(x, y);
    let (a, b, c) = (params.a, params.b, params.c);
    let (ex, ey) = (params.alpha / x, params.beta / y);
    Ok(match mix.family {
        Family::Arithmetic => {
            let a1 = log_a1.exp();
            ((1.0 - t) * a / c + t * a1 * ex, (1.0 - t) * b / c + t * a1 * ey)
        }
        Family::Geometric => {
            let g = ((1.0 - t) * a0.ln() + t * log_a1).exp();
            let u = a * x + b * y;
            (g * ((1.0 - t) * a / u + t * ex), g * ((1.0 - t) * b / u + t * ey))
        }
        Family::Homotopy => {
            let deg = params.degree();
            let inv_a1 = (-log_a1 / deg).exp();
            let inv_a0 = 1.0 / a0;
            let h = (1.0 - t) * inv_a0 + t * inv_a1;
            let u = a * x + b * y;
            // dH/dx for H = (1-t)/A0 + t A1^(-1/deg)
            let gap = inv_a1 - inv_a0;
            let hx = -(1.0 - t) * c * a / (u * u) - t * inv_a1 * ex / deg + gap * dt_dx;
            let hy = -(1.0 - t) * c * b / (u * u) - t * inv_a1 * ey / deg + gap * dt_dy;
            (-hx / (h * h), -hy / (h * h))
        }
    })
}

/// Internal exchange rate: price of currency 1 in units of currency 2.
pub fn spot_rate(params: &CurveParams, mix: &MixSpec, state: &MarketState) -> Result<f64> {
    let (gx, gy) = grad_mixed(params, mix, state)?;
    if gy == 0.0 || !gy.is_finite() || !gx.is_finite() {
        return Err(Error::DegenerateGradient { dy: gy });
    }
    Ok(gx / gy)
}

/// Re-anchors the curve at `state` with initial rate `new_rate` (`b` fixed to 1).
///
/// The product degree of `params` is preserved.
pub fn rebase_curve(params: &CurveParams, state: &MarketState, new_rate: f64) -> Result<CurveParams> {
    let rate = positive("new_rate", new_rate)?;
    CurveParams::with_degree(rate, 1.0, state.x, state.y, params.degree())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(x: f64, y: f64) -> MarketState {
        MarketState::new(x, y).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn calibrate_examples() {
        assert_eq!(calibrate_weights(1.0, 1.0, 1.0, 1.0).unwrap(), (0.5, 0.5));
        let (al, be) = calibrate_weights(1.0, 2.0, 3000.0, 1000.0).unwrap();
        assert!(close(al, 0.6, 1e-15) && close(be, 0.4, 1e-15));
        // (a, b) ∥ (α/x0, β/y0)
        assert!(close(1.0 / 2.0, (al / 3000.0) / (be / 1000.0), 1e-14));
        assert_eq!(calibrate_weights(2.0, 2.0, 5.0, 5.0).unwrap(), (0.5, 0.5));
    }

    #[test]
    fn calibrate_rejects_non_positive() {
        assert!(matches!(calibrate_weights(0.0, 1.0, 1.0, 1.0), Err(Error::InvalidParameter { name: "a", .. })));
        assert!(calibrate_weights(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(calibrate_weights(1.0, 1.0, f64::NAN, 1.0).is_err());
        assert!(MarketState::new(0.0, 1.0).is_err());
    }

    #[test]
    fn cached_constants() {
        let p = CurveParams::reference_pool();
        assert_eq!(p.c(), 5000.0);
        assert!(close(p.s0(), 0.6, 1e-15));
        assert!(close(p.degree(), 1.0, 1e-15));
        let q = CurveParams::with_degree(1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert_eq!((q.alpha(), q.beta()), (1.0, 1.0));
    }

    #[test]
    fn component_examples() {
        let p = CurveParams::unit();
        assert_eq!(eval_component(&p, &st(1.0, 1.0)), (1.0, 1.0));
        let (a0, a1) = eval_component(&p, &st(4.0, 1.0));
        assert!(close(a0, 2.5, 1e-15) && close(a1, 2.0, 1e-15));
        let (a0, a1) = eval_component(&p, &st(2.0, 2.0));
        assert!(close(a0, 2.0, 1e-15) && close(a1, 2.0, 1e-15));
    }

    #[test]
    fn mixed_examples() {
        let p = CurveParams::unit();
        for fam in Family::ALL {
            for t in [0.0, 0.3, 1.0] {
                let m = MixSpec::uniform(fam, t).unwrap();
                assert!(close(eval_mixed(&p, &m, &st(1.0, 1.0)).unwrap(), 1.0, 1e-15));
            }
        }
        // A0 = 2, A1 = 2 on the normalized curve; with A1 = xy (degree 2) A1 = 4.
        let g = eval_mixed(&p, &MixSpec::geometric(0.5).unwrap(), &st(2.0, 2.0)).unwrap();
        assert!(close(g, 2.0, 1e-14));
        let xy = CurveParams::with_degree(1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        let g = eval_mixed(&xy, &MixSpec::geometric(0.5).unwrap(), &st(2.0, 2.0)).unwrap();
        assert!(close(g, 2.0 * 2f64.sqrt(), 1e-14));
        let lam = 1.0 + 2.0 / 3f64.sqrt();
        let h = eval_mixed(&p, &MixSpec::homotopy(0.5).unwrap(), &st(0.25 * lam, 0.75 * lam)).unwrap();
        assert!(close(h, 1.0, 1e-14));
    }

    #[test]
    fn gradient_examples() {
        let p = CurveParams::unit();
        for fam in Family::ALL {
            let g = grad_mixed(&p, &MixSpec::uniform(fam, 0.0).unwrap(), &st(1.0, 1.0)).unwrap();
            assert!(close(g.0, 0.5, 1e-15) && close(g.1, 0.5, 1e-15), "{fam:?} {g:?}");
        }
        let g = grad_mixed(&p, &MixSpec::csmm(), &st(3.0, 0.2)).unwrap();
        assert_eq!(g, (0.5, 0.5));
        let g = grad_mixed(&p, &MixSpec::cpmm(), &st(1.0, 1.0)).unwrap();
        assert!(close(g.0, 0.5, 1e-15) && close(g.1, 0.5, 1e-15));
    }

    #[test]
    fn spot_rate_examples() {
        let p = CurveParams::unit();
        let pool = CurveParams::reference_pool();
        for fam in Family::ALL {
            for t in [0.0, 0.4, 1.0] {
                let m = MixSpec::uniform(fam, t).unwrap();
                assert!(close(spot_rate(&p, &m, &st(1.0, 1.0)).unwrap(), 1.0, 1e-14));
                assert!(close(spot_rate(&pool, &m, &pool.initial_state()).unwrap(), 0.5, 1e-12));
            }
        }
        assert!(close(spot_rate(&p, &MixSpec::cpmm(), &st(0.5, 2.0)).unwrap(), 4.0, 1e-14));
    }

    #[test]
    fn rebase_examples() {
        let p = CurveParams::unit();
        let r = rebase_curve(&p, &st(0.5, 2.0), 4.0).unwrap();
        assert_eq!((r.a(), r.b(), r.x0(), r.y0()), (4.0, 1.0, 0.5, 2.0));
        assert!(close(r.alpha(), 0.5, 1e-15) && close(r.beta(), 0.5, 1e-15));
        assert_eq!(rebase_curve(&p, &st(1.0, 1.0), 1.0).unwrap(), p);
        let pool = CurveParams::reference_pool();
        let r = rebase_curve(&pool, &st(3000.0, 1000.0), 0.5).unwrap();
        assert_eq!((r.a(), r.b()), (0.5, 1.0));
        assert!(close(r.alpha(), 0.6, 1e-15) && close(r.beta(), 0.4, 1e-15));
        assert!(rebase_curve(&p, &st(1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn mixspec_rejects_bad_inputs() {
        assert!(MixSpec::homotopy(1.5).is_err());
        assert!(MixSpec::geometric(-0.1).is_err());
        let k2 = TSchedule::power_law(2.0).unwrap();
        assert!(matches!(MixSpec::new(Family::Arithmetic, k2), Err(Error::UnsupportedSchedule(_))));
        assert!(MixSpec::new(Family::Homotopy, k2).is_ok());
    }
}
