//! The `(s, t)` parametrization of the region between the constant-sum and
//! constant-product curves.
//!
//! Every ray from the origin is indexed by `s ∈ (0, 1)` through its base point
//! `(s / a, (1 - s) / b)`. A curve is then described by the scalar `λ(s)` that
//! moves the base point onto it: `λ0 = C` for the constant-sum line, `λ1 = P(s)`
//! for the constant-product curve, closed forms for the homotopy and geometric
//! blends, and a bracketed root for the arithmetic blend.

use serde::Serialize;

use crate::curve::{ray_param, CurveParams, Family, MarketState, MixSpec};
use crate::error::{positive, unit_interval, Error, Result};
use crate::nonuniform::TSchedule;
use crate::roots;

/// Smallest ray parameter accepted by the parametrization.
pub const S_MIN: f64 = 1e-12;
/// Largest ray parameter accepted by the parametrization.
pub const S_MAX: f64 = 1.0 - 1e-12;

const ARITH_REL_TOL: f64 = 1e-12;
const ARITH_MAX_ITER: usize = 200;
const S_BISECT_TOL: f64 = 1e-14;

/// A ray parameter in the open unit interval.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct SParam(f64);

impl SParam {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s > 0.0 && s < 1.0 {
            Ok(SParam(s))
        } else {
            Err(Error::InvalidParameter { name: "s", value: s })
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    fn checked(self) -> Result<f64> {
        if (S_MIN..=S_MAX).contains(&self.0) {
            Ok(self.0)
        } else {
            Err(Error::InvalidParameter { name: "s", value: self.0 })
        }
    }
}

/// Scalings that move a direction onto the constant-sum (`lambda0`) and
/// constant-product (`lambda1`) curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPair {
    pub lambda0: f64,
    pub lambda1: f64,
}

/// Finite axis intercepts of a curve. `None` means the curve only approaches
/// that axis asymptotically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Intercepts {
    /// `x` where the curve meets `y = 0`.
    pub x: Option<f64>,
    /// `y` where the curve meets `x = 0`.
    pub y: Option<f64>,
}

/// `s = ax / (ax + by)`.
pub fn s_of_state(params: &CurveParams, state: &MarketState) -> SParam {
    SParam(ray_param(params, state.x(), state.y()))
}

pub fn scaling_factors(params: &CurveParams, v: &MarketState) -> ScalingPair {
    let lambda0 = params.c() / (params.a() * v.x() + params.b() * v.y());
    let lambda1 = (-params.log_product(v.x(), v.y()) / params.degree()).exp();
    ScalingPair { lambda0, lambda1 }
}

/// `P(s)`, the constant-product scaling of the base point at `s`.
pub fn cpmm_scale(params: &CurveParams, s: f64) -> f64 {
    let log = params.alpha() * (params.a() * params.x0() / s).ln()
        + params.beta() * (params.b() * params.y0() / (1.0 - s)).ln();
    (log / params.degree()).exp()
}

/// Scaling that places the base point at `s` on the `family` curve with blend `t`.
pub fn lambda_mix(params: &CurveParams, family: Family, s: SParam, t: f64) -> Result<f64> {
    let s = s.checked()?;
    let t = unit_interval("t", t)?;
    let c = params.c();
    let p = cpmm_scale(params, s);
    Ok(match family {
        Family::Homotopy => (1.0 - t) * c + t * p,
        Family::Geometric => {
            let d = params.degree();
            let e = (1.0 - t) + d * t;
            (((1.0 - t) * c.ln() + d * t * p.ln()) / e).exp()
        }
        Family::Arithmetic => arithmetic_lambda(params, p, t)?,
    })
}

/// Unique positive root of `λ (1-t) / C + t (λ / P)^deg = 1`.
fn arithmetic_lambda(params: &CurveParams, p: f64, t: f64) -> Result<f64> {
    let c = params.c();
    if t == 0.0 {
        return Ok(c);
    }
    if t == 1.0 {
        return Ok(p);
    }
    let d = params.degree();
    // Either term alone reaching 1 bounds the root from above.
    let upper = (c / (1.0 - t)).min(p / t.powf(1.0 / d));
    let f = |lam: f64| {
        let r = (lam / p).powf(d);
        let value = lam * (1.0 - t) / c + t * r - 1.0;
        let slope = (1.0 - t) / c + t * d * r / lam.max(f64::MIN_POSITIVE);
        (value, slope)
    };
    roots::newton_bisect(f, 0.0, upper, ARITH_REL_TOL, ARITH_MAX_ITER)
        .map_err(|_| Error::RootFinding("arithmetic scaling did not bracket"))
}

/// Scaling `λ(s)` for a mix, resolving a `t(s)` schedule first.
pub fn lambda_at(params: &CurveParams, mix: &MixSpec, s: SParam) -> Result<f64> {
    let t = blend_at(params, mix, s)?;
    lambda_mix(params, mix.family(), s, t)
}

fn blend_at(params: &CurveParams, mix: &MixSpec, s: SParam) -> Result<f64> {
    match mix.schedule() {
        TSchedule::Uniform { t } => Ok(t),
        TSchedule::StableswapDynamic { .. } => Err(Error::UnsupportedSchedule(
            "the dynamic Stableswap blend depends on (x, y), not on s alone",
        )),
        sched => sched.value(params, s.get()),
    }
}

/// The on-curve state on ray `s`.
pub fn point_at(params: &CurveParams, mix: &MixSpec, s: SParam) -> Result<MarketState> {
    let lam = lambda_at(params, mix, s)?;
    let s = s.get();
    MarketState::new(lam * s / params.a(), lam * (1.0 - s) / params.b())
}

/// Finite axis intercepts, if any.
pub fn intercepts(params: &CurveParams, mix: &MixSpec) -> Result<Intercepts> {
    let (cx, cy) = (params.c() / params.a(), params.c() / params.b());
    Ok(match (mix.family(), mix.schedule()) {
        (Family::Arithmetic, TSchedule::Uniform { t }) if t < 1.0 => Intercepts {
            x: Some(cx / (1.0 - t)),
            y: Some(cy / (1.0 - t)),
        },
        (_, TSchedule::Uniform { t }) if t == 0.0 => Intercepts { x: Some(cx), y: Some(cy) },
        (_, TSchedule::Uniform { .. }) | (_, TSchedule::StableswapDynamic { .. }) => {
            Intercepts { x: None, y: None }
        }
        // A schedule that reaches t = 0 at an end of the segment meets that axis
        // at the constant-sum intercept.
        (_, sched) => Intercepts {
            x: (sched.value(params, 1.0)? == 0.0).then_some(cx),
            y: (sched.value(params, 0.0)? == 0.0).then_some(cy),
        },
    })
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

/// The on-curve state whose first reserve equals `x_target`.
pub fn state_for_x(params: &CurveParams, mix: &MixSpec, x_target: f64) -> Result<MarketState> {
    solve_coordinate(params, mix, Axis::X, x_target)
}

/// The on-curve state whose second reserve equals `y_target`.
pub fn state_for_y(params: &CurveParams, mix: &MixSpec, y_target: f64) -> Result<MarketState> {
    solve_coordinate(params, mix, Axis::Y, y_target)
}

fn solve_coordinate(params: &CurveParams, mix: &MixSpec, axis: Axis, target: f64) -> Result<MarketState> {
    let target = positive("target", target)?;
    let coord = |s: f64| -> Result<f64> {
        let p = point_at(params, mix, SParam(s))?;
        Ok(match axis {
            Axis::X => p.x(),
            Axis::Y => p.y(),
        })
    };
    let at_min = coord(S_MIN)?;
    let at_max = coord(S_MAX)?;
    let (lo_v, hi_v) = match axis {
        Axis::X => (at_min, at_max),
        Axis::Y => (at_max, at_min),
    };
    if !(lo_v..=hi_v).contains(&target) {
        let ints = intercepts(params, mix)?;
        let reach = match axis {
            Axis::X => ints.x,
            Axis::Y => ints.y,
        };
        return Err(Error::OutOfRange { target, min: lo_v, max: reach.unwrap_or(hi_v) });
    }
    let mut failure = None;
    let mut g = |s: f64| match coord(s) {
        Ok(v) => v - target,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let (s_lo, s_hi) = roots::bisect_bracket(&mut g, S_MIN, S_MAX, S_BISECT_TOL)?;
    // Secant polish across the final bracket.
    let s = if s_hi > s_lo {
        let (g_lo, g_hi) = (g(s_lo), g(s_hi));
        if g_hi != g_lo {
            (s_lo - g_lo * (s_hi - s_lo) / (g_hi - g_lo)).clamp(s_lo, s_hi)
        } else {
            0.5 * (s_lo + s_hi)
        }
    } else {
        s_lo
    };
    if let Some(e) = failure {
        return Err(e);
    }
    point_at(params, mix, SParam(s))
}
