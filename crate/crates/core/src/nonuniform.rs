//! Non-uniform homotopy: `t` as a function of the ray parameter `s`.
//!
//! With `λ(s) = (P(s) - C) t(s) + C` the curve is traced by
//! `x(s) = s λ / a`, `y(s) = (1 - s) λ / b`, and it is convex exactly when
//! `λ λ'' >= 2 λ'^2` on `(0, 1)`. [`check_convexity`] certifies that margin on a
//! grid.

use serde::{Deserialize, Serialize};

use crate::curve::{CurveParams, MarketState};
use crate::error::{positive, unit_interval, Error, Result};
use crate::parametrize::{cpmm_scale, SParam};
use crate::roots;

/// Default sample count for [`check_convexity`].
pub const CONVEXITY_GRID: usize = 10_001;
/// Grid inset from both ends of `(0, 1)`.
pub const CONVEXITY_INSET: f64 = 1e-4;
/// `passed` iff the minimum margin is at least `-CONVEXITY_TOL`.
pub const CONVEXITY_TOL: f64 = 1e-9;

/// Rule giving the blend weight `t` along a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TSchedule {
    /// Constant `t`.
    Uniform { t: f64 },
    /// `t(s) = |(s - s0) / M|^k` with `M = max(s0, 1 - s0)`.
    PowerLaw { k: f64 },
    /// Parabola with `t(0) = bias`, `t(1) = 1 - bias`, `t(s0) = center`.
    Parabolic { bias: f64, center: f64 },
    /// Two-currency Stableswap with dynamic leverage: `t = D² / (16 A x y + D²)`.
    StableswapDynamic { amp: f64, d: f64 },
}

/// `t` and its first two derivatives in `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleJet {
    pub t: f64,
    pub dt: f64,
    pub d2t: f64,
}

impl TSchedule {
    pub fn uniform(t: f64) -> Result<Self> {
        Ok(TSchedule::Uniform { t: unit_interval("t", t)? })
    }

    /// `k = 0` is rejected: `0^0` would make `t` jump at `s0`.
    pub fn power_law(k: f64) -> Result<Self> {
        Ok(TSchedule::PowerLaw { k: positive("k", k)? })
    }

    /// Parabolic schedule for the anchor of `params`, rejected unless
    /// `0 <= t(s) <= 1` on all of `[0, 1]`.
    pub fn parabolic(bias: f64, center: f64, params: &CurveParams) -> Result<Self> {
        let bias = unit_interval("bias", bias)?;
        let center = unit_interval("center", center)?;
        let sched = TSchedule::Parabolic { bias, center };
        let (c2, c1, c0) = parabola(bias, center, params.s0());
        let mut probes = vec![0.0, 1.0, params.s0()];
        if c2 != 0.0 {
            let vertex = c1 / (2.0 * c2);
            if (0.0..=1.0).contains(&vertex) {
                probes.push(vertex);
            }
        }
        for s in probes {
            let t = c2 * s * s - c1 * s + c0;
            if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                return Err(Error::ScheduleRange { s, t });
            }
        }
        Ok(sched)
    }

    pub fn stableswap_dynamic(amp: f64, d: f64) -> Result<Self> {
        Ok(TSchedule::StableswapDynamic { amp: positive("amp", amp)?, d: positive("d", d)? })
    }

    /// `t(s)` for `s ∈ [0, 1]`.
    pub fn value(&self, params: &CurveParams, s: f64) -> Result<f64> {
        let t = match *self {
            TSchedule::Uniform { t } => t,
            TSchedule::PowerLaw { k } => {
                let (u, _) = power_arg(params, s);
                u.abs().powf(k)
            }
            TSchedule::Parabolic { bias, center } => {
                let (c2, c1, c0) = parabola(bias, center, params.s0());
                c2 * s * s - c1 * s + c0
            }
            TSchedule::StableswapDynamic { .. } => {
                return Err(Error::UnsupportedSchedule("dynamic Stableswap t depends on (x, y)"))
            }
        };
        range_checked(s, t)
    }

    /// `dt/ds`.
    pub fn slope(&self, params: &CurveParams, s: f64) -> Result<f64> {
        match *self {
            TSchedule::Uniform { .. } => Ok(0.0),
            TSchedule::PowerLaw { k } => {
                let (u, m) = power_arg(params, s);
                if u == 0.0 {
                    return if k > 1.0 { Ok(0.0) } else { Err(Error::NonDifferentiable { s }) };
                }
                Ok(k / m * u.signum() * u.abs().powf(k - 1.0))
            }
            TSchedule::Parabolic { bias, center } => {
                let (c2, c1, _) = parabola(bias, center, params.s0());
                Ok(2.0 * c2 * s - c1)
            }
            TSchedule::StableswapDynamic { .. } => {
                Err(Error::UnsupportedSchedule("dynamic Stableswap t depends on (x, y)"))
            }
        }
    }
}

fn range_checked(s: f64, t: f64) -> Result<f64> {
    if (-1e-12..=1.0 + 1e-12).contains(&t) {
        Ok(t.clamp(0.0, 1.0))
    } else {
        Err(Error::ScheduleRange { s, t })
    }
}

/// `((s - s0) / M, M)`.
fn power_arg(params: &CurveParams, s: f64) -> (f64, f64) {
    let s0 = params.s0();
    let m = s0.max(1.0 - s0);
    ((s - s0) / m, m)
}

/// Coefficients `(c2, c1, c0)` of `t(s) = c2 s² - c1 s + c0`.
fn parabola(bias: f64, center: f64, s0: f64) -> (f64, f64, f64) {
    let den = s0 * (1.0 - s0);
    let c2 = ((1.0 - 2.0 * bias) * s0 + (bias - center)) / den;
    let c1 = ((1.0 - 2.0 * bias) * s0 * s0 + (bias - center)) / den;
    (c2, c1, bias)
}

/// `t(s)`, `t'(s)` and `t''(s)`.
pub fn t_of_s(schedule: &TSchedule, params: &CurveParams, s: f64) -> Result<ScheduleJet> {
    match *schedule {
        TSchedule::Uniform { t } => Ok(ScheduleJet { t, dt: 0.0, d2t: 0.0 }),
        TSchedule::PowerLaw { k } => {
            let t = schedule.value(params, s)?;
            let (u, m) = power_arg(params, s);
            if u == 0.0 {
                return match k {
                    k if k < 2.0 => Err(Error::NonDifferentiable { s }),
                    k if k == 2.0 => Ok(ScheduleJet { t, dt: 0.0, d2t: 2.0 / (m * m) }),
                    _ => Ok(ScheduleJet { t, dt: 0.0, d2t: 0.0 }),
                };
            }
            let au = u.abs();
            Ok(ScheduleJet {
                t,
                dt: k / m * u.signum() * au.powf(k - 1.0),
                d2t: k * (k - 1.0) / (m * m) * au.powf(k - 2.0),
            })
        }
        TSchedule::Parabolic { bias, center } => {
            let t = schedule.value(params, s)?;
            let (c2, c1, _) = parabola(bias, center, params.s0());
            Ok(ScheduleJet { t, dt: 2.0 * c2 * s - c1, d2t: 2.0 * c2 })
        }
        TSchedule::StableswapDynamic { .. } => Err(Error::UnsupportedSchedule(
            "dynamic Stableswap t depends on (x, y); use stableswap_dynamic_residual",
        )),
    }
}

/// `λ`, `λ'` and `λ''` of a scheduled homotopy curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaJet {
    pub lambda: f64,
    pub d_lambda: f64,
    pub d2_lambda: f64,
}

impl LambdaJet {
    /// `λ λ'' - 2 λ'^2`.
    pub fn convexity_margin(&self) -> f64 {
        self.lambda * self.d2_lambda - 2.0 * self.d_lambda * self.d_lambda
    }
}

pub fn lambda_derivs(params: &CurveParams, schedule: &TSchedule, s: SParam) -> Result<LambdaJet> {
    let s = s.get();
    let jet = t_of_s(schedule, params, s)?;
    let (alpha, beta, d) = (params.alpha(), params.beta(), params.degree());
    let c = params.c();
    let p = cpmm_scale(params, s);
    let q = s * (1.0 - s);
    let g1 = (alpha * (1.0 - s) - beta * s) / (q * d);
    let g2 = (2.0 * alpha * alpha * (1.0 - s).powi(2)
        + alpha * beta * (1.0 - 2.0 * s).powi(2)
        + 2.0 * beta * beta * s * s)
        / (q * q * d * d);
    let dp = -g1 * p;
    let d2p = g2 * p;
    Ok(LambdaJet {
        lambda: (p - c) * jet.t + c,
        d_lambda: (p - c) * jet.dt + dp * jet.t,
        d2_lambda: (p - c) * jet.d2t + 2.0 * dp * jet.dt + d2p * jet.t,
    })
}

/// `dy/dx` and `d²y/dx²` along a scheduled homotopy curve at ray `s`.
pub fn curve_derivatives(params: &CurveParams, schedule: &TSchedule, s: SParam) -> Result<(f64, f64)> {
    let jet = lambda_derivs(params, schedule, s)?;
    let sv = s.get();
    let xp = jet.lambda + sv * jet.d_lambda;
    if !(xp > 0.0) {
        return Err(Error::InvalidCurve { s: sv, x_prime: xp / params.a() });
    }
    let (a, b) = (params.a(), params.b());
    let dy_dx = (jet.d_lambda / xp - 1.0) * a / b;
    let d2y_dx2 = jet.convexity_margin() / (xp * xp * xp) * a * a / b;
    Ok((dy_dx, d2y_dx2))
}

/// Outcome of a grid convexity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub passed: bool,
    pub min_margin: f64,
    pub worst_s: f64,
    pub grid_size: usize,
    /// Grid points where the schedule is not twice differentiable.
    pub skipped: usize,
}

/// Samples `λ λ'' - 2 λ'^2` on a uniform grid over `[1e-4, 1 - 1e-4]`.
pub fn check_convexity(params: &CurveParams, schedule: &TSchedule, grid_size: usize) -> Result<ConvexityReport> {
    if grid_size < 3 {
        return Err(Error::InvalidParameter { name: "grid_size", value: grid_size as f64 });
    }
    let mut min_margin = f64::INFINITY;
    let mut worst_s = f64::NAN;
    let mut skipped = 0;
    for s in convexity_grid(grid_size) {
        match lambda_derivs(params, schedule, SParam::new(s)?) {
            Ok(jet) => {
                let m = jet.convexity_margin();
                if m < min_margin || m.is_nan() {
                    min_margin = m;
                    worst_s = s;
                }
            }
            Err(Error::NonDifferentiable { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(ConvexityReport {
        passed: min_margin >= -CONVEXITY_TOL,
        min_margin,
        worst_s,
        grid_size,
        skipped,
    })
}

/// The sample points used by [`check_convexity`].
pub fn convexity_grid(grid_size: usize) -> impl Iterator<Item = f64> {
    let span = 1.0 - 2.0 * CONVEXITY_INSET;
    let n = grid_size.max(2) - 1;
    (0..=n).map(move |i| CONVEXITY_INSET + span * i as f64 / n as f64)
}

/// `16ADxy/(x+y) + D³/(2√(xy)) - 16Axy - D²`: zero on the two-currency
/// homotopy curve whose blend follows the dynamic Stableswap leverage.
pub fn stableswap_dynamic_residual(amp: f64, d: f64, state: &MarketState) -> f64 {
    dynamic_residual_xy(amp, d, state.x(), state.y())
}

fn dynamic_residual_xy(amp: f64, d: f64, x: f64, y: f64) -> f64 {
    let xy = x * y;
    16.0 * amp * d * xy / (x + y) + d * d * d / (2.0 * xy.sqrt()) - 16.0 * amp * xy - d * d
}

/// Dynamic blend weight at a state.
pub fn stableswap_dynamic_t(amp: f64, d: f64, state: &MarketState) -> f64 {
    d * d / (16.0 * amp * state.x() * state.y() + d * d)
}

/// Point of the dynamic Stableswap homotopy curve with first reserve `x`.
///
/// The root in `y` is bracketed by the constant-sum line `x + y = D` (residual
/// `>= 0`) and the hyperbola `xy = D²/4` (residual `<= 0`).
pub fn stableswap_dynamic_point(amp: f64, d: f64, x: f64) -> Result<MarketState> {
    let amp = positive("amp", amp)?;
    let d = positive("d", d)?;
    let x = positive("x", x)?;
    let y_cp = d * d / (4.0 * x);
    let y_cs = if x < d { d - x } else { y_cp * 1e-12 };
    let (lo, hi) = if y_cs < y_cp { (y_cs, y_cp) } else { (y_cp, y_cs) };
    if hi - lo <= f64::EPSILON * hi {
        return MarketState::new(x, 0.5 * (lo + hi));
    }
    let y = roots::bisect(|y| dynamic_residual_xy(amp, d, x, y), lo, hi, 0.0)?;
    MarketState::new(x, y)
}
