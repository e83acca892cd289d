//! Impermanent loss, portfolio value and the ERLI test.
//!
//! The portfolio value `V(P) = inf { P·X : A(X) = 1 }` is found by matching
//! the curve's spot rate to `p1 / p2`. The spot rate strictly decreases along
//! `s` on a convex curve, so bisection suffices. Prices outside the curve's
//! rate range put the infimum on an axis.

use serde::Serialize;

use crate::curve::{spot_rate, CurveParams, MarketState, MixSpec};
use crate::error::{positive, Error, Result};
use crate::nonuniform::{check_convexity, TSchedule, CONVEXITY_GRID};
use crate::parametrize::{intercepts, point_at, SParam, S_MAX, S_MIN};
use crate::roots;

const S_TOL: f64 = 1e-15;

/// Default final-to-initial rate ratios for [`erli_discrepancy`].
pub const ERLI_RATIOS: [f64; 2] = [0.5, 2.0];
/// Default price-level scales for [`erli_discrepancy`].
pub const ERLI_SCALES: [f64; 3] = [1.0, 3.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceVector {
    p1: f64,
    p2: f64,
}

impl PriceVector {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        Ok(PriceVector { p1: positive("p1", p1)?, p2: positive("p2", p2)? })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    /// `p1 / p2`.
    pub fn rate(&self) -> f64 {
        self.p1 / self.p2
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        PriceVector::new(self.p1 * k, self.p2 * k)
    }
}

/// Reserve quantities, possibly on an axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Holdings {
    pub x: f64,
    pub y: f64,
}

impl Holdings {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(x) {
            return Err(Error::InvalidParameter { name: "x", value: x });
        }
        if !ok(y) {
            return Err(Error::InvalidParameter { name: "y", value: y });
        }
        Ok(Holdings { x, y })
    }

    pub fn value(&self, prices: &PriceVector) -> f64 {
        prices.p1 * self.x + prices.p2 * self.y
    }
}

impl From<MarketState> for Holdings {
    fn from(s: MarketState) -> Self {
        Holdings { x: s.x(), y: s.y() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ILReport {
    pub il: f64,
    /// `Pᶠ · Xⁱ`.
    pub held_value: f64,
    /// `Pᶠ · Xᶠ`.
    pub pool_value: f64,
}

/// `(Pᶠ·Xᶠ) / (Pᶠ·Xⁱ) - 1`.
pub fn impermanent_loss(final_prices: &PriceVector, initial: &Holdings, fin: &Holdings) -> ILReport {
    let held_value = initial.value(final_prices);
    let pool_value = fin.value(final_prices);
    ILReport { il: pool_value / held_value - 1.0, held_value, pool_value }
}

fn rate_at(params: &CurveParams, mix: &MixSpec, s: f64) -> Result<f64> {
    spot_rate(params, mix, &point_at(params, mix, SParam::new(s)?)?)
}

/// The state on the curve minimizing `P·X`.
pub fn arbitrage_state(params: &CurveParams, mix: &MixSpec, prices: &PriceVector) -> Result<Holdings> {
    match mix.schedule() {
        TSchedule::Uniform { .. } => {}
        TSchedule::StableswapDynamic { .. } => {
            return Err(Error::UnsupportedSchedule("portfolio value needs an s-parametrized curve"))
        }
        sched => {
            let report = check_convexity(params, &sched, CONVEXITY_GRID)?;
            if !report.passed {
                return Err(Error::NonConvex { min_margin: report.min_margin, worst_s: report.worst_s });
            }
        }
    }
    let r = prices.rate();
    let anchor_rate = rate_at(params, mix, params.s0())?;
    if (anchor_rate - r).abs() <= 1e-14 * r {
        return Ok(params.initial_state().into());
    }
    let (rate_lo_s, rate_hi_s) = (rate_at(params, mix, S_MAX)?, rate_at(params, mix, S_MIN)?);
    if r >= rate_hi_s {
        // Currency 1 is worth more than the curve ever pays for it: hold none.
        let ints = intercepts(params, mix)?;
        return match ints.y {
            Some(y) => Holdings::new(0.0, y),
            None => Ok(point_at(params, mix, SParam::new(S_MIN)?)?.into()),
        };
    }
    if r <= rate_lo_s {
        let ints = intercepts(params, mix)?;
        return match ints.x {
            Some(x) => Holdings::new(x, 0.0),
            None => Ok(point_at(params, mix, SParam::new(S_MAX)?)?.into()),
        };
    }
    let mut failure = None;
    let g = |s: f64| match rate_at(params, mix, s) {
        Ok(v) => (v / r).ln(),
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let s = roots::bisect(g, S_MIN, S_MAX, S_TOL)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(point_at(params, mix, SParam::new(s)?)?.into())
}

/// `V(P) = inf P·X` over the curve.
pub fn portfolio_value(params: &CurveParams, mix: &MixSpec, prices: &PriceVector) -> Result<f64> {
    Ok(arbitrage_state(params, mix, prices)?.value(prices))
}

/// `U(r) = V(r, 1)`.
pub fn reduced_value(params: &CurveParams, mix: &MixSpec, r: f64) -> Result<f64> {
    portfolio_value(params, mix, &PriceVector::new(r, 1.0)?)
}

/// A price path: starting prices and the final-to-initial rate ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateScenario {
    pub initial: PriceVector,
    pub ratio: f64,
}

/// Scenarios starting from the anchor's own rate `(a / b, 1)`.
pub fn default_erli_scenarios(params: &CurveParams) -> Vec<RateScenario> {
    let initial = PriceVector { p1: params.a() / params.b(), p2: 1.0 };
    ERLI_RATIOS.iter().map(|&ratio| RateScenario { initial, ratio }).collect()
}

/// Largest spread in IL across price levels that share a rate ratio.
///
/// Each scale `k` multiplies the first price of both the initial and the final
/// price vector. The pool enters at the arbitrage state for the initial prices.
pub fn erli_discrepancy(params: &CurveParams, mix: &MixSpec, scenarios: &[RateScenario], scales: &[f64]) -> Result<f64> {
    if scenarios.is_empty() {
        return Err(Error::Empty("rate scenarios"));
    }
    if scales.is_empty() {
        return Err(Error::Empty("price level scales"));
    }
    let mut worst = 0.0_f64;
    for sc in scenarios {
        positive("ratio", sc.ratio)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &k in scales {
            let k = positive("scale", k)?;
            let p_i = PriceVector::new(k * sc.initial.p1, sc.initial.p2)?;
            let p_f = PriceVector::new(k * sc.ratio * sc.initial.p1, sc.initial.p2)?;
            let x_i = arbitrage_state(params, mix, &p_i)?;
            let x_f = arbitrage_state(params, mix, &p_f)?;
            let il = impermanent_loss(&p_f, &x_i, &x_f).il;
            lo = lo.min(il);
            hi = hi.max(il);
        }
        worst = worst.max(hi - lo);
    }
    Ok(worst)
}
