//! Fee-free swaps along a fixed curve.
//!
//! A trade moves the input reserve by the traded amount and re-solves the other
//! reserve on the same level set. Slippage compares the pre-trade spot price
//! `p1` with the realized price `p2 = output / input`:
//! `slippage = |p1 - p2| / |p1|`.

use serde::Serialize;

use crate::curve::{eval_mixed, spot_rate, CurveParams, MarketState, MixSpec};
use crate::error::{positive, Error, Result};
use crate::parametrize::{intercepts, state_for_x, state_for_y};

/// States further than this from the level set are rejected.
pub const ON_CURVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Currency {
    Cur1,
    Cur2,
}

impl Currency {
    pub fn other(self) -> Currency {
        match self {
            Currency::Cur1 => Currency::Cur2,
            Currency::Cur2 => Currency::Cur1,
        }
    }

    fn reserve(self, state: &MarketState) -> f64 {
        match self {
            Currency::Cur1 => state.x(),
            Currency::Cur2 => state.y(),
        }
    }
}

/// A priced trade. Prices are in units of output per unit of input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quote {
    pub input_currency: Currency,
    pub input_amount: f64,
    pub output_amount: f64,
    /// Spot price of the input currency before the trade.
    pub spot_before: f64,
    /// `output_amount / input_amount`.
    pub effective_price: f64,
    pub slippage: f64,
}

impl Quote {
    fn new(input_currency: Currency, input_amount: f64, output_amount: f64, spot_before: f64) -> Quote {
        let effective_price = output_amount / input_amount;
        Quote {
            input_currency,
            input_amount,
            output_amount,
            spot_before,
            effective_price,
            slippage: (spot_before - effective_price).abs() / spot_before.abs(),
        }
    }

    pub fn output_currency(&self) -> Currency {
        self.input_currency.other()
    }
}

/// Rejects states off the level set `A = 1`.
pub fn ensure_on_curve(params: &CurveParams, mix: &MixSpec, state: &MarketState) -> Result<()> {
    let residual = (eval_mixed(params, mix, state)? - 1.0).abs();
    if residual > ON_CURVE_TOL {
        return Err(Error::OffCurve { residual });
    }
    Ok(())
}

/// Spot price of `currency` in units of the other currency.
pub fn spot_price(params: &CurveParams, mix: &MixSpec, state: &MarketState, currency: Currency) -> Result<f64> {
    let r = spot_rate(params, mix, state)?;
    Ok(match currency {
        Currency::Cur1 => r,
        Currency::Cur2 => 1.0 / r,
    })
}

/// The on-curve state with the `currency` reserve set to `reserve`.
fn resolve(params: &CurveParams, mix: &MixSpec, currency: Currency, reserve: f64) -> Result<MarketState> {
    match currency {
        Currency::Cur1 => state_for_x(params, mix, reserve),
        Currency::Cur2 => state_for_y(params, mix, reserve),
    }
}

/// Prices selling `amount` of `input` into the pool. The state is not changed.
pub fn quote(params: &CurveParams, mix: &MixSpec, state: &MarketState, input: Currency, amount: f64) -> Result<Quote> {
    swap(params, mix, state, input, amount).map(|(_, q)| q)
}

/// Sells `amount` of `input` and returns the post-trade state.
pub fn swap(
    params: &CurveParams,
    mix: &MixSpec,
    state: &MarketState,
    input: Currency,
    amount: f64,
) -> Result<(MarketState, Quote)> {
    let amount = positive("amount", amount)?;
    ensure_on_curve(params, mix, state)?;
    let spot = spot_price(params, mix, state, input)?;
    let held = input.reserve(state);
    let after = resolve(params, mix, input, held + amount).map_err(|e| match e {
        Error::OutOfRange { max, .. } => Error::InsufficientLiquidity { max_amount: (max - held).max(0.0) },
        e => e,
    })?;
    let output = input.other().reserve(state) - input.other().reserve(&after);
    Ok((after, Quote::new(input, amount, output, spot)))
}

/// Withdraws exactly `amount` of `output` and returns the post-trade state.
/// The quote's input is the amount of the other currency paid.
pub fn swap_exact_output(
    params: &CurveParams,
    mix: &MixSpec,
    state: &MarketState,
    output: Currency,
    amount: f64,
) -> Result<(MarketState, Quote)> {
    let amount = positive("amount", amount)?;
    ensure_on_curve(params, mix, state)?;
    let input = output.other();
    let spot = spot_price(params, mix, state, input)?;
    let held = output.reserve(state);
    let infeasible = |min: f64| Error::InsufficientLiquidity { max_amount: (held - min).max(0.0) };
    if amount >= held {
        return Err(infeasible(0.0));
    }
    let after = resolve(params, mix, output, held - amount).map_err(|e| match e {
        Error::OutOfRange { min, .. } => infeasible(min),
        e => e,
    })?;
    let paid = input.reserve(&after) - input.reserve(state);
    Ok((after, Quote::new(input, paid, amount, spot)))
}

/// How much of one reserve a trader can extract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extractable {
    /// The extractable amount, or its supremum when not attainable.
    pub amount: f64,
    /// Whether `amount` is reached by a finite trade.
    pub attainable: bool,
    /// Input needed to drain `amount`, when attainable.
    pub input_required: Option<f64>,
}

/// Liquidity bound for withdrawing `currency`.
///
/// Curves that meet the opposite axis can be drained by a finite trade; the
/// others approach it asymptotically.
pub fn max_extractable(params: &CurveParams, mix: &MixSpec, state: &MarketState, currency: Currency) -> Result<Extractable> {
    let ints = intercepts(params, mix)?;
    let input = currency.other();
    let intercept = match input {
        Currency::Cur1 => ints.x,
        Currency::Cur2 => ints.y,
    };
    let amount = currency.reserve(state);
    Ok(Extractable {
        amount,
        attainable: intercept.is_some(),
        input_required: intercept.map(|i| (i - input.reserve(state)).max(0.0)),
    })
}
