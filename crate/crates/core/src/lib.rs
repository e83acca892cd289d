//! Mixed constant-sum / constant-product market makers.
//!
//! Curves are level sets `A_t(x, y) = 1` of a blend between the normalized
//! linear invariant `A0 = (a x + b y) / C` and the normalized product
//! `A1 = x^α y^β / (x0^α y0^β)`, both equal to 1 at the anchor `(x0, y0)`.
//!
//! * [`curve`]: parameters, states, blend families and gradients.
//! * [`parametrize`]: ray parametrization `s = a x / (a x + b y)` and curve sampling.
//! * [`nonuniform`]: `t(s)` schedules and convexity certificates.
//! * [`exchange`]: swaps, slippage and liquidity limits.
//! * [`analysis`]: impermanent loss, portfolio value and reduced value.
//! * [`stableswap`]: the n-currency Stableswap invariant as a blend.
//! * [`simulate`]: Monte Carlo arbitrage against a drifting external rate.

pub mod analysis;
pub mod curve;
pub mod error;
pub mod exchange;
pub mod nonuniform;
pub mod parametrize;
pub mod roots;
pub mod simulate;
pub mod stableswap;

pub use curve::{eval_component, eval_mixed, grad_mixed, spot_rate, CurveParams, Family, MarketState, MixSpec};
pub use error::{Error, Result};
pub use nonuniform::{check_convexity, ConvexityReport, TSchedule};
pub use parametrize::{point_at, state_for_x, state_for_y, SParam};
