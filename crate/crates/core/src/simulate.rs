//! Arbitrage simulation against a drifting external exchange rate.
//!
//! One curve is fixed for the whole run: a homotopy blend with power-law
//! schedule `K = 8 · stability` around the initial state. Each step one trader
//! withdraws a random fraction of one reserve. With probability `toward_prob`
//! the trade pulls the internal rate toward the external one.
//!
//! Randomness is `ChaCha8Rng` seeded from `seed`. Stream 0 drives the external
//! rate series, and stream `1 + run` drives replicate `run`. Replicates with
//! the same index therefore see the same draws at every stability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{spot_rate, CurveParams, MarketState, MixSpec};
use crate::error::{Error, Result};
use crate::exchange::{swap_exact_output, Currency};
use crate::nonuniform::TSchedule;

/// Steps `1..=100` form the early window.
pub const EARLY_WINDOW: (usize, usize) = (1, 100);
/// Steps `400..=500` form the final window.
pub const FINAL_WINDOW: (usize, usize) = (400, 500);

const RATE_STREAM: u64 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub steps: usize,
    pub init_x: f64,
    pub init_y: f64,
    pub init_external_rate: f64,
    pub rate_interval: usize,
    pub rate_max_move: f64,
    pub stability: f64,
    /// `K = k_per_stability · stability`.
    pub k_per_stability: f64,
    pub max_extraction_frac: f64,
    pub toward_prob: f64,
    pub seed: u64,
    pub runs: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            steps: 500,
            init_x: 3000.0,
            init_y: 1000.0,
            init_external_rate: 0.5,
            rate_interval: 80,
            rate_max_move: 0.2,
            stability: 0.5,
            k_per_stability: 8.0,
            max_extraction_frac: 0.02,
            toward_prob: 0.9,
            seed: 0,
            runs: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &'static str, value: f64| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, value })
            }
        };
        MarketState::new(self.init_x, self.init_y)?;
        check(self.init_external_rate > 0.0 && self.init_external_rate.is_finite(), "init_external_rate", self.init_external_rate)?;
        check(self.rate_interval > 0, "rate_interval", self.rate_interval as f64)?;
        check((0.0..1.0).contains(&self.rate_max_move), "rate_max_move", self.rate_max_move)?;
        check((0.0..=1.0).contains(&self.stability), "stability", self.stability)?;
        check(self.k_per_stability > 0.0 && self.k_per_stability.is_finite(), "k_per_stability", self.k_per_stability)?;
        check((0.0..1.0).contains(&self.max_extraction_frac), "max_extraction_frac", self.max_extraction_frac)?;
        check((0.0..=1.0).contains(&self.toward_prob), "toward_prob", self.toward_prob)?;
        check(self.runs > 0, "runs", self.runs as f64)?;
        Ok(())
    }

    pub fn with_stability(&self, stability: f64) -> SimConfig {
        SimConfig { stability, ..self.clone() }
    }

    pub fn init_state(&self) -> Result<MarketState> {
        MarketState::new(self.init_x, self.init_y)
    }

    /// Curve through the initial state whose spot rate there is the initial
    /// external rate.
    pub fn curve_params(&self) -> Result<CurveParams> {
        CurveParams::new(self.init_external_rate, 1.0, self.init_x, self.init_y)
    }

    /// Stability 0 is the constant-product curve.
    pub fn mix(&self) -> Result<MixSpec> {
        if self.stability == 0.0 {
            MixSpec::homotopy(1.0)
        } else {
            Ok(MixSpec::scheduled(TSchedule::power_law(self.k_per_stability * self.stability)?))
        }
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Piecewise-constant external rates for steps `0..=steps`.
///
/// Every `rate_interval` steps the rate is multiplied by `1 + u` with
/// `u ~ U[-rate_max_move, rate_max_move]`.
pub fn gen_external_rates<R: Rng>(config: &SimConfig, rng: &mut R) -> Vec<f64> {
    let mut rate = config.init_external_rate;
    let mut out = Vec::with_capacity(config.steps + 1);
    out.push(rate);
    for step in 1..=config.steps {
        if step % config.rate_interval == 0 && config.rate_max_move > 0.0 {
            rate *= 1.0 + rng.random_range(-config.rate_max_move..=config.rate_max_move);
        }
        out.push(rate);
    }
    out
}

/// The external rate series shared by every replicate of `config`.
pub fn external_rates(config: &SimConfig) -> Vec<f64> {
    gen_external_rates(config, &mut stream_rng(config.seed, RATE_STREAM))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeRecord {
    pub output_currency: Currency,
    pub input_amount: f64,
    pub output_amount: f64,
    pub slippage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub state: MarketState,
    pub internal_rate: f64,
    pub external_rate: f64,
    pub trade: Option<TradeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    pub stability: f64,
    pub run: usize,
    /// `steps + 1` records, the first being the initial state.
    pub records: Vec<StepRecord>,
    pub external_rates: Vec<f64>,
}

/// One trade. Infeasible sizes shrink to the curve's limit.
pub fn sim_step<R: Rng>(
    params: &CurveParams,
    mix: &MixSpec,
    state: &MarketState,
    external_rate: f64,
    config: &SimConfig,
    rng: &mut R,
) -> Result<(MarketState, Option<TradeRecord>)> {
    let internal = spot_rate(params, mix, state)?;
    // Withdrawing currency 1 raises its internal price.
    let toward = if external_rate > internal {
        Currency::Cur1
    } else if external_rate < internal {
        Currency::Cur2
    } else if rng.random_bool(0.5) {
        Currency::Cur1
    } else {
        Currency::Cur2
    };
    let output = if rng.random_bool(config.toward_prob) { toward } else { toward.other() };
    // 1 - U[0, 1) lies in (0, 1].
    let frac = config.max_extraction_frac * (1.0 - rng.random::<f64>());
    if frac == 0.0 {
        return Ok((*state, None));
    }
    let reserve = match output {
        Currency::Cur1 => state.x(),
        Currency::Cur2 => state.y(),
    };
    let mut amount = frac * reserve;
    for _ in 0..2 {
        match swap_exact_output(params, mix, state, output, amount) {
            Ok((next, q)) => {
                let rec = TradeRecord {
                    output_currency: output,
                    input_amount: q.input_amount,
                    output_amount: q.output_amount,
                    slippage: q.slippage,
                };
                return Ok((next, Some(rec)));
            }
            Err(Error::InsufficientLiquidity { max_amount }) if max_amount > 0.0 => {
                amount = amount.min(max_amount * (1.0 - 1e-9));
            }
            Err(Error::InsufficientLiquidity { .. }) => return Ok((*state, None)),
            Err(e) => return Err(e),
        }
    }
    Ok((*state, None))
}

/// Replicate `run` of `config` against a given external rate series.
pub fn run_replicate(config: &SimConfig, rates: &[f64], run: usize) -> Result<SimTrace> {
    config.validate()?;
    if rates.len() != config.steps + 1 {
        return Err(Error::DimensionMismatch { expected: config.steps + 1, got: rates.len() });
    }
    let params = config.curve_params()?;
    let mix = config.mix()?;
    let mut rng = stream_rng(config.seed, 1 + run as u64);
    let mut state = config.init_state()?;
    let mut records = Vec::with_capacity(config.steps + 1);
    records.push(StepRecord {
        step: 0,
        state,
        internal_rate: spot_rate(&params, &mix, &state)?,
        external_rate: rates[0],
        trade: None,
    });
    for (step, &external) in rates.iter().enumerate().skip(1) {
        let (next, trade) = sim_step(&params, &mix, &state, external, config, &mut rng)?;
        state = next;
        records.push(StepRecord { step, state, internal_rate: spot_rate(&params, &mix, &state)?, external_rate: external, trade });
    }
    Ok(SimTrace { stability: config.stability, run, records, external_rates: rates.to_vec() })
}

/// Replicate 0 of `config`.
pub fn run_sim(config: &SimConfig) -> Result<SimTrace> {
    config.validate()?;
    run_replicate(config, &external_rates(config), 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimSummary {
    pub stability: f64,
    pub runs: usize,
    /// Mean of `(internal - external)^2` over all records.
    pub mse: f64,
    /// Mean slippage of early-window trades.
    pub early_window_slippage: f64,
    /// Mean squared rate gap over the final window; 0 when the run is shorter.
    pub final_window_mse: f64,
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn summarize(trace: &SimTrace) -> SimSummary {
    let gap = |r: &StepRecord| (r.internal_rate - r.external_rate).powi(2);
    let in_window = |r: &&StepRecord, (lo, hi): (usize, usize)| r.step >= lo && r.step <= hi;
    SimSummary {
        stability: trace.stability,
        runs: 1,
        mse: mean(trace.records.iter().map(gap)),
        early_window_slippage: mean(
            trace.records.iter().filter(|r| in_window(r, EARLY_WINDOW)).filter_map(|r| r.trade.map(|t| t.slippage)),
        ),
        final_window_mse: mean(trace.records.iter().filter(|r| in_window(r, FINAL_WINDOW)).map(gap)),
    }
}

/// Averages `config.runs` replicates at each stability. All replicates share
/// one external rate series. Replicates run in parallel; results do not depend
/// on scheduling.
pub fn batch_summary(config: &SimConfig, stabilities: &[f64]) -> Result<Vec<SimSummary>> {
    if stabilities.is_empty() {
        return Err(Error::Empty("stabilities"));
    }
    config.validate()?;
    for &s in stabilities {
        config.with_stability(s).validate()?;
    }
    let rates = external_rates(config);
    let jobs: Vec<(usize, usize)> =
        (0..stabilities.len()).flat_map(|i| (0..config.runs).map(move |r| (i, r))).collect();
    let results: Vec<SimSummary> = jobs
        .par_iter()
        .map(|&(i, run)| run_replicate(&config.with_stability(stabilities[i]), &rates, run).map(|t| summarize(&t)))
        .collect::<Result<_>>()?;
    Ok(results
        .chunks(config.runs)
        .zip(stabilities)
        .map(|(chunk, &stability)| {
            let n = chunk.len() as f64;
            SimSummary {
                stability,
                runs: chunk.len(),
                mse: chunk.iter().map(|s| s.mse).sum::<f64>() / n,
                early_window_slippage: chunk.iter().map(|s| s.early_window_slippage).sum::<f64>() / n,
                final_window_mse: chunk.iter().map(|s| s.final_window_mse).sum::<f64>() / n,
            }
        })
        .collect())
}

/// Average ranks, ties sharing the mean of their positions.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = r;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::Empty("need at least two observations"));
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    Ok(sab / (saa * sbb).sqrt())
}
