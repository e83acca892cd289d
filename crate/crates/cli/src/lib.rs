//! Command-line driver for `ammblend`.
//!
//! Data goes to the output writer as CSV or JSON and diagnostics go to the
//! error writer. Exit codes: 0 success, 2 invalid parameters or usage,
//! 3 failed convexity certification, 4 infeasible trade.

pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use ammblend::analysis::{arbitrage_state, impermanent_loss, reduced_value, PriceVector};
use ammblend::exchange::{swap, Currency};
use ammblend::nonuniform::{check_convexity, CONVEXITY_GRID};
use ammblend::simulate::{batch_summary, run_sim, spearman, SimConfig};
use ammblend::stableswap::{equivalence_check, invariant_residual, solve_last_coordinate, t_from_chi, StableswapParams};
use ammblend::{point_at, spot_rate, CurveParams, Error, Family, MarketState, MixSpec, SParam, TSchedule};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use table::{emit_table, fmt_num, Cell, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_CONVEX: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ammblend", version, about = "Blended constant-sum / constant-product market maker curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample points along a curve.
    CurveSample {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        mix: MixArgs,
        #[arg(long, default_value_t = 512)]
        points: usize,
        /// Distance of the first and last sample from the ends of (0, 1).
        #[arg(long, default_value_t = 1e-4)]
        inset: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Certify convexity of a scheduled homotopy curve.
    Convexity {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        mix: MixArgs,
        #[arg(long, default_value_t = CONVEXITY_GRID)]
        grid: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Price a swap.
    Quote {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        mix: MixArgs,
        /// Pre-trade first reserve; defaults to the anchor.
        #[arg(long)]
        x: Option<f64>,
        /// Pre-trade second reserve; defaults to the anchor.
        #[arg(long)]
        y: Option<f64>,
        #[arg(long, value_enum)]
        sell: Side,
        #[arg(long)]
        amount: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Impermanent loss after the first price moves by each ratio.
    IlTable {
        #[command(flatten)]
        curve: CurveArgs,
        #[command(flatten)]
        mix: MixArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2,4")]
        ratios: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Reduced portfolio value U(r) on a log grid, per stability.
    PvfTable {
        #[command(flatten)]
        curve: CurveArgs,
        /// Parabolic schedules use `bias` with center `1 - stability`.
        #[arg(long, value_enum, default_value_t = PvfKind::Uniform)]
        kind: PvfKind,
        #[arg(long, default_value_t = 0.2)]
        bias: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        stabilities: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        r_min: f64,
        #[arg(long, default_value_t = 10.0)]
        r_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Stableswap surface points checked against the arithmetic blend.
    StableswapCompare {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        d: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.25,10")]
        chi: Vec<f64>,
        /// Samples of the shared value of the first n-1 reserves.
        #[arg(long, default_value_t = 9)]
        points: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// One simulation trace.
    SimRun {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Averaged simulation statistics across stabilities.
    SimSweep {
        #[command(flatten)]
        sim: SimArgs,
        /// Defaults to 0.05, 0.10, ..., 0.95.
        #[arg(long, value_delimiter = ',')]
        stabilities: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    x0: f64,
    #[arg(long, default_value_t = 1.0)]
    y0: f64,
    /// Total degree of the product component.
    #[arg(long, default_value_t = 1.0)]
    degree: f64,
}

impl CurveArgs {
    fn params(&self) -> Result<CurveParams, Error> {
        CurveParams::with_degree(self.a, self.b, self.x0, self.y0, self.degree)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MixName {
    Arith,
    Geo,
    Hom,
    Csmm,
    Cpmm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScheduleName {
    Uniform,
    Powerlaw,
    Parabolic,
    Dynamic,
}

#[derive(Debug, Args)]
struct MixArgs {
    #[arg(long, value_enum, default_value_t = MixName::Hom)]
    mix: MixName,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, value_enum, default_value_t = ScheduleName::Uniform)]
    schedule: ScheduleName,
    /// Power-law exponent.
    #[arg(long, default_value_t = 2.0)]
    k: f64,
    /// Parabolic value at s = 0.
    #[arg(long, default_value_t = 0.2)]
    bias: f64,
    /// Parabolic value at the anchor.
    #[arg(long, default_value_t = 0.5)]
    center: f64,
    /// Dynamic Stableswap amplification.
    #[arg(long, default_value_t = 1.0)]
    amp: f64,
    /// Dynamic Stableswap scale.
    #[arg(long = "ss-d", default_value_t = 2.0)]
    ss_d: f64,
}

impl MixArgs {
    fn mix(&self, params: &CurveParams) -> Result<MixSpec, Error> {
        let family = match self.mix {
            MixName::Csmm => return Ok(MixSpec::csmm()),
            MixName::Cpmm => return Ok(MixSpec::cpmm()),
            MixName::Arith => Family::Arithmetic,
            MixName::Geo => Family::Geometric,
            MixName::Hom => Family::Homotopy,
        };
        let schedule = match self.schedule {
            ScheduleName::Uniform => TSchedule::uniform(self.t)?,
            ScheduleName::Powerlaw => TSchedule::power_law(self.k)?,
            ScheduleName::Parabolic => TSchedule::parabolic(self.bias, self.center, params)?,
            ScheduleName::Dynamic => TSchedule::stableswap_dynamic(self.amp, self.ss_d)?,
        };
        MixSpec::new(family, schedule)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Side {
    Cur1,
    Cur2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PvfKind {
    Uniform,
    Parabolic,
}

#[derive(Debug, Args)]
struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// JSON file with simulation settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    stability: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    toward_prob: Option<f64>,
    #[arg(long)]
    max_extraction_frac: Option<f64>,
    #[arg(long)]
    rate_interval: Option<usize>,
    #[arg(long)]
    rate_max_move: Option<f64>,
    #[arg(long)]
    init_external_rate: Option<f64>,
}

impl SimArgs {
    fn config(&self) -> Result<SimConfig, Failure> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("bad config {}: {e}", path.display())))?
            }
            None => SimConfig::default(),
        };
        c.seed = self.seed;
        macro_rules! over {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        over!(stability, steps, runs, toward_prob, max_extraction_frac, rate_interval, rate_max_move, init_external_rate);
        c.validate()?;
        Ok(c)
    }
}

enum Failure {
    Invalid(String),
    NotConvex(String),
    Infeasible(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InsufficientLiquidity { .. } => Failure::Infeasible(e.to_string()),
            Error::NonConvex { .. } => Failure::NotConvex(e.to_string()),
            e => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<table::TableError> for Failure {
    fn from(e: table::TableError) -> Self {
        Failure::Invalid(format!("internal table error: {e}"))
    }
}

/// Parses `argv` (including the program name), runs the command, and returns
/// the exit code.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut data = String::new();
    let mut notes = String::new();
    let code = match dispatch(cli.command, &mut data, &mut notes) {
        Ok(code) => code,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Invalid(m) => (EXIT_INVALID, m),
                Failure::NotConvex(m) => (EXIT_NOT_CONVEX, m),
                Failure::Infeasible(m) => (EXIT_INFEASIBLE, m),
            };
            notes.push_str(&format!("error: {msg}\n"));
            code
        }
    };
    let _ = out.write_all(data.as_bytes());
    let _ = err.write_all(notes.as_bytes());
    code
}

fn dispatch(cmd: Command, data: &mut String, notes: &mut String) -> Result<i32, Failure> {
    match cmd {
        Command::CurveSample { curve, mix, points, inset, out } => {
            let params = curve.params()?;
            let mix = mix.mix(&params)?;
            data.push_str(&emit_table(&curve_sample(&params, &mix, points, inset)?, out.format)?);
            Ok(EXIT_OK)
        }
        Command::Convexity { curve, mix, grid, out } => {
            let params = curve.params()?;
            let mix = mix.mix(&params)?;
            let rep = check_convexity(&params, &mix.schedule(), grid)?;
            let mut t = Table::new(&["passed", "min_margin", "worst_s", "grid_size", "skipped"]);
            t.push(vec![rep.passed.into(), rep.min_margin.into(), rep.worst_s.into(), rep.grid_size.into(), rep.skipped.into()]);
            data.push_str(&emit_table(&t, out.format)?);
            if rep.passed {
                Ok(EXIT_OK)
            } else {
                notes.push_str(&format!("not convex: margin {} at s = {}\n", fmt_num(rep.min_margin), fmt_num(rep.worst_s)));
                Ok(EXIT_NOT_CONVEX)
            }
        }
        Command::Quote { curve, mix, x, y, sell, amount, out } => {
            let params = curve.params()?;
            let mix = mix.mix(&params)?;
            let state = MarketState::new(x.unwrap_or(params.x0()), y.unwrap_or(params.y0()))?;
            let side = match sell {
                Side::Cur1 => Currency::Cur1,
                Side::Cur2 => Currency::Cur2,
            };
            let (after, q) = swap(&params, &mix, &state, side, amount)?;
            let mut t = Table::new(&[
                "sell", "input_amount", "output_amount", "spot_before", "effective_price", "slippage", "x_after", "y_after",
            ]);
            let name = match side {
                Currency::Cur1 => "cur1",
                Currency::Cur2 => "cur2",
            };
            t.push(vec![
                name.into(),
                q.input_amount.into(),
                q.output_amount.into(),
                q.spot_before.into(),
                q.effective_price.into(),
                q.slippage.into(),
                after.x().into(),
                after.y().into(),
            ]);
            data.push_str(&emit_table(&t, out.format)?);
            Ok(EXIT_OK)
        }
        Command::IlTable { curve, mix, ratios, out } => {
            let params = curve.params()?;
            let mix = mix.mix(&params)?;
            let start = params.initial_state().into();
            let base = params.initial_rate();
            let mut t = Table::new(&["ratio", "il", "held_value", "pool_value", "x_final", "y_final"]);
            for r in ratios {
                let p = PriceVector::new(r * base, 1.0)?;
                let fin = arbitrage_state(&params, &mix, &p)?;
                let il = impermanent_loss(&p, &start, &fin);
                t.push(vec![r.into(), il.il.into(), il.held_value.into(), il.pool_value.into(), fin.x.into(), fin.y.into()]);
            }
            data.push_str(&emit_table(&t, out.format)?);
            Ok(EXIT_OK)
        }
        Command::PvfTable { curve, kind, bias, stabilities, r_min, r_max, points, out } => {
            let params = curve.params()?;
            if !(r_min > 0.0 && r_max > r_min && points >= 2) {
                return Err(Failure::Invalid("need 0 < r-min < r-max and points >= 2".into()));
            }
            let mut t = Table::new(&["stability", "r", "u"]);
            for stab in stabilities {
                let mix = match kind {
                    PvfKind::Uniform => MixSpec::homotopy(1.0 - stab)?,
                    PvfKind::Parabolic => MixSpec::scheduled(TSchedule::parabolic(bias, 1.0 - stab, &params)?),
                };
                for i in 0..points {
                    let r = r_min * (r_max / r_min).powf(i as f64 / (points - 1) as f64);
                    t.push(vec![stab.into(), r.into(), reduced_value(&params, &mix, r)?.into()]);
                }
            }
            data.push_str(&emit_table(&t, out.format)?);
            Ok(EXIT_OK)
        }
        Command::StableswapCompare { n, d, chi, points, out } => {
            let mut t = Table::new(&["chi", "t", "x_fixed", "x_last", "invariant_residual", "blend_deviation"]);
            if points < 2 {
                return Err(Failure::Invalid("points must be at least 2".into()));
            }
            for c in chi {
                let ss = StableswapParams::new(n, d, c)?;
                let tt = t_from_chi(c, n)?;
                let bal = d / n as f64;
                for i in 0..points {
                    let v = bal * (0.25 + 1.5 * i as f64 / (points - 1) as f64);
                    let Ok(x) = solve_last_coordinate(&ss, &vec![v; n - 1]) else { continue };
                    let last = *x.last().expect("n >= 2");
                    t.push(vec![
                        c.into(),
                        tt.into(),
                        v.into(),
                        last.into(),
                        invariant_residual(&ss, &x)?.into(),
                        equivalence_check(&ss, &x)?.into(),
                    ]);
                }
            }
            data.push_str(&emit_table(&t, out.format)?);
            Ok(EXIT_OK)
        }
        Command::SimRun { sim, out } => {
            let config = sim.config()?;
            let trace = run_sim(&config)?;
            let mut t = Table::new(&[
                "step",
                "x",
                "y",
                "internal_rate",
                "external_rate",
                "output_currency",
                "input_amount",
                "output_amount",
                "slippage",
            ]);
            for r in &trace.records {
                let name = r.trade.map(|tr| match tr.output_currency {
                    Currency::Cur1 => "cur1",
                    Currency::Cur2 => "cur2",
                });
                t.push(vec![
                    r.step.into(),
                    r.state.x().into(),
                    r.state.y().into(),
                    r.internal_rate.into(),
                    r.external_rate.into(),
                    name.into(),
                    r.trade.map(|tr| tr.input_amount).into(),
                    r.trade.map(|tr| tr.output_amount).into(),
                    r.trade.map(|tr| tr.slippage).into(),
                ]);
            }
            data.push_str(&emit_table(&t, out.format)?);
            Ok(EXIT_OK)
        }
        Command::SimSweep { sim, stabilities, out } => {
            let config = sim.config()?;
            let stabs = stabilities.unwrap_or_else(|| (1..=19).map(|i| i as f64 * 0.05).collect());
            let summaries = batch_summary(&config, &stabs)?;
            let mut t = Table::new(&["stability", "runs", "mse", "early_window_slippage", "final_window_mse"]);
            for s in &summaries {
                t.push(vec![
                    s.stability.into(),
                    s.runs.into(),
                    s.mse.into(),
                    s.early_window_slippage.into(),
                    s.final_window_mse.into(),
                ]);
            }
            data.push_str(&emit_table(&t, out.format)?);
            if summaries.len() >= 2 {
                let mse: Vec<f64> = summaries.iter().map(|s| s.mse).collect();
                let slip: Vec<f64> = summaries.iter().map(|s| s.early_window_slippage).collect();
                notes.push_str(&format!(
                    "spearman(stability, mse) = {}\nspearman(stability, early_window_slippage) = {}\n",
                    fmt_num(spearman(&stabs, &mse)?),
                    fmt_num(spearman(&stabs, &slip)?)
                ));
            }
            Ok(EXIT_OK)
        }
    }
}

/// Curve points on an even grid in `s`, with the blend weight and spot rate.
pub fn curve_sample(params: &CurveParams, mix: &MixSpec, points: usize, inset: f64) -> Result<Table, Error> {
    if points < 2 {
        return Err(Error::InvalidParameter { name: "points", value: points as f64 });
    }
    if !(inset > 0.0 && inset < 0.5) {
        return Err(Error::InvalidParameter { name: "inset", value: inset });
    }
    let mut t = Table::new(&["s", "t", "x", "y", "rate"]);
    for i in 0..points {
        let s = inset + (1.0 - 2.0 * inset) * i as f64 / (points - 1) as f64;
        let st = point_at(params, mix, SParam::new(s)?)?;
        let tv = match mix.schedule() {
            TSchedule::Uniform { t } => t,
            sched => sched.value(params, s)?,
        };
        t.push(vec![s.into(), tv.into(), st.x().into(), st.y().into(), spot_rate(params, mix, &st)?.into()]);
    }
    Ok(t)
}
