//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::time::{Duration, Instant};

use ammblend::analysis::{
    arbitrage_state, default_erli_scenarios, erli_discrepancy, impermanent_loss, portfolio_value, reduced_value, Holdings,
    PriceVector, ERLI_SCALES,
};
use ammblend::exchange::{max_extractable, Currency};
use ammblend::nonuniform::{
    check_convexity, convexity_grid, curve_derivatives, lambda_derivs, stableswap_dynamic_point, stableswap_dynamic_residual,
    CONVEXITY_GRID,
};
use ammblend::parametrize::{intercepts, lambda_at, lambda_mix, scaling_factors, S_MAX, S_MIN};
use ammblend::simulate::{batch_summary, spearman, SimConfig};
use ammblend::stableswap::{equivalence_check, solve_last_coordinate, StableswapParams};
use ammblend::{eval_mixed, point_at, CurveParams, Family, MarketState, MixSpec, SParam, TSchedule};
use ammblend_cli::run_command;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn sp(s: f64) -> SParam {
    SParam::new(s).expect("s in (0, 1)")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn unit_t_grid() -> impl Iterator<Item = f64> {
    (0..=10).map(|i| i as f64 / 10.0)
}

fn c1_normalization() -> Outcome {
    let mut worst = 0.0_f64;
    for params in [CurveParams::unit(), CurveParams::reference_pool()] {
        for fam in Family::ALL {
            for t in unit_t_grid() {
                let mix = MixSpec::uniform(fam, t).map_err(|e| e.to_string())?;
                let v = eval_mixed(&params, &mix, &params.initial_state()).map_err(|e| e.to_string())?;
                worst = worst.max((v - 1.0).abs());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max |A - 1| = {worst:e}"))?;
    Ok(format!("max |A - 1| = {worst:e}"))
}

fn c2_homotopy_fraction() -> Outcome {
    let mut worst = 0.0_f64;
    for params in [CurveParams::unit(), CurveParams::reference_pool()] {
        for i in 1..=9 {
            let s = i as f64 / 10.0;
            let v = MarketState::new(s / params.a(), (1.0 - s) / params.b()).unwrap();
            let ScalingPairLike { l0, l1 } = pair(&params, &v);
            for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let p = point_at(&params, &MixSpec::homotopy(t).unwrap(), sp(s)).map_err(|e| e.to_string())?;
                let (ax, ay) = (l0 * v.x(), l0 * v.y());
                let (bx, by) = (l1 * v.x(), l1 * v.y());
                let seg = (bx - ax).hypot(by - ay);
                // At the anchor ray both curves meet and the ratio is undefined.
                if seg <= 1e-6 * ax.hypot(ay) {
                    continue;
                }
                let frac = (p.x() - ax).hypot(p.y() - ay) / seg;
                worst = worst.max((frac - t).abs());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("max ratio error {worst:e}"))?;
    Ok(format!("max ratio error {worst:e}"))
}

struct ScalingPairLike {
    l0: f64,
    l1: f64,
}

fn pair(params: &CurveParams, v: &MarketState) -> ScalingPairLike {
    let sf = scaling_factors(params, &MarketState::new(3.7 * v.x(), 3.7 * v.y()).unwrap());
    // Scaling factors of a multiple of the base point are divided by the multiple.
    ScalingPairLike { l0: sf.lambda0 * 3.7, l1: sf.lambda1 * 3.7 }
}

/// `d²y/dx²` of the traced curve by nested central differences.
fn traced_second_derivative(params: &CurveParams, mix: &MixSpec, s: f64, h: f64) -> Result<f64, String> {
    let pt = |v: f64| point_at(params, mix, sp(v)).map_err(|e| e.to_string());
    let slope = |v: f64| -> Result<f64, String> {
        let (m, p) = (pt(v - h)?, pt(v + h)?);
        Ok((p.y() - m.y()) / (p.x() - m.x()))
    };
    let (m, p) = (pt(s - h)?, pt(s + h)?);
    Ok((slope(s + h)? - slope(s - h)?) / (p.x() - m.x()))
}

fn c3_convexity_cross_validation() -> Outcome {
    let u = CurveParams::unit();
    let mut schedules: Vec<(String, TSchedule)> = Vec::new();
    for t in [0.25, 0.5, 0.75] {
        schedules.push((format!("uniform {t}"), TSchedule::uniform(t).unwrap()));
    }
    for k in [1.0, 2.0, 4.0, 8.0] {
        schedules.push((format!("powerlaw {k}"), TSchedule::power_law(k).unwrap()));
    }
    for (b, c) in [(0.2, 0.5), (0.8, 0.5)] {
        schedules.push((format!("parabolic ({b},{c})"), TSchedule::parabolic(b, c, &u).map_err(|e| e.to_string())?));
    }
    let mut verdicts = Vec::new();
    let mut checked = 0usize;
    for (name, sched) in &schedules {
        let report = check_convexity(&u, sched, CONVEXITY_GRID).map_err(|e| e.to_string())?;
        let mix = MixSpec::scheduled(*sched);
        let mut fd_concave = false;
        for s in convexity_grid(CONVEXITY_GRID) {
            let jet = match lambda_derivs(&u, sched, sp(s)) {
                Ok(j) => j,
                Err(_) => continue,
            };
            let margin = jet.convexity_margin();
            let h = 1e-3 * s.min(1.0 - s);
            let d2 = traced_second_derivative(&u, &mix, s, h)?;
            let (_, d2_an) = curve_derivatives(&u, sched, sp(s)).map_err(|e| e.to_string())?;
            ensure(margin.signum() == d2_an.signum() || margin == 0.0, || format!("{name}: analytic sign mismatch at s={s}"))?;
            let tol = 1e-6 * d2_an.abs().max(1.0);
            ensure(!(margin < -1e-9 && d2 > tol) && !(margin > 1e-9 && d2 < -tol), || {
                format!("{name}: margin {margin:e} vs traced d2y/dx2 {d2:e} at s={s}")
            })?;
            fd_concave |= d2 < -tol;
            checked += 1;
        }
        ensure(report.passed != fd_concave, || format!("{name}: certificate {} but traced concavity {fd_concave}", report.passed))?;
        if name.starts_with("powerlaw") {
            ensure(report.passed, || format!("{name} failed the certificate"))?;
            let pool = check_convexity(&CurveParams::reference_pool(), sched, CONVEXITY_GRID).map_err(|e| e.to_string())?;
            ensure(pool.passed, || format!("{name} failed on the pool curve"))?;
        }
        verdicts.push(format!("{name}:{}", if report.passed { "convex" } else { "concave" }));
    }
    Ok(format!("{checked} points agree; {}", verdicts.join(", ")))
}

fn random_case(rng: &mut ChaCha8Rng) -> (CurveParams, TSchedule, f64) {
    loop {
        let params = CurveParams::new(
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..2.0),
            rng.random_range(0.5..3.0),
            rng.random_range(0.5..3.0),
        )
        .unwrap();
        let sched = match rng.random_range(0..3) {
            0 => TSchedule::uniform(rng.random_range(0.0..=1.0)).unwrap(),
            1 => TSchedule::power_law(rng.random_range(2.0..8.0)).unwrap(),
            _ => match TSchedule::parabolic(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), &params) {
                Ok(s) => s,
                Err(_) => continue,
            },
        };
        let s: f64 = rng.random_range(0.05..0.95);
        if (s - params.s0()).abs() < 0.05 {
            continue;
        }
        return (params, sched, s);
    }
}

fn c4_derivative_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_l, mut worst_c) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let (params, sched, s) = random_case(&mut rng);
        let mix = MixSpec::scheduled(sched);
        let jet = lambda_derivs(&params, &sched, sp(s)).map_err(|e| e.to_string())?;
        let lam = |v: f64| lambda_at(&params, &mix, sp(v)).unwrap();
        let h = 1e-5;
        let d1 = (lam(s + h) - lam(s - h)) / (2.0 * h);
        let h2 = 1e-4;
        let d2 = (lam(s + h2) - 2.0 * lam(s) + lam(s - h2)) / (h2 * h2);
        let scale = jet.lambda.abs();
        worst_l = worst_l
            .max((jet.d_lambda - d1).abs() / jet.d_lambda.abs().max(scale))
            .max((jet.d2_lambda - d2).abs() / jet.d2_lambda.abs().max(scale));
        let (dy, d2y) = curve_derivatives(&params, &sched, sp(s)).map_err(|e| e.to_string())?;
        let (m, p) = (point_at(&params, &mix, sp(s - h)).unwrap(), point_at(&params, &mix, sp(s + h)).unwrap());
        let dy_fd = (p.y() - m.y()) / (p.x() - m.x());
        let d2y_fd = traced_second_derivative(&params, &mix, s, 1e-4)?;
        let norm = params.a() / params.b();
        worst_c = worst_c
            .max((dy - dy_fd).abs() / dy.abs().max(norm))
            .max((d2y - d2y_fd).abs() / d2y.abs().max(norm));
    }
    ensure(worst_l <= 1e-5 && worst_c <= 1e-4, || format!("lambda {worst_l:e}, curve {worst_c:e}"))?;
    Ok(format!("max rel error lambda {worst_l:e}, curve {worst_c:e}"))
}

fn c5_stableswap() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0_f64;
    let mut count = 0;
    while count < 100 {
        let n = if count % 2 == 0 { 2 } else { 3 };
        let chi = [0.01, 0.25, 10.0][count % 3];
        let d: f64 = rng.random_range(1.0..10.0);
        let ss = StableswapParams::new(n, d, chi).unwrap();
        let fixed: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.2..1.8) * d / n as f64).collect();
        let Ok(x) = solve_last_coordinate(&ss, &fixed) else { continue };
        worst = worst.max(equivalence_check(&ss, &x).map_err(|e| e.to_string())?);
        count += 1;
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    let (amp, d) = (2.0, 4.0);
    let mid = stableswap_dynamic_residual(amp, d, &MarketState::new(d / 2.0, d / 2.0).unwrap());
    ensure(mid == 0.0, || format!("balanced residual {mid:e}"))?;
    let mut worst_dyn = 0.0_f64;
    for _ in 0..50 {
        let x = rng.random_range(0.05..0.95) * d;
        let st = stableswap_dynamic_point(amp, d, x).map_err(|e| e.to_string())?;
        worst_dyn = worst_dyn.max(stableswap_dynamic_residual(amp, d, &st).abs());
    }
    ensure(worst_dyn <= 1e-9 * d * d, || format!("dynamic residual {worst_dyn:e}"))?;
    Ok(format!("max deviation {worst:e}; dynamic residual {worst_dyn:e}"))
}

fn grid_arbitrage(params: &CurveParams, mix: &MixSpec, p: &PriceVector, n: usize) -> Holdings {
    let mut best: Option<Holdings> = None;
    let mut consider = |h: Holdings| {
        if best.is_none_or(|b| h.value(p) < b.value(p)) {
            best = Some(h);
        }
    };
    for i in 0..n {
        let s = (S_MIN + (S_MAX - S_MIN) * i as f64 / (n - 1) as f64).min(S_MAX);
        consider(point_at(params, mix, sp(s)).unwrap().into());
    }
    let ints = intercepts(params, mix).unwrap();
    if let Some(x) = ints.x {
        consider(Holdings::new(x, 0.0).unwrap());
    }
    if let Some(y) = ints.y {
        consider(Holdings::new(0.0, y).unwrap());
    }
    best.unwrap()
}

fn c6_impermanent_loss() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..200 {
        let params = if i % 2 == 0 { CurveParams::unit() } else { CurveParams::reference_pool() };
        let fam = Family::ALL[i % 3];
        let mix = MixSpec::uniform(fam, rng.random_range(0.0..=1.0)).unwrap();
        let r = params.initial_rate() * (rng.random_range(-3.0..3.0_f64)).exp();
        let p = PriceVector::new(r, 1.0).unwrap();
        let fin = arbitrage_state(&params, &mix, &p).map_err(|e| e.to_string())?;
        worst = worst.max(impermanent_loss(&p, &params.initial_state().into(), &fin).il);
    }
    ensure(worst <= 1e-9, || format!("max IL {worst:e}"))?;
    let u = CurveParams::unit();
    let start: Holdings = u.initial_state().into();
    let mut worst_cf = 0.0_f64;
    for r in [0.25, 0.5, 2.0, 4.0] {
        let p = PriceVector::new(r, 1.0).unwrap();
        let exact = 2.0 * r.sqrt() / (1.0 + r) - 1.0;
        let fin = arbitrage_state(&u, &MixSpec::cpmm(), &p).map_err(|e| e.to_string())?;
        let grid = grid_arbitrage(&u, &MixSpec::cpmm(), &p, 100_000);
        worst_cf = worst_cf
            .max((impermanent_loss(&p, &start, &fin).il - exact).abs())
            .max((impermanent_loss(&p, &start, &grid).il - exact).abs());
    }
    ensure(worst_cf <= 1e-8, || format!("closed-form error {worst_cf:e}"))?;
    Ok(format!("max IL {worst:e}; CPMM closed-form error {worst_cf:e}"))
}

fn c7_portfolio_value() -> Outcome {
    let u = CurveParams::unit();
    let cpmm = MixSpec::cpmm();
    let p41 = PriceVector::new(4.0, 1.0).unwrap();
    let v = portfolio_value(&u, &cpmm, &p41).map_err(|e| e.to_string())?;
    let v_grid = grid_arbitrage(&u, &cpmm, &p41, 100_000).value(&p41);
    let u1 = reduced_value(&u, &cpmm, 1.0).map_err(|e| e.to_string())?;
    let p11 = PriceVector::new(1.0, 1.0).unwrap();
    let u1_grid = grid_arbitrage(&u, &cpmm, &p11, 100_000).value(&p11);
    ensure((v - 4.0).abs() <= 1e-8 && (v_grid - 4.0).abs() <= 1e-8, || format!("V(4,1) = {v}, grid {v_grid}"))?;
    ensure((u1 - 2.0).abs() <= 1e-8 && (u1_grid - 2.0).abs() <= 1e-8, || format!("U(1) = {u1}, grid {u1_grid}"))?;
    let mut worst_h = 0.0_f64;
    for params in [CurveParams::unit(), CurveParams::reference_pool()] {
        for mix in [MixSpec::arithmetic(0.5).unwrap(), MixSpec::geometric(0.5).unwrap(), MixSpec::homotopy(0.5).unwrap()] {
            let p = PriceVector::new(0.8, 1.1).unwrap();
            let base = portfolio_value(&params, &mix, &p).map_err(|e| e.to_string())?;
            for k in [0.5, 3.0] {
                let vk = portfolio_value(&params, &mix, &p.scaled(k).unwrap()).map_err(|e| e.to_string())?;
                worst_h = worst_h.max((vk - k * base).abs() / (k * base));
            }
        }
    }
    ensure(worst_h <= 1e-10, || format!("homogeneity error {worst_h:e}"))?;
    for r in [0.5, 2.0] {
        let vals: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|stab| reduced_value(&u, &MixSpec::homotopy(1.0 - stab).unwrap(), r).unwrap())
            .collect();
        ensure(vals.windows(2).all(|w| w[1] <= w[0]), || format!("U({r}) over stability: {vals:?}"))?;
    }
    Ok(format!("V(4,1) = {v}, U(1) = {u1}, homogeneity error {worst_h:e}"))
}

fn c8_liquidity() -> Outcome {
    let u = CurveParams::unit();
    let at = u.initial_state();
    for t in [0.0, 0.5] {
        for cur in [Currency::Cur1, Currency::Cur2] {
            let e = max_extractable(&u, &MixSpec::arithmetic(t).unwrap(), &at, cur).map_err(|e| e.to_string())?;
            ensure(e.attainable && e.input_required.is_some_and(f64::is_finite), || format!("arith t={t} {cur:?}: {e:?}"))?;
        }
    }
    for fam in [Family::Geometric, Family::Homotopy] {
        for t in [0.5, 1.0] {
            for cur in [Currency::Cur1, Currency::Cur2] {
                let e = max_extractable(&u, &MixSpec::uniform(fam, t).unwrap(), &at, cur).map_err(|e| e.to_string())?;
                ensure(!e.attainable && e.input_required.is_none(), || format!("{} t={t} {cur:?}: {e:?}", fam.name()))?;
            }
        }
    }
    let pool = CurveParams::reference_pool();
    let mut notes = Vec::new();
    for s in [1e-6, 1.0 - 1e-6] {
        let lam = |fam| lambda_mix(&pool, fam, sp(s), 0.5).unwrap();
        let (la, lg, lh) = (lam(Family::Arithmetic), lam(Family::Geometric), lam(Family::Homotopy));
        ensure(la <= 10.0 * pool.c(), || format!("arith lambda {la} at s={s}"))?;
        ensure(lg > 1e2 && lh > 1e2, || format!("geo {lg}, hom {lh} at s={s}"))?;
        notes.push(format!("s={s}: arith {la:.4}, geo {lg:.4e}, hom {lh:.4e}"));
    }
    let unit_geo = lambda_mix(&u, Family::Geometric, sp(1e-6), 0.5).unwrap();
    Ok(format!("pool curve {}; unit-curve geo lambda at 1e-6 = {unit_geo:.4}", notes.join("; ")))
}

fn c9_simulation_trend() -> Outcome {
    let stabs: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let config = SimConfig { runs: 20, seed: 2024, ..SimConfig::default() };
    let sums = batch_summary(&config, &stabs).map_err(|e| e.to_string())?;
    let mse: Vec<f64> = sums.iter().map(|s| s.mse).collect();
    let slip: Vec<f64> = sums.iter().map(|s| s.early_window_slippage).collect();
    let rho_mse = spearman(&stabs, &mse).map_err(|e| e.to_string())?;
    let rho_slip = spearman(&stabs, &slip).map_err(|e| e.to_string())?;
    ensure(rho_mse >= 0.8 && rho_slip <= -0.5, || format!("spearman mse {rho_mse}, slippage {rho_slip}"))?;
    Ok(format!("spearman(stability, mse) = {rho_mse:.3}, spearman(stability, slippage) = {rho_slip:.3}"))
}

fn c10_erli() -> Outcome {
    let u = CurveParams::unit();
    let sc = default_erli_scenarios(&u);
    let cp = erli_discrepancy(&u, &MixSpec::cpmm(), &sc, &ERLI_SCALES).map_err(|e| e.to_string())?;
    let hom = erli_discrepancy(&u, &MixSpec::homotopy(0.5).unwrap(), &sc, &ERLI_SCALES).map_err(|e| e.to_string())?;
    ensure(cp <= 1e-9 && hom > 1e-6, || format!("cpmm {cp:e}, homotopy {hom:e}"))?;
    Ok(format!("cpmm {cp:e}, homotopy t=0.5 {hom:e}"))
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_command(std::iter::once("ammblend").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).expect("utf-8 output"))
}

fn c11_cli() -> Outcome {
    let args = ["sim-run", "--seed", "77", "--stability", "0.6"];
    let (c1, o1) = cli(&args);
    let (c2, o2) = cli(&args);
    ensure(c1 == 0 && c2 == 0 && !o1.is_empty(), || format!("sim-run exit codes {c1}, {c2}"))?;
    ensure(o1 == o2, || "sim-run outputs differ".into())?;
    let u = CurveParams::unit();
    let mut worst = 0.0_f64;
    let mut rows = 0;
    for fam in Family::ALL {
        for t in [0.25, 0.5, 0.75] {
            let ts = t.to_string();
            let (code, out) = cli(&["curve-sample", "--mix", fam.name(), "--t", &ts]);
            ensure(code == 0, || format!("curve-sample {} t={t} exit {code}", fam.name()))?;
            let mix = MixSpec::uniform(fam, t).unwrap();
            for line in out.lines().skip(1) {
                let f: Vec<f64> = line.split(',').map(|v| v.parse().expect("numeric cell")).collect();
                let st = MarketState::new(f[2], f[3]).map_err(|e| e.to_string())?;
                worst = worst.max((eval_mixed(&u, &mix, &st).map_err(|e| e.to_string())? - 1.0).abs());
                rows += 1;
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max |A - 1| = {worst:e}"))?;
    Ok(format!("sim-run byte-identical ({} bytes); {rows} sampled points, max |A - 1| = {worst:e}", o1.len()))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 11] = [
        ("normalization", Duration::from_secs(1), c1_normalization),
        ("homotopy fraction", Duration::from_secs(1), c2_homotopy_fraction),
        ("convexity cross-validation", Duration::from_secs(5), c3_convexity_cross_validation),
        ("derivative checks", Duration::from_secs(2), c4_derivative_checks),
        ("stableswap equivalence", Duration::from_secs(2), c5_stableswap),
        ("impermanent loss", Duration::from_secs(5), c6_impermanent_loss),
        ("portfolio value", Duration::from_secs(5), c7_portfolio_value),
        ("liquidity dichotomy", Duration::from_secs(1), c8_liquidity),
        ("simulation trend", Duration::from_secs(60), c9_simulation_trend),
        ("ERLI witness", Duration::from_secs(2), c10_erli),
        ("CLI reproducibility", Duration::from_secs(10), c11_cli),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let outcome = match result {
            Ok(detail) if elapsed <= *budget => Ok(detail),
            Ok(detail) => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            Err(e) => Err(e),
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
