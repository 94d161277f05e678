//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

#[path = "../../core/tests/support/grid_oracle.rs"]
mod grid_oracle;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rvr::commands::{grid_for, GridKind};
use rvr::config::RunConfig;
use rvr::market_data::{generate_gbm, GbmSpec};
use rvr::output::SUMMARY_HEADER;
use rvr::sweep::{run_grid, GridOutput, SweepGrid};
use rvr_core::amm::{log_invariant, optimal_arb_trade, run_pool, ArbParams, PoolState};
use rvr_core::bench::lvr_reference;
use rvr_core::cex::{run_cex, CexCostParams};
use rvr_core::series::PriceSeries;
use rvr_core::strategy::{build_trajectory, StrategyParams, WeightTrajectory};

const PATHS: u64 = 100;
const V0: f64 = 10_000_000.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn gbm_path(seed: u64, steps: usize) -> PriceSeries {
    let spec = GbmSpec {
        labels: vec!["BTC".into(), "ETH".into(), "DAI".into()],
        initial_prices: vec![45_000.0, 3_000.0, 1.0],
        drifts: vec![0.0; 3],
        volatilities: vec![0.00097, 0.00117, 0.00001],
        correlation: vec![vec![1.0, 0.8, 0.0], vec![0.8, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        steps,
        seed,
        start_timestamp: 1_609_459_200,
        step_seconds: 60,
    };
    generate_gbm(&spec).expect("gbm")
}

fn momentum(series: &PriceSeries) -> WeightTrajectory {
    let mut p = StrategyParams::momentum(vec![0.3, 0.6, 0.1], 1.0, 20.0);
    p.rebalance_interval = 60;
    p.interpolation_steps = 60;
    build_trajectory(&p, series).expect("trajectory")
}

fn spreads() -> Vec<f64> {
    vec![2e-4, 2e-4, 1e-4]
}

fn zero_cost_equivalence() -> Outcome {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..PATHS {
        let s = gbm_path(seed, 10_000);
        let traj = momentum(&s);
        let cex = run_cex(&s, &traj, &CexCostParams::frictionless(3), V0, |_, _| {}).unwrap();
        let lvr = lvr_reference(&s, &traj, V0).unwrap();
        for (c, l) in cex.values.iter().zip(&lvr) {
            worst = worst.max((c - l).abs() / l.abs());
        }
    }
    let elapsed = started.elapsed();
    outcome(
        worst <= 1e-9 && within(elapsed, 60),
        format!("max rel diff {worst:e} over {PATHS} paths x 10000 steps in {:.1}s", elapsed.as_secs_f64()),
    )
}

fn frictionless_dominance() -> Outcome {
    let started = Instant::now();
    let arb = ArbParams { gas_cost_usd: 0.0, discovery_delay_steps: 0, noise_multiplier: 0.0 };
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..PATHS {
        let s = gbm_path(1000 + seed, 10_000);
        let traj = momentum(&s);
        let pool = run_pool(&s, &traj, 1.0, &arb, V0, |_, _, _| {}).unwrap();
        let cex = run_cex(&s, &traj, &CexCostParams::frictionless(3), V0, |_, _| {}).unwrap();
        for (p, c) in pool.values.iter().zip(&cex.values) {
            worst = worst.max((p - c) / V0);
        }
    }
    let elapsed = started.elapsed();
    outcome(
        worst <= 1e-9 && within(elapsed, 60),
        format!("max RVR/V0 {worst:e} over {PATHS} paths in {:.1}s", elapsed.as_secs_f64()),
    )
}

fn arbitrage_optimality() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut count = 0;
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for n in [2usize, 3] {
        for gamma in [1.0, 0.997, 0.99] {
            for _ in 0..200 {
                let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
                let total: f64 = raw.iter().sum();
                let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
                let p0: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..5000.0)).collect();
                let reserves: Vec<f64> = weights.iter().zip(&p0).map(|(w, p)| w * 1e6 / p).collect();
                let prices: Vec<f64> = p0.iter().map(|p| p * rng.random_range(-0.3f64..0.3).exp()).collect();
                let state = PoolState { reserves: reserves.clone(), weights: weights.clone(), gamma };
                let ours = optimal_arb_trade(&state, &prices).unwrap().arb_profit_usd;
                let oracle = grid_oracle::grid_arb(&reserves, &weights, &prices, gamma).profit;
                let value: f64 = reserves.iter().zip(&prices).map(|(r, p)| r * p).sum();
                let err = (ours - oracle).abs() / oracle.abs().max(1e-9 * value);
                worst = worst.max(err);
                if err > 1e-6 {
                    failures += 1;
                }
                count += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    outcome(
        failures == 0 && count >= 1000 && within(elapsed, 300),
        format!(
            "{count} instances, {failures} outside 1e-6, worst rel err {worst:e}, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn invariant_accounting() -> Outcome {
    let mut trades = 0usize;
    let mut decreases = 0usize;
    let mut worst_drift: f64 = 0.0;
    for seed in 0..20 {
        let s = gbm_path(2000 + seed, 10_000);
        let traj = momentum(&s);
        for (gamma, nu) in [(0.997, 0.0), (0.99, 1.0), (1.0, 0.0)] {
            let arb = ArbParams { gas_cost_usd: 1.0, discovery_delay_steps: 1, noise_multiplier: nu };
            run_pool(&s, &traj, gamma, &arb, V0, |_, state, r| {
                if !r.trade.executed {
                    return;
                }
                trades += 1;
                if gamma < 1.0 {
                    if r.k_after < r.k_before {
                        decreases += 1;
                    }
                } else {
                    worst_drift = worst_drift.max((r.k_after / r.k_before - 1.0).abs());
                    // recompute independently from reserves
                    let k = log_invariant(&state.reserves, &state.weights).exp();
                    worst_drift = worst_drift.max((k / r.k_after - 1.0).abs());
                }
            })
            .unwrap();
        }
    }
    outcome(
        trades > 0 && decreases == 0 && worst_drift <= 1e-12,
        format!("{trades} trades, {decreases} decreases with fees, max drift without fees {worst_drift:e}"),
    )
}

fn reference_config() -> RunConfig {
    RunConfig::load(&repo().join("configs/btc_eth_dai_90d.toml")).expect("btc_eth_dai_90d.toml")
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cube_residuals() -> Outcome {
    let started = Instant::now();
    let config = reference_config();
    let series = config.load_series().unwrap();
    let grid = grid_for(&config, GridKind::Cube).unwrap();
    let rows = run_grid(&config, &series, &grid, 1, None);
    let traj = build_trajectory(&config.strategy_params(), &series).unwrap();
    let mut worst: f64 = 0.0;
    let mut solves = 0usize;
    for &tau in &grid.tau_cex_bps {
        let costs = CexCostParams { tau_cex: tau * 1e-4, spreads: config.cex.cost_params(3).spreads };
        run_cex(&series, &traj, &costs, config.initial_value_usd, |_, r| {
            worst = worst.max(r.residual_rel);
            solves += 1;
        })
        .unwrap();
    }
    let n_rows = rows.as_ref().map_or(0, Vec::len);
    outcome(
        rows.is_ok() && n_rows == 4851 && worst <= 1e-9,
        format!(
            "{} days, {n_rows} cube cells, {solves} distinct rebalance solves, max residual {worst:e}, {:.1}s",
            series.span_minutes() / 1440.0,
            started.elapsed().as_secs_f64()
        ),
    )
}

fn cex_fee_monotonicity() -> Outcome {
    let mut violations = 0;
    for seed in 0..PATHS {
        let s = gbm_path(3000 + seed, 10_000);
        let traj = momentum(&s);
        let mut last = f64::INFINITY;
        for tau in [0.0, 5.0, 10.0, 15.0, 20.0, 25.0] {
            let costs = CexCostParams { tau_cex: tau * 1e-4, spreads: spreads() };
            let v = *run_cex(&s, &traj, &costs, V0, |_, _| {}).unwrap().values.last().unwrap();
            if v > last {
                violations += 1;
            }
            last = v;
        }
    }
    outcome(violations == 0, format!("{violations} increases over {PATHS} paths x 6 fee levels"))
}

fn gas_and_noise_direction() -> Outcome {
    let gas_levels = [0.0, 1.0, 2.0, 5.0, 10.0];
    let gamma = 0.997;
    let mut mean_pool = vec![0.0; gas_levels.len()];
    let mut mean_rvr = [0.0; 2];
    let mut negative_income = 0;
    for seed in 0..PATHS {
        let s = gbm_path(4000 + seed, 10_000);
        let traj = momentum(&s);
        for (i, &gas) in gas_levels.iter().enumerate() {
            let arb = ArbParams { gas_cost_usd: gas, discovery_delay_steps: 1, noise_multiplier: 0.0 };
            let run = run_pool(&s, &traj, gamma, &arb, V0, |_, _, _| {}).unwrap();
            mean_pool[i] += run.values.last().unwrap() / PATHS as f64;
        }
        let costs = CexCostParams { tau_cex: 10e-4, spreads: spreads() };
        let cex_final = *run_cex(&s, &traj, &costs, V0, |_, _| {}).unwrap().values.last().unwrap();
        for (j, nu) in [0.0, 1.0].into_iter().enumerate() {
            let arb = ArbParams { gas_cost_usd: 1.0, discovery_delay_steps: 1, noise_multiplier: nu };
            let run = run_pool(&s, &traj, gamma, &arb, V0, |_, _, r| {
                if r.noise_income_usd < 0.0 {
                    negative_income += 1;
                }
            })
            .unwrap();
            mean_rvr[j] += (run.values.last().unwrap() - cex_final) / PATHS as f64;
        }
    }
    let gas_ok = mean_pool.windows(2).all(|w| w[1] <= w[0]);
    let noise_ok = mean_rvr[1] > mean_rvr[0] && negative_income == 0;
    outcome(
        gas_ok && noise_ok,
        format!(
            "mean final pool by gas {:?}; mean RVR nu=0 {:.2}, nu=1 {:.2}; {negative_income} negative noise credits",
            mean_pool.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>(),
            mean_rvr[0],
            mean_rvr[1]
        ),
    )
}

fn files_in(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn rvr_cmd(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_rvr"))
        .args(args)
        .stderr(std::process::Stdio::null())
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap()
        .success()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = repo().join("configs/smoke_3x3.toml");
    let config = config.to_str().unwrap();
    let dirs: Vec<PathBuf> = ["sim_a", "sim_b", "sweep_1", "sweep_4"].iter().map(|d| tmp.path().join(d)).collect();
    let s = |p: &PathBuf| p.to_str().unwrap().to_string();
    let ran = rvr_cmd(&["simulate", "--config", config, "--out", &s(&dirs[0])])
        && rvr_cmd(&["simulate", "--config", config, "--out", &s(&dirs[1])])
        && rvr_cmd(&["sweep", "--config", config, "--out", &s(&dirs[2]), "--workers", "1"])
        && rvr_cmd(&["sweep", "--config", config, "--out", &s(&dirs[3]), "--workers", "4"]);
    if !ran {
        return outcome(false, "rvr command failed");
    }
    let sim_same = files_in(&dirs[0]) == files_in(&dirs[1]);
    let sweep_same = files_in(&dirs[2]) == files_in(&dirs[3]);
    let n_files = files_in(&dirs[0]).len();
    outcome(
        sim_same && sweep_same && n_files >= 5,
        format!("simulate x2 identical: {sim_same} ({n_files} CSVs); sweep 1 vs 4 workers identical: {sweep_same}"),
    )
}

fn reference_setup_smoke() -> Outcome {
    let started = Instant::now();
    let config = reference_config();
    let setup_ok = config.cex.tau_cex_bps == 10.0
        && (config.amm.gamma() - (1.0 - 0.014)).abs() < 1e-15
        && config.amm.gas_usd == 1.0
        && config.initial_value_usd == 1e7
        && config.data.labels.as_ref().is_some_and(|l| l.len() == 3);
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("sweep.csv");
    let series = config.load_series().unwrap();
    let grid: SweepGrid = grid_for(&config, GridKind::Sweep).unwrap();
    let output = GridOutput { path: path.clone(), flush_every: 10, progress: false };
    let ran = run_grid(&config, &series, &grid, 1, Some(&output)).is_ok();
    let elapsed = started.elapsed();
    let text = fs::read_to_string(&path).unwrap_or_default();
    let mut lines = text.lines();
    let header_ok = lines.next() == Some(SUMMARY_HEADER.join(",").as_str());
    let rows: Vec<&str> = lines.collect();
    let well_formed = rows.iter().all(|r| {
        let f: Vec<&str> = r.split(',').collect();
        f.len() == 13 && f[1..].iter().all(|x| x.parse::<f64>().is_ok_and(f64::is_finite))
    });
    outcome(
        setup_ok && ran && header_ok && rows.len() == 100 && well_formed && within(elapsed, 600),
        format!(
            "{}x{} grid, {} rows, well-formed {well_formed}, {:.1}s",
            grid.memory_days.len(),
            grid.k.len(),
            rows.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("zero-cost equivalence", zero_cost_equivalence),
        ("frictionless dominance", frictionless_dominance),
        ("arbitrage optimality", arbitrage_optimality),
        ("invariant accounting", invariant_accounting),
        ("fixed-point residual over cost cube", cube_residuals),
        ("CEX fee monotonicity", cex_fee_monotonicity),
        ("gas and noise direction", gas_and_noise_direction),
        ("determinism", determinism),
        ("reference-setup smoke", reference_setup_smoke),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let r = check();
        println!("{} {name}: {}", if r.pass { "PASS" } else { "FAIL" }, r.detail);
        if !r.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
