//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use stochexp::estimators::{self, moment_oracle_se};
use stochexp::paths::{self, PathBundle};
use stochexp::psi::{self, IntegrandSpec, NovikovVerdict};
use stochexp::wick;
use stochexp::{SeedSpec, TimeGrid};

const SEED: u64 = 20_251_015;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn unit_grid(steps: usize) -> TimeGrid {
    TimeGrid::uniform(1.0, steps).unwrap()
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn within(estimate: f64, target: f64, se: f64, k: f64) -> bool {
    (estimate - target).abs() <= k * se
}

fn martingale_identity(bundle: &PathBundle, secs: f64) -> Outcome {
    let r = estimators::estimate_mean_z(bundle, bundle.n_nodes() - 1).unwrap();
    let z = (r.estimate - 1.0) / r.std_error;
    outcome(
        r.pass == Some(true) && secs <= 10.0,
        format!(
            "mean Z(1) = {:.6} se = {:.3e} ({z:+.2} se), simulate+estimate {secs:.2}s on 1 thread",
            r.estimate, r.std_error
        ),
    )
}

fn moment_law(bundle: &PathBundle) -> Outcome {
    let e = std::f64::consts::E;
    let r2 = estimators::estimate_p_moment(bundle, bundle.n_nodes() - 1, 2.0).unwrap();
    let se2 = moment_oracle_se(2.0, 1.0, bundle.n_paths);
    let ok2 = within(r2.estimate, e, se2, 3.0);

    let n3 = 10_000_000;
    let grid = unit_grid(4);
    let spec = IntegrandSpec::constant(1.0);
    let values = paths::terminal_values(&spec, &grid, n3, SeedSpec::with_stream(SEED, 2), false).unwrap();
    let r3 = estimators::estimate_terminal_p_moment(&values, 3.0, 1.0, 1.0, false).unwrap();
    let se3 = moment_oracle_se(3.0, 1.0, n3);
    let target3 = (3.0f64).exp();
    let ok3 = within(r3.estimate, target3, se3, 3.0);
    outcome(
        ok2 && ok3,
        format!(
            "p=2: {:.5} vs {e:.5} oracle se {se2:.4} ({:+.2} se); p=3 n=1e7: {:.4} vs {target3:.4} oracle se {se3:.4} ({:+.2} se, jackknife se {:.4})",
            r2.estimate,
            (r2.estimate - e) / se2,
            r3.estimate,
            (r3.estimate - target3) / se3,
            r3.std_error
        ),
    )
}

fn submartingale_monotonicity() -> Outcome {
    let grid = unit_grid(16);
    let spec = IntegrandSpec::constant(1.0);
    let mut pass = grid.n_nodes() == 17;
    let mut parts = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let targets = estimators::moment_targets(&spec, &grid, p).unwrap();
        let strict = targets.windows(2).all(|w| w[1] > w[0]);
        pass &= strict;
        parts.push(format!("p={p}: {} -> {:.4} strict={strict}", targets[0], targets[16]));
    }
    outcome(pass, parts.join("; "))
}

fn cumulant_vanishing() -> Outcome {
    let cgf = wick::cgf_truncated(&IntegrandSpec::constant(1.0), 1.0, 14).unwrap();
    let high: Vec<_> = cgf.orders.iter().filter(|(m, _)| *m >= 3).collect();
    let orders: Vec<usize> = high.iter().map(|(m, _)| *m).collect();
    let zero = high.iter().all(|(_, v)| v.to_bits() == 0);
    outcome(zero && orders == (3..=14).collect::<Vec<_>>(), format!("orders 3..14 all bitwise +0.0: {zero}"))
}

fn log_relation() -> Outcome {
    let mgf = wick::mgf_truncated(&IntegrandSpec::constant(1.0), 1.0, 14).unwrap();
    let gap = (mgf.total.ln() - 0.5).abs();
    outcome(gap <= 1e-6, format!("MGF_14 = {:.15}, |ln MGF - 0.5| = {gap:.3e}", mgf.total))
}

fn pairing_combinatorics() -> Outcome {
    let mut expected = 1u128;
    let mut pass = true;
    let mut counts = Vec::new();
    for m in (2..=14).step_by(2) {
        expected *= (m - 1) as u128;
        let got = wick::enumerate_pairings(m).unwrap().len() as u128;
        pass &= got == expected;
        counts.push(got.to_string());
    }
    outcome(pass, format!("counts {}", counts.join(", ")))
}

fn wick_vs_simulation() -> Outcome {
    let exact = wick::gaussian_moment(1.0, 4).unwrap();
    let mc = wick::discrete_moment_oracle(
        &IntegrandSpec::constant(1.0),
        &unit_grid(4),
        4,
        1_000_000,
        SeedSpec::with_stream(SEED, 7),
    )
    .unwrap();
    outcome(
        exact == 3.0 && within(mc.mean, exact, mc.std_error, 3.0),
        format!(
            "gaussian_moment(1,4) = {exact}, MC {:.5} se {:.4} ({:+.2} se)",
            mc.mean,
            mc.std_error,
            (mc.mean - exact) / mc.std_error
        ),
    )
}

fn novikov_divergence() -> Outcome {
    let spec = IntegrandSpec::inverse_sqrt_blowup(1.0, 1.0).unwrap();
    let at_one = psi::novikov_check(&spec, 1.0).unwrap();
    let at_half = psi::novikov_check(&spec, 0.5).unwrap();
    let half_phi = at_half.half_phi.unwrap_or(f64::NAN);
    let err = (half_phi - 0.5 * std::f64::consts::LN_2).abs();
    outcome(
        at_one.verdict == NovikovVerdict::Divergent && at_half.verdict == NovikovVerdict::Finite && err <= 1e-9,
        format!("T=1 {:?}; T=0.5 half_phi = {half_phi:.15} (err {err:.1e})", at_one.verdict),
    )
}

fn drifted_gbm() -> Outcome {
    let r = estimators::drift_expectation_check(
        1.0,
        1.0,
        &IntegrandSpec::constant(1.0),
        &unit_grid(4),
        1_000_000,
        SeedSpec::with_stream(SEED, 9),
    )
    .unwrap();
    outcome(
        r.pass == Some(true),
        format!(
            "mean X(1) = {:.5} se {:.4} ({:+.2} se) vs e",
            r.estimate,
            r.std_error,
            (r.estimate - std::f64::consts::E) / r.std_error
        ),
    )
}

fn increment_test(bundle: &PathBundle) -> Outcome {
    let s = bundle.grid.nearest_index(0.5);
    let t = bundle.n_nodes() - 1;
    let clean = estimators::martingale_increment_test(bundle, s, t, 16).unwrap();
    let per_bin = (bundle.n_paths / 16) as f64;
    let rel_se = ((0.5f64).exp() - 1.0).sqrt() / per_bin.sqrt();
    let rate = (1.0 + 5.0 * rel_se).ln() / 0.5;
    let drifted = estimators::martingale_increment_test(&bundle.with_injected_drift(rate, s), s, t, 16).unwrap();
    outcome(
        clean.pass && !drifted.pass,
        format!(
            "clean max |gap| {:.2} se (pass={}); drift rate {rate:.4e} max |gap| {:.2} se (pass={})",
            clean.max_abs_gap_in_se, clean.pass, drifted.max_abs_gap_in_se, drifted.pass
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    let out = dir.path().join("out");
    fs::write(
        &cfg,
        format!(
            r#"{{"psi": {{"kind": "constant", "params": [1]}}, "horizon": 1, "steps": 8, "n_paths": 200000, "seed": {SEED}, "p_values": [1.5, 2], "output_dir": "{}"}}"#,
            out.display()
        ),
    )
    .unwrap();
    let run = |workers: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_stochexp"))
            .args(["estimate", "--config", cfg.to_str().unwrap(), "--workers", workers])
            .output()
            .unwrap();
        (status.status.code(), fs::read(out.join("estimate_report.json")).unwrap())
    };
    let (c1, a) = run("8");
    let (c2, b) = run("8");
    let (c3, c) = run("1");
    outcome(
        c1.is_some() && c1 == c2 && c2 == c3 && a == b && a == c,
        format!("{} byte report, repeat identical: {}, 1 vs 8 workers identical: {}", a.len(), a == b, a == c),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut results: Vec<(&str, Outcome)> = Vec::new();

    let t0 = Instant::now();
    let bundle = single_threaded(|| {
        let b = paths::stoch_exp_exact(&IntegrandSpec::constant(1.0), &unit_grid(4), 1_000_000, SeedSpec::new(SEED))
            .unwrap();
        estimators::estimate_mean_z(&b, b.n_nodes() - 1).unwrap();
        b
    });
    let secs = t0.elapsed().as_secs_f64();

    results.push(("1 martingale identity", martingale_identity(&bundle, secs)));
    results.push(("2 p-th moment law", moment_law(&bundle)));
    results.push(("3 submartingale monotonicity", submartingale_monotonicity()));
    results.push(("4 cumulant vanishing", cumulant_vanishing()));
    results.push(("5 mgf/cgf log relation", log_relation()));
    results.push(("6 pairing combinatorics", pairing_combinatorics()));
    results.push(("7 wick vs simulation", wick_vs_simulation()));
    results.push(("8 novikov divergence", novikov_divergence()));
    results.push(("9 drifted gbm", drifted_gbm()));
    results.push(("10 martingale increment test", increment_test(&bundle)));
    drop(bundle);
    results.push(("11 determinism", determinism()));

    let mut failed = 0;
    for (name, o) in &results {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
