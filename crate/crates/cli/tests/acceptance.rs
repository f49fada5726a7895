//! Acceptance gate. One test per criterion; each prints a single PASS/FAIL
//! line with the measured statistic before asserting.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use weaksel::diversity::{
    apply_flips, count_equilibria, distinct_flippings, expected_count_bound, flip_to_nonnegative,
    is_equilibrium_submatrix, mc_equilibrium_probability, mc_positive_solution_probability, verify_stationarity,
    NEGATIVE_SUM_TOL,
};
use weaksel::dynamics::{
    marginals, nagylaki_ld_profile, run_trajectory, step_genotype, step_mwu, ConvergenceSpec, GenotypeState,
    InitialState, LdStepper, MarginalState, NagylakiConfig, NoiseSpec, RecombinationRate, RunSpec,
};
use weaksel::landscape::{
    from_differential, sample_differential, sample_differential_rect, DifferentialFitness, RandomSpec,
    SelectionStrength,
};
use weaksel::matrix::Matrix;
use weaksel::regret::{mixability_series, regret_check, robustness_experiment};
use weaksel::seed;

fn report(id: &str, pass: bool, detail: String, elapsed: Duration, limit: Duration) {
    let within = elapsed <= limit;
    println!(
        "[{}] {id}: {detail} ({:.2}s, limit {:.0}s)",
        if pass && within { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
    assert!(pass, "{id} failed: {detail}");
    assert!(within, "{id} exceeded its runtime limit: {elapsed:?}");
}

fn strength(s: f64) -> SelectionStrength {
    SelectionStrength::new(s).unwrap()
}

fn simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let t: f64 = e.iter().sum();
    e.into_iter().map(|v| v / t).collect()
}

#[test]
fn c01_genotype_step_equals_multiplicative_update() {
    let start = Instant::now();
    let cases = 10_000u64;
    let worst = (0..cases)
        .into_par_iter()
        .map(|c| {
            let mut rng = seed::stream(0xC01, &[c]);
            let (m, n) = (rng.gen_range(1..=20), rng.gen_range(1..=20));
            let s = strength(rng.gen_range(1e-4..=0.1));
            let delta = sample_differential_rect(m, n, &RandomSpec::uniform(rng.gen())).unwrap();
            let (x, y) = (simplex(&mut rng, m), simplex(&mut rng, n));
            let product = GenotypeState::product(&x, &y).unwrap();
            let w = from_differential(&delta, s).unwrap();
            let genotype_route = marginals(&step_genotype(&product, &w, RecombinationRate::FREE, None).unwrap());
            let mwu_route = step_mwu(&MarginalState::two(x, y).unwrap(), &delta, s).unwrap();
            genotype_route.max_abs_diff(&mwu_route)
        })
        .reduce(|| 0.0, f64::max);
    report(
        "C1 one-step identity",
        worst <= 1e-13,
        format!("{cases} cases, dims <= 20x20, max deviation {worst:.3e} (tol 1e-13)"),
        start.elapsed(),
        Duration::from_secs(10),
    );
}

#[test]
fn c02_regret_bound_on_mwu_trajectories() {
    let start = Instant::now();
    let s_values = [0.01, 0.05, 0.1];
    let horizon = 10_000;
    let results: Vec<(f64, bool)> = (0..100u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed::stream(0xC02, &[k]);
            let (m, n) = (rng.gen_range(2..=10), rng.gen_range(2..=10));
            let s = strength(s_values[k as usize % 3]);
            let delta = sample_differential_rect(m, n, &RandomSpec::uniform(rng.gen())).unwrap();
            let init = InitialState::Marginal(MarginalState::uniform(&[m, n]));
            let spec = RunSpec::mwu(s, horizon).with_stop(ConvergenceSpec::never());
            let traj = run_trajectory(&init, &delta, &spec).unwrap();
            let rep = regret_check(&mixability_series(&traj, &delta).unwrap(), s).unwrap();
            (rep.summary.worst_slack, rep.summary.all_pass)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let all = results.iter().all(|r| r.1);
    report(
        "C2 regret bound",
        all && worst >= -1e-9,
        format!("100 instances up to 10x10, T={horizon}, worst slack {worst:.4}"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn c03_linkage_disequilibrium_scales_with_s() {
    let start = Instant::now();
    let delta = sample_differential(4, &RandomSpec::uniform(0xC03)).unwrap();
    let cfg = NagylakiConfig {
        m: 4,
        n: 4,
        s_values: vec![0.1, 0.05, 0.025],
        horizon: 400,
        seeds: (0..20).collect(),
        stepper: LdStepper::Canonical,
    };
    let profile = nagylaki_ld_profile(Some(&delta), &cfg).unwrap();
    let ok = profile.ratios.iter().all(|r| (1.3..=3.0).contains(r));
    let means: Vec<String> = profile.levels.iter().map(|l| format!("s={}:{:.3e}", l.s, l.mean)).collect();
    report(
        "C3 LD O(s) scaling",
        ok,
        format!("{} ratios {:?} (band [1.3, 3])", means.join(" "), profile.ratios),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn c04_equilibrium_probability_bound() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for n in 1..=4 {
        let est = mc_equilibrium_probability(n, 100_000, &RandomSpec::uniform(0xC04 + n as u64)).unwrap();
        let pass = if n == 1 { est.brackets(0.5) } else { est.p_hat >= est.bound - est.half_width() };
        ok &= pass;
        lines.push(format!("n={n}: p={:.5} [{:.5},{:.5}] bound {:.5}", est.p_hat, est.ci_low, est.ci_high, est.bound));
    }
    report("C4 equilibrium probability", ok, lines.join("; "), start.elapsed(), Duration::from_secs(30));
}

#[test]
fn c05_positive_solution_probability() {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for n in 1..=5 {
        let est = mc_positive_solution_probability(n, 1_000_000, &RandomSpec::uniform(0xC05 + n as u64)).unwrap();
        ok &= est.brackets(est.bound);
        lines.push(format!("n={n}: p={:.5} [{:.5},{:.5}] vs {:.5}", est.p_hat, est.ci_low, est.ci_high, est.bound));
    }
    report("C5 positive solution probability", ok, lines.join("; "), start.elapsed(), Duration::from_secs(60));
}

#[test]
fn c06_flipping_search() {
    let start = Instant::now();
    let failures: u64 = (0..100_000u64)
        .into_par_iter()
        .map(|k| {
            let n = 1 + (k % 12) as usize;
            let b = sample_differential(n, &RandomSpec::uniform(seed::derive_seed(0xC06, &[k]))).unwrap();
            let Ok(out) = flip_to_nonnegative(b.matrix()) else { return 1 };
            let f = &out.flipped;
            let sums_ok = f.row_sums().iter().chain(&f.col_sums()).all(|&s| s >= -NEGATIVE_SUM_TOL);
            let trace = &out.sets.potential_trace;
            let trace_ok = out.sets.steps.iter().enumerate().all(|(i, st)| {
                trace[i + 1] > trace[i] && (trace[i + 1] - trace[i] - 2.0 * -st.sum_before).abs() <= 1e-12
            });
            u64::from(!(sums_ok && trace_ok))
        })
        .sum();
    report(
        "C6 flipping lemma",
        failures == 0,
        format!("100000 matrices n<=12, {failures} failures"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn c07_orbit_witness() {
    let start = Instant::now();
    let missing: u64 = (0..1000u64)
        .into_par_iter()
        .map(|k| {
            let n = 2 + (k % 3) as usize;
            let b = sample_differential(n, &RandomSpec::uniform(seed::derive_seed(0xC07, &[k]))).unwrap();
            let found = distinct_flippings(n).any(|(r, c)| is_equilibrium_submatrix(&apply_flips(b.matrix(), &r, &c)));
            u64::from(!found)
        })
        .sum();
    report(
        "C7 orbit witness",
        missing == 0,
        format!("1000 matrices n in {{2,3,4}}, {missing} without a witness"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn c08_expected_equilibrium_count() {
    let start = Instant::now();
    let s = strength(0.1);
    let results: Vec<(usize, bool)> = (0..10_000u64)
        .into_par_iter()
        .map(|k| {
            let delta = sample_differential(4, &RandomSpec::uniform(seed::derive_seed(0xC08, &[k]))).unwrap();
            let count = count_equilibria(&delta, s, 2).unwrap();
            let sound = count.equilibria.iter().all(|c| verify_stationarity(&delta, s, c));
            (count.count(), sound)
        })
        .collect();
    let t = results.len() as f64;
    let mean = results.iter().map(|r| r.0 as f64).sum::<f64>() / t;
    let var = results.iter().map(|r| (r.0 as f64 - mean).powi(2)).sum::<f64>() / (t - 1.0);
    let se = (var / t).sqrt();
    let bound = expected_count_bound(4, 4, 2);
    let sound = results.iter().all(|r| r.1);
    report(
        "C8 expected 2x2 equilibria",
        mean >= bound - 3.0 * se && sound,
        format!("mean {mean:.4} (SE {se:.4}) vs bound {bound}; all certificates stationary: {sound}"),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

/// Row `i*` beats every other row entrywise in each column by at least 0.2,
/// and within row `i*` column `j*` beats the rest by at least 0.2.
fn dominant_instance(m: usize, n: usize, k: u64) -> (DifferentialFitness, usize, usize) {
    let mut rng = seed::stream(0xC09, &[k]);
    let (istar, jstar) = (rng.gen_range(0..m), rng.gen_range(0..n));
    let d = Matrix::from_fn(m, n, |i, j| match (i == istar, j == jstar) {
        (true, true) => rng.gen_range(0.8..0.9),
        (true, false) => rng.gen_range(0.4..0.6),
        (false, _) => rng.gen_range(-1.0..0.2),
    });
    (DifferentialFitness::new(d).unwrap(), istar, jstar)
}

#[test]
fn c09_noise_robustness() {
    let start = Instant::now();
    let s = strength(0.1);
    let results: Vec<(bool, f64)> = (0..20u64)
        .into_par_iter()
        .map(|k| {
            let (delta, istar, jstar) = dominant_instance(4, 4, k);
            let init = MarginalState::uniform(&[4, 4]);
            let rep = robustness_experiment(&delta, s, NoiseSpec::on(0xC09 + k), 100_000, &[k], &init).unwrap();
            let run = &rep.runs[0];
            let same = run.clean_argmax == run.noisy_argmax && run.clean_argmax == (istar, jstar);
            (same, run.time_avg_distance)
        })
        .collect();
    let all_same = results.iter().all(|r| r.0);
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    report(
        "C9 noise robustness",
        all_same && worst < 0.05,
        format!("20 instances, T=100000, same argmax: {all_same}, max time-avg distance {worst:.2e}"),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

fn bin() -> &'static Path {
    Path::new(env!("CARGO_BIN_EXE_weaksel"))
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn c10_cli_reproducibility() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let configs = [
        ("simulate", r#"{"dims":[3,4],"s":0.05,"stepper":"genotype","horizon":300,"init":"random-dirichlet","noise":true,"seed":3}"#),
        ("equivalence", r#"{"cases":500,"max_dim":8,"seed":4}"#),
        ("regret", r#"{"instances":6,"max_dim":5,"horizon":500,"seed":5}"#),
        ("flip", r#"{"matrices":2000,"max_n":8,"seed":6}"#),
        ("prob", r#"{"n":3,"trials":20000,"seed":7}"#),
        ("count", r#"{"m":4,"n":4,"k":2,"s":0.1,"instances":50,"seed":8}"#),
    ];
    let mut mismatches = Vec::new();
    for (cmd, cfg) in configs {
        let cfg_path = tmp.path().join(format!("{cmd}.json"));
        std::fs::write(&cfg_path, cfg).unwrap();
        let mut outputs = Vec::new();
        for threads in ["1", "4", "1"] {
            let out = tmp.path().join(format!("{cmd}-{threads}-{}", outputs.len()));
            let status = Command::new(bin())
                .args([cmd, "--config"])
                .arg(&cfg_path)
                .arg("--out")
                .arg(&out)
                .args(["--threads", threads])
                .output()
                .unwrap();
            assert!(status.status.success(), "{cmd}: {}", String::from_utf8_lossy(&status.stderr));
            outputs.push(read_dir_sorted(&out));
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) || outputs[0].is_empty() {
            mismatches.push(cmd);
        }
    }
    report(
        "C10 CLI reproducibility",
        mismatches.is_empty(),
        format!("6 subcommands x threads {{1,4,1}}, differing: {mismatches:?}"),
        start.elapsed(),
        Duration::from_secs(120),
    );
}
