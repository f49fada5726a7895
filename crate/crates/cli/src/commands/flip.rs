use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use weaksel::diversity::{flip_to_nonnegative, FlipSets, NEGATIVE_SUM_TOL};
use weaksel::landscape::{sample_differential, RandomSpec};
use weaksel::matrix::Matrix;
use weaksel::seed;

use super::tag;
use crate::config::{check_positive, CliError};
use crate::output::OutDir;

fn default_matrices() -> u64 {
    10_000
}

fn default_max_n() -> usize {
    12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlipConfig {
    /// A single square matrix to flip; its full trace is written.
    #[serde(default)]
    pub matrix: Option<Matrix>,
    #[serde(default = "default_matrices")]
    pub matrices: u64,
    /// Fixed size for random matrices; otherwise drawn from `1..=max_n`.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Serialize)]
struct Trace<'a> {
    config: &'a FlipConfig,
    sets: &'a FlipSets,
    flipped: &'a Matrix,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a FlipConfig,
    matrices: u64,
    max_flips: usize,
    mean_flips: f64,
    all_sums_nonnegative: bool,
    all_increments_match: bool,
}

struct Checked {
    n: usize,
    flips: usize,
    sums_ok: bool,
    increments_ok: bool,
}

fn check(b: &Matrix) -> Result<(Checked, weaksel::diversity::FlipOutcome), CliError> {
    let out = flip_to_nonnegative(b)?;
    let f = &out.flipped;
    let sums_ok = f.row_sums().iter().chain(&f.col_sums()).all(|&v| v >= -NEGATIVE_SUM_TOL);
    let trace = &out.sets.potential_trace;
    let increments_ok = out
        .sets
        .steps
        .iter()
        .enumerate()
        .all(|(k, st)| (trace[k + 1] - trace[k] + 2.0 * st.sum_before).abs() <= 1e-12);
    Ok((Checked { n: b.rows(), flips: out.sets.flip_count, sums_ok, increments_ok }, out))
}

pub fn run(cfg: FlipConfig, out: &Path) -> Result<(), CliError> {
    let dir;
    if let Some(b) = &cfg.matrix {
        if !b.is_square() || b.rows() == 0 {
            return Err(CliError::field("matrix", format!("must be square and nonempty, got {}x{}", b.rows(), b.cols())));
        }
        let (_, outcome) = check(b)?;
        eprintln!("flip: {} flips", outcome.sets.flip_count);
        dir = OutDir::create(out)?;
        return dir.write_json("flip_trace.json", &Trace { config: &cfg, sets: &outcome.sets, flipped: &outcome.flipped });
    }
    check_positive("matrices", cfg.matrices)?;
    check_positive("max_n", cfg.max_n as u64)?;
    if let Some(n) = cfg.n {
        check_positive("n", n as u64)?;
    }
    eprintln!("flip: {} random matrices", cfg.matrices);
    let results: Vec<Checked> = (0..cfg.matrices)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed::stream(cfg.seed, &[tag::CASE, k]);
            let n = cfg.n.unwrap_or_else(|| rng.gen_range(1..=cfg.max_n));
            let b = sample_differential(n, &RandomSpec::uniform(rng.gen()))?;
            Ok(check(b.matrix())?.0)
        })
        .collect::<Result<_, CliError>>()?;
    let mut histogram: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for r in &results {
        *histogram.entry((r.n, r.flips)).or_default() += 1;
    }
    let mut csv = String::from("n,flips,count\n");
    for ((n, flips), count) in &histogram {
        let _ = writeln!(csv, "{n},{flips},{count}");
    }
    let summary = Summary {
        config: &cfg,
        matrices: cfg.matrices,
        max_flips: results.iter().map(|r| r.flips).max().unwrap_or(0),
        mean_flips: results.iter().map(|r| r.flips as f64).sum::<f64>() / results.len() as f64,
        all_sums_nonnegative: results.iter().all(|r| r.sums_ok),
        all_increments_match: results.iter().all(|r| r.increments_ok),
    };
    let ok = summary.all_sums_nonnegative && summary.all_increments_match;
    dir = OutDir::create(out)?;
    dir.write("flip_histogram.csv", &csv)?;
    dir.write_json("flip_summary.json", &summary)?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Runtime("flipping search left a negative line or a mismatched potential step".into()))
    }
}
