use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use weaksel::dynamics::{run_trajectory, ConvergenceSpec, InitSpec, RunSpec, StepperKind};
use weaksel::landscape::{DifferentialFitness, SelectionStrength};
use weaksel::matrix::Matrix;
use weaksel::regret::{best_pair, mixability_series, regret_check, BestPair, RegretReport};
use weaksel::seed;

use super::tag;
use crate::config::{check_positive, resolve_landscape, CliError};
use crate::output::OutDir;

fn default_instances() -> u64 {
    100
}

fn default_max_dim() -> usize {
    10
}

fn default_s_values() -> Vec<SelectionStrength> {
    [0.01, 0.05, 0.1].into_iter().map(|s| SelectionStrength::new(s).expect("in range")).collect()
}

fn default_horizon() -> u64 {
    10_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegretConfig {
    /// Random instances; ignored when a fixed landscape is given.
    #[serde(default = "default_instances")]
    pub instances: u64,
    /// Fixed `[m, n]` for random instances; otherwise both are drawn from `2..=max_dim`.
    #[serde(default)]
    pub dims: Option<[usize; 2]>,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    /// Instance `k` uses `s_values[k mod len]`.
    #[serde(default = "default_s_values")]
    pub s_values: Vec<SelectionStrength>,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    /// The `ln K / s` term assumes a uniform start; other starts are
    /// accepted but the bound then need not hold.
    #[serde(default)]
    pub init: InitSpec,
    /// A fixed landscape, run once per entry of `s_values`.
    #[serde(default)]
    pub delta: Option<Matrix>,
    #[serde(default)]
    pub landscape_file: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Serialize)]
struct Instance {
    index: u64,
    m: usize,
    n: usize,
    s: f64,
    best_pair: BestPair,
    report: RegretReport,
}

#[derive(Serialize)]
struct Summary {
    instances: usize,
    worst_slack: f64,
    all_pass: bool,
}

#[derive(Serialize)]
struct Output<'a> {
    config: &'a RegretConfig,
    summary: Summary,
    instances: Vec<Instance>,
}

fn run_instance(cfg: &RegretConfig, index: u64, fixed: Option<&DifferentialFitness>) -> Result<Instance, CliError> {
    let s = cfg.s_values[index as usize % cfg.s_values.len()];
    let delta = match fixed {
        Some(d) => d.clone(),
        None => {
            let mut rng = seed::stream(cfg.seed, &[tag::CASE, index]);
            let dims = cfg
                .dims
                .unwrap_or_else(|| [rng.gen_range(2..=cfg.max_dim.max(2)), rng.gen_range(2..=cfg.max_dim.max(2))]);
            resolve_landscape(&None, &None, Some(dims), rng.gen())?
        }
    };
    let (m, n) = delta.dims();
    let init = cfg
        .init
        .resolve(m, n, StepperKind::Mwu, seed::derive_seed(cfg.seed, &[tag::INIT, index]))
        .map_err(|e| CliError::field("init", e))?;
    let spec = RunSpec::mwu(s, cfg.horizon).with_stop(ConvergenceSpec::never());
    let series = mixability_series(&run_trajectory(&init, &delta, &spec)?, &delta)?;
    Ok(Instance { index, m, n, s: s.get(), best_pair: best_pair(&series, s)?, report: regret_check(&series, s)? })
}

pub fn run(cfg: RegretConfig, out: &Path) -> Result<(), CliError> {
    check_positive("horizon", cfg.horizon)?;
    if cfg.s_values.is_empty() {
        return Err(CliError::field("s_values", "must not be empty"));
    }
    let fixed = match (&cfg.delta, &cfg.landscape_file) {
        (None, None) => None,
        (d, f) => Some(resolve_landscape(d, f, None, 0)?),
    };
    let count = if fixed.is_some() { cfg.s_values.len() as u64 } else { cfg.instances };
    check_positive("instances", count)?;
    eprintln!("regret: {count} instances, T={}", cfg.horizon);
    let instances: Vec<Instance> =
        (0..count).into_par_iter().map(|k| run_instance(&cfg, k, fixed.as_ref())).collect::<Result<_, _>>()?;
    let summary = Summary {
        instances: instances.len(),
        worst_slack: instances.iter().map(|i| i.report.summary.worst_slack).fold(f64::INFINITY, f64::min),
        all_pass: instances.iter().all(|i| i.report.summary.all_pass),
    };
    let mut csv = String::from("instance,m,n,s,worst_slack,all_pass\n");
    for i in &instances {
        let _ = writeln!(csv, "{},{},{},{:?},{:?},{}", i.index, i.m, i.n, i.s, i.report.summary.worst_slack, i.report.summary.all_pass);
    }
    let all_pass = summary.all_pass;
    let worst = summary.worst_slack;
    let dir = OutDir::create(out)?;
    dir.write("regret.csv", &csv)?;
    dir.write_json("regret.json", &Output { config: &cfg, summary, instances })?;
    eprintln!("regret: worst slack {worst:e}");
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("regret bound violated, worst slack {worst:e}")))
    }
}
