use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use weaksel::dynamics::{marginals, step_genotype, step_mwu, GenotypeState, MarginalState, RecombinationRate};
use weaksel::landscape::{from_differential, sample_differential_rect, RandomSpec, SelectionStrength};
use weaksel::seed;

use super::tag;
use crate::config::{check_positive, CliError};
use crate::output::OutDir;

pub const TOLERANCE: f64 = 1e-13;

fn default_cases() -> u64 {
    1000
}

fn default_max_dim() -> usize {
    20
}

fn default_s_max() -> SelectionStrength {
    SelectionStrength::new(0.1).expect("in range")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConfig {
    #[serde(default = "default_cases")]
    pub cases: u64,
    /// Fixed `[m, n]`; otherwise each case draws both from `1..=max_dim`.
    #[serde(default)]
    pub dims: Option<[usize; 2]>,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    /// Fixed strength; otherwise each case draws `s` from `(0, s_max]`.
    #[serde(default)]
    pub s: Option<SelectionStrength>,
    #[serde(default = "default_s_max")]
    pub s_max: SelectionStrength,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Case {
    index: u64,
    m: usize,
    n: usize,
    s: f64,
    deviation: f64,
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a EquivalenceConfig,
    tolerance: f64,
    max_deviation: f64,
    worst_case: Case,
    pass: bool,
}

fn simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

fn one_case(cfg: &EquivalenceConfig, index: u64) -> Result<Case, CliError> {
    let mut rng = seed::stream(cfg.seed, &[tag::CASE, index]);
    let [m, n] = cfg.dims.unwrap_or_else(|| [rng.gen_range(1..=cfg.max_dim), rng.gen_range(1..=cfg.max_dim)]);
    let s = match cfg.s {
        Some(s) => s,
        None => SelectionStrength::new(cfg.s_max.get() * (1.0 - rng.gen::<f64>()))?,
    };
    let delta = sample_differential_rect(m, n, &RandomSpec::uniform(rng.gen()))?;
    let (x, y) = (simplex(&mut rng, m), simplex(&mut rng, n));
    let w = from_differential(&delta, s)?;
    let genotype = step_genotype(&GenotypeState::product(&x, &y)?, &w, RecombinationRate::FREE, None)?;
    let mwu = step_mwu(&MarginalState::two(x, y)?, &delta, s)?;
    Ok(Case { index, m, n, s: s.get(), deviation: marginals(&genotype).max_abs_diff(&mwu) })
}

pub fn run(cfg: EquivalenceConfig, out: &Path) -> Result<(), CliError> {
    check_positive("cases", cfg.cases)?;
    check_positive("max_dim", cfg.max_dim as u64)?;
    if let Some([m, n]) = cfg.dims {
        check_positive("dims", (m.min(n)) as u64)?;
    }
    eprintln!("equivalence: {} cases", cfg.cases);
    let cases: Vec<Case> = (0..cfg.cases).into_par_iter().map(|k| one_case(&cfg, k)).collect::<Result<_, _>>()?;
    let worst = *cases
        .iter()
        .max_by(|a, b| a.deviation.total_cmp(&b.deviation).then(b.index.cmp(&a.index)))
        .expect("at least one case");
    let pass = worst.deviation <= TOLERANCE;
    OutDir::create(out)?.write_json(
        "equivalence.json",
        &Report { config: &cfg, tolerance: TOLERANCE, max_deviation: worst.deviation, worst_case: worst, pass },
    )?;
    eprintln!("equivalence: max deviation {:e}", worst.deviation);
    if pass {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("max deviation {:e} exceeds {TOLERANCE:e}", worst.deviation)))
    }
}
