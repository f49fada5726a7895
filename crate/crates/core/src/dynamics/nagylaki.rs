//! Empirical scaling of linkage disequilibrium with selection strength.
//!
//! Under weak selection the genotype dynamics relax towards the Wright
//! manifold within `t0 = 3·ln(1/s)` generations and stay within `O(s)` of it
//! afterwards. The profile measures `max_{t ≥ t0} ‖D_t‖∞` for several `s`
//! from identical starts and reports how it changes between levels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::genotype::{step_genotype, step_genotype_mating, MatingIndexing, RecombinationRate};
use super::state::{linkage, GenotypeState};
use crate::error::{invalid, Error, Result};
use crate::landscape::{from_differential, sample_differential_rect, sample_simplex, DifferentialFitness, RandomSpec, SelectionStrength};
use crate::matrix::Matrix;
use crate::seed;

/// `⌈3·ln(1/s)⌉`.
pub fn relaxation_time(s: SelectionStrength) -> u64 {
    (3.0 * (1.0 / s.get()).ln()).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LdStepper {
    /// Recombination form with `r = 1`.
    Canonical,
    Mating(MatingIndexing),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NagylakiConfig {
    pub m: usize,
    pub n: usize,
    /// Selection strengths, conventionally in decreasing order.
    pub s_values: Vec<f64>,
    /// Generations simulated per run.
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub stepper: LdStepper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdLevel {
    pub s: f64,
    pub t0: u64,
    /// `max_{t0 ≤ t ≤ T} ‖D_t‖∞` for each seed.
    pub per_seed: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdProfile {
    pub levels: Vec<LdLevel>,
    /// `mean[k] / mean[k + 1]` for consecutive levels.
    pub ratios: Vec<f64>,
}

/// The per-seed start: a random joint distribution over genotypes, which is
/// off the Wright manifold with probability one.
pub fn random_joint_start(m: usize, n: usize, seed: u64) -> GenotypeState {
    let mut rng = seed::stream(seed, &[0x5eed, 1]);
    let p = sample_simplex(&mut rng, m * n);
    GenotypeState::new(Matrix::from_row_major(m, n, p).expect("sized")).expect("simplex draw")
}

fn ld_statistic(
    start: &GenotypeState,
    delta: &DifferentialFitness,
    s: SelectionStrength,
    horizon: u64,
    stepper: LdStepper,
) -> Result<f64> {
    let w = from_differential(delta, s)?;
    let t0 = relaxation_time(s);
    let mut state = start.clone();
    let mut worst: f64 = if t0 == 0 { linkage(&state).max_abs } else { 0.0 };
    for t in 1..=horizon.max(t0) {
        state = match stepper {
            LdStepper::Canonical => step_genotype(&state, &w, RecombinationRate::FREE, None),
            LdStepper::Mating(idx) => step_genotype_mating(&state, &w, idx),
        }
        .map_err(|e| Error::AtGeneration { generation: t - 1, source: Box::new(e) })?;
        if t >= t0 {
            worst = worst.max(linkage(&state).max_abs);
        }
    }
    Ok(worst)
}

/// Runs every `(s, seed)` pair. With `delta = None` each seed also draws its
/// own landscape; either way the landscape and start for a seed are shared by
/// all `s` levels.
pub fn nagylaki_ld_profile(delta: Option<&DifferentialFitness>, cfg: &NagylakiConfig) -> Result<LdProfile> {
    if cfg.s_values.len() < 2 {
        return Err(invalid("the profile needs at least two selection strengths"));
    }
    if cfg.seeds.is_empty() {
        return Err(invalid("the profile needs at least one seed"));
    }
    let strengths = cfg.s_values.iter().map(|&s| SelectionStrength::new(s)).collect::<Result<Vec<_>>>()?;
    if let Some(d) = delta {
        if d.dims() != (cfg.m, cfg.n) {
            return Err(Error::DimensionMismatch(format!("landscape is {:?}, config {}x{}", d.dims(), cfg.m, cfg.n)));
        }
    }
    let instances = cfg
        .seeds
        .iter()
        .map(|&sd| {
            let d = match delta {
                Some(d) => d.clone(),
                None => sample_differential_rect(cfg.m, cfg.n, &RandomSpec::uniform(seed::derive_seed(sd, &[0x5eed, 0])))?,
            };
            Ok((d, random_joint_start(cfg.m, cfg.n, sd)))
        })
        .collect::<Result<Vec<_>>>()?;
    let levels = strengths
        .iter()
        .map(|&s| {
            let per_seed = instances
                .par_iter()
                .map(|(d, start)| ld_statistic(start, d, s, cfg.horizon, cfg.stepper))
                .collect::<Result<Vec<_>>>()?;
            let mean = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
            Ok(LdLevel { s: s.get(), t0: relaxation_time(s), per_seed, mean })
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios = levels.windows(2).map(|w| w[0].mean / w[1].mean).collect();
    Ok(LdProfile { levels, ratios })
}
