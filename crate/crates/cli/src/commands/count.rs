use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use weaksel::diversity::{count_equilibria, expected_count_bound, verify_stationarity, EquilibriumCertificate};
use weaksel::landscape::{DifferentialFitness, SelectionStrength};
use weaksel::matrix::Matrix;
use weaksel::seed;
use weaksel::Error;

use super::tag;
use crate::config::{check_positive, resolve_landscape, CliError};
use crate::output::OutDir;

fn four() -> usize {
    4
}

fn two() -> usize {
    2
}

fn one() -> u64 {
    1
}

fn default_s() -> SelectionStrength {
    SelectionStrength::new(0.1).expect("in range")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountConfig {
    #[serde(default = "four")]
    pub m: usize,
    #[serde(default = "four")]
    pub n: usize,
    /// Support size on each locus.
    #[serde(default = "two")]
    pub k: usize,
    #[serde(default = "default_s")]
    pub s: SelectionStrength,
    /// Random `m×n` landscapes; ignored when a fixed landscape is given.
    #[serde(default = "one")]
    pub instances: u64,
    #[serde(default)]
    pub delta: Option<Matrix>,
    #[serde(default)]
    pub landscape_file: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Serialize)]
struct InstanceCertificates {
    instance: u64,
    count: usize,
    extinction: usize,
    singular: usize,
    certificates: Vec<EquilibriumCertificate>,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a CountConfig,
    instances: u64,
    supports_per_instance: u128,
    mean_count: f64,
    standard_error: f64,
    bound: f64,
    all_stationary: bool,
}

fn join(idx: &[usize]) -> String {
    idx.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

fn count_one(delta: &DifferentialFitness, cfg: &CountConfig, instance: u64) -> Result<(InstanceCertificates, bool, u128), CliError> {
    let count = count_equilibria(delta, cfg.s, cfg.k).map_err(|e| match e {
        Error::EnumerationTooLarge(..) | Error::InvalidArgument(_) => CliError::field("k", e),
        e => e.into(),
    })?;
    let stationary = count.equilibria.iter().all(|c| verify_stationarity(delta, cfg.s, c));
    let supports = count.supports;
    Ok((
        InstanceCertificates {
            instance,
            count: count.count(),
            extinction: count.extinction,
            singular: count.singular,
            certificates: count.equilibria,
        },
        stationary,
        supports,
    ))
}

pub fn run(cfg: CountConfig, out: &Path) -> Result<(), CliError> {
    let fixed = match (&cfg.delta, &cfg.landscape_file) {
        (None, None) => None,
        (d, f) => Some(resolve_landscape(d, f, None, 0)?),
    };
    let instances = if fixed.is_some() { 1 } else { cfg.instances };
    check_positive("instances", instances)?;
    eprintln!("count: {instances} instances, k={}", cfg.k);
    let results = (0..instances)
        .into_par_iter()
        .map(|i| {
            let delta = match &fixed {
                Some(d) => d.clone(),
                None => resolve_landscape(&None, &None, Some([cfg.m, cfg.n]), seed::derive_seed(cfg.seed, &[tag::CASE, i]))?,
            };
            count_one(&delta, &cfg, i)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let counts: Vec<f64> = results.iter().map(|r| r.0.count as f64).collect();
    let t = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / t;
    let se = if counts.len() > 1 {
        (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (t - 1.0) / t).sqrt()
    } else {
        0.0
    };
    let (m, n) = fixed.as_ref().map_or((cfg.m, cfg.n), |d| d.dims());
    let summary = Summary {
        config: &cfg,
        instances,
        supports_per_instance: results[0].2,
        mean_count: mean,
        standard_error: se,
        bound: expected_count_bound(m, n, cfg.k),
        all_stationary: results.iter().all(|r| r.1),
    };
    let mut csv = String::from("instance,rows,cols,a,min_frequency\n");
    for (ic, _, _) in &results {
        for c in &ic.certificates {
            let _ = writeln!(csv, "{},{},{},{:?},{:?}", ic.instance, join(&c.rows), join(&c.cols), c.a, c.min_frequency());
        }
    }
    let all_stationary = summary.all_stationary;
    let certs: Vec<InstanceCertificates> = results.into_iter().map(|r| r.0).collect();
    let dir = OutDir::create(out)?;
    dir.write_json("certificates.json", &certs)?;
    dir.write("certificates.csv", &csv)?;
    dir.write_json("summary.json", &summary)?;
    eprintln!("count: mean {mean:.4} per instance");
    if all_stationary {
        Ok(())
    } else {
        Err(CliError::Runtime("a certificate failed the stationarity check".into()))
    }
}
