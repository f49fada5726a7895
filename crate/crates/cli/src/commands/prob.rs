use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use weaksel::diversity::{mc_equilibrium_probability, mc_positive_solution_probability, McEstimate};
use weaksel::landscape::RandomSpec;
use weaksel::seed;

use crate::config::{check_positive, CliError};
use crate::output::OutDir;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbKind {
    /// `B·z = 1` and `Bᵀ·w = 1` both solved by positive vectors.
    Equilibrium,
    /// `B·z = 1` alone.
    Positive,
    #[default]
    Both,
}

/// A single size or a list of sizes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sizes {
    One(usize),
    Many(Vec<usize>),
}

impl Sizes {
    fn list(&self) -> Vec<usize> {
        match self {
            Sizes::One(n) => vec![*n],
            Sizes::Many(v) => v.clone(),
        }
    }
}

fn default_trials() -> u64 {
    100_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbConfig {
    pub n: Sizes,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub kind: ProbKind,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Serialize)]
struct Row {
    kind: &'static str,
    estimate: McEstimate,
}

#[derive(Serialize)]
struct Output<'a> {
    config: &'a ProbConfig,
    estimates: &'a [Row],
}

pub fn run(cfg: ProbConfig, out: &Path) -> Result<(), CliError> {
    check_positive("trials", cfg.trials)?;
    let sizes = cfg.n.list();
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(CliError::field("n", "sizes must be at least 1"));
    }
    let mut rows = Vec::new();
    for (k, &n) in sizes.iter().enumerate() {
        let spec = |which: u64| RandomSpec::uniform(seed::derive_seed(cfg.seed, &[which, k as u64, n as u64]));
        if cfg.kind != ProbKind::Positive {
            eprintln!("prob: equilibrium n={n}, {} trials", cfg.trials);
            rows.push(Row { kind: "equilibrium", estimate: mc_equilibrium_probability(n, cfg.trials, &spec(1))? });
        }
        if cfg.kind != ProbKind::Equilibrium {
            eprintln!("prob: positive n={n}, {} trials", cfg.trials);
            rows.push(Row { kind: "positive", estimate: mc_positive_solution_probability(n, cfg.trials, &spec(2))? });
        }
    }
    let mut csv = String::from("kind,n,trials,successes,singular,p_hat,ci_low,ci_high,bound\n");
    for Row { kind, estimate: e } in &rows {
        let _ = writeln!(
            csv,
            "{kind},{},{},{},{},{:?},{:?},{:?},{:?}",
            e.n, e.trials, e.successes, e.singular, e.p_hat, e.ci_low, e.ci_high, e.bound
        );
    }
    let dir = OutDir::create(out)?;
    dir.write("prob.csv", &csv)?;
    dir.write_json("prob.json", &Output { config: &cfg, estimates: &rows })
}
