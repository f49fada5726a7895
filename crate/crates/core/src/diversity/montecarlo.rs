//! Monte Carlo estimates over random differential matrices.
//!
//! Trial `t` draws its matrix from `RandomSpec::derive(&[t])`, so estimates
//! are identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linsys::{has_positive_solution, solve_unit_systems, UnitSolution, POSITIVITY_THRESHOLD};
use crate::error::{invalid, Result};
use crate::landscape::{sample_differential, RandomSpec};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub n: usize,
    pub trials: u64,
    pub successes: u64,
    /// Trials whose matrix was numerically singular; counted as failures.
    pub singular: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub bound: f64,
    pub seed: u64,
}

impl McEstimate {
    fn new(n: usize, trials: u64, successes: u64, singular: u64, bound: f64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, Z95);
        McEstimate { n, trials, successes, singular, p_hat: successes as f64 / trials as f64, ci_low, ci_high, bound, seed }
    }

    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    pub fn brackets(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// `(successes, singular)` over `trials` draws of an `n×n` matrix.
fn run_trials(n: usize, trials: u64, spec: &RandomSpec, success: impl Fn(&crate::matrix::Matrix) -> Option<bool> + Sync) -> Result<(u64, u64)> {
    if n == 0 {
        return Err(invalid("matrix size n must be at least 1"));
    }
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let d = sample_differential(n, &spec.derive(&[t]))?;
            Ok(match success(d.matrix()) {
                Some(true) => (1, 0),
                Some(false) => (0, 0),
                None => (0, 1),
            })
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
}

/// Estimates the probability that `B⁻¹` has strictly positive row and column
/// sums; `bound = 2^-(2n-1)`.
pub fn mc_equilibrium_probability(n: usize, trials: u64, spec: &RandomSpec) -> Result<McEstimate> {
    let (ok, singular) = run_trials(n, trials, spec, |b| match solve_unit_systems(b) {
        UnitSolution::Solved { z, w } => Some(z.iter().chain(&w).all(|&v| v > POSITIVITY_THRESHOLD)),
        UnitSolution::Singular => None,
    })?;
    let bound = 0.5f64.powi(2 * n as i32 - 1);
    Ok(McEstimate::new(n, trials, ok, singular, bound, spec.seed))
}

/// Estimates the probability that `B·z = 1` has a strictly positive solution;
/// `bound = 2^-n`.
pub fn mc_positive_solution_probability(n: usize, trials: u64, spec: &RandomSpec) -> Result<McEstimate> {
    let (ok, singular) = run_trials(n, trials, spec, has_positive_solution)?;
    let bound = 0.5f64.powi(n as i32);
    Ok(McEstimate::new(n, trials, ok, singular, bound, spec.seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
        let (lo, hi) = wilson_interval(0, 10, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775).abs() < 1e-4);
        let (lo, hi) = wilson_interval(10, 10, Z95);
        assert_eq!(hi, 1.0);
        assert!((lo - 0.7225).abs() < 1e-4);
    }

    #[test]
    fn one_by_one_is_a_fair_coin() {
        let est = mc_equilibrium_probability(1, 20_000, &RandomSpec::uniform(3)).unwrap();
        assert!(est.brackets(0.5), "{est:?}");
        assert_eq!(est.bound, 0.5);
        let est = mc_positive_solution_probability(1, 20_000, &RandomSpec::uniform(3)).unwrap();
        assert!(est.brackets(0.5), "{est:?}");
    }

    #[test]
    fn estimates_replay_per_seed() {
        let a = mc_positive_solution_probability(3, 5_000, &RandomSpec::uniform(17)).unwrap();
        let b = mc_positive_solution_probability(3, 5_000, &RandomSpec::uniform(17)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bound, 0.125);
        assert!(a.ci_low <= a.p_hat && a.p_hat <= a.ci_high);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_equilibrium_probability(3, 4_000, &RandomSpec::uniform(5)).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(mc_equilibrium_probability(2, 0, &RandomSpec::uniform(0)).is_err());
        assert!(mc_positive_solution_probability(0, 10, &RandomSpec::uniform(0)).is_err());
    }
}
