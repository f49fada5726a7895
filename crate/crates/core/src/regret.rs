//! Mixability accounting along trajectories and the no-regret guarantee of
//! multiplicative updates.
//!
//! For gains in `[-1, 1]` and step size `s ≤ 1/2`, the update
//! `x ← x·(1 + s·m)` guarantees for every pure strategy `i`
//!
//! ```text
//! Σ_t m^t·x^t  ≥  Σ_t m^t(i) − s·Σ_t |m^t(i)| − ln(K)/s
//! ```
//!
//! where `K` is the player's strategy count, provided the run starts from
//! uniform marginals. From a start `x^0` the last term is `ln(1/x^0_i)/s`
//! instead. Each gene is checked separately with its own `K`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{mixability, perturbed_differential, step_mwu, MarginalState, NoiseSpec, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::landscape::{DifferentialFitness, SelectionStrength};
use crate::seed;

/// Slack below zero still counted as a pass (summation rounding).
pub const REGRET_SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixabilitySeries {
    pub m_x: Vec<Vec<f64>>,
    pub m_y: Vec<Vec<f64>>,
    /// Realized payoffs `m_x^t·x^t` and `m_y^t·y^t`.
    pub payoff_x: Vec<f64>,
    pub payoff_y: Vec<f64>,
}

impl MixabilitySeries {
    pub fn len(&self) -> usize {
        self.m_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_x.is_empty()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m_x.first().map_or(0, Vec::len), self.m_y.first().map_or(0, Vec::len))
    }

    pub fn from_states<'a>(
        states: impl IntoIterator<Item = &'a MarginalState>,
        delta: &DifferentialFitness,
    ) -> Result<Self> {
        let mut series = MixabilitySeries { m_x: vec![], m_y: vec![], payoff_x: vec![], payoff_y: vec![] };
        for st in states {
            let mix = mixability(st, delta)?;
            series.payoff_x.push(dot(&mix.m_x, st.x()));
            series.payoff_y.push(dot(&mix.m_y, st.y()));
            series.m_x.push(mix.m_x);
            series.m_y.push(mix.m_y);
        }
        Ok(series)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Recomputes the mixability series from the trajectory's stored marginals.
pub fn mixability_series(traj: &Trajectory, delta: &DifferentialFitness) -> Result<MixabilitySeries> {
    MixabilitySeries::from_states(traj.records.iter().map(|r| &r.marginals), delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretRow {
    pub player: usize,
    pub strategy: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretSummary {
    pub worst_slack: f64,
    pub all_pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub horizon: usize,
    pub rows: Vec<RegretRow>,
    pub summary: RegretSummary,
}

pub fn regret_check(series: &MixabilitySeries, s: SelectionStrength) -> Result<RegretReport> {
    if series.is_empty() {
        return Err(invalid("regret check needs a nonempty series"));
    }
    let mut rows = Vec::new();
    for (player, (gains, payoffs)) in [(&series.m_x, &series.payoff_x), (&series.m_y, &series.payoff_y)]
        .into_iter()
        .enumerate()
    {
        let k = gains[0].len();
        let lhs: f64 = payoffs.iter().sum();
        let log_term = (k as f64).ln() / s.get();
        for strategy in 0..k {
            let total: f64 = gains.iter().map(|g| g[strategy]).sum();
            let abs_total: f64 = gains.iter().map(|g| g[strategy].abs()).sum();
            let rhs = total - s.get() * abs_total - log_term;
            let slack = lhs - rhs;
            rows.push(RegretRow { player, strategy, lhs, rhs, slack, pass: slack >= -REGRET_SLACK_TOL });
        }
    }
    let worst_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(RegretReport { horizon: series.len(), rows, summary: RegretSummary { worst_slack, all_pass } })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub i: usize,
    pub j: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestPair {
    /// Argmax of `(1/T)·Σ_t [m_x(i) + m_y(j) + s·(|m_x(i)| + |m_y(j)|)]`.
    pub corrected: PairScore,
    /// Argmax of `(1/T)·Σ_t [m_x(i) + m_y(j)]`.
    pub uncorrected: PairScore,
}

fn argmax_pair(m: usize, n: usize, score: impl Fn(usize, usize) -> f64) -> PairScore {
    let mut best = PairScore { i: 0, j: 0, objective: f64::NEG_INFINITY };
    for i in 0..m {
        for j in 0..n {
            let v = score(i, j);
            if v > best.objective {
                best = PairScore { i, j, objective: v };
            }
        }
    }
    best
}

/// Exhaustive argmax over allele pairs; ties go to the lowest `i`, then `j`.
pub fn best_pair(series: &MixabilitySeries, s: SelectionStrength) -> Result<BestPair> {
    if series.is_empty() {
        return Err(invalid("best pair needs a nonempty series"));
    }
    let (m, n) = series.dims();
    let t = series.len() as f64;
    let col_sums = |g: &[Vec<f64>], k: usize| -> (Vec<f64>, Vec<f64>) {
        (0..k)
            .map(|a| (g.iter().map(|v| v[a]).sum::<f64>(), g.iter().map(|v| v[a].abs()).sum::<f64>()))
            .unzip()
    };
    let (sx, ax) = col_sums(&series.m_x, m);
    let (sy, ay) = col_sums(&series.m_y, n);
    let corrected = argmax_pair(m, n, |i, j| (sx[i] + sy[j] + s.get() * (ax[i] + ay[j])) / t);
    let uncorrected = argmax_pair(m, n, |i, j| (sx[i] + sy[j]) / t);
    Ok(BestPair { corrected, uncorrected })
}

/// `(1/T)·Σ_t [2 + s·(m_x^t(i) + m_y^t(j))]`.
pub fn cumulative_mixability(series: &MixabilitySeries, s: SelectionStrength, i: usize, j: usize) -> Result<f64> {
    if series.is_empty() {
        return Err(invalid("cumulative mixability needs a nonempty series"));
    }
    let (m, n) = series.dims();
    if i >= m || j >= n {
        return Err(Error::InvalidArgument(format!("pair ({i}, {j}) outside {m}x{n}")));
    }
    let total: f64 = series
        .m_x
        .iter()
        .zip(&series.m_y)
        .map(|(mx, my)| 2.0 + s.get() * (mx[i] + my[j]))
        .sum();
    Ok(total / series.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRun {
    pub noise_seed: u64,
    /// L∞ distance between the final marginal states.
    pub final_distance: f64,
    /// L∞ distance between the time-averaged marginal states.
    pub time_avg_distance: f64,
    pub clean_argmax: (usize, usize),
    pub noisy_argmax: (usize, usize),
    pub clean_time_avg: Vec<Vec<f64>>,
    pub noisy_time_avg: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub horizon: u64,
    pub runs: Vec<RobustnessRun>,
    pub max_final_distance: f64,
    pub max_time_avg_distance: f64,
    pub all_same_argmax: bool,
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &x)| if x > best.1 { (i, x) } else { best })
        .0
}

fn distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (u, v)| m.max((u - v).abs()))
}

/// Paired multiplicative-update runs from `init`: one on `Δ`, one on the
/// per-generation perturbed landscape. Each entry of `seeds` yields one pair,
/// with noise stream `derive_seed(noise.seed, [seed])`.
pub fn robustness_experiment(
    delta: &DifferentialFitness,
    s: SelectionStrength,
    noise: NoiseSpec,
    horizon: u64,
    seeds: &[u64],
    init: &MarginalState,
) -> Result<RobustnessReport> {
    if horizon == 0 {
        return Err(invalid("horizon T must be at least 1"));
    }
    let runs = seeds
        .par_iter()
        .map(|&k| {
            let spec = NoiseSpec { enabled: noise.enabled, seed: seed::derive_seed(noise.seed, &[k]) };
            let mut clean = init.clone().with_generation(0);
            let mut noisy = clean.clone();
            let mut sum_clean: Vec<Vec<f64>> = clean.genes().to_vec();
            let mut sum_noisy = sum_clean.clone();
            for t in 0..horizon {
                clean = step_mwu(&clean, delta, s)?;
                noisy = step_mwu(&noisy, &perturbed_differential(delta, s, &spec, t), s)
                    .map_err(|e| Error::AtGeneration { generation: t, source: Box::new(e) })?;
                for (acc, g) in sum_clean.iter_mut().zip(clean.genes()) {
                    acc.iter_mut().zip(g).for_each(|(a, v)| *a += v);
                }
                for (acc, g) in sum_noisy.iter_mut().zip(noisy.genes()) {
                    acc.iter_mut().zip(g).for_each(|(a, v)| *a += v);
                }
            }
            let count = (horizon + 1) as f64;
            let avg = |sums: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
                sums.into_iter().map(|g| g.into_iter().map(|v| v / count).collect()).collect()
            };
            let (clean_avg, noisy_avg) = (avg(sum_clean), avg(sum_noisy));
            Ok(RobustnessRun {
                noise_seed: spec.seed,
                final_distance: clean.max_abs_diff(&noisy),
                time_avg_distance: distance(&clean_avg, &noisy_avg),
                clean_argmax: (argmax(clean.x()), argmax(clean.y())),
                noisy_argmax: (argmax(noisy.x()), argmax(noisy.y())),
                clean_time_avg: clean_avg,
                noisy_time_avg: noisy_avg,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RobustnessReport {
        horizon,
        max_final_distance: runs.iter().map(|r| r.final_distance).fold(0.0, f64::max),
        max_time_avg_distance: runs.iter().map(|r| r.time_avg_distance).fold(0.0, f64::max),
        all_same_argmax: runs.iter().all(|r| r.clean_argmax == r.noisy_argmax),
        runs,
    })
}
