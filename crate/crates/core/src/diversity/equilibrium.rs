//! Equilibria supported on square submatrices of the landscape.
//!
//! A support `(rows, cols)` carries an equilibrium when the differential
//! submatrix `B` is invertible and `B·z = 1`, `Bᵀ·w = 1` have strictly
//! positive solutions. Normalizing gives the column-gene frequencies
//! `z / Σz`, the row-gene frequencies `w / Σw`, and the common fitness
//! `a = 1 + s / Σz`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linsys::{solve_unit_systems, UnitSolution, POSITIVITY_THRESHOLD};
use crate::dynamics::{mixability, step_mwu, MarginalState};
use crate::error::{invalid, Error, Result};
use crate::landscape::{DifferentialFitness, SelectionStrength};
use crate::matrix::Matrix;

/// Tolerance on `A·x = a·1` and `Aᵀ·y = a·1` for the fitness submatrix `A`.
pub const FITNESS_IDENTITY_TOL: f64 = 1e-9;
/// Tolerance for stationarity under one multiplicative-update step.
pub const STATIONARITY_TOL: f64 = 1e-10;
/// Largest support enumeration `count_equilibria` will attempt.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Frequencies of the row gene's alleles in `rows`; `Aᵀ·row_freqs = a·1`.
    pub row_freqs: Vec<f64>,
    /// Frequencies of the column gene's alleles in `cols`; `A·col_freqs = a·1`.
    pub col_freqs: Vec<f64>,
    /// Common fitness of every supported genotype combination.
    pub a: f64,
}

impl EquilibriumCertificate {
    pub fn min_frequency(&self) -> f64 {
        self.row_freqs.iter().chain(&self.col_freqs).copied().fold(f64::INFINITY, f64::min)
    }

    /// Full-length marginals with zeros off the support.
    pub fn embed(&self, m: usize, n: usize) -> MarginalState {
        let mut x = vec![0.0; m];
        let mut y = vec![0.0; n];
        self.rows.iter().zip(&self.row_freqs).for_each(|(&i, &f)| x[i] = f);
        self.cols.iter().zip(&self.col_freqs).for_each(|(&j, &f)| y[j] = f);
        MarginalState::two(x, y).expect("certificate frequencies form simplices")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    Singular,
    /// `z` or `w` has entries of mixed sign (or too close to zero).
    MixedSigns,
    /// The fitness-level identity failed numerically.
    IdentityCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportOutcome {
    /// Strictly positive solutions and `a > 1`.
    Equilibrium(EquilibriumCertificate),
    /// Strictly negative `z` and `w`: the normalized frequencies are positive
    /// but the common fitness `a` is below 1.
    Extinction(EquilibriumCertificate),
    NotEquilibrium(Rejection),
}

fn check_indices(idx: &[usize], bound: usize, what: &str) -> Result<()> {
    if let Some(&bad) = idx.iter().find(|&&i| i >= bound) {
        return Err(invalid(format!("{what} index {bad} out of range 0..{bound}")));
    }
    let mut sorted = idx.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != idx.len() {
        return Err(invalid(format!("{what} indices repeat")));
    }
    Ok(())
}

fn fitness_identity_holds(b: &Matrix, s: f64, row_freqs: &[f64], col_freqs: &[f64], a: f64) -> bool {
    let fit = b.map(|v| 1.0 + s * v);
    let cols_ok = fit.mul_vec(col_freqs).iter().all(|v| (v - a).abs() <= FITNESS_IDENTITY_TOL);
    let rows_ok = fit.tr_mul_vec(row_freqs).iter().all(|v| (v - a).abs() <= FITNESS_IDENTITY_TOL);
    cols_ok && rows_ok
}

pub fn equilibrium_from_support(
    delta: &DifferentialFitness,
    s: SelectionStrength,
    rows: &[usize],
    cols: &[usize],
) -> Result<SupportOutcome> {
    if rows.len() != cols.len() {
        return Err(invalid(format!(
            "support must be square, got {} rows and {} columns",
            rows.len(),
            cols.len()
        )));
    }
    if rows.is_empty() {
        return Err(invalid("support is empty"));
    }
    let (m, n) = delta.dims();
    check_indices(rows, m, "row")?;
    check_indices(cols, n, "column")?;
    let b = delta.matrix().submatrix(rows, cols);
    let (z, w) = match solve_unit_systems(&b) {
        UnitSolution::Solved { z, w } => (z, w),
        UnitSolution::Singular => return Ok(SupportOutcome::NotEquilibrium(Rejection::Singular)),
    };
    let positive = z.iter().chain(&w).all(|&v| v > POSITIVITY_THRESHOLD);
    let negative = z.iter().chain(&w).all(|&v| v < -POSITIVITY_THRESHOLD);
    if !positive && !negative {
        return Ok(SupportOutcome::NotEquilibrium(Rejection::MixedSigns));
    }
    let (sz, sw) = (z.iter().sum::<f64>(), w.iter().sum::<f64>());
    let cert = EquilibriumCertificate {
        rows: rows.to_vec(),
        cols: cols.to_vec(),
        row_freqs: w.iter().map(|v| v / sw).collect(),
        col_freqs: z.iter().map(|v| v / sz).collect(),
        a: 1.0 + s.get() / sz,
    };
    if !fitness_identity_holds(&b, s.get(), &cert.row_freqs, &cert.col_freqs, cert.a) {
        return Ok(SupportOutcome::NotEquilibrium(Rejection::IdentityCheck));
    }
    Ok(if positive { SupportOutcome::Equilibrium(cert) } else { SupportOutcome::Extinction(cert) })
}

/// Checks that the embedded certificate is a fixed point of one
/// multiplicative-update step and that supported alleles share one
/// mixability.
pub fn verify_stationarity(delta: &DifferentialFitness, s: SelectionStrength, cert: &EquilibriumCertificate) -> bool {
    let (m, n) = delta.dims();
    if cert.rows.iter().any(|&i| i >= m) || cert.cols.iter().any(|&j| j >= n) {
        return false;
    }
    if (cert.row_freqs.iter().sum::<f64>() - 1.0).abs() > 1e-9 || (cert.col_freqs.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return false;
    }
    let state = cert.embed(m, n);
    let Ok(next) = step_mwu(&state, delta, s) else {
        return false;
    };
    if next.max_abs_diff(&state) > STATIONARITY_TOL {
        return false;
    }
    let Ok(mix) = mixability(&state, delta) else {
        return false;
    };
    let spread = |vals: Vec<f64>| {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    spread(cert.rows.iter().map(|&i| mix.m_x[i]).collect()) <= STATIONARITY_TOL
        && spread(cert.cols.iter().map(|&j| mix.m_y[j]).collect()) <= STATIONARITY_TOL
}

pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(pos) = (0..k).rev().find(|&p| idx[p] != p + n - k) else {
            return out;
        };
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCount {
    pub k: usize,
    pub supports: u128,
    pub equilibria: Vec<EquilibriumCertificate>,
    pub extinction: usize,
    pub singular: usize,
}

impl EquilibriumCount {
    pub fn count(&self) -> usize {
        self.equilibria.len()
    }

    /// One line per certificate: `rows,cols,a,min_frequency` with index sets
    /// joined by `;`.
    pub fn to_csv(&self) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
        let mut out = String::from("rows,cols,a,min_frequency\n");
        for c in &self.equilibria {
            out.push_str(&format!("{},{},{:?},{:?}\n", join(&c.rows), join(&c.cols), c.a, c.min_frequency()));
        }
        out
    }
}

/// Enumerates every `k×k` support, in lexicographic order of (rows, cols).
pub fn count_equilibria(delta: &DifferentialFitness, s: SelectionStrength, k: usize) -> Result<EquilibriumCount> {
    let (m, n) = delta.dims();
    if k == 0 || k > m.min(n) {
        return Err(invalid(format!("support size k = {k} must lie in 1..={}", m.min(n))));
    }
    let supports = binomial(m, k) * binomial(n, k);
    if supports > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge(supports, ENUMERATION_LIMIT));
    }
    let row_sets = combinations(m, k);
    let col_sets = combinations(n, k);
    let partial = row_sets
        .par_iter()
        .map(|rows| {
            let mut found = Vec::new();
            let (mut ext, mut sing) = (0, 0);
            for cols in &col_sets {
                match equilibrium_from_support(delta, s, rows, cols)? {
                    SupportOutcome::Equilibrium(c) => found.push(c),
                    SupportOutcome::Extinction(_) => ext += 1,
                    SupportOutcome::NotEquilibrium(Rejection::Singular) => sing += 1,
                    SupportOutcome::NotEquilibrium(_) => {}
                }
            }
            Ok((found, ext, sing))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = EquilibriumCount { k, supports, equilibria: Vec::new(), extinction: 0, singular: 0 };
    for (found, ext, sing) in partial {
        out.equilibria.extend(found);
        out.extinction += ext;
        out.singular += sing;
    }
    Ok(out)
}

/// `2·(mn / 4k²)^k`.
pub fn expected_count_bound(m: usize, n: usize, k: usize) -> f64 {
    2.0 * ((m * n) as f64 / (4 * k * k) as f64).powi(k as i32)
}
