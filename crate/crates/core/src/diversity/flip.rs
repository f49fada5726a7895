//! Sign-flipping local search towards nonnegative line sums.
//!
//! Negating a line whose sum is `-σ < 0` raises the total entry sum by
//! exactly `2σ`. Since only finitely many sign patterns exist, repeatedly
//! flipping a negative line terminates with every row and column sum
//! nonnegative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A line sum below `-NEGATIVE_SUM_TOL` counts as negative.
pub const NEGATIVE_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Line {
    Row(usize),
    Col(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipStep {
    pub line: Line,
    /// The line's sum just before it was flipped (`-σ`).
    pub sum_before: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipSets {
    /// Rows negated an odd number of times (`S` in `I_S·B·I_T`).
    pub rows: Vec<usize>,
    /// Columns negated an odd number of times (`T`).
    pub cols: Vec<usize>,
    pub flip_count: usize,
    /// Total entry sum before the first flip and after every flip.
    pub potential_trace: Vec<f64>,
    pub steps: Vec<FlipStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlipOutcome {
    pub sets: FlipSets,
    pub flipped: Matrix,
}

fn iteration_cap(n: usize) -> u128 {
    // 10·n·4^n, saturating for large n.
    let pow = 4u128.checked_pow(n as u32).unwrap_or(u128::MAX);
    pow.saturating_mul(10 * n as u128)
}

/// First negative line in the scan order rows `0..n`, then columns `0..n`.
fn first_negative(b: &Matrix) -> Option<(Line, f64)> {
    let rows = b.row_sums().into_iter().enumerate().map(|(i, s)| (Line::Row(i), s));
    let cols = b.col_sums().into_iter().enumerate().map(|(j, s)| (Line::Col(j), s));
    rows.chain(cols).find(|&(_, s)| s < -NEGATIVE_SUM_TOL)
}

pub fn flip_to_nonnegative(b: &Matrix) -> Result<FlipOutcome> {
    if !b.is_square() {
        return Err(Error::DimensionMismatch(format!("flipping needs a square matrix, got {}x{}", b.rows(), b.cols())));
    }
    let n = b.rows();
    let cap = iteration_cap(n);
    let mut work = b.clone();
    let mut row_flipped = vec![false; n];
    let mut col_flipped = vec![false; n];
    let mut trace = vec![work.sum()];
    let mut steps = Vec::new();
    while let Some((line, sum_before)) = first_negative(&work) {
        if steps.len() as u128 >= cap {
            return Err(Error::Internal(format!("flipping exceeded {cap} iterations")));
        }
        match line {
            Line::Row(i) => {
                work.negate_row(i);
                row_flipped[i] ^= true;
            }
            Line::Col(j) => {
                work.negate_col(j);
                col_flipped[j] ^= true;
            }
        }
        steps.push(FlipStep { line, sum_before });
        trace.push(work.sum());
    }
    let picked = |flags: Vec<bool>| flags.into_iter().enumerate().filter_map(|(i, f)| f.then_some(i)).collect();
    Ok(FlipOutcome {
        sets: FlipSets {
            rows: picked(row_flipped),
            cols: picked(col_flipped),
            flip_count: steps.len(),
            potential_trace: trace,
            steps,
        },
        flipped: work,
    })
}

/// `I_S·B·I_T`: negates the rows in `rows` and the columns in `cols`.
pub fn apply_flips(b: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    let mut out = b.clone();
    rows.iter().for_each(|&i| out.negate_row(i));
    cols.iter().for_each(|&j| out.negate_col(j));
    out
}
