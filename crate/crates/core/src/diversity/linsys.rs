use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// Entries of `z` and `w` must exceed this to count as strictly positive.
pub const POSITIVITY_THRESHOLD: f64 = 1e-12;

/// Relative residual bound accepted from the direct solver.
const RESIDUAL_TOL: f64 = 1e-9;

/// Solutions of `B·z = 1` and `Bᵀ·w = 1`. These are the row and column sums
/// of `B⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UnitSolution {
    Solved { z: Vec<f64>, w: Vec<f64> },
    Singular,
}

fn residual_ok(b: &Matrix, sol: &[f64], transposed: bool) -> bool {
    let applied = if transposed { b.tr_mul_vec(sol) } else { b.mul_vec(sol) };
    let resid = applied.iter().fold(0.0, |m: f64, v| m.max((v - 1.0).abs()));
    let norm_b = if transposed { b.col_sums_abs() } else { b.row_sums_abs() };
    let norm_sol = sol.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    resid.is_finite() && resid <= RESIDUAL_TOL * (norm_b * norm_sol).max(1.0)
}

pub fn solve_unit_systems(b: &Matrix) -> UnitSolution {
    assert!(b.is_square(), "unit systems need a square matrix");
    let Some(lu) = b.lu() else {
        return UnitSolution::Singular;
    };
    let ones = vec![1.0; b.rows()];
    let z = lu.solve(&ones);
    let w = lu.solve_transpose(&ones);
    if residual_ok(b, &z, false) && residual_ok(b, &w, true) {
        UnitSolution::Solved { z, w }
    } else {
        UnitSolution::Singular
    }
}

/// Whether `B⁻¹` exists with strictly positive row and column sums.
pub fn is_equilibrium_submatrix(b: &Matrix) -> bool {
    match solve_unit_systems(b) {
        UnitSolution::Solved { z, w } => {
            z.iter().chain(&w).all(|&v| v > POSITIVITY_THRESHOLD)
        }
        UnitSolution::Singular => false,
    }
}

/// Whether `B·z = 1` has a strictly positive solution.
pub fn has_positive_solution(b: &Matrix) -> Option<bool> {
    match solve_unit_systems(b) {
        UnitSolution::Solved { z, .. } => Some(z.iter().all(|&v| v > POSITIVITY_THRESHOLD)),
        UnitSolution::Singular => None,
    }
}
