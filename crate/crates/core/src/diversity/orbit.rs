//! Sign-flip orbits `B ↦ I_S·B·I_T`.
//!
//! Flipping commutes with inversion up to swapping roles,
//! `(I_S·B·I_T)⁻¹ = I_T·B⁻¹·I_S`, and complementing both sets gives the same
//! matrix, so every orbit has `2^(2n-1)` distinct members.

use super::flip::apply_flips;
use super::linsys::is_equilibrium_submatrix;
use crate::error::{invalid, Result};
use crate::matrix::Matrix;

pub const ORBIT_IDENTITY_TOL: f64 = 1e-10;

fn complement(set: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|i| !set.contains(i)).collect()
}

fn bits(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Checks both orbit identities for the given row set `S` and column set `T`.
pub fn orbit_identities_check(b: &Matrix, rows: &[usize], cols: &[usize]) -> Result<bool> {
    if !b.is_square() {
        return Err(invalid("orbit identities need a square matrix"));
    }
    let n = b.rows();
    if rows.iter().chain(cols).any(|&i| i >= n) {
        return Err(invalid(format!("flip index out of range 0..{n}")));
    }
    let inv = b.inverse()?;
    let flipped = apply_flips(b, rows, cols);
    let lhs = flipped.inverse()?;
    // I_T·B⁻¹·I_S negates rows T and columns S of B⁻¹.
    let rhs = apply_flips(&inv, cols, rows);
    let scale = inv.max_abs().max(1.0);
    let inverse_ok = lhs.max_abs_diff(&rhs) <= ORBIT_IDENTITY_TOL * scale;
    let complement_ok = flipped == apply_flips(b, &complement(rows, n), &complement(cols, n));
    Ok(inverse_ok && complement_ok)
}

/// The `2^(2n-1)` distinct flippings, one per complement pair, taking the
/// member whose row set excludes row 0.
pub fn distinct_flippings(n: usize) -> impl Iterator<Item = (Vec<usize>, Vec<usize>)> {
    assert!((1..=20).contains(&n), "orbit enumeration supports 1 <= n <= 20");
    let row_masks = 1u64 << (n - 1);
    let col_masks = 1u64 << n;
    (0..row_masks).flat_map(move |r| (0..col_masks).map(move |c| (bits(r << 1, n), bits(c, n))))
}

/// The first flipping in the orbit of `B` whose inverse has strictly positive
/// line sums.
pub fn orbit_witness(b: &Matrix) -> Option<(Vec<usize>, Vec<usize>)> {
    distinct_flippings(b.rows()).find(|(rows, cols)| is_equilibrium_submatrix(&apply_flips(b, rows, cols)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscape::{sample_differential, RandomSpec};
    use crate::seed;
    use rand::Rng;
    use std::collections::HashSet;

    #[test]
    fn empty_and_full_sets() {
        let b = sample_differential(4, &RandomSpec::uniform(2)).unwrap();
        assert!(orbit_identities_check(b.matrix(), &[], &[]).unwrap());
        assert!(orbit_identities_check(b.matrix(), &[0, 1, 2, 3], &[0, 1, 2, 3]).unwrap());
        assert_eq!(&apply_flips(b.matrix(), &[0, 1, 2, 3], &[0, 1, 2, 3]), b.matrix());
    }

    #[test]
    fn random_sets_satisfy_identities() {
        for k in 0..200u64 {
            let mut rng = seed::stream(99, &[k]);
            let n = rng.gen_range(1..=6);
            let b = sample_differential(n, &RandomSpec::uniform(k)).unwrap();
            let rows: Vec<usize> = (0..n).filter(|_| rng.gen()).collect();
            let cols: Vec<usize> = (0..n).filter(|_| rng.gen()).collect();
            // Independent route: explicit sign matrices and products.
            let sign = |set: &[usize]| Matrix::from_fn(n, n, |i, j| if i != j { 0.0 } else if set.contains(&i) { -1.0 } else { 1.0 });
            let (is, it) = (sign(&rows), sign(&cols));
            let direct = is.mul(b.matrix()).mul(&it);
            assert_eq!(direct, apply_flips(b.matrix(), &rows, &cols));
            let inv_direct = direct.inverse().unwrap();
            let swapped = it.mul(&b.matrix().inverse().unwrap()).mul(&is);
            assert!(inv_direct.max_abs_diff(&swapped) <= 1e-10 * swapped.max_abs().max(1.0));
            assert!(orbit_identities_check(b.matrix(), &rows, &cols).unwrap());
        }
    }

    #[test]
    fn singular_input_is_an_error() {
        let b = Matrix::filled(2, 2, 1.0);
        assert!(orbit_identities_check(&b, &[0], &[]).is_err());
    }

    #[test]
    fn flippings_are_distinct_and_counted() {
        for n in 1..=4 {
            let b = sample_differential(n, &RandomSpec::uniform(n as u64)).unwrap();
            let all: Vec<_> = distinct_flippings(n).collect();
            assert_eq!(all.len(), 1 << (2 * n - 1));
            let images: HashSet<Vec<u64>> = all
                .iter()
                .map(|(r, c)| apply_flips(b.matrix(), r, c).iter().map(|v| v.to_bits()).collect())
                .collect();
            assert_eq!(images.len(), all.len());
        }
    }

    #[test]
    fn witness_exists_for_small_matrices() {
        for k in 0..50 {
            let b = sample_differential(3, &RandomSpec::uniform(500 + k)).unwrap();
            let (rows, cols) = orbit_witness(b.matrix()).expect("every orbit meets the positive set");
            assert!(is_equilibrium_submatrix(&apply_flips(b.matrix(), &rows, &cols)));
        }
    }
}
