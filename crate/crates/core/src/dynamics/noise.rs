//! Bounded zero-mean fitness perturbations.
//!
//! At generation `t` cell `(i, j)` receives `ν = s·u·(1 − |Δ_ij|)` with `u`
//! uniform on `[-1, 1]`, so the perturbed differential entry `Δ_ij + ν/s`
//! stays in `[-1, 1]`. Draws come from the stream keyed by `(seed, t)` and
//! are consumed in row-major cell order.

use rand::distributions::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::landscape::{DifferentialFitness, SelectionStrength};
use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub enabled: bool,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn on(seed: u64) -> Self {
        NoiseSpec { enabled: true, seed }
    }

    pub fn off() -> Self {
        NoiseSpec { enabled: false, seed: 0 }
    }
}

/// The raw perturbations `ν_ij^t` applied to `W` at generation `t`.
pub fn noise_draws(delta: &DifferentialFitness, s: SelectionStrength, noise: &NoiseSpec, generation: u64) -> Matrix {
    let d = delta.matrix();
    if !noise.enabled {
        return Matrix::zeros(d.rows(), d.cols());
    }
    let mut rng = seed::stream(noise.seed, &[generation]);
    let unit = Uniform::new_inclusive(-1.0, 1.0);
    let data = d
        .iter()
        .map(|&v| {
            let bound = s.get() * (1.0 - v.abs());
            let nu = unit.sample(&mut rng) * bound;
            assert!(nu.abs() <= bound, "noise draw {nu} escapes its bound {bound}");
            nu
        })
        .collect();
    Matrix::from_row_major(d.rows(), d.cols(), data).expect("same shape as delta")
}

/// `Δ + ν^t / s`, the differential landscape seen at generation `t`.
pub fn perturbed_differential(
    delta: &DifferentialFitness,
    s: SelectionStrength,
    noise: &NoiseSpec,
    generation: u64,
) -> DifferentialFitness {
    if !noise.enabled {
        return delta.clone();
    }
    let nu = noise_draws(delta, s, noise, generation);
    let d = delta.matrix();
    let perturbed = Matrix::from_fn(d.rows(), d.cols(), |i, j| {
        let v = d[(i, j)] + nu[(i, j)] / s.get();
        assert!(v.abs() <= 1.0 + 1e-12, "perturbed entry {v} leaves weak selection");
        v
    });
    DifferentialFitness::new(perturbed).expect("perturbed entries stay in [-1, 1]")
}
