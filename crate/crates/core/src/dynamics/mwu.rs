//! Multiplicative-update dynamics of the coordination game between genes.

use serde::{Deserialize, Serialize};

use super::state::{normalize, MarginalState};
use crate::error::{Error, Result};
use crate::landscape::{DifferentialFitness, DifferentialTensor, SelectionStrength};

/// A common-payoff game between genes: every allele's expected payoff under
/// the product of the other genes' frequencies.
pub trait GameLandscape {
    fn allele_counts(&self) -> Vec<usize>;

    /// Per-gene mixability vectors and the population mean `Δ̄`.
    fn mixabilities(&self, genes: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64);
}

impl GameLandscape for DifferentialFitness {
    fn allele_counts(&self) -> Vec<usize> {
        let (m, n) = self.dims();
        vec![m, n]
    }

    fn mixabilities(&self, genes: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
        let d = self.matrix();
        let (x, y) = (&genes[0], &genes[1]);
        let mx = d.mul_vec(y);
        let my = d.tr_mul_vec(x);
        let mean = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
        (vec![mx, my], mean)
    }
}

impl GameLandscape for DifferentialTensor {
    fn allele_counts(&self) -> Vec<usize> {
        self.dims().to_vec()
    }

    fn mixabilities(&self, genes: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
        let dims = self.dims();
        let k = dims.len();
        let mut mix: Vec<Vec<f64>> = dims.iter().map(|&d| vec![0.0; d]).collect();
        let mut mean = 0.0;
        let mut idx = vec![0usize; k];
        let mut others = vec![0.0; k];
        for &v in self.as_slice() {
            // others[g] = Π_{h≠g} x_h[idx_h], via prefix and suffix products.
            let mut prefix = 1.0;
            for g in 0..k {
                others[g] = prefix;
                prefix *= genes[g][idx[g]];
            }
            let mut suffix = 1.0;
            for g in (0..k).rev() {
                others[g] *= suffix;
                suffix *= genes[g][idx[g]];
            }
            for g in 0..k {
                mix[g][idx[g]] += v * others[g];
            }
            mean += v * prefix;
            for g in (0..k).rev() {
                idx[g] += 1;
                if idx[g] < dims[g] {
                    break;
                }
                idx[g] = 0;
            }
        }
        (mix, mean)
    }
}

/// Two-gene mixabilities `m_x(i) = Σ_j y_j Δ_ij`, `m_y(j) = Σ_i x_i Δ_ij` and
/// the mean differential fitness `Δ̄ = xᵀΔy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixability {
    pub m_x: Vec<f64>,
    pub m_y: Vec<f64>,
    pub mean: f64,
}

pub fn mixability(state: &MarginalState, delta: &DifferentialFitness) -> Result<Mixability> {
    state.check_dims(&delta.allele_counts())?;
    let (mut mix, mean) = delta.mixabilities(state.genes());
    let m_y = mix.pop().expect("two genes");
    let m_x = mix.pop().expect("two genes");
    Ok(Mixability { m_x, m_y, mean })
}

/// One generation of `x_a ← x_a·(1 + s·m(a)) / (1 + s·Δ̄)` for every gene.
pub fn step_mwu<L: GameLandscape + ?Sized>(
    state: &MarginalState,
    landscape: &L,
    s: SelectionStrength,
) -> Result<MarginalState> {
    state.check_dims(&landscape.allele_counts())?;
    let (mix, mean) = landscape.mixabilities(state.genes());
    let denom = 1.0 + s.get() * mean;
    if denom <= 0.0 {
        return Err(Error::Extinction(denom));
    }
    let genes = state
        .genes()
        .iter()
        .zip(&mix)
        .map(|(freqs, m)| {
            let mut next: Vec<f64> =
                freqs.iter().zip(m).map(|(f, q)| f * (1.0 + s.get() * q) / denom).collect();
            normalize(&mut next);
            next
        })
        .collect();
    Ok(MarginalState::from_parts(genes, state.generation() + 1))
}
