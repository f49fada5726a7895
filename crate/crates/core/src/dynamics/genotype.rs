//! Full genotype-frequency dynamics.

use serde::{Deserialize, Serialize};

use super::noise::{perturbed_differential, NoiseSpec};
use super::state::{linkage, GenotypeState};
use crate::error::{invalid, Error, Result};
use crate::landscape::{from_differential, to_differential, FitnessMatrix};

/// Largest negative `p_ij − r·D_ij` tolerated as rounding noise.
const NEGATIVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RecombinationRate(f64);

impl RecombinationRate {
    pub const FREE: RecombinationRate = RecombinationRate(1.0);

    pub fn new(r: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&r) {
            Ok(RecombinationRate(r))
        } else {
            Err(invalid(format!("recombination rate must lie in [0, 1], got {r}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for RecombinationRate {
    type Error = Error;

    fn try_from(r: f64) -> Result<Self> {
        RecombinationRate::new(r)
    }
}

impl From<RecombinationRate> for f64 {
    fn from(r: RecombinationRate) -> f64 {
        r.0
    }
}

fn check_dims(state: &GenotypeState, w: &FitnessMatrix) -> Result<()> {
    if state.dims() != w.dims() {
        return Err(Error::DimensionMismatch(format!(
            "state is {:?}, landscape {:?}",
            state.dims(),
            w.dims()
        )));
    }
    Ok(())
}

/// `Σ_ij p_ij·w_ij`.
pub fn mean_fitness(state: &GenotypeState, w: &FitnessMatrix) -> f64 {
    state.p().iter().zip(w.matrix().iter()).map(|(p, w)| p * w).sum()
}

/// One generation of selection followed by recombination at rate `r`:
/// `p'_ij ∝ w_ij·(p_ij − r·D_ij)`.
///
/// With noise enabled the landscape for this generation is `w_ij + ν_ij^t`.
/// The result is normalized by its own total, which equals `w̄` whenever the
/// state is on the Wright manifold or `r = 0`.
pub fn step_genotype(
    state: &GenotypeState,
    w: &FitnessMatrix,
    r: RecombinationRate,
    noise: Option<&NoiseSpec>,
) -> Result<GenotypeState> {
    check_dims(state, w)?;
    let noisy;
    let w = match noise {
        Some(spec) if spec.enabled => {
            let delta = to_differential(w, w.s())?;
            noisy = from_differential(&perturbed_differential(&delta, w.s(), spec, state.generation()), w.s())?;
            &noisy
        }
        _ => w,
    };
    let wbar = mean_fitness(state, w);
    if wbar <= 0.0 {
        return Err(Error::Extinction(wbar));
    }
    let (m, n) = state.dims();
    let ld = linkage(state);
    let mut next = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let q = state.p()[(i, j)] - r.get() * ld.d[(i, j)];
            if q < -NEGATIVE_TOL {
                return Err(Error::NegativeEntry { row: i, col: j, value: q });
            }
            next.push(w.matrix()[(i, j)] * q.max(0.0) / wbar);
        }
    }
    Ok(GenotypeState::from_parts(next, m, n, state.generation() + 1))
}

/// Index convention for the random-mating double sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatingIndexing {
    /// `Σ_l p_il·w_il · Σ_k p_kl·w_kj`, exactly as usually displayed.
    #[default]
    Verbatim,
    /// `Σ_l p_il·w_il · Σ_k p_kj·w_kj`: the product of the fitness-weighted
    /// marginals.
    Corrected,
}

/// One generation of the random-mating recurrence with `1/w̄²`
/// normalization, renormalized to total mass one.
pub fn step_genotype_mating(
    state: &GenotypeState,
    w: &FitnessMatrix,
    indexing: MatingIndexing,
) -> Result<GenotypeState> {
    check_dims(state, w)?;
    let wbar = mean_fitness(state, w);
    if wbar <= 0.0 {
        return Err(Error::Extinction(wbar));
    }
    let (m, n) = state.dims();
    let p = state.p();
    let wm = w.matrix();
    // Fitness-weighted row marginals a_i = Σ_l p_il w_il.
    let a: Vec<f64> = (0..m).map(|i| (0..n).map(|l| p[(i, l)] * wm[(i, l)]).sum()).collect();
    let mut next = Vec::with_capacity(m * n);
    match indexing {
        MatingIndexing::Corrected => {
            let b: Vec<f64> = (0..n).map(|j| (0..m).map(|k| p[(k, j)] * wm[(k, j)]).sum()).collect();
            for ai in &a {
                for bj in &b {
                    next.push(ai * bj / (wbar * wbar));
                }
            }
        }
        MatingIndexing::Verbatim => {
            for i in 0..m {
                for j in 0..n {
                    let v: f64 = (0..n)
                        .map(|l| p[(i, l)] * wm[(i, l)] * (0..m).map(|k| p[(k, l)] * wm[(k, j)]).sum::<f64>())
                        .sum();
                    next.push(v / (wbar * wbar));
                }
            }
        }
    }
    if next.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Extinction(0.0));
    }
    Ok(GenotypeState::from_parts(next, m, n, state.generation() + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::state::marginals;
    use crate::landscape::SelectionStrength;
    use crate::matrix::Matrix;

    fn fitness(rows: &[&[f64]], s: f64) -> FitnessMatrix {
        FitnessMatrix::new(
            Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap(),
            SelectionStrength::new(s).unwrap(),
        )
        .unwrap()
    }

    fn state(rows: &[&[f64]]) -> GenotypeState {
        GenotypeState::new(Matrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()).unwrap()
    }

    fn r(v: f64) -> RecombinationRate {
        RecombinationRate::new(v).unwrap()
    }

    #[test]
    fn recombination_rate_range() {
        assert!(RecombinationRate::new(-0.1).is_err());
        assert!(RecombinationRate::new(1.1).is_err());
        assert!(RecombinationRate::new(0.0).is_ok());
    }

    #[test]
    fn neutral_selection_without_recombination_is_fixed() {
        let p = state(&[&[0.5, 0.25], &[0.125, 0.125]]);
        let w = fitness(&[&[1.0, 1.0], &[1.0, 1.0]], 0.1);
        let next = step_genotype(&p, &w, r(0.0), None).unwrap();
        assert_eq!(next.p(), p.p());
        assert_eq!(next.generation(), 1);
    }

    #[test]
    fn product_state_follows_selection_only() {
        let x = [0.3, 0.7];
        let y = [0.6, 0.1, 0.3];
        let p = GenotypeState::product(&x, &y).unwrap();
        let w = fitness(&[&[1.05, 0.97, 1.0], &[0.92, 1.08, 1.01]], 0.1);
        let next = step_genotype(&p, &w, r(1.0), None).unwrap();
        let wbar = mean_fitness(&p, &w);
        for i in 0..2 {
            for j in 0..3 {
                let expect = w.matrix()[(i, j)] * x[i] * y[j] / wbar;
                assert!((next.p()[(i, j)] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_recombination_against_direct_formula() {
        let p = [[0.5, 0.25], [0.125, 0.125]];
        let w = [[1.05, 0.95], [0.95, 1.05]];
        let rr = 0.5;
        // Direct evaluation: x = (0.75, 0.25), y = (0.625, 0.375).
        let x = [0.75, 0.25];
        let y = [0.625, 0.375];
        let mut q = [[0.0; 2]; 2];
        let mut total = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let d = p[i][j] - x[i] * y[j];
                q[i][j] = w[i][j] * (p[i][j] - rr * d);
                total += q[i][j];
            }
        }
        let next = step_genotype(
            &state(&[&p[0], &p[1]]),
            &fitness(&[&w[0], &w[1]], 0.1),
            r(rr),
            None,
        )
        .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((next.p()[(i, j)] - q[i][j] / total).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_genotype_is_fixed() {
        let p = state(&[&[1.0]]);
        let w = fitness(&[&[0.93]], 0.1);
        assert_eq!(step_genotype(&p, &w, r(1.0), None).unwrap().p()[(0, 0)], 1.0);
        for idx in [MatingIndexing::Verbatim, MatingIndexing::Corrected] {
            assert_eq!(step_genotype_mating(&p, &w, idx).unwrap().p()[(0, 0)], 1.0);
        }
    }

    #[test]
    fn corrected_mating_projects_to_wright_manifold_under_neutrality() {
        let p = state(&[&[0.4, 0.1, 0.05], &[0.05, 0.2, 0.2]]);
        let w = fitness(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]], 0.1);
        let next = step_genotype_mating(&p, &w, MatingIndexing::Corrected).unwrap();
        let m = marginals(&p);
        for i in 0..2 {
            for j in 0..3 {
                assert!((next.p()[(i, j)] - m.x()[i] * m.y()[j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mating_matches_triple_loop() {
        let p = [[0.5, 0.25], [0.125, 0.125]];
        let w = [[1.05, 0.95], [0.98, 1.02]];
        let wbar: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| p[i][j] * w[i][j]).sum();
        let mut verbatim = [[0.0; 2]; 2];
        let mut corrected = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    for k in 0..2 {
                        verbatim[i][j] += p[i][l] * w[i][l] * p[k][l] * w[k][j];
                        corrected[i][j] += p[i][l] * w[i][l] * p[k][j] * w[k][j];
                    }
                }
            }
        }
        let norm = |m: [[f64; 2]; 2]| {
            let t: f64 = m.iter().flatten().sum();
            m.map(|r| r.map(|v| v / t))
        };
        let (verbatim, corrected) = (norm(verbatim), norm(corrected));
        let ps = state(&[&p[0], &p[1]]);
        let wf = fitness(&[&w[0], &w[1]], 0.1);
        let a = step_genotype_mating(&ps, &wf, MatingIndexing::Verbatim).unwrap();
        let b = step_genotype_mating(&ps, &wf, MatingIndexing::Corrected).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.p()[(i, j)] - verbatim[i][j]).abs() < 1e-15);
                assert!((b.p()[(i, j)] - corrected[i][j]).abs() < 1e-15);
            }
        }
        // Corrected sums to one before renormalization.
        let raw: f64 = corrected.iter().flatten().sum::<f64>();
        assert!((raw - 1.0).abs() < 1e-15 && wbar > 0.0);
    }

    #[test]
    fn noisy_step_uses_generation_stream() {
        let p = GenotypeState::product(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        let w = fitness(&[&[1.02, 0.99], &[0.97, 1.0]], 0.1);
        let noise = NoiseSpec::on(3);
        let a = step_genotype(&p, &w, r(1.0), Some(&noise)).unwrap();
        let b = step_genotype(&p, &w, r(1.0), Some(&noise)).unwrap();
        let clean = step_genotype(&p, &w, r(1.0), None).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, clean);
        assert_eq!(step_genotype(&p, &w, r(1.0), Some(&NoiseSpec::off())).unwrap(), clean);
    }

    #[test]
    fn dims_must_agree() {
        let p = GenotypeState::uniform(2, 2);
        let w = fitness(&[&[1.0, 1.0, 1.0]], 0.1);
        assert!(matches!(step_genotype(&p, &w, r(1.0), None), Err(Error::DimensionMismatch(_))));
    }
}
