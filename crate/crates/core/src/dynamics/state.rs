use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;

/// Tolerance on the total mass of states supplied from outside.
const INPUT_MASS_TOL: f64 = 1e-9;

pub(crate) fn normalize(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|p| *p /= total);
}

fn check_simplex(v: &[f64], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(invalid(format!("{what} is empty")));
    }
    if let Some(i) = v.iter().position(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(invalid(format!("{what}[{i}] = {} is not a nonnegative number", v[i])));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > INPUT_MASS_TOL {
        return Err(invalid(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

/// Joint genotype frequencies `p_ij` at generation `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenotypeState {
    p: Matrix,
    generation: u64,
}

impl GenotypeState {
    pub fn new(p: Matrix) -> Result<Self> {
        let mut data = p.as_slice().to_vec();
        check_simplex(&data, "genotype frequencies")?;
        normalize(&mut data);
        Ok(GenotypeState { p: Matrix::from_row_major(p.rows(), p.cols(), data)?, generation: 0 })
    }

    /// The Wright-manifold state `p_ij = x_i·y_j`.
    pub fn product(x: &[f64], y: &[f64]) -> Result<Self> {
        check_simplex(x, "x")?;
        check_simplex(y, "y")?;
        Ok(GenotypeState { p: Matrix::from_fn(x.len(), y.len(), |i, j| x[i] * y[j]), generation: 0 })
    }

    pub fn uniform(m: usize, n: usize) -> Self {
        GenotypeState { p: Matrix::filled(m, n, 1.0 / (m * n) as f64), generation: 0 }
    }

    pub(crate) fn from_parts(mut data: Vec<f64>, m: usize, n: usize, generation: u64) -> Self {
        normalize(&mut data);
        GenotypeState {
            p: Matrix::from_row_major(m, n, data).expect("caller sizes the buffer"),
            generation,
        }
    }

    pub fn with_generation(mut self, generation: u64) -> Self {
        self.generation = generation;
        self
    }

    pub fn p(&self) -> &Matrix {
        &self.p
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.p.rows(), self.p.cols())
    }
}

/// Per-gene allele frequency vectors at generation `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalState {
    genes: Vec<Vec<f64>>,
    generation: u64,
}

impl MarginalState {
    pub fn new(genes: Vec<Vec<f64>>) -> Result<Self> {
        if genes.is_empty() {
            return Err(invalid("a marginal state needs at least one gene"));
        }
        let mut genes = genes;
        for (g, v) in genes.iter_mut().enumerate() {
            check_simplex(v, &format!("gene {g} frequencies"))?;
            normalize(v);
        }
        Ok(MarginalState { genes, generation: 0 })
    }

    pub fn two(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        MarginalState::new(vec![x, y])
    }

    pub fn uniform(dims: &[usize]) -> Self {
        MarginalState {
            genes: dims.iter().map(|&d| vec![1.0 / d as f64; d]).collect(),
            generation: 0,
        }
    }

    pub(crate) fn from_parts(genes: Vec<Vec<f64>>, generation: u64) -> Self {
        MarginalState { genes, generation }
    }

    pub fn with_generation(mut self, generation: u64) -> Self {
        self.generation = generation;
        self
    }

    pub fn genes(&self) -> &[Vec<f64>] {
        &self.genes
    }

    pub fn gene(&self, g: usize) -> &[f64] {
        &self.genes[g]
    }

    pub fn x(&self) -> &[f64] {
        &self.genes[0]
    }

    pub fn y(&self) -> &[f64] {
        &self.genes[1]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.genes.iter().map(Vec::len).collect()
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    /// L∞ distance over all genes; states must have equal dimensions.
    pub fn max_abs_diff(&self, other: &MarginalState) -> f64 {
        self.genes
            .iter()
            .zip(&other.genes)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_dims(&self, dims: &[usize]) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::DimensionMismatch(format!(
                "state has allele counts {:?}, landscape {dims:?}",
                self.dims()
            )));
        }
        Ok(())
    }
}

/// Deviation of a genotype state from the Wright manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkageDisequilibrium {
    pub d: Matrix,
    pub max_abs: f64,
}

pub fn marginals(state: &GenotypeState) -> MarginalState {
    MarginalState {
        genes: vec![state.p.row_sums(), state.p.col_sums()],
        generation: state.generation,
    }
}

/// `D_ij = p_ij − x_i·y_j`.
pub fn linkage(state: &GenotypeState) -> LinkageDisequilibrium {
    let x = state.p.row_sums();
    let y = state.p.col_sums();
    let d = Matrix::from_fn(x.len(), y.len(), |i, j| state.p[(i, j)] - x[i] * y[j]);
    let max_abs = d.max_abs();
    LinkageDisequilibrium { d, max_abs }
}
