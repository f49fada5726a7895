//! Fitness landscapes under weak selection and their differential form.
//!
//! A fitness matrix `W` has every entry in `[1 - s, 1 + s]`; its differential
//! form is `Δ = (W - 1) / s`, the common payoff matrix of the coordination
//! game played by the two genes.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::Matrix;
use crate::seed;

/// Slack allowed on the closed range checks, so that `1 + s·Δ` computed in
/// floating point still validates.
const RANGE_SLACK: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SelectionStrength(f64);

impl SelectionStrength {
    pub fn new(s: f64) -> Result<Self> {
        if s > 0.0 && s < 1.0 {
            Ok(SelectionStrength(s))
        } else {
            Err(invalid(format!("selection strength must lie in (0, 1), got {s}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SelectionStrength {
    type Error = Error;

    fn try_from(s: f64) -> Result<Self> {
        SelectionStrength::new(s)
    }
}

impl From<SelectionStrength> for f64 {
    fn from(s: SelectionStrength) -> f64 {
        s.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryDistribution {
    /// Uniform on the closed interval, centered on 1 for `W` and 0 for `Δ`.
    #[default]
    UniformSymmetric,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpec {
    #[serde(default)]
    pub distribution: EntryDistribution,
    pub seed: u64,
}

impl RandomSpec {
    pub fn uniform(seed: u64) -> Self {
        RandomSpec { distribution: EntryDistribution::UniformSymmetric, seed }
    }

    /// The spec for one slot (trial, instance, ...) of an experiment.
    pub fn derive(&self, path: &[u64]) -> Self {
        RandomSpec { distribution: self.distribution, seed: seed::derive_seed(self.seed, path) }
    }

    /// Draws `count` unit-centered values in `[-1, 1]`.
    fn unit_draws(&self, count: usize) -> Vec<f64> {
        let mut rng = seed::stream(self.seed, &[]);
        match self.distribution {
            EntryDistribution::UniformSymmetric => {
                let u = Uniform::new_inclusive(-1.0, 1.0);
                (0..count).map(|_| u.sample(&mut rng)).collect()
            }
        }
    }
}

fn check_range(m: &Matrix, low: f64, high: f64) -> Result<()> {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)];
            if !(v >= low - RANGE_SLACK && v <= high + RANGE_SLACK) {
                return Err(Error::RangeViolation { row: i, col: j, value: v, low, high });
            }
        }
    }
    Ok(())
}

/// A weak-selection fitness landscape for two genes.
#[derive(Debug, Clone, PartialEq)]
pub struct FitnessMatrix {
    s: SelectionStrength,
    w: Matrix,
}

impl FitnessMatrix {
    pub fn new(w: Matrix, s: SelectionStrength) -> Result<Self> {
        check_range(&w, 1.0 - s.get(), 1.0 + s.get())?;
        Ok(FitnessMatrix { s, w })
    }

    pub fn s(&self) -> SelectionStrength {
        self.s
    }

    pub fn matrix(&self) -> &Matrix {
        &self.w
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.w.rows(), self.w.cols())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FitnessJson {
            m: self.w.rows(),
            n: self.w.cols(),
            s: self.s.get(),
            rows: self.w.clone(),
        })
        .expect("plain numeric data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: FitnessJson =
            serde_json::from_str(text).map_err(|e| invalid(format!("fitness JSON: {e}")))?;
        check_dims(raw.m, raw.n, &raw.rows)?;
        FitnessMatrix::new(raw.rows, SelectionStrength::new(raw.s)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# fitness {} {} {}\n", self.w.rows(), self.w.cols(), self.s.get());
        write_csv_rows(&mut out, &self.w);
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (header, w) = read_csv(text)?;
        match header.as_slice() {
            ["fitness", m, n, s] => {
                let s = parse_num::<f64>(s)?;
                check_dims(parse_num(m)?, parse_num(n)?, &w)?;
                FitnessMatrix::new(w, SelectionStrength::new(s)?)
            }
            _ => Err(invalid("CSV header must read `# fitness m n s`")),
        }
    }
}

/// The differential landscape `Δ`, entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialFitness {
    d: Matrix,
}

impl DifferentialFitness {
    pub fn new(d: Matrix) -> Result<Self> {
        check_range(&d, -1.0, 1.0)?;
        Ok(DifferentialFitness { d: d.map(|v| v.clamp(-1.0, 1.0)) })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        DifferentialFitness { d: Matrix::zeros(m, n) }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.d
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d.rows(), self.d.cols())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&DifferentialJson {
            m: self.d.rows(),
            n: self.d.cols(),
            rows: self.d.clone(),
        })
        .expect("plain numeric data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DifferentialJson =
            serde_json::from_str(text).map_err(|e| invalid(format!("differential JSON: {e}")))?;
        check_dims(raw.m, raw.n, &raw.rows)?;
        DifferentialFitness::new(raw.rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# differential {} {}\n", self.d.rows(), self.d.cols());
        write_csv_rows(&mut out, &self.d);
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let (header, d) = read_csv(text)?;
        match header.as_slice() {
            ["differential", m, n] => {
                check_dims(parse_num(m)?, parse_num(n)?, &d)?;
                DifferentialFitness::new(d)
            }
            _ => Err(invalid("CSV header must read `# differential m n`")),
        }
    }
}

/// Differential landscape for `k ≥ 2` genes, stored row-major (last gene
/// varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentialTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DifferentialTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(invalid("a landscape tensor needs at least two genes"));
        }
        if dims.contains(&0) {
            return Err(invalid("every gene needs at least one allele"));
        }
        let cells: usize = dims.iter().product();
        if data.len() != cells {
            return Err(Error::DimensionMismatch(format!(
                "{} values for dims {dims:?}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !(v.abs() <= 1.0 + RANGE_SLACK)) {
            return Err(Error::RangeViolation { row: i, col: 0, value: data[i], low: -1.0, high: 1.0 });
        }
        Ok(DifferentialTensor { dims, data: data.into_iter().map(|v| v.clamp(-1.0, 1.0)).collect() })
    }

    pub fn sample(dims: Vec<usize>, spec: &RandomSpec) -> Result<Self> {
        let cells = dims.iter().product();
        DifferentialTensor::new(dims, spec.unit_draws(cells))
    }

    pub fn genes(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl From<&DifferentialFitness> for DifferentialTensor {
    fn from(d: &DifferentialFitness) -> Self {
        DifferentialTensor {
            dims: vec![d.d.rows(), d.d.cols()],
            data: d.d.as_slice().to_vec(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FitnessJson {
    m: usize,
    n: usize,
    s: f64,
    rows: Matrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DifferentialJson {
    m: usize,
    n: usize,
    rows: Matrix,
}

fn check_dims(m: usize, n: usize, rows: &Matrix) -> Result<()> {
    if (m, n) != (rows.rows(), rows.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "declared {m}x{n}, found {}x{}",
            rows.rows(),
            rows.cols()
        )));
    }
    Ok(())
}

fn write_csv_rows(out: &mut String, m: &Matrix) {
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
}

fn read_csv(text: &str) -> Result<(Vec<&str>, Matrix)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .and_then(|l| l.trim().strip_prefix('#'))
        .ok_or_else(|| invalid("missing `#` header line"))?
        .split_whitespace()
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| parse_num::<f64>(v.trim())).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok((header, Matrix::from_rows(rows)?))
}

fn parse_num<T: std::str::FromStr>(v: &str) -> Result<T> {
    v.parse().map_err(|_| invalid(format!("cannot parse number `{v}`")))
}

/// Samples an `m×n` weak-selection landscape with iid entries symmetric
/// around 1.
pub fn sample_fitness(m: usize, n: usize, s: SelectionStrength, spec: &RandomSpec) -> Result<FitnessMatrix> {
    if m == 0 || n == 0 {
        return Err(invalid("fitness matrix needs m, n >= 1"));
    }
    let w = spec.unit_draws(m * n).into_iter().map(|u| 1.0 + s.get() * u).collect();
    FitnessMatrix::new(Matrix::from_row_major(m, n, w)?, s)
}

/// Samples a square differential landscape with iid entries on `[-1, 1]`.
pub fn sample_differential(n: usize, spec: &RandomSpec) -> Result<DifferentialFitness> {
    sample_differential_rect(n, n, spec)
}

pub fn sample_differential_rect(m: usize, n: usize, spec: &RandomSpec) -> Result<DifferentialFitness> {
    if m == 0 || n == 0 {
        return Err(invalid("differential landscape needs at least one row and column"));
    }
    Ok(DifferentialFitness { d: Matrix::from_row_major(m, n, spec.unit_draws(m * n))? })
}

pub fn to_differential(w: &FitnessMatrix, s: SelectionStrength) -> Result<DifferentialFitness> {
    check_range(&w.w, 1.0 - s.get(), 1.0 + s.get())?;
    Ok(DifferentialFitness { d: w.w.map(|v| ((v - 1.0) / s.get()).clamp(-1.0, 1.0)) })
}

pub fn from_differential(d: &DifferentialFitness, s: SelectionStrength) -> Result<FitnessMatrix> {
    check_range(&d.d, -1.0, 1.0)?;
    FitnessMatrix::new(d.d.map(|v| 1.0 + s.get() * v), s)
}

/// Draws a uniform point of the probability simplex of dimension `len`.
pub(crate) fn sample_simplex<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    // Normalized iid exponentials are Dirichlet(1, ..., 1).
    let e: Vec<f64> = (0..len).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}
