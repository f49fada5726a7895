//! Iterating a stepper and recording per-generation observables.

use serde::{Deserialize, Serialize};

use super::genotype::{mean_fitness, step_genotype, step_genotype_mating, MatingIndexing, RecombinationRate};
use super::mwu::{mixability, step_mwu};
use super::noise::{perturbed_differential, NoiseSpec};
use super::state::{linkage, marginals, GenotypeState, MarginalState};
use crate::error::{invalid, Error, Result};
use crate::landscape::{from_differential, sample_simplex, DifferentialFitness, SelectionStrength};
use crate::matrix::Matrix;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum StepperKind {
    /// Multiplicative updates on the marginals.
    Mwu,
    /// Selection then recombination, `p' ∝ w·(p − r·D)`.
    Genotype,
    /// The random-mating double sum.
    Mating { indexing: MatingIndexing },
}

impl StepperKind {
    pub fn name(&self) -> &'static str {
        match self {
            StepperKind::Mwu => "mwu",
            StepperKind::Genotype => "genotype",
            StepperKind::Mating { indexing: MatingIndexing::Verbatim } => "mating",
            StepperKind::Mating { indexing: MatingIndexing::Corrected } => "mating-corrected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSpec {
    pub enabled: bool,
    /// L∞ threshold between consecutive marginal states.
    pub tol: f64,
    /// Consecutive generations under `tol` before stopping.
    pub patience: u64,
}

impl Default for ConvergenceSpec {
    fn default() -> Self {
        ConvergenceSpec { enabled: true, tol: 1e-10, patience: 100 }
    }
}

impl ConvergenceSpec {
    pub fn never() -> Self {
        ConvergenceSpec { enabled: false, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Genotype(GenotypeState),
    Marginal(MarginalState),
}

impl InitialState {
    fn dims(&self) -> Vec<usize> {
        match self {
            InitialState::Genotype(g) => {
                let (m, n) = g.dims();
                vec![m, n]
            }
            InitialState::Marginal(m) => m.dims(),
        }
    }
}

/// Starting-state description as accepted in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitSpec {
    Keyword(InitKeyword),
    Marginals { x: Vec<f64>, y: Vec<f64> },
    Genotype { p: Matrix },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKeyword {
    Uniform,
    RandomDirichlet,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Keyword(InitKeyword::Uniform)
    }
}

impl InitSpec {
    /// Builds the starting state for an `m×n` landscape. Random starts draw a
    /// joint genotype distribution for genotype-level steppers and independent
    /// marginals for the multiplicative-update stepper.
    pub fn resolve(&self, m: usize, n: usize, stepper: StepperKind, seed: u64) -> Result<InitialState> {
        let joint = stepper != StepperKind::Mwu;
        let state = match self {
            InitSpec::Keyword(InitKeyword::Uniform) => {
                InitialState::Marginal(MarginalState::uniform(&[m, n]))
            }
            InitSpec::Keyword(InitKeyword::RandomDirichlet) => {
                let mut rng = seed::stream(seed, &[0x1417]);
                if joint {
                    let p = sample_simplex(&mut rng, m * n);
                    InitialState::Genotype(GenotypeState::new(Matrix::from_row_major(m, n, p)?)?)
                } else {
                    let x = sample_simplex(&mut rng, m);
                    let y = sample_simplex(&mut rng, n);
                    InitialState::Marginal(MarginalState::two(x, y)?)
                }
            }
            InitSpec::Marginals { x, y } => InitialState::Marginal(MarginalState::two(x.clone(), y.clone())?),
            InitSpec::Genotype { p } => InitialState::Genotype(GenotypeState::new(p.clone())?),
        };
        if state.dims() != [m, n] {
            return Err(Error::DimensionMismatch(format!(
                "initial state has allele counts {:?}, landscape is {m}x{n}",
                state.dims()
            )));
        }
        Ok(state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub s: SelectionStrength,
    pub stepper: StepperKind,
    /// Used by the genotype stepper only.
    pub r: RecombinationRate,
    pub horizon: u64,
    pub noise: Option<NoiseSpec>,
    pub stop: ConvergenceSpec,
    /// Keep the joint genotype matrix in every record (genotype-level steppers).
    pub keep_genotypes: bool,
}

impl RunSpec {
    pub fn mwu(s: SelectionStrength, horizon: u64) -> Self {
        RunSpec {
            s,
            stepper: StepperKind::Mwu,
            r: RecombinationRate::FREE,
            horizon,
            noise: None,
            stop: ConvergenceSpec::default(),
            keep_genotypes: false,
        }
    }

    pub fn genotype(s: SelectionStrength, r: RecombinationRate, horizon: u64) -> Self {
        RunSpec { stepper: StepperKind::Genotype, r, ..RunSpec::mwu(s, horizon) }
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Self {
        self.noise = Some(noise);
        self
    }

    pub fn with_stop(mut self, stop: ConvergenceSpec) -> Self {
        self.stop = stop;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub t: u64,
    pub marginals: MarginalState,
    pub genotype: Option<Matrix>,
    /// Mean fitness under the unperturbed landscape.
    pub wbar: f64,
    /// `‖D‖∞`; zero for the marginal stepper, which lives on the Wright manifold.
    pub ld_max: f64,
    pub mix_x: Vec<f64>,
    pub mix_y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum StopReason {
    Horizon,
    Converged { generation: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub s: f64,
    pub r: Option<f64>,
    pub horizon: u64,
    pub noise_seed: Option<u64>,
    pub stepper: String,
    pub stop: StopReason,
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub records: Vec<GenerationRecord>,
    pub meta: RunMetadata,
}

impl Trajectory {
    pub fn last(&self) -> &GenerationRecord {
        self.records.last().expect("a trajectory holds at least its initial state")
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn csv_header(m: usize, n: usize) -> String {
        let mut cols = vec!["t".to_string()];
        cols.extend((0..m).map(|i| format!("x_{i}")));
        cols.extend((0..n).map(|j| format!("y_{j}")));
        cols.push("wbar".into());
        cols.push("ld_max".into());
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let first = &self.records[0].marginals;
        let mut out = Trajectory::csv_header(first.x().len(), first.y().len());
        out.push('\n');
        for rec in &self.records {
            let mut cells = vec![rec.t.to_string()];
            cells.extend(rec.marginals.genes().iter().flatten().map(|v| format!("{v:?}")));
            cells.push(format!("{:?}", rec.wbar));
            cells.push(format!("{:?}", rec.ld_max));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

enum Current {
    Genotype(GenotypeState),
    Marginal(MarginalState),
}

fn record(current: &Current, delta: &DifferentialFitness, s: SelectionStrength, keep: bool) -> Result<GenerationRecord> {
    let (marg, genotype, ld_max) = match current {
        Current::Genotype(g) => (marginals(g), keep.then(|| g.p().clone()), linkage(g).max_abs),
        Current::Marginal(m) => (m.clone(), None, 0.0),
    };
    let mix = mixability(&marg, delta)?;
    let wbar = match current {
        Current::Genotype(g) => mean_fitness(g, &from_differential(delta, s)?),
        Current::Marginal(_) => 1.0 + s.get() * mix.mean,
    };
    Ok(GenerationRecord {
        t: marg.generation(),
        marginals: marg,
        genotype,
        wbar,
        ld_max,
        mix_x: mix.m_x,
        mix_y: mix.m_y,
    })
}

/// Runs `spec.horizon` generations from `init`, stopping early once the
/// marginals have moved less than `stop.tol` for `stop.patience` consecutive
/// generations.
pub fn run_trajectory(init: &InitialState, delta: &DifferentialFitness, spec: &RunSpec) -> Result<Trajectory> {
    if spec.horizon == 0 {
        return Err(invalid("horizon T must be at least 1"));
    }
    let (m, n) = delta.dims();
    if init.dims() != [m, n] {
        return Err(Error::DimensionMismatch(format!(
            "initial state has allele counts {:?}, landscape is {m}x{n}",
            init.dims()
        )));
    }
    let w = from_differential(delta, spec.s)?;
    let mut current = match (spec.stepper, init) {
        (StepperKind::Mwu, InitialState::Marginal(mg)) => Current::Marginal(mg.clone().with_generation(0)),
        (StepperKind::Mwu, InitialState::Genotype(g)) => Current::Marginal(marginals(g).with_generation(0)),
        (_, InitialState::Genotype(g)) => Current::Genotype(g.clone().with_generation(0)),
        (_, InitialState::Marginal(mg)) => Current::Genotype(GenotypeState::product(mg.x(), mg.y())?),
    };
    let noise = spec.noise.filter(|n| n.enabled);
    let mut records = vec![record(&current, delta, spec.s, spec.keep_genotypes)?];
    let mut quiet = 0u64;
    let mut stop = StopReason::Horizon;
    for t in 0..spec.horizon {
        let next = match &current {
            Current::Marginal(mg) => {
                let step = match &noise {
                    Some(ns) => step_mwu(mg, &perturbed_differential(delta, spec.s, ns, t), spec.s),
                    None => step_mwu(mg, delta, spec.s),
                };
                step.map(Current::Marginal)
            }
            Current::Genotype(g) => match spec.stepper {
                StepperKind::Mating { indexing } => step_genotype_mating(g, &w, indexing),
                _ => step_genotype(g, &w, spec.r, noise.as_ref()),
            }
            .map(Current::Genotype),
        }
        .map_err(|e| Error::AtGeneration { generation: t, source: Box::new(e) })?;
        current = next;
        let rec = record(&current, delta, spec.s, spec.keep_genotypes)?;
        let moved = rec.marginals.max_abs_diff(&records.last().expect("nonempty").marginals);
        records.push(rec);
        if spec.stop.enabled {
            quiet = if moved < spec.stop.tol { quiet + 1 } else { 0 };
            if quiet >= spec.stop.patience {
                stop = StopReason::Converged { generation: t + 1 };
                break;
            }
        }
    }
    let meta = RunMetadata {
        s: spec.s.get(),
        r: (spec.stepper == StepperKind::Genotype).then(|| spec.r.get()),
        horizon: spec.horizon,
        noise_seed: noise.map(|n| n.seed),
        stepper: spec.stepper.name().to_string(),
        stop,
        records: records.len(),
    };
    Ok(Trajectory { records, meta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> SelectionStrength {
        SelectionStrength::new(v).unwrap()
    }

    #[test]
    fn neutral_landscape_converges_at_patience() {
        let d = DifferentialFitness::zeros(2, 3);
        let init = InitialState::Marginal(MarginalState::two(vec![0.3, 0.7], vec![0.2, 0.2, 0.6]).unwrap());
        let traj = run_trajectory(&init, &d, &RunSpec::mwu(s(0.1), 10_000)).unwrap();
        assert_eq!(traj.meta.stop, StopReason::Converged { generation: 100 });
        assert_eq!(traj.len(), 101);
        assert_eq!(traj.last().marginals.genes(), &[vec![0.3, 0.7], vec![0.2, 0.2, 0.6]]);
        assert!(traj.records.iter().all(|r| r.wbar == 1.0));
    }

    #[test]
    fn zero_horizon_rejected() {
        let d = DifferentialFitness::zeros(2, 2);
        let init = InitialState::Marginal(MarginalState::uniform(&[2, 2]));
        assert!(matches!(run_trajectory(&init, &d, &RunSpec::mwu(s(0.1), 0)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn horizon_bounds_record_count() {
        let d = DifferentialFitness::new(Matrix::from_rows(vec![vec![0.5, -0.2], vec![0.1, 0.9]]).unwrap()).unwrap();
        let init = InitialState::Marginal(MarginalState::uniform(&[2, 2]));
        let spec = RunSpec::mwu(s(0.1), 25).with_stop(ConvergenceSpec::never());
        let traj = run_trajectory(&init, &d, &spec).unwrap();
        assert_eq!(traj.len(), 26);
        assert_eq!(traj.meta.stop, StopReason::Horizon);
        assert_eq!(traj.records[25].t, 25);
    }

    #[test]
    fn dominant_row_takes_over() {
        // Row 1 beats row 0 in every column.
        let d = DifferentialFitness::new(Matrix::from_rows(vec![vec![-0.3, 0.1], vec![0.2, 0.6]]).unwrap()).unwrap();
        let init = InitialState::Marginal(MarginalState::uniform(&[2, 2]));
        let traj = run_trajectory(&init, &d, &RunSpec::mwu(s(0.1), 100_000)).unwrap();
        assert!(traj.last().marginals.x()[1] > 1.0 - 1e-8);
        // Dominance keeps the winning row's mixability strictly largest throughout.
        assert!(traj.records.iter().all(|r| r.mix_x[1] > r.mix_x[0]));
    }

    #[test]
    fn genotype_run_records_linkage() {
        let d = DifferentialFitness::new(Matrix::from_rows(vec![vec![0.5, -0.5], vec![-0.5, 0.5]]).unwrap()).unwrap();
        let init = InitSpec::Keyword(InitKeyword::RandomDirichlet)
            .resolve(2, 2, StepperKind::Genotype, 3)
            .unwrap();
        let spec = RunSpec { keep_genotypes: true, ..RunSpec::genotype(s(0.05), RecombinationRate::FREE, 30) };
        let traj = run_trajectory(&init, &d, &spec).unwrap();
        assert!(traj.records[0].ld_max > 0.0);
        assert!(traj.records[5].ld_max < traj.records[0].ld_max);
        assert!(traj.records.iter().all(|r| r.genotype.is_some()));
        assert_eq!(traj.meta.r, Some(1.0));
    }

    #[test]
    fn stepper_errors_carry_generation() {
        let d = DifferentialFitness::zeros(2, 2);
        let init = InitialState::Marginal(MarginalState::uniform(&[3, 2]));
        assert!(matches!(run_trajectory(&init, &d, &RunSpec::mwu(s(0.1), 5)), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn csv_layout() {
        let d = DifferentialFitness::zeros(1, 2);
        let init = InitialState::Marginal(MarginalState::two(vec![1.0], vec![0.5, 0.5]).unwrap());
        let spec = RunSpec::mwu(s(0.1), 2).with_stop(ConvergenceSpec::never());
        let csv = run_trajectory(&init, &d, &spec).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,x_0,y_0,y_1,wbar,ld_max");
        assert_eq!(lines[1], "0,1.0,0.5,0.5,1.0,0.0");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn init_spec_parsing() {
        let k: InitSpec = serde_json::from_str(r#""uniform""#).unwrap();
        assert_eq!(k, InitSpec::Keyword(InitKeyword::Uniform));
        let k: InitSpec = serde_json::from_str(r#""random-dirichlet""#).unwrap();
        assert_eq!(k, InitSpec::Keyword(InitKeyword::RandomDirichlet));
        let k: InitSpec = serde_json::from_str(r#"{"x":[0.5,0.5],"y":[1.0]}"#).unwrap();
        assert!(matches!(k.resolve(2, 1, StepperKind::Mwu, 0), Ok(InitialState::Marginal(_))));
        assert!(k.resolve(2, 2, StepperKind::Mwu, 0).is_err());
        let k: InitSpec = serde_json::from_str(r#"{"p":[[0.5],[0.5]]}"#).unwrap();
        assert!(matches!(k.resolve(2, 1, StepperKind::Genotype, 0), Ok(InitialState::Genotype(_))));
        assert!(serde_json::from_str::<InitSpec>(r#""sideways""#).is_err());
    }
}
