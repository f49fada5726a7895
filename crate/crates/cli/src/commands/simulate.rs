use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use weaksel::dynamics::{
    run_trajectory, ConvergenceSpec, InitSpec, MatingIndexing, NoiseSpec, RecombinationRate, RunMetadata, RunSpec,
    StepperKind,
};
use weaksel::landscape::SelectionStrength;
use weaksel::matrix::Matrix;
use weaksel::seed::derive_seed;

use super::tag;
use crate::config::{resolve_landscape, CliError};
use crate::output::OutDir;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepperName {
    #[default]
    Mwu,
    Genotype,
    Mating,
    MatingCorrected,
}

impl StepperName {
    pub fn kind(self) -> StepperKind {
        match self {
            StepperName::Mwu => StepperKind::Mwu,
            StepperName::Genotype => StepperKind::Genotype,
            StepperName::Mating => StepperKind::Mating { indexing: MatingIndexing::Verbatim },
            StepperName::MatingCorrected => StepperKind::Mating { indexing: MatingIndexing::Corrected },
        }
    }
}

fn free() -> RecombinationRate {
    RecombinationRate::FREE
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub s: SelectionStrength,
    pub horizon: u64,
    #[serde(default)]
    pub stepper: StepperName,
    /// Recombination rate for the genotype stepper.
    #[serde(default = "free")]
    pub r: RecombinationRate,
    #[serde(default)]
    pub delta: Option<Matrix>,
    #[serde(default)]
    pub landscape_file: Option<PathBuf>,
    /// Random landscape `[m, n]` drawn from the seed.
    #[serde(default)]
    pub dims: Option<[usize; 2]>,
    #[serde(default)]
    pub init: InitSpec,
    #[serde(default)]
    pub noise: bool,
    #[serde(default)]
    pub stop: ConvergenceSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Serialize)]
struct Metadata<'a> {
    config: &'a SimulateConfig,
    run: &'a RunMetadata,
    delta: &'a Matrix,
}

pub fn run(cfg: SimulateConfig, out: &Path) -> Result<(), CliError> {
    crate::config::check_positive("horizon", cfg.horizon)?;
    let delta = resolve_landscape(&cfg.delta, &cfg.landscape_file, cfg.dims, derive_seed(cfg.seed, &[tag::LANDSCAPE]))?;
    let (m, n) = delta.dims();
    let stepper = cfg.stepper.kind();
    let init = cfg
        .init
        .resolve(m, n, stepper, derive_seed(cfg.seed, &[tag::INIT]))
        .map_err(|e| CliError::field("init", e))?;
    let mut spec = RunSpec { stepper, r: cfg.r, ..RunSpec::mwu(cfg.s, cfg.horizon) }.with_stop(cfg.stop);
    if cfg.noise {
        spec = spec.with_noise(NoiseSpec::on(derive_seed(cfg.seed, &[tag::NOISE])));
    }
    eprintln!("simulate: {}x{} landscape, stepper {}, T={}", m, n, stepper.name(), cfg.horizon);
    let traj = run_trajectory(&init, &delta, &spec)?;
    eprintln!("simulate: {} records, stop {:?}", traj.len(), traj.meta.stop);
    let dir = OutDir::create(out)?;
    dir.write("trajectory.csv", &traj.to_csv())?;
    dir.write_json("trajectory.json", &Metadata { config: &cfg, run: &traj.meta, delta: delta.matrix() })
}
