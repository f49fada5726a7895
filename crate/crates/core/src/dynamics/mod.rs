//! Genotype-frequency and multiplicative-update dynamics.

mod genotype;
mod mwu;
mod nagylaki;
mod noise;
mod state;
mod trajectory;

pub use genotype::{mean_fitness, step_genotype, step_genotype_mating, MatingIndexing, RecombinationRate};
pub use mwu::{mixability, step_mwu, GameLandscape, Mixability};
pub use nagylaki::{nagylaki_ld_profile, random_joint_start, relaxation_time, LdLevel, LdProfile, LdStepper, NagylakiConfig};
pub use noise::{noise_draws, perturbed_differential, NoiseSpec};
pub use state::{linkage, marginals, GenotypeState, LinkageDisequilibrium, MarginalState};
pub use trajectory::{
    run_trajectory, ConvergenceSpec, GenerationRecord, InitKeyword, InitSpec, InitialState, RunMetadata, RunSpec,
    StepperKind, StopReason, Trajectory,
};
