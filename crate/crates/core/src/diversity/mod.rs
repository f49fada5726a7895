//! Equilibrium supports of the two-gene dynamics in random landscapes.

mod equilibrium;
mod flip;
mod linsys;
mod montecarlo;
mod orbit;

pub use equilibrium::{
    count_equilibria, equilibrium_from_support, expected_count_bound, verify_stationarity, EquilibriumCertificate,
    EquilibriumCount, Rejection, SupportOutcome, ENUMERATION_LIMIT, FITNESS_IDENTITY_TOL, STATIONARITY_TOL,
};
pub use flip::{apply_flips, flip_to_nonnegative, FlipOutcome, FlipSets, FlipStep, Line, NEGATIVE_SUM_TOL};
pub use linsys::{has_positive_solution, is_equilibrium_submatrix, solve_unit_systems, UnitSolution, POSITIVITY_THRESHOLD};
pub use montecarlo::{mc_equilibrium_probability, mc_positive_solution_probability, wilson_interval, McEstimate, Z95};
pub use orbit::{distinct_flippings, orbit_identities_check, orbit_witness, ORBIT_IDENTITY_TOL};
