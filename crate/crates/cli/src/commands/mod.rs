pub mod count;
pub mod equivalence;
pub mod flip;
pub mod prob;
pub mod regret;
pub mod simulate;

/// Sub-stream tags under the master seed.
pub(crate) mod tag {
    pub const LANDSCAPE: u64 = 1;
    pub const INIT: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const CASE: u64 = 4;
}
