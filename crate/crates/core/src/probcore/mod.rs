//! Exact and empirical probability arithmetic over finite alphabets.
//!
//! Axis subsets are named by their alphabet names. Entropies are in bits with
//! `0 log 0 = 0`. Distributions and channels validate on construction: every
//! entry nonnegative, every table (or row) summing to one within
//! [`NORMALIZATION_TOL`].

mod alphabet;
mod channel;
pub mod info;
mod joint;
mod sample;
mod tally;

pub use alphabet::Alphabet;
pub use channel::Channel;
pub use joint::{
    check_markov, compose, cond_mutual_info, empirical_joint, entropy, tv_distance,
    JointDistribution,
};
pub use sample::{Categorical, Seed, SeedStream};
pub use tally::Tally;

pub(crate) use joint::tv_slices;

/// Allowed deviation of a probability table's total from one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Tolerance for internal exact-identity comparisons.
pub const COMPARE_TOL: f64 = 1e-12;
