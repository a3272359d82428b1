//! Secure computation of randomized functions between two parties.
//!
//! Alice holds `x`, Bob holds `y`, and Bob must end up with `z` distributed as
//! `p(z|x,y)` after a single message from Alice. This crate answers the
//! questions that come with such a problem:
//!
//! * [`charact`] decides whether the problem can be computed with perfect
//!   privacy against Bob when `p(x,y)` has full support, builds the class
//!   variable `W`, and returns the exact optimal rate `H(W|Y)`.
//! * [`rateopt`] numerically minimizes the single-letter rate expressions
//!   with and without privacy over auxiliary channels.
//! * [`protosim`] runs the explicit one-round protocol, exactly and by
//!   seeded simulation.
//! * [`osrb`] simulates the random-binning achievability scheme at small
//!   blocklengths, with maximum-likelihood Slepian-Wolf decoding.
//!
//! Everything is built on the finite-alphabet probability toolkit in
//! [`probcore`]. The crate is `no_std` and only needs `alloc`; parsing,
//! reports and the command line live in the companion `securefn` crate.
//!
//! All entropies and rates are in bits.

#![no_std]
#![deny(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod charact;
mod error;
pub mod instance;
pub mod osrb;
pub mod probcore;
pub mod protosim;
pub mod rateopt;

pub use error::{Error, Result};
pub use instance::{AuxPair, Instance};
pub use probcore::{Alphabet, Channel, JointDistribution, Seed, SeedStream};
