//! Quantum retrodiction on finite-dimensional spaces.
//!
//! - [`hilbert`]: complex operator algebra (tensor products, partial traces,
//!   matrix exponentials, positivity checks).
//! - [`bayes`]: classical Bayes over finite event sets; the oracle for the rest.
//! - [`retrodict`]: POMs, unbiased and biased sources, retrodictive states
//!   and conditionals.
//! - [`optics`]: truncated Fock-space beam splitters, detector models,
//!   projection synthesis and quantum scissors.
//! - [`bb84`]: the four-state key distribution example with a Monte-Carlo
//!   slot simulator.
//! - [`cli`]: scenario files in, result documents out.

pub mod bayes;
pub mod bb84;
pub mod cli;
pub mod hilbert;
pub mod optics;
pub mod parallel;
pub mod retrodict;

pub use hilbert::{ModeDims, Operator, DEFAULT_TOL};
pub use parallel::Strategy;
