//! Split-merge Markov chains on partitions.
//!
//! The crate simulates the continuous coagulation-fragmentation chain (CCF) on
//! partitions of `[0, 1]` and its discrete counterpart DCF(n) on integer
//! partitions of `n` (the cycle type of a permutation under random
//! transpositions). It couples the two chains on a common probability space and
//! analyses the discrete chain exactly: rational transition kernels, the Ewens
//! stationary law, and the full spectral decomposition through
//! symmetric-group characters computed with the Murnaghan-Nakayama rule.
//!
//! Modules:
//!
//! - [`partitions`]: integer and continuous partitions, Young-diagram operations, cylinder sets.
//! - [`samplers`]: GEM / Poisson-Dirichlet(1) stick breaking, Ewens sampling, size-biased picks.
//! - [`chains`]: CCF and DCF steps, exact kernels, Ewens weights, k-step laws.
//! - [`coupling`]: the joint CCF/DCF construction, discrepancy and decoupling time.
//! - [`spectral`]: characters, eigenvalues, spectral event probabilities, return probabilities.
//! - [`diagnostics`]: moment sums, dyadic counts, total variation, goodness-of-fit helpers.
//! - [`cli`]: the command-line front end used by the `splitmerge` binary.

pub mod chains;
pub mod cli;
pub mod coupling;
pub mod diagnostics;
mod error;
pub mod partitions;
pub mod samplers;
pub mod spectral;

pub use error::{Error, Result};

/// Largest `n` for which exact (enumerative) computations are allowed by default.
pub const DEFAULT_EXACT_CAP: usize = 30;

/// Default truncation threshold for stick-breaking samplers.
pub const DEFAULT_EPSILON_TRUNC: f64 = 1e-9;
