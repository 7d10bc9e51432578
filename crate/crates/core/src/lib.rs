//! Numerical and combinatorial free probability.
//!
//! The crate is organized bottom-up:
//!
//! - [`ncpart`]: non-crossing partitions, Kreweras complement, Möbius function,
//!   permutations and pairings.
//! - [`series`]: truncated power series and the moment / R / S transform algebra.
//! - [`moments`]: moment–cumulant conversion on the NC lattice, mixed moments of
//!   free pairs, semicircular families, Haar-unitary cumulants.
//! - [`catalog`]: closed-form laws with densities, atoms and Cauchy transforms.
//! - [`convolve`]: free additive and multiplicative convolution, compression,
//!   semigroups, limit theorems and the support of ⊠-powers.
//! - [`rmtlab`]: random-matrix Monte Carlo with exact genus-expansion and
//!   Weingarten predictions.
//! - [`brown`]: Fuglede–Kadison determinants and radial Brown measures.
//! - [`repro`]: named check suites used by the command-line front end.

pub mod brown;
pub mod catalog;
pub mod convolve;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod ncpart;
pub mod repro;
pub mod rmtlab;
pub mod series;

#[cfg(test)]
#[path = "../tests/support/freeness_oracle.rs"]
mod freeness_oracle;

pub use error::{Error, Result};
