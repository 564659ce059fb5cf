//! Numerical toolkit for finite-dimensional general probabilistic theories.
//!
//! Systems are described by [`gpt::ModelSpec`]s built by the [`zoo`];
//! states, effects and channels live in the [`gpt`] module. On top of that
//! the crate provides diagonalisation ([`spectral`]), majorisation-based
//! convertibility with explicit channel synthesis ([`resource`]), entropies,
//! Gibbs states and Landauer ledgers ([`thermo`]) and reversible-group
//! tools ([`symmetry`]).

pub mod cli;
pub mod error;
pub mod gpt;
pub mod hilbert;
pub mod lp;
pub mod random;
pub mod resource;
pub mod spectral;
pub mod symmetry;
pub mod thermo;
pub mod zoo;

pub use error::{Error, Result};

/// Absolute tolerance for probabilities and vector equality.
pub const TOL: f64 = 1e-9;
/// Eigenvalues closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Vectors with smaller norm count as zero.
pub const ZERO_NORM: f64 = 1e-12;
