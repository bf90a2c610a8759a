//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building chains, assembling
/// G-functions, scanning for roots, or diagonalizing the oracle.
#[derive(Debug, Error)]
pub enum RabiError {
    /// Two-photon coupling at or beyond the spectral-collapse boundary.
    #[error("two-photon coupling g = {g} outside [0, 1/2); squeeze frame undefined")]
    CouplingOutOfRange { g: f64 },

    /// A recurrence denominator came within the pole guard radius.
    #[error("evaluation point within {distance:.3e} of the pole at index {index}")]
    PoleTooClose { index: usize, distance: f64 },

    /// Series tail criterion unmet at the truncation ceiling.
    #[error("series tail not converged after {n_terms} terms")]
    NotConverged { n_terms: usize },

    /// The displacement-series recurrence divides by g.
    #[error("displacement-series recurrence requires g > 0")]
    ZeroCoupling,

    /// Fock-space truncation cannot hold the requested state.
    #[error("Fock cutoff {n_f} too small: {reason}")]
    CutoffTooSmall { n_f: usize, reason: String },

    /// Jacobi eigensolver failed to reduce the off-diagonal norm.
    #[error("Jacobi sweep limit ({sweeps}) reached before convergence")]
    NoConvergence { sweeps: usize },

    /// Scan window is empty or degenerate.
    #[error("scan window is empty")]
    WindowEmpty,

    /// Frame proportionality is undefined at a degenerate level.
    #[error("proportionality undefined for a degenerate (exceptional) state")]
    DegenerateState,

    /// Invalid model parameters or flag combination.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RabiError>;
