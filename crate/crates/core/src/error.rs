// SPDX-License-Identifier: Apache-2.0

//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter fell outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A Bloch 4-vector whose r0 component is not 1/2 cannot represent a
    /// trace-one density matrix.
    #[error("bloch vector is not trace-one: r0 = {r0}")]
    NotTraceOne { r0: f64 },

    /// Requested step count exceeds the configured lattice budget.
    #[error("step count {steps} exceeds the lattice limit {limit}")]
    LatticeLimit { steps: usize, limit: usize },

    /// Quadrature size below the resolution floor for the requested horizon.
    #[error("quadrature size {nk} below required minimum {min} for t = {t}")]
    QuadratureTooCoarse { nk: usize, min: usize, t: usize },

    /// Doubling the quadrature grid still moved the result; the requested
    /// resolution cannot be trusted.
    #[error("insufficient k-space resolution: doubling nk changed a component by {max_delta:.3e}")]
    InsufficientResolution { max_delta: f64 },

    /// Full-density-matrix ensembles are capped to keep the matrices tractable.
    #[error("horizon {steps} exceeds the full-density-matrix cap {limit}")]
    HorizonLimit { steps: usize, limit: usize },
}

impl Error {
    /// True for errors caused by an invalid run configuration rather than a
    /// numerical failure at runtime.
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::InsufficientResolution { .. })
    }
}
