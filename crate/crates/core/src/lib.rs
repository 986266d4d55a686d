// SPDX-License-Identifier: Apache-2.0

//! Simulation and analysis toolkit for the coined discrete-time quantum walk
//! on a line, focused on the chirality (coin) reduced density matrix.
//!
//! The walker carries a two-level coin that conditions its motion. Tracing
//! the full walker state over position leaves a 2×2 reduced density matrix
//! whose dynamics can be computed three ways, all provided here:
//!
//! * [`walk`] — exact position-space evolution of the decoherence-free walk,
//!   plus the closed map obeyed by the global chirality distribution;
//! * [`kspace`] — exact evolution of the coin Bloch vector through a 4×4
//!   superoperator at fixed quasi-momentum, integrated over the Brillouin
//!   zone. Handles both the free walk and broken-link decoherence, and
//!   carries all closed-form asymptotics;
//! * [`mc`] — per-realization broken-link trajectories in position space
//!   with seeded, reproducible ensemble averaging.
//!
//! On top of the engines, [`nonmarkov`] assembles the trace-distance
//! time series between pairs of initial coin states and the BLP
//! (Breuer–Laine–Piilo) non-Markovianity measure built from its positive
//! increments.
//!
//! Shared domain types (coin angles, Bloch vectors, reduced densities,
//! the trace-distance metric) live in [`coin`].

// small fixed-size kernels read better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod coin;
pub mod error;
pub mod kspace;
pub mod mc;
pub mod nonmarkov;
pub mod walk;

pub use coin::{BlochVector, ChiralDensity, CoinAngles, CoinParams};
pub use error::{Error, Result};
