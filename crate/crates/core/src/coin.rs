// SPDX-License-Identifier: Apache-2.0

//! Coin-space domain types and the trace-distance metric.
//!
//! The coin is a two-level system. Pure initial states are parameterized by
//! Bloch-sphere angles (γ, φ); densities are carried either as a real
//! 4-vector (r0, r1, r2, r3) in the basis (I, σ1, σ2, σ3) or as the
//! explicit 2×2 matrix data (p_left, p_right, q).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on r0 when converting a Bloch vector to a density matrix.
const TRACE_TOL: f64 = 1e-9;

/// A point (γ, φ) on the Bloch sphere defining a pure coin state.
///
/// γ ∈ [0, π] is the polar angle (γ = 0 is |L⟩, γ = π is |R⟩); φ is the
/// azimuth, normalized into [0, 2π) on construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinAngles {
    gamma: f64,
    phi: f64,
}

impl CoinAngles {
    pub fn new(gamma: f64, phi: f64) -> Result<Self> {
        if !gamma.is_finite() || !(0.0..=PI).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in [0, pi], got {gamma}"
            )));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "phi must be finite, got {phi}"
            )));
        }
        Ok(Self {
            gamma,
            phi: phi.rem_euclid(2.0 * PI),
        })
    }

    /// North pole of the Bloch sphere: the state |L⟩.
    pub fn north() -> Self {
        Self {
            gamma: 0.0,
            phi: 0.0,
        }
    }

    /// South pole of the Bloch sphere: the state |R⟩.
    pub fn south() -> Self {
        Self {
            gamma: PI,
            phi: 0.0,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// The antipodal point (π − γ, φ + π): the unique pure state orthogonal
    /// to this one. The two states have trace distance 1.
    pub fn orthogonal_partner(&self) -> Self {
        Self {
            gamma: PI - self.gamma,
            phi: (self.phi + PI).rem_euclid(2.0 * PI),
        }
    }

    /// Spinor components (upper = left chirality):
    /// (cos(γ/2), e^{−iφ} sin(γ/2)).
    pub fn spinor(&self) -> (Complex64, Complex64) {
        let up = Complex64::new((self.gamma / 2.0).cos(), 0.0);
        let down = Complex64::from_polar((self.gamma / 2.0).sin(), -self.phi);
        (up, down)
    }

    /// Bloch 4-vector of the pure state |Φ⟩⟨Φ|:
    /// (1/2)·(1, cos φ sin γ, −sin φ sin γ, cos γ).
    pub fn bloch(&self) -> BlochVector {
        BlochVector {
            r0: 0.5,
            r1: 0.5 * self.phi.cos() * self.gamma.sin(),
            r2: -0.5 * self.phi.sin() * self.gamma.sin(),
            r3: 0.5 * self.gamma.cos(),
        }
    }
}

/// A 2×2 Hermitian coin matrix written as a real 4-vector in the basis
/// (I, σ1, σ2, σ3). A density matrix has r0 = 1/2 and
/// r1² + r2² + r3² ≤ 1/4, with equality exactly for pure states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl BlochVector {
    pub fn new(r0: f64, r1: f64, r2: f64, r3: f64) -> Self {
        Self { r0, r1, r2, r3 }
    }

    pub fn from_array(r: [f64; 4]) -> Self {
        Self {
            r0: r[0],
            r1: r[1],
            r2: r[2],
            r3: r[3],
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.r0, self.r1, self.r2, self.r3]
    }

    /// Length of the (r1, r2, r3) part; at most 1/2 for a density matrix.
    pub fn bloch3_norm(&self) -> f64 {
        (self.r1 * self.r1 + self.r2 * self.r2 + self.r3 * self.r3).sqrt()
    }

    /// Convert to explicit matrix entries. The component map is
    /// p_left = r0 + r3, p_right = r0 − r3, q = r1 − i·r2.
    ///
    /// Fails when r0 deviates from 1/2 by more than 1e-9 (not trace-one).
    pub fn to_density(&self) -> Result<ChiralDensity> {
        if (self.r0 - 0.5).abs() > TRACE_TOL {
            return Err(Error::NotTraceOne { r0: self.r0 });
        }
        Ok(ChiralDensity {
            p_left: self.r0 + self.r3,
            p_right: self.r0 - self.r3,
            q: Complex64::new(self.r1, -self.r2),
        })
    }

    pub fn from_density(rho: &ChiralDensity) -> Self {
        Self {
            r0: 0.5 * (rho.p_left + rho.p_right),
            r1: rho.q.re,
            r2: -rho.q.im,
            r3: 0.5 * (rho.p_left - rho.p_right),
        }
    }
}

impl std::ops::Sub for BlochVector {
    type Output = BlochVector;

    fn sub(self, other: BlochVector) -> BlochVector {
        BlochVector {
            r0: self.r0 - other.r0,
            r1: self.r1 - other.r1,
            r2: self.r2 - other.r2,
            r3: self.r3 - other.r3,
        }
    }
}

/// The 2×2 coin reduced density matrix
/// [[p_left, q], [q*, p_right]].
///
/// p_left and p_right are the total left/right chirality probabilities and
/// q is the position-summed coherence. Hermiticity is structural; validity
/// (trace one, positivity) is checked by [`ChiralDensity::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiralDensity {
    pub p_left: f64,
    pub p_right: f64,
    pub q: Complex64,
}

impl ChiralDensity {
    pub fn new(p_left: f64, p_right: f64, q: Complex64) -> Self {
        Self { p_left, p_right, q }
    }

    /// The state I/2: no chirality bias, no coherence.
    pub fn maximally_mixed() -> Self {
        Self {
            p_left: 0.5,
            p_right: 0.5,
            q: Complex64::new(0.0, 0.0),
        }
    }

    pub fn trace(&self) -> f64 {
        self.p_left + self.p_right
    }

    /// Check trace-one, non-negative populations, and positive
    /// semidefiniteness (p_left·p_right − |q|² ≥ −tol).
    pub fn validate(&self, tol: f64) -> Result<()> {
        if (self.trace() - 1.0).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "density trace {} differs from 1",
                self.trace()
            )));
        }
        if self.p_left < -tol || self.p_right < -tol {
            return Err(Error::InvalidParameter(format!(
                "negative population: p_left = {}, p_right = {}",
                self.p_left, self.p_right
            )));
        }
        let det = self.p_left * self.p_right - self.q.norm_sqr();
        if det < -tol {
            return Err(Error::InvalidParameter(format!(
                "density is not positive semidefinite: det = {det}"
            )));
        }
        Ok(())
    }

    /// Trace distance D = (1/2) tr |ρ1 − ρ2|.
    ///
    /// The difference of two trace-one Hermitian 2×2 matrices is traceless
    /// Hermitian with eigenvalues ±sqrt(d² + |Δq|²), d = Δp_left, so
    /// D = sqrt(d² + |Δq|²). Always in [0, 1] for density matrices.
    pub fn trace_distance(&self, other: &ChiralDensity) -> f64 {
        let d = self.p_left - other.p_left;
        let dq = self.q - other.q;
        (d * d + dq.norm_sqr()).sqrt()
    }
}

/// Coin bias θ ∈ [0, π/2]; the one-step amplitudes mix with cos θ and
/// sin θ. The default θ = π/4 is the unbiased (Hadamard) coin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinParams {
    theta: f64,
}

impl CoinParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=PI / 2.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, pi/2], got {theta}"
            )));
        }
        Ok(Self { theta })
    }

    pub fn hadamard() -> Self {
        Self { theta: PI / 4.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn cos(&self) -> f64 {
        self.theta.cos()
    }

    pub fn sin(&self) -> f64 {
        self.theta.sin()
    }
}

impl Default for CoinParams {
    fn default() -> Self {
        Self::hadamard()
    }
}
