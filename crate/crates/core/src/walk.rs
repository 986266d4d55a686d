// SPDX-License-Identifier: Apache-2.0

//! Exact position-space evolution of the decoherence-free walk.
//!
//! The full state is a spinor field over lattice sites; one step applies
//!
//! ```text
//! a_x' = a_{x+1} cos θ + b_{x+1} sin θ
//! b_x' = a_{x−1} sin θ − b_{x−1} cos θ
//! ```
//!
//! with the upper component `a` carrying left chirality. The lattice is
//! stored as a dense window over the occupied support, which grows by one
//! site per side per step; a point source after t steps never extends past
//! [−t, t]. No renormalization is applied between steps, so norm drift is a
//! direct unitarity diagnostic.

use num_complex::Complex64;

use crate::coin::{ChiralDensity, CoinAngles, CoinParams};
use crate::error::{Error, Result};

/// Cap on evolution length; a point source needs O(t) memory, so this
/// bounds the dense window at ~200k sites.
pub const MAX_STEPS: usize = 100_000;

/// Spinor field {(a_x, b_x)} over a contiguous window of lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerState {
    /// Site index of `amps[0]`.
    origin_offset: i64,
    /// (a_x, b_x) pairs for consecutive sites starting at `origin_offset`.
    amps: Vec<(Complex64, Complex64)>,
}

impl WalkerState {
    /// The state |0⟩ ⊗ |Φ⟩: a point source at the origin with spinor
    /// (cos(γ/2), e^{−iφ} sin(γ/2)).
    pub fn point_source(angles: &CoinAngles) -> Self {
        let (a, b) = angles.spinor();
        Self {
            origin_offset: 0,
            amps: vec![(a, b)],
        }
    }

    /// Build a state from raw amplitudes; `min_site` is the site of
    /// `amps[0]`.
    pub fn from_amplitudes(min_site: i64, amps: Vec<(Complex64, Complex64)>) -> Self {
        Self {
            origin_offset: min_site,
            amps,
        }
    }

    /// The stored amplitude window, starting at [`WalkerState::min_site`].
    pub fn amplitudes(&self) -> &[(Complex64, Complex64)] {
        &self.amps
    }

    /// First site of the stored window.
    pub fn min_site(&self) -> i64 {
        self.origin_offset
    }

    /// Last site of the stored window (inclusive).
    pub fn max_site(&self) -> i64 {
        self.origin_offset + self.amps.len() as i64 - 1
    }

    /// Amplitudes at site `x` (zero outside the stored window).
    pub fn amp(&self, x: i64) -> (Complex64, Complex64) {
        let idx = x - self.origin_offset;
        if idx < 0 || idx >= self.amps.len() as i64 {
            (Complex64::ZERO, Complex64::ZERO)
        } else {
            self.amps[idx as usize]
        }
    }

    /// Iterate (site, (a, b)) over the stored window.
    pub fn iter_sites(&self) -> impl Iterator<Item = (i64, (Complex64, Complex64))> + '_ {
        self.amps
            .iter()
            .enumerate()
            .map(|(i, &amp)| (self.origin_offset + i as i64, amp))
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps
            .iter()
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum()
    }

    /// Inner product ⟨self|other⟩ over the full (position ⊗ coin) space.
    pub fn overlap(&self, other: &WalkerState) -> Complex64 {
        let lo = self.min_site().max(other.min_site());
        let hi = self.max_site().min(other.max_site());
        let mut acc = Complex64::ZERO;
        for x in lo..=hi {
            let (a1, b1) = self.amp(x);
            let (a2, b2) = other.amp(x);
            acc += a1.conj() * a2 + b1.conj() * b2;
        }
        acc
    }

    /// One walk step. The window grows by one site on each side.
    pub fn step(&self, coin: &CoinParams) -> Self {
        let c = coin.cos();
        let s = coin.sin();
        let n = self.amps.len();
        let mut out = vec![(Complex64::ZERO, Complex64::ZERO); n + 2];
        // out[j] holds site origin_offset - 1 + j; a pulls from the site to
        // its right, b from the site to its left.
        for (i, &(a, b)) in self.amps.iter().enumerate() {
            out[i].0 = a * c + b * s;
            out[i + 2].1 = a * s - b * c;
        }
        Self {
            origin_offset: self.origin_offset - 1,
            amps: out,
        }
    }

    /// Partial trace over position: p_left = Σ|a_x|², p_right = Σ|b_x|²,
    /// q = Σ a_x b_x*.
    pub fn reduce_chirality(&self) -> ChiralDensity {
        let mut p_left = 0.0;
        let mut p_right = 0.0;
        let mut q = Complex64::ZERO;
        for (a, b) in &self.amps {
            p_left += a.norm_sqr();
            p_right += b.norm_sqr();
            q += a * b.conj();
        }
        ChiralDensity::new(p_left, p_right, q)
    }
}

/// Evolve a point source for `t` steps.
pub fn evolve(angles: &CoinAngles, coin: &CoinParams, t: usize) -> Result<WalkerState> {
    if t > MAX_STEPS {
        return Err(Error::LatticeLimit {
            steps: t,
            limit: MAX_STEPS,
        });
    }
    let mut state = WalkerState::point_source(angles);
    for _ in 0..t {
        state = state.step(coin);
    }
    Ok(state)
}

/// Global chirality distribution: the diagonal of the reduced coin matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcdState {
    pub p_left: f64,
    pub p_right: f64,
}

impl GcdState {
    pub fn from_density(rho: &ChiralDensity) -> Self {
        Self {
            p_left: rho.p_left,
            p_right: rho.p_right,
        }
    }
}

/// One step of the closed map obeyed by the chirality distribution:
///
/// ```text
/// p_left'  = cos²θ p_left + sin²θ p_right + Re(Q) sin 2θ
/// p_right' = 1 − p_left'
/// ```
///
/// `q_re` is Re Q(t) taken from the full state; the map is exact, but the
/// interference input it needs is not itself determined by (p_left,
/// p_right) — which is what makes the distribution non-Markovian.
pub fn gcd_step(g: &GcdState, q_re: f64, coin: &CoinParams) -> GcdState {
    let c2 = coin.cos() * coin.cos();
    let s2 = coin.sin() * coin.sin();
    let sin2t = (2.0 * coin.theta()).sin();
    let p_left = c2 * g.p_left + s2 * g.p_right + q_re * sin2t;
    GcdState {
        p_left,
        p_right: 1.0 - p_left,
    }
}
