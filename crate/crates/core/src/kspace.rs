// SPDX-License-Identifier: Apache-2.0

//! Exact reduced dynamics in quasi-momentum space.
//!
//! For a walker launched from the origin, the coin reduced density matrix
//! evolves as an integral over the Brillouin zone,
//!
//! ```text
//! ρ_c(t) = ∫ dk/2π · L_k^t · r(0),
//! ```
//!
//! where `L_k` is a real 4×4 one-step superoperator acting on the coin
//! Bloch 4-vector at fixed quasi-momentum k. The free walk and the
//! broken-link channel differ only in the matrix, so a single quadrature
//! path serves both. This module also carries the closed-form asymptotics
//! of the free walk (stationary reduced state, its trace distance between
//! initial-state pairs, and the stationarity identity on the chirality
//! distribution).
//!
//! The quadrature is a uniform midpoint rule, `k_j = −π + (j+½)·2π/nk`.
//! The integrand is smooth and 2π-periodic, so the rule converges
//! spectrally; its oscillation frequency grows linearly with t, hence the
//! `nk ≥ 8t` floor. The half-offset also keeps nodes away from the
//! removable sin 2k = 0 singularities of the eigenvector formulas.

mod eig3;

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::coin::{BlochVector, ChiralDensity, CoinAngles, CoinParams};
use crate::error::{Error, Result};

/// Minimum quadrature size regardless of horizon.
pub const MIN_NK: usize = 256;

/// Componentwise threshold for the grid-doubling convergence check.
pub const RESOLUTION_TOL: f64 = 1e-9;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Broken-link probability per link per step. p = 0 is the free walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    p: f64,
}

impl NoiseParams {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "link-break probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(Self { p })
    }

    pub fn free() -> Self {
        Self { p: 0.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_free(&self) -> bool {
        self.p == 0.0
    }
}

/// Real 4×4 one-step map on the coin Bloch 4-vector at fixed k. The first
/// row is always (1, 0, 0, 0): the map preserves the trace component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Superoperator {
    m: [[f64; 4]; 4],
}

impl Superoperator {
    /// Free-walk superoperator at quasi-momentum k.
    pub fn free(k: f64) -> Self {
        // identical to the broken-link matrix at p = 0
        Self::broken(k, &NoiseParams::free())
    }

    /// Broken-link superoperator at quasi-momentum k.
    pub fn broken(k: f64, noise: &NoiseParams) -> Self {
        let p = noise.p();
        let e = (1.0 - p) * (1.0 - p) * (2.0 * k).sin();
        let f = (1.0 - p) * (1.0 - p) * (2.0 * k).cos();
        let g = p * (1.0 - p) * k.sin();
        let h = p * (1.0 - p) * k.cos();
        let p2 = p * p;
        Self {
            m: [
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, e, f + p2],
                [0.0, 0.0, p2 - f, e],
                [0.0, 1.0 - 2.0 * p, -2.0 * g, -2.0 * h],
            ],
        }
    }

    pub fn matrix(&self) -> &[[f64; 4]; 4] {
        &self.m
    }

    /// The lower-right 3×3 block acting on (r1, r2, r3); its spectrum
    /// controls relaxation.
    pub fn block3(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.m[i + 1][j + 1];
            }
        }
        out
    }

    pub fn apply(&self, r: &BlochVector) -> BlochVector {
        let v = r.as_array();
        let mut out = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += self.m[i][j] * v[j];
            }
        }
        BlochVector::from_array(out)
    }

    fn apply_array(&self, v: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += self.m[i][j] * v[j];
            }
        }
        out
    }
}

/// Midpoint quadrature nodes over [−π, π].
pub fn k_nodes(nk: usize) -> impl Iterator<Item = f64> {
    let step = 2.0 * PI / nk as f64;
    (0..nk).map(move |j| -PI + (j as f64 + 0.5) * step)
}

fn required_nk(t: usize) -> usize {
    MIN_NK.max(8 * t)
}

fn density_from_mean(mean: [f64; 4]) -> ChiralDensity {
    BlochVector::from_array(mean)
        .to_density()
        .expect("trace component is preserved by every superoperator")
}

fn quadrature_state(r0: &BlochVector, t: usize, noise: &NoiseParams, nk: usize) -> [f64; 4] {
    let mut acc = [0.0f64; 4];
    for k in k_nodes(nk) {
        let op = Superoperator::broken(k, noise);
        let mut v = r0.as_array();
        for _ in 0..t {
            v = op.apply_array(&v);
        }
        for i in 0..4 {
            acc[i] += v[i];
        }
    }
    for a in &mut acc {
        *a /= nk as f64;
    }
    acc
}

/// Reduced coin state after `t` steps, by quadrature of `L_k^t · r0`.
///
/// `L_k^t` is built by `t` successive multiplications per node (no
/// diagonalization), so the only approximation is the quadrature itself.
/// The result is evaluated at `nk` and `2·nk` nodes; if any Bloch component
/// moves by more than [`RESOLUTION_TOL`] the resolution is insufficient and
/// an error is returned. Requires `nk ≥ max(256, 8t)`.
pub fn evolve_k(
    r0: &BlochVector,
    t: usize,
    noise: &NoiseParams,
    nk: usize,
) -> Result<ChiralDensity> {
    let min = required_nk(t);
    if nk < min {
        return Err(Error::QuadratureTooCoarse { nk, min, t });
    }
    let coarse = quadrature_state(r0, t, noise, nk);
    let fine = quadrature_state(r0, t, noise, 2 * nk);
    let max_delta = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if max_delta > RESOLUTION_TOL {
        return Err(Error::InsufficientResolution { max_delta });
    }
    Ok(density_from_mean(fine))
}

/// The Brillouin-zone average of `L_k^t` for every t up to a horizon:
/// `G(t) = ∫ dk/2π · L_k^t`. Because the reduced dynamics is linear in the
/// initial Bloch vector, one series serves every initial state (and every
/// difference of initial states) at once.
#[derive(Debug, Clone)]
pub struct PropagatorSeries {
    g: Vec<[[f64; 4]; 4]>,
    nk: usize,
}

impl PropagatorSeries {
    /// Accumulate the series at fixed `nk` without a convergence check.
    pub fn new(t_max: usize, noise: &NoiseParams, nk: usize) -> Self {
        let ops: Vec<Superoperator> = k_nodes(nk)
            .map(|k| Superoperator::broken(k, noise))
            .collect();
        // powers of each node matrix, advanced in lockstep
        let mut pw: Vec<[[f64; 4]; 4]> = vec![identity4(); nk];
        let mut g = vec![[[0.0f64; 4]; 4]; t_max + 1];
        for t in 0..=t_max {
            for node in &pw {
                for i in 0..4 {
                    for j in 0..4 {
                        g[t][i][j] += node[i][j];
                    }
                }
            }
            if t < t_max {
                for (node, op) in pw.iter_mut().zip(&ops) {
                    *node = matmul4(op.matrix(), node);
                }
            }
        }
        let inv = 1.0 / nk as f64;
        for gt in &mut g {
            for row in gt.iter_mut() {
                for x in row.iter_mut() {
                    *x *= inv;
                }
            }
        }
        Self { g, nk }
    }

    /// Accumulate at `nk` and `2·nk`; error if any entry of any `G(t)`
    /// moves by more than [`RESOLUTION_TOL`]. Returns the finer series.
    pub fn converged(t_max: usize, noise: &NoiseParams, nk: usize) -> Result<Self> {
        let min = required_nk(t_max);
        if nk < min {
            return Err(Error::QuadratureTooCoarse { nk, min, t: t_max });
        }
        let coarse = Self::new(t_max, noise, nk);
        let fine = Self::new(t_max, noise, 2 * nk);
        let mut max_delta = 0.0f64;
        for (a, b) in coarse.g.iter().zip(&fine.g) {
            for i in 0..4 {
                for j in 0..4 {
                    max_delta = max_delta.max((a[i][j] - b[i][j]).abs());
                }
            }
        }
        if max_delta > RESOLUTION_TOL {
            return Err(Error::InsufficientResolution { max_delta });
        }
        Ok(fine)
    }

    pub fn horizon(&self) -> usize {
        self.g.len() - 1
    }

    pub fn nk(&self) -> usize {
        self.nk
    }

    pub fn apply(&self, t: usize, r: &BlochVector) -> BlochVector {
        let v = r.as_array();
        let gt = &self.g[t];
        let mut out = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i] += gt[i][j] * v[j];
            }
        }
        BlochVector::from_array(out)
    }

    pub fn density_at(&self, t: usize, r0: &BlochVector) -> ChiralDensity {
        density_from_mean(self.apply(t, r0).as_array())
    }
}

fn identity4() -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn matmul4(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Spectrum of the 3×3 relaxation block at fixed k.
///
/// For the free walk the eigenvalues are {1, e^{i(α+π)}, e^{−i(α+π)}} with
/// cos α = cos²k, all on the unit circle. For 0 < p < 1 every modulus drops
/// strictly below one, which is what drives the decoherent walk to the
/// maximally mixed coin state. At p = 1 the spectrum is {1, ±i}: motion is
/// frozen and the coin cycles, so no relaxation takes place there.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Sorted by descending real part, then descending imaginary part.
    pub eigenvalues: [Complex64; 3],
    /// Unit-norm right eigenvectors, column i for eigenvalue i.
    pub eigenvectors: [[Complex64; 3]; 3],
    /// Free-walk phase angle α with cos α = cos²k.
    pub alpha: f64,
    /// Set when some |λ_i − λ_j| < 1e-8; eigenvector directions within the
    /// near-degenerate pair are then a basis choice, not unique.
    pub near_degenerate: bool,
}

pub fn eigensystem(k: f64, noise: &NoiseParams) -> Eigensystem {
    let block = Superoperator::broken(k, noise).block3();
    let eigenvalues = eig3::eigenvalues(&block);
    let near_degenerate =
        (0..3).any(|i| (i + 1..3).any(|j| (eigenvalues[i] - eigenvalues[j]).norm() < 1e-8));
    let mut eigenvectors = [[Complex64::ZERO; 3]; 3];
    let mut used = 0usize;
    for (i, &l) in eigenvalues.iter().enumerate() {
        // for a repeated eigenvalue pick distinct kernel vectors
        let which = if i > 0 && (eigenvalues[i - 1] - l).norm() < 1e-8 {
            used += 1;
            used
        } else {
            used = 0;
            0
        };
        eigenvectors[i] = eig3::eigenvector(&block, l, which);
    }
    Eigensystem {
        eigenvalues,
        eigenvectors,
        alpha: (k.cos() * k.cos()).clamp(-1.0, 1.0).acos(),
        near_degenerate,
    }
}

/// Components of the stationary (λ = 1) eigenvector of the free walk,
/// written in forms that stay smooth through sin 2k = 0:
/// v1 = (√2 cos k, √2 sin k, √2 cos k) / √(3 + cos 2k).
fn stationary_eigenvector(k: f64) -> (f64, f64, f64) {
    let denom = (3.0 + (2.0 * k).cos()).sqrt();
    let v11 = SQRT2 * k.cos() / denom;
    let v21 = SQRT2 * k.sin() / denom;
    (v11, v21, v11)
}

/// Brillouin-zone moments of the stationary eigenvector of the free walk.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticIntegrals {
    /// ∫ |v11|² dk/2π = 1 − 1/√2
    pub v11_sq: f64,
    /// ∫ |v21|² dk/2π = √2 − 1
    pub v21_sq: f64,
    /// ∫ |v31|² dk/2π = 1 − 1/√2
    pub v31_sq: f64,
    /// ∫ v11 v21 dk/2π (vanishes by parity)
    pub cross_12: f64,
    /// ∫ v21 v31 dk/2π (vanishes by parity)
    pub cross_23: f64,
    /// ∫ v11 v31 dk/2π; equals v11_sq identically because the first and
    /// third components of the stationary eigenvector coincide
    pub cross_13: f64,
}

/// Integrate the stationary-eigenvector moments numerically.
///
/// The diagonal moments come out to 1 − 1/√2, √2 − 1, 1 − 1/√2; the odd
/// cross moments vanish; the (1,3) moment equals the (1,1) one.
pub fn asymptotic_integrals() -> AsymptoticIntegrals {
    let nk = 4096;
    let mut out = AsymptoticIntegrals {
        v11_sq: 0.0,
        v21_sq: 0.0,
        v31_sq: 0.0,
        cross_12: 0.0,
        cross_23: 0.0,
        cross_13: 0.0,
    };
    for k in k_nodes(nk) {
        let (v11, v21, v31) = stationary_eigenvector(k);
        out.v11_sq += v11 * v11;
        out.v21_sq += v21 * v21;
        out.v31_sq += v31 * v31;
        out.cross_12 += v11 * v21;
        out.cross_23 += v21 * v31;
        out.cross_13 += v11 * v31;
    }
    let inv = 1.0 / nk as f64;
    out.v11_sq *= inv;
    out.v21_sq *= inv;
    out.v31_sq *= inv;
    out.cross_12 *= inv;
    out.cross_23 *= inv;
    out.cross_13 *= inv;
    out
}

/// The t → ∞ limit of the Brillouin-zone average of `L_k^t` for the free
/// walk: the projector onto the stationary eigenvector, integrated over k.
/// Oscillatory contributions dephase away, which is checked numerically by
/// the convergence tests rather than assumed.
pub fn asymptotic_projector() -> [[f64; 4]; 4] {
    let nk = 4096;
    let mut m = [[0.0f64; 4]; 4];
    m[0][0] = 1.0;
    for k in k_nodes(nk) {
        let (v11, v21, v31) = stationary_eigenvector(k);
        let v = [v11, v21, v31];
        for i in 0..3 {
            for j in 0..3 {
                m[i + 1][j + 1] += v[i] * v[j];
            }
        }
    }
    let inv = 1.0 / nk as f64;
    for (i, row) in m.iter_mut().enumerate() {
        if i > 0 {
            for x in row.iter_mut() {
                *x *= inv;
            }
        }
    }
    m
}

/// Closed-form stationary reduced state of the free walk:
///
/// ```text
/// Π_L = ½[1 + (1 − 1/√2)(cos φ sin γ + cos γ)]
/// Q_0 = ½ (1 − 1/√2)[(cos φ sin γ + cos γ) + i √2 sin φ sin γ]
/// ```
///
/// The imaginary part keeps the sign of the initial coherence: the
/// stationary map scales r2 by the positive factor √2 − 1, which the
/// projector construction and the long-time averages both confirm.
pub fn asymptotic_free(angles: &CoinAngles) -> ChiralDensity {
    let shrink = 1.0 - 1.0 / SQRT2;
    let gamma = angles.gamma();
    let phi = angles.phi();
    let common = phi.cos() * gamma.sin() + gamma.cos();
    let p_left = 0.5 * (1.0 + shrink * common);
    ChiralDensity::new(
        p_left,
        1.0 - p_left,
        Complex64::new(
            0.5 * shrink * common,
            0.5 * shrink * SQRT2 * phi.sin() * gamma.sin(),
        ),
    )
}

/// Stationary reduced state under broken-link decoherence: the maximally
/// mixed coin state, independent of the initial state. Only defined for
/// 0 < p < 1: at p = 0 use [`asymptotic_free`]; at p = 1 the relaxation
/// block keeps unimodular eigenvalues and never forgets the initial coin.
pub fn asymptotic_broken(noise: &NoiseParams) -> Result<ChiralDensity> {
    if noise.is_free() {
        return Err(Error::InvalidParameter(
            "p = 0 has a nontrivial stationary state; use asymptotic_free".into(),
        ));
    }
    if noise.p() >= 1.0 {
        return Err(Error::InvalidParameter(
            "p = 1 freezes the walker and has no mixing limit".into(),
        ));
    }
    Ok(ChiralDensity::maximally_mixed())
}

/// Trace distance between the stationary free-walk states of two initial
/// coin states, in terms of their stationary coherences:
/// D = sqrt(2·[Re ΔQ_0]² + [Im ΔQ_0]²).
pub fn asymptotic_distance(a1: &CoinAngles, a2: &CoinAngles) -> f64 {
    let dq = asymptotic_free(a1).q - asymptotic_free(a2).q;
    (2.0 * dq.re * dq.re + dq.im * dq.im).sqrt()
}

/// Residual of the stationarity identity on the chirality distribution:
///
/// ```text
/// (p_left − ½[1 + 2 Re(q)/tan θ],  p_right − ½[1 − 2 Re(q)/tan θ])
/// ```
///
/// Zero for true stationary states. Requires tan θ ≠ 0.
pub fn stationarity_residual(rho: &ChiralDensity, coin: &CoinParams) -> (f64, f64) {
    debug_assert!(coin.theta() > 0.0, "stationarity identity needs tan θ ≠ 0");
    let ratio = 2.0 * rho.q.re / coin.theta().tan();
    (
        rho.p_left - 0.5 * (1.0 + ratio),
        rho.p_right - 0.5 * (1.0 - ratio),
    )
}
