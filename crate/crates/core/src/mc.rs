// SPDX-License-Identifier: Apache-2.0

//! Per-realization broken-link trajectories with seeded ensemble averaging.
//!
//! [`step_broken`] evolves one step under an arbitrary fixed link
//! configuration: after the coin, a mover crosses its link if the link is
//! intact and otherwise stays put with its chirality flipped, a permutation
//! of the post-coin basis, so every configuration is unitary.
//!
//! Trajectory sampling, however, does not draw links independently per
//! site. Sampling them that way produces an ensemble that is *not* the
//! k-space broken-link channel: the per-site randomness couples different
//! quasi-momenta, and the deviation from the channel is O(p(1−p)) from the
//! second step on — far outside any statistical tolerance. The channel is
//! instead the exact average of four translation-invariant unitary
//! branches, drawn globally once per step from two Bernoulli(p) variables
//! (rightward passage blocked / leftward passage blocked):
//!
//! * neither blocked, weight (1−p)²: the free step;
//! * both blocked, weight p²: coin followed by a chirality swap at every
//!   site (the all-links-broken configuration);
//! * exactly one blocked, weight p(1−p) each: the unitary completions of
//!   one-way blocking,
//!
//! ```text
//! right blocked:  a_x' = (a_x − a_{x−1} + b_x + b_{x−1})/2
//!                 b_x' = (a_x + a_{x−1} + b_x − b_{x−1})/2
//! left blocked:   a_x' = (a_{x−1} − a_x − b_{x−1} − b_x)/2
//!                 b_x' = (a_{x−1} + a_x + b_x − b_{x−1})/2
//! ```
//!
//! An exhaustive enumeration over branch sequences reproduces the k-space
//! channel to machine precision at every step (see the tests), which is
//! the arbiter the statistical cross-checks then sample. The one-blocked
//! branches are specific to the unbiased coin, so noisy trajectories
//! require θ = π/4.
//!
//! Randomness is counter-based: every Bernoulli draw is a hash of
//! (trajectory seed, step, draw tag), so a trajectory is a pure function
//! of its seed and results never depend on execution order or worker
//! count. Ensemble reductions use fixed-order block summation for the
//! same reason.

mod hermitian;

use rayon::prelude::*;

use crate::coin::{ChiralDensity, CoinAngles, CoinParams};
use crate::error::{Error, Result};
use crate::kspace::NoiseParams;
use crate::walk::WalkerState;

pub use hermitian::HermitianMatrix;

use num_complex::Complex64;

/// Horizon cap for full-density-matrix ensembles: the matrices are dense
/// over 2(2t+1) basis states.
pub const MAX_FULL_HORIZON: usize = 100;

/// Trajectory-count floor below which standard errors are not meaningful.
pub const MIN_TRAJECTORIES: usize = 100;

/// Batches used to estimate the standard error of full-state distances.
const DISTANCE_BATCHES: usize = 10;

/// Trajectories summed per block in fixed-order ensemble reductions.
const BLOCK: usize = 64;

// ---------------------------------------------------------------------------
// counter-based randomness

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix(words: &[u64]) -> u64 {
    let mut h = 0x243F_6A88_85A3_08D3; // arbitrary nonzero start
    for &w in words {
        h = splitmix64(h ^ w);
    }
    h
}

/// Derive an independent root seed for a sub-ensemble.
pub fn derive_seed(root: u64, tag: u64) -> u64 {
    mix(&[root, tag])
}

/// Seed of trajectory `index` within the ensemble rooted at `root`.
pub fn trajectory_seed(root: u64, index: u64) -> u64 {
    mix(&[root, 0x7472_616a, index])
}

fn to_unit(h: u64) -> f64 {
    // top 53 bits give a uniform double in [0, 1)
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn link_roll(traj_seed: u64, step: u64, link: i64) -> f64 {
    to_unit(mix(&[traj_seed, step, link as u64]))
}

// domain-separated from link_roll so per-link and per-step draws never alias
fn branch_roll(traj_seed: u64, step: u64, tag: u64) -> f64 {
    to_unit(mix(&[traj_seed, 0x6272_616e_6368, step, tag]))
}

// ---------------------------------------------------------------------------
// link configurations and the per-realization step

/// Broken/intact flags for the links (x, x+1) of a contiguous window.
/// Links outside the window are intact.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    first: i64,
    broken: Vec<bool>,
}

impl LinkConfig {
    pub fn all_intact(first: i64, count: usize) -> Self {
        Self {
            first,
            broken: vec![false; count],
        }
    }

    pub fn all_broken(first: i64, count: usize) -> Self {
        Self {
            first,
            broken: vec![true; count],
        }
    }

    pub fn from_fn(first: i64, count: usize, mut f: impl FnMut(i64) -> bool) -> Self {
        Self {
            first,
            broken: (0..count).map(|i| f(first + i as i64)).collect(),
        }
    }

    /// Resample the window for one time step. Each link breaks with
    /// probability p, drawn from the (trajectory seed, step, link) counter,
    /// so the same physical link always sees the same draw no matter how
    /// the window is positioned.
    pub fn sample(
        noise: &NoiseParams,
        first: i64,
        count: usize,
        traj_seed: u64,
        step: u64,
    ) -> Self {
        let p = noise.p();
        Self::from_fn(first, count, |x| link_roll(traj_seed, step, x) < p)
    }

    /// Whether link (x, x+1) is broken.
    pub fn is_broken(&self, x: i64) -> bool {
        let idx = x - self.first;
        if idx < 0 || idx >= self.broken.len() as i64 {
            false
        } else {
            self.broken[idx as usize]
        }
    }
}

/// One walk step under a fixed link configuration.
///
/// Post-coin movers route as: a right-mover at x crosses to x+1 when link
/// (x, x+1) is intact and otherwise stays at x flipped to a left-mover;
/// mirror rule for left-movers. With every link intact this reproduces the
/// free step bit for bit.
pub fn step_broken(state: &WalkerState, coin: &CoinParams, links: &LinkConfig) -> WalkerState {
    let c = coin.cos();
    let s = coin.sin();
    let lo = state.min_site();
    let n = state.amplitudes().len();
    // post-coin spinors, same arithmetic as the free step
    let post: Vec<(Complex64, Complex64)> = state
        .amplitudes()
        .iter()
        .map(|&(a, b)| (a * c + b * s, a * s - b * c))
        .collect();
    let post_at = |x: i64| -> (Complex64, Complex64) {
        let idx = x - lo;
        if idx < 0 || idx >= n as i64 {
            (Complex64::ZERO, Complex64::ZERO)
        } else {
            post[idx as usize]
        }
    };
    let mut out = vec![(Complex64::ZERO, Complex64::ZERO); n + 2];
    let out_lo = lo - 1;
    for (i, slot) in out.iter_mut().enumerate() {
        let x = out_lo + i as i64;
        slot.0 = if links.is_broken(x) {
            post_at(x).1
        } else {
            post_at(x + 1).0
        };
        slot.1 = if links.is_broken(x - 1) {
            post_at(x).0
        } else {
            post_at(x - 1).1
        };
    }
    WalkerState::from_amplitudes(out_lo, out)
}

/// Global link state of one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StepBranch {
    /// Neither direction blocked: the free step.
    Free,
    /// Rightward passage blocked.
    BlockRight,
    /// Leftward passage blocked.
    BlockLeft,
    /// Both directions blocked: coin then chirality swap in place.
    Frozen,
}

/// Apply one branch step. `Free` and `Frozen` reuse [`step_broken`] (with
/// the all-intact and all-broken configurations), so they are bit-identical
/// to it; the one-blocked branches apply their own unitaries.
pub(crate) fn apply_branch(
    state: &WalkerState,
    coin: &CoinParams,
    branch: StepBranch,
) -> WalkerState {
    let first = state.min_site() - 1;
    let count = (state.max_site() - state.min_site() + 2) as usize;
    match branch {
        StepBranch::Free => step_broken(state, coin, &LinkConfig::all_intact(first, count)),
        StepBranch::Frozen => step_broken(state, coin, &LinkConfig::all_broken(first, count)),
        StepBranch::BlockRight => step_half_blocked(state, false),
        StepBranch::BlockLeft => step_half_blocked(state, true),
    }
}

/// Unitary completion of one-way blocking (specific to θ = π/4).
fn step_half_blocked(state: &WalkerState, left: bool) -> WalkerState {
    let lo = state.min_site();
    let n = state.amplitudes().len();
    let get = |x: i64| -> (Complex64, Complex64) {
        let idx = x - lo;
        if idx < 0 || idx >= n as i64 {
            (Complex64::ZERO, Complex64::ZERO)
        } else {
            state.amplitudes()[idx as usize]
        }
    };
    let out_lo = lo - 1;
    let mut out = vec![(Complex64::ZERO, Complex64::ZERO); n + 2];
    for (i, slot) in out.iter_mut().enumerate() {
        let x = out_lo + i as i64;
        let (a0, b0) = get(x);
        let (am, bm) = get(x - 1);
        if left {
            slot.0 = (am - a0 - bm - b0) * 0.5;
            slot.1 = (am + a0 + b0 - bm) * 0.5;
        } else {
            slot.0 = (a0 - am + b0 + bm) * 0.5;
            slot.1 = (a0 + am + b0 - bm) * 0.5;
        }
    }
    WalkerState::from_amplitudes(out_lo, out)
}

fn sample_branch(noise: &NoiseParams, traj_seed: u64, step: u64) -> StepBranch {
    let p = noise.p();
    let right = branch_roll(traj_seed, step, 0) < p;
    let left = branch_roll(traj_seed, step, 1) < p;
    match (right, left) {
        (false, false) => StepBranch::Free,
        (true, false) => StepBranch::BlockRight,
        (false, true) => StepBranch::BlockLeft,
        (true, true) => StepBranch::Frozen,
    }
}

fn check_trajectory_coin(coin: &CoinParams, noise: &NoiseParams) -> Result<()> {
    if !noise.is_free() && (coin.theta() - std::f64::consts::FRAC_PI_4).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "noisy trajectories are defined for the unbiased coin only (theta = pi/4), got {}",
            coin.theta()
        )));
    }
    Ok(())
}

fn fold_trajectory(
    angles: &CoinAngles,
    coin: &CoinParams,
    noise: &NoiseParams,
    t_max: usize,
    traj_seed: u64,
    mut visit: impl FnMut(usize, &WalkerState),
) {
    let mut state = WalkerState::point_source(angles);
    visit(0, &state);
    for step in 0..t_max {
        let branch = sample_branch(noise, traj_seed, step as u64);
        state = apply_branch(&state, coin, branch);
        visit(step + 1, &state);
    }
}

/// One realization: per-step resampling of the global link state, per-step
/// coin reduction. Deterministic given the seed. Fails for p > 0 with a
/// biased coin (the blocked-transport unitaries are θ = π/4 objects).
pub fn run_trajectory(
    angles: &CoinAngles,
    coin: &CoinParams,
    noise: &NoiseParams,
    t_max: usize,
    traj_seed: u64,
) -> Result<Vec<ChiralDensity>> {
    check_trajectory_coin(coin, noise)?;
    let mut out = Vec::with_capacity(t_max + 1);
    fold_trajectory(angles, coin, noise, t_max, traj_seed, |_, state| {
        out.push(state.reduce_chirality());
    });
    Ok(out)
}

/// Like [`run_trajectory`] but keeping the full walker state at every
/// step. Memory grows as the square of the horizon.
pub fn trajectory_states(
    angles: &CoinAngles,
    coin: &CoinParams,
    noise: &NoiseParams,
    t_max: usize,
    traj_seed: u64,
) -> Result<Vec<WalkerState>> {
    check_trajectory_coin(coin, noise)?;
    let mut out = Vec::with_capacity(t_max + 1);
    fold_trajectory(angles, coin, noise, t_max, traj_seed, |_, state| {
        out.push(state.clone());
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// reduced-state ensembles

/// Trajectory mean of the reduced coin state at every step, with
/// componentwise standard errors in the order
/// (p_left, p_right, Re q, Im q).
#[derive(Debug, Clone)]
pub struct EnsembleEstimate {
    pub mean: Vec<ChiralDensity>,
    pub stderr: Vec<[f64; 4]>,
    pub n_traj: usize,
    pub seed: u64,
}

fn components(rho: &ChiralDensity) -> [f64; 4] {
    [rho.p_left, rho.p_right, rho.q.re, rho.q.im]
}

/// Running mean and squared-deviation sums (Welford) per step and
/// component. Merging two accumulators (Chan's update) stays exact when
/// both sides agree, so a noiseless ensemble reports exactly zero error.
struct MomentAcc {
    count: f64,
    mean: Vec<[f64; 4]>,
    m2: Vec<[f64; 4]>,
}

impl MomentAcc {
    fn new(t_max: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![[0.0; 4]; t_max + 1],
            m2: vec![[0.0; 4]; t_max + 1],
        }
    }

    fn push(&mut self, t: usize, x: [f64; 4]) {
        if t == 0 {
            self.count += 1.0;
        }
        for i in 0..4 {
            let delta = x[i] - self.mean[t][i];
            self.mean[t][i] += delta / self.count;
            self.m2[t][i] += delta * (x[i] - self.mean[t][i]);
        }
    }

    fn merge(&mut self, other: &MomentAcc) {
        if other.count == 0.0 {
            return;
        }
        if self.count == 0.0 {
            self.count = other.count;
            self.mean.copy_from_slice(&other.mean);
            self.m2.copy_from_slice(&other.m2);
            return;
        }
        let total = self.count + other.count;
        let w = other.count / total;
        for t in 0..self.mean.len() {
            for i in 0..4 {
                let delta = other.mean[t][i] - self.mean[t][i];
                self.mean[t][i] += delta * w;
                self.m2[t][i] += other.m2[t][i] + delta * delta * self.count * other.count / total;
            }
        }
        self.count = total;
    }
}

/// Ensemble average of the reduced coin state over `n_traj` trajectories.
///
/// Per-trajectory seeds derive from the root seed by counter hashing and
/// blocks are summed in a fixed order, so the estimate is identical under
/// any parallel schedule.
pub fn ensemble_chiral(
    angles: &CoinAngles,
    coin: &CoinParams,
    noise: &NoiseParams,
    t_max: usize,
    n_traj: usize,
    seed: u64,
) -> Result<EnsembleEstimate> {
    check_trajectory_coin(coin, noise)?;
    if n_traj < MIN_TRAJECTORIES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_TRAJECTORIES} trajectories, got {n_traj}"
        )));
    }
    let n_blocks = n_traj.div_ceil(BLOCK);
    let blocks: Vec<MomentAcc> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = MomentAcc::new(t_max);
            let start = b * BLOCK;
            let end = ((b + 1) * BLOCK).min(n_traj);
            for traj in start..end {
                let ts = trajectory_seed(seed, traj as u64);
                fold_trajectory(angles, coin, noise, t_max, ts, |t, state| {
                    acc.push(t, components(&state.reduce_chirality()));
                });
            }
            acc
        })
        .collect();

    let mut total = MomentAcc::new(t_max);
    for block in &blocks {
        total.merge(block);
    }

    let n = n_traj as f64;
    let mut mean = Vec::with_capacity(t_max + 1);
    let mut stderr = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        let m = total.mean[t];
        mean.push(ChiralDensity::new(m[0], m[1], Complex64::new(m[2], m[3])));
        let mut se = [0.0; 4];
        for i in 0..4 {
            se[i] = (total.m2[t][i].max(0.0) / (n - 1.0) / n).sqrt();
        }
        stderr.push(se);
    }
    Ok(EnsembleEstimate {
        mean,
        stderr,
        n_traj,
        seed,
    })
}

// ---------------------------------------------------------------------------
// full-state ensembles

/// Trace-distance series between two ensemble-averaged full density
/// matrices, with a batch-based standard error per step.
#[derive(Debug, Clone)]
pub struct DistanceEstimate {
    pub values: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_traj: usize,
    pub seed: u64,
}

/// Index of (site x, chirality c) in the dense basis at time t.
fn basis_index(x: i64, c: usize, t: usize) -> usize {
    2 * (x + t as i64) as usize + c
}

fn state_vector(state: &WalkerState, t: usize) -> Vec<Complex64> {
    let dim = 2 * (2 * t + 1);
    let mut psi = vec![Complex64::ZERO; dim];
    for (x, (a, b)) in state.iter_sites() {
        if x.unsigned_abs() as usize <= t {
            psi[basis_index(x, 0, t)] = a;
            psi[basis_index(x, 1, t)] = b;
        }
    }
    psi
}

/// Full-state trace distance D(t) = ½‖ρ̄₁(t) − ρ̄₂(t)‖₁ between the two
/// trajectory-averaged total (position ⊗ coin) density matrices.
///
/// The two ensembles use independently derived seed streams. The standard
/// error comes from splitting the trajectories into ten batches and taking
/// the spread of the per-batch distances. Horizons above
/// [`MAX_FULL_HORIZON`] are refused: the matrices grow as (4t+2)².
pub fn ensemble_full_distance(
    a1: &CoinAngles,
    a2: &CoinAngles,
    coin: &CoinParams,
    noise: &NoiseParams,
    t_max: usize,
    n_traj: usize,
    seed: u64,
) -> Result<DistanceEstimate> {
    check_trajectory_coin(coin, noise)?;
    if t_max > MAX_FULL_HORIZON {
        return Err(Error::HorizonLimit {
            steps: t_max,
            limit: MAX_FULL_HORIZON,
        });
    }
    if n_traj < MIN_TRAJECTORIES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_TRAJECTORIES} trajectories, got {n_traj}"
        )));
    }
    let seed1 = derive_seed(seed, 1);
    let seed2 = derive_seed(seed, 2);

    // batch boundaries (batch b covers [bounds[b], bounds[b+1]))
    let base = n_traj / DISTANCE_BATCHES;
    let rem = n_traj % DISTANCE_BATCHES;
    let mut bounds = vec![0usize];
    for b in 0..DISTANCE_BATCHES {
        bounds.push(bounds[b] + base + usize::from(b < rem));
    }

    // per-batch accumulated difference Σψ₁ψ₁† − Σψ₂ψ₂† for every t
    let batches: Vec<Vec<HermitianMatrix>> = (0..DISTANCE_BATCHES)
        .into_par_iter()
        .map(|b| {
            let mut diff: Vec<HermitianMatrix> = (0..=t_max)
                .map(|t| HermitianMatrix::zeros(2 * (2 * t + 1)))
                .collect();
            for traj in bounds[b]..bounds[b + 1] {
                for (angles, root, sign) in [(a1, seed1, 1.0), (a2, seed2, -1.0)] {
                    let ts = trajectory_seed(root, traj as u64);
                    fold_trajectory(angles, coin, noise, t_max, ts, |t, state| {
                        diff[t].add_outer(&state_vector(state, t), sign);
                    });
                }
            }
            diff
        })
        .collect();

    // per-batch distance series, for the standard error
    let batch_distance: Vec<Vec<f64>> = batches
        .par_iter()
        .enumerate()
        .map(|(b, diff)| {
            let m = (bounds[b + 1] - bounds[b]) as f64;
            diff.iter()
                .map(|mat| {
                    let mut scaled = mat.clone();
                    scaled.scale(1.0 / m);
                    0.5 * hermitian::trace_norm(scaled)
                })
                .collect()
        })
        .collect();

    // total mean difference and its distance series
    let values: Vec<f64> = (0..=t_max)
        .into_par_iter()
        .map(|t| {
            let mut total = HermitianMatrix::zeros(2 * (2 * t + 1));
            for diff in &batches {
                total.add_scaled(&diff[t], 1.0);
            }
            total.scale(1.0 / n_traj as f64);
            0.5 * hermitian::trace_norm(total)
        })
        .collect();

    let b = DISTANCE_BATCHES as f64;
    let stderr: Vec<f64> = (0..=t_max)
        .map(|t| {
            let mean_b: f64 = batch_distance.iter().map(|s| s[t]).sum::<f64>() / b;
            let var = batch_distance
                .iter()
                .map(|s| (s[t] - mean_b) * (s[t] - mean_b))
                .sum::<f64>()
                / (b - 1.0);
            (var / b).sqrt()
        })
        .collect();

    Ok(DistanceEstimate {
        values,
        stderr,
        n_traj,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kspace;
    use crate::walk;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn hadamard() -> CoinParams {
        CoinParams::hadamard()
    }

    #[test]
    fn intact_links_reproduce_the_free_step_bit_for_bit() {
        let coin = CoinParams::new(0.9).unwrap();
        let mut free = WalkerState::point_source(&CoinAngles::new(1.1, 4.0).unwrap());
        let mut broken = free.clone();
        for _ in 0..12 {
            let links = LinkConfig::all_intact(free.min_site() - 1, free.amplitudes().len() + 2);
            free = free.step(&coin);
            broken = step_broken(&broken, &coin, &links);
            assert_eq!(free, broken);
        }
    }

    #[test]
    fn fully_broken_step_swaps_chirality_in_place() {
        let t1 = step_broken(
            &WalkerState::point_source(&CoinAngles::north()),
            &hadamard(),
            &LinkConfig::all_broken(-2, 5),
        );
        // post-coin spinor (c, s) stays at the origin with components swapped
        let (a, b) = t1.amp(0);
        assert_abs_diff_eq!(a.re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(b.re, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        for (x, (a, b)) in t1.iter_sites() {
            if x != 0 {
                assert_eq!(a, Complex64::ZERO);
                assert_eq!(b, Complex64::ZERO);
            }
        }
        assert_abs_diff_eq!(t1.norm_sq(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn random_configurations_preserve_the_norm() {
        let coin = CoinParams::new(PI / 3.0).unwrap();
        let noise = NoiseParams::new(0.4).unwrap();
        for traj in 0..100 {
            let ts = trajectory_seed(99, traj);
            let mut state = WalkerState::point_source(&CoinAngles::new(2.2, 0.1).unwrap());
            for step in 0..10 {
                let links = LinkConfig::sample(
                    &noise,
                    state.min_site() - 1,
                    state.amplitudes().len() + 2,
                    ts,
                    step,
                );
                state = step_broken(&state, &coin, &links);
                assert_abs_diff_eq!(state.norm_sq(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn p_zero_trajectories_bit_match_the_free_engine() {
        let angles = CoinAngles::new(0.8, 1.7).unwrap();
        let coin = hadamard();
        let series = run_trajectory(&angles, &coin, &NoiseParams::free(), 30, 12345).unwrap();
        for (t, rho) in series.iter().enumerate() {
            let free = walk::evolve(&angles, &coin, t).unwrap().reduce_chirality();
            assert_eq!(*rho, free);
        }
    }

    /// The decisive correctness test for the trajectory model: averaging
    /// over all 4^t branch sequences with their exact probabilities must
    /// reproduce the k-space channel to machine precision at every step.
    #[test]
    fn branch_average_equals_the_exact_channel() {
        let coin = hadamard();
        let p = 0.3f64;
        let angles = CoinAngles::new(1.1, 0.7).unwrap();
        let branches = [
            (StepBranch::Free, (1.0 - p) * (1.0 - p)),
            (StepBranch::BlockRight, p * (1.0 - p)),
            (StepBranch::BlockLeft, p * (1.0 - p)),
            (StepBranch::Frozen, p * p),
        ];
        let noise = NoiseParams::new(p).unwrap();
        for t_max in 1..=5usize {
            let mut mean = [0.0f64; 4];
            for seq in 0..4u32.pow(t_max as u32) {
                let mut st = WalkerState::point_source(&angles);
                let mut prob = 1.0;
                let mut s = seq;
                for _ in 0..t_max {
                    let (branch, w) = branches[(s % 4) as usize];
                    s /= 4;
                    prob *= w;
                    st = apply_branch(&st, &coin, branch);
                }
                let c = components(&st.reduce_chirality());
                for i in 0..4 {
                    mean[i] += prob * c[i];
                }
            }
            let exact = components(&kspace::evolve_k(&angles.bloch(), t_max, &noise, 256).unwrap());
            for i in 0..4 {
                assert_abs_diff_eq!(mean[i], exact[i], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn every_branch_is_unitary() {
        let coin = hadamard();
        let mut state = WalkerState::point_source(&CoinAngles::new(2.0, 5.5).unwrap());
        // drive through a fixed aperiodic branch pattern
        let pattern = [
            StepBranch::BlockRight,
            StepBranch::Free,
            StepBranch::BlockLeft,
            StepBranch::Frozen,
            StepBranch::BlockLeft,
            StepBranch::BlockRight,
        ];
        for _ in 0..4 {
            for &b in &pattern {
                state = apply_branch(&state, &coin, b);
                assert_abs_diff_eq!(state.norm_sq(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn p_one_keeps_all_probability_at_the_origin() {
        let noise = NoiseParams::new(1.0).unwrap();
        let angles = CoinAngles::new(1.9, 0.4).unwrap();
        let states = trajectory_states(&angles, &hadamard(), &noise, 25, 7).unwrap();
        for state in &states {
            let (a, b) = state.amp(0);
            assert_abs_diff_eq!(a.norm_sqr() + b.norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn noisy_trajectories_preserve_the_norm() {
        let noise = NoiseParams::new(0.4).unwrap();
        for seed in 0..50 {
            let states = trajectory_states(
                &CoinAngles::new(0.9, 2.2).unwrap(),
                &hadamard(),
                &noise,
                20,
                seed,
            )
            .unwrap();
            for state in &states {
                assert_abs_diff_eq!(state.norm_sq(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn trajectories_are_deterministic_in_their_seed() {
        let angles = CoinAngles::new(0.5, 0.2).unwrap();
        let noise = NoiseParams::new(0.3).unwrap();
        let one = run_trajectory(&angles, &hadamard(), &noise, 40, 42).unwrap();
        let two = run_trajectory(&angles, &hadamard(), &noise, 40, 42).unwrap();
        assert_eq!(one, two);
        let other = run_trajectory(&angles, &hadamard(), &noise, 40, 43).unwrap();
        assert!(one != other);
    }

    #[test]
    fn noisy_trajectories_require_the_unbiased_coin() {
        let biased = CoinParams::new(0.5).unwrap();
        let noise = NoiseParams::new(0.1).unwrap();
        assert!(run_trajectory(&CoinAngles::north(), &biased, &noise, 5, 1).is_err());
        // free trajectories accept any coin
        assert!(run_trajectory(&CoinAngles::north(), &biased, &NoiseParams::free(), 5, 1).is_ok());
    }

    #[test]
    fn p_zero_ensemble_has_zero_stderr_and_exact_mean() {
        let angles = CoinAngles::new(1.0, 2.0).unwrap();
        let est = ensemble_chiral(&angles, &hadamard(), &NoiseParams::free(), 10, 100, 5).unwrap();
        for (t, rho) in est.mean.iter().enumerate() {
            let free = walk::evolve(&angles, &hadamard(), t)
                .unwrap()
                .reduce_chirality();
            assert_abs_diff_eq!(rho.p_left, free.p_left, epsilon = 1e-13);
            assert_abs_diff_eq!(rho.q.re, free.q.re, epsilon = 1e-13);
            for se in est.stderr[t] {
                assert_abs_diff_eq!(se, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ensemble_rejects_tiny_trajectory_counts() {
        let angles = CoinAngles::north();
        assert!(matches!(
            ensemble_chiral(&angles, &hadamard(), &NoiseParams::free(), 5, 50, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn ensemble_mean_agrees_with_the_exact_channel() {
        // moderate size here; the acceptance suite runs the full version
        let angles = CoinAngles::new(0.9, 3.8).unwrap();
        let noise = NoiseParams::new(0.1).unwrap();
        let t = 20;
        let est = ensemble_chiral(&angles, &hadamard(), &noise, t, 4000, 2024).unwrap();
        let exact = kspace::evolve_k(&angles.bloch(), t, &noise, 256).unwrap();
        let exact_c = components(&exact);
        let mean_c = components(&est.mean[t]);
        for i in 0..4 {
            let z = (mean_c[i] - exact_c[i]).abs() / est.stderr[t][i].max(1e-12);
            assert!(z < 4.0, "component {i}: z = {z}");
        }
    }

    #[test]
    fn stderr_scales_as_inverse_sqrt_of_trajectories() {
        let angles = CoinAngles::new(1.2, 0.0).unwrap();
        let noise = NoiseParams::new(0.2).unwrap();
        let small = ensemble_chiral(&angles, &hadamard(), &noise, 12, 400, 9).unwrap();
        let large = ensemble_chiral(&angles, &hadamard(), &noise, 12, 1600, 9).unwrap();
        let t = 12;
        for i in [0usize, 2] {
            let ratio = small.stderr[t][i] / large.stderr[t][i].max(1e-300);
            assert!(
                ratio > 1.0 && ratio < 4.0,
                "component {i}: stderr ratio {ratio} not within a factor 2 of 2"
            );
        }
    }

    #[test]
    fn reduction_commutes_with_averaging() {
        // coin reduction of the averaged full density matrix equals the
        // average of per-trajectory reductions (linearity of the trace)
        let angles = CoinAngles::new(0.6, 2.9).unwrap();
        let coin = hadamard();
        let noise = NoiseParams::new(0.25).unwrap();
        let t_max = 8;
        let n_traj = 200;
        let mut full: Vec<HermitianMatrix> = (0..=t_max)
            .map(|t| HermitianMatrix::zeros(2 * (2 * t + 1)))
            .collect();
        let mut mean_red = vec![[0.0f64; 4]; t_max + 1];
        for traj in 0..n_traj {
            let ts = trajectory_seed(31, traj as u64);
            fold_trajectory(&angles, &coin, &noise, t_max, ts, |t, state| {
                full[t].add_outer(&state_vector(state, t), 1.0);
                let c = components(&state.reduce_chirality());
                for i in 0..4 {
                    mean_red[t][i] += c[i];
                }
            });
        }
        for t in 0..=t_max {
            let dim = 2 * (2 * t + 1);
            let mut p_left = 0.0;
            let mut p_right = 0.0;
            let mut q = Complex64::ZERO;
            for site in 0..dim / 2 {
                p_left += full[t].get(2 * site, 2 * site).re;
                p_right += full[t].get(2 * site + 1, 2 * site + 1).re;
                q += full[t].get(2 * site, 2 * site + 1);
            }
            let n = n_traj as f64;
            assert_abs_diff_eq!(p_left / n, mean_red[t][0] / n, epsilon = 1e-12);
            assert_abs_diff_eq!(p_right / n, mean_red[t][1] / n, epsilon = 1e-12);
            assert_abs_diff_eq!(q.re / n, mean_red[t][2] / n, epsilon = 1e-12);
            assert_abs_diff_eq!(q.im / n, mean_red[t][3] / n, epsilon = 1e-12);
        }
    }

    #[test]
    fn full_distance_is_constant_one_without_noise() {
        let est = ensemble_full_distance(
            &CoinAngles::north(),
            &CoinAngles::south(),
            &hadamard(),
            &NoiseParams::free(),
            15,
            100,
            77,
        )
        .unwrap();
        for (d, se) in est.values.iter().zip(&est.stderr) {
            assert_abs_diff_eq!(*d, 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(*se, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn full_distance_respects_the_horizon_cap() {
        assert!(matches!(
            ensemble_full_distance(
                &CoinAngles::north(),
                &CoinAngles::south(),
                &hadamard(),
                &NoiseParams::free(),
                MAX_FULL_HORIZON + 1,
                100,
                1,
            ),
            Err(Error::HorizonLimit { .. })
        ));
    }

    #[test]
    fn noisy_full_distance_decays_without_significant_increases() {
        let est = ensemble_full_distance(
            &CoinAngles::north(),
            &CoinAngles::south(),
            &hadamard(),
            &NoiseParams::new(0.3).unwrap(),
            20,
            400,
            11,
        )
        .unwrap();
        assert!(est.values[20] < est.values[0]);
        for t in 0..20 {
            let rise = est.values[t + 1] - est.values[t];
            let tol = 3.0 * est.stderr[t + 1].max(est.stderr[t]);
            assert!(rise <= tol + 1e-12, "t = {t}: rise {rise} vs tol {tol}");
        }
    }
}
