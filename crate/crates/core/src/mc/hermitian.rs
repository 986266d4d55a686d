// SPDX-License-Identifier: Apache-2.0

//! Eigenvalues of complex Hermitian matrices by cyclic Jacobi rotations.
//!
//! Only eigenvalues are needed (for trace norms), so rotations update the
//! matrix in place and no eigenvector accumulation is done. Each pivot
//! (p, q) is annihilated by the unitary
//!
//! ```text
//! J = [[c, s], [−s̄, c]],   s = σ e^{i·arg(a_pq)},
//! ```
//!
//! where (c, σ) is the classic real Jacobi rotation for the 2×2 symmetric
//! matrix [[a_pp, |a_pq|], [|a_pq|, a_qq]].

use num_complex::Complex64;

/// Dense Hermitian matrix stored row-major. Only the upper triangle is
/// trusted; the lower triangle is reconstructed by conjugation.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::ZERO; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i <= j {
            self.data[i * self.n + j]
        } else {
            self.data[j * self.n + i].conj()
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        if i <= j {
            self.data[i * self.n + j] = value;
        } else {
            self.data[j * self.n + i] = value.conj();
        }
    }

    /// Rank-one update: self += w · v v† (upper triangle only).
    pub fn add_outer(&mut self, v: &[Complex64], w: f64) {
        debug_assert_eq!(v.len(), self.n);
        for i in 0..self.n {
            let vi = v[i] * w;
            let row = &mut self.data[i * self.n..(i + 1) * self.n];
            for (j, &vj) in v.iter().enumerate().skip(i) {
                row[j] += vi * vj.conj();
            }
        }
    }

    /// self += w · other (upper triangle).
    pub fn add_scaled(&mut self, other: &HermitianMatrix, w: f64) {
        debug_assert_eq!(self.n, other.n);
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += w * y;
        }
    }

    pub fn scale(&mut self, w: f64) {
        for x in &mut self.data {
            *x *= w;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    fn off_diagonal_norm_sq(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                acc += self.data[i * self.n + j].norm_sqr();
            }
        }
        acc
    }

    /// Eigenvalues in unspecified order. Destroys the matrix contents.
    pub fn eigenvalues(mut self) -> Vec<f64> {
        let n = self.n;
        if n == 0 {
            return Vec::new();
        }
        if n == 1 {
            return vec![self.data[0].re];
        }
        let scale_ref: f64 = (0..n)
            .map(|i| self.get(i, i).norm())
            .fold(self.off_diagonal_norm_sq().sqrt(), f64::max)
            .max(1e-300);
        let tol = 1e-28 * scale_ref * scale_ref * (n * n) as f64;
        for _sweep in 0..60 {
            if self.off_diagonal_norm_sq() <= tol {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    self.rotate(p, q);
                }
            }
        }
        (0..n).map(|i| self.data[i * n + i].re).collect()
    }

    /// One Jacobi rotation annihilating entry (p, q).
    fn rotate(&mut self, p: usize, q: usize) {
        let n = self.n;
        let apq = self.data[p * n + q];
        let b = apq.norm();
        if b < 1e-300 {
            return;
        }
        let phase = apq / b;
        let app = self.data[p * n + p].re;
        let aqq = self.data[q * n + q].re;
        // real rotation for [[app, b], [b, aqq]]: the smaller-magnitude
        // root of t² − 2τt − 1 = 0
        let tau = (app - aqq) / (2.0 * b);
        let t = if tau >= 0.0 {
            -1.0 / (tau + (1.0 + tau * tau).sqrt())
        } else {
            1.0 / (-tau + (1.0 + tau * tau).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let sigma = t * c;
        let s = phase * sigma;

        // diagonal entries and the pivot
        let new_pp = c * c * app - 2.0 * c * sigma * b + sigma * sigma * aqq;
        let new_qq = sigma * sigma * app + 2.0 * c * sigma * b + c * c * aqq;
        self.data[p * n + p] = Complex64::new(new_pp, 0.0);
        self.data[q * n + q] = Complex64::new(new_qq, 0.0);
        self.data[p * n + q] = Complex64::ZERO;

        // remaining entries of rows/columns p and q
        for i in 0..n {
            if i == p || i == q {
                continue;
            }
            let aip = self.get(i, p);
            let aiq = self.get(i, q);
            self.set(i, p, aip * c - aiq * s.conj());
            self.set(i, q, aip * s + aiq * c);
        }
    }
}

/// Trace norm ‖A‖₁ = Σ|λ_i| of a Hermitian matrix.
pub fn trace_norm(matrix: HermitianMatrix) -> f64 {
    matrix.eigenvalues().iter().map(|l| l.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let mut m = HermitianMatrix::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex64::new(rng.random_range(-1.0..1.0), 0.0));
            for j in i + 1..n {
                m.set(
                    i,
                    j,
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                );
            }
        }
        m
    }

    fn moment(m: &HermitianMatrix, power: usize) -> f64 {
        // tr(A^power) by repeated multiplication on the dense form
        let n = m.dim();
        let dense: Vec<Complex64> = (0..n * n).map(|x| m.get(x / n, x % n)).collect();
        let mut acc = dense.clone();
        for _ in 1..power {
            let mut next = vec![Complex64::ZERO; n * n];
            for i in 0..n {
                for k in 0..n {
                    let a = acc[i * n + k];
                    for j in 0..n {
                        next[i * n + j] += a * dense[k * n + j];
                    }
                }
            }
            acc = next;
        }
        (0..n).map(|i| acc[i * n + i].re).sum()
    }

    #[test]
    fn diagonal_matrix_is_fixed() {
        let mut m = HermitianMatrix::zeros(3);
        m.set(0, 0, Complex64::new(2.0, 0.0));
        m.set(1, 1, Complex64::new(-1.0, 0.0));
        m.set(2, 2, Complex64::new(0.5, 0.0));
        let mut vals = m.eigenvalues();
        vals.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn two_by_two_closed_form() {
        let mut m = HermitianMatrix::zeros(2);
        m.set(0, 0, Complex64::new(0.3, 0.0));
        m.set(1, 1, Complex64::new(-0.7, 0.0));
        m.set(0, 1, Complex64::new(0.2, -0.4));
        let tr: f64 = 0.3 - 0.7;
        let det: f64 = 0.3 * (-0.7) - (0.04 + 0.16);
        let disc = (tr * tr - 4.0 * det).sqrt();
        let mut vals = m.eigenvalues();
        vals.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(vals[0], (tr - disc) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], (tr + disc) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn moment_identities_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[3usize, 8, 25, 60] {
            let m = random_hermitian(n, &mut rng);
            let m1 = moment(&m, 1);
            let m2 = moment(&m, 2);
            let m3 = moment(&m, 3);
            let vals = m.clone().eigenvalues();
            let s1: f64 = vals.iter().sum();
            let s2: f64 = vals.iter().map(|l| l * l).sum();
            let s3: f64 = vals.iter().map(|l| l * l * l).sum();
            assert_abs_diff_eq!(s1, m1, epsilon = 1e-8 * n as f64);
            assert_abs_diff_eq!(s2, m2, epsilon = 1e-8 * n as f64);
            assert_abs_diff_eq!(s3, m3, epsilon = 1e-7 * n as f64);
        }
    }

    #[test]
    fn trace_norm_of_projector_difference() {
        // |u⟩⟨u| − |v⟩⟨v| for orthonormal u, v has eigenvalues {+1, −1, 0…}
        let n = 6;
        let mut m = HermitianMatrix::zeros(n);
        let u: Vec<Complex64> = (0..n)
            .map(|i| {
                if i == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::ZERO
                }
            })
            .collect();
        let v: Vec<Complex64> = (0..n)
            .map(|i| {
                if i == 3 {
                    Complex64::new(0.0, 1.0)
                } else {
                    Complex64::ZERO
                }
            })
            .collect();
        m.add_outer(&u, 1.0);
        m.add_outer(&v, -1.0);
        assert_abs_diff_eq!(trace_norm(m), 2.0, epsilon = 1e-12);
    }
}
