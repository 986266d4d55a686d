// SPDX-License-Identifier: Apache-2.0

//! Eigenvalues and eigenvectors of real 3×3 matrices with possibly complex
//! spectra, via the characteristic cubic in closed form.
//!
//! The matrices handled here are small and well scaled (entries O(1)), so a
//! closed-form cubic plus a couple of Newton polish steps is accurate to
//! near machine precision without any iteration machinery.

use num_complex::Complex64;

/// Roots of λ³ + b·λ² + c·λ + d with real coefficients.
///
/// Real roots come back with zero imaginary part; a complex pair comes back
/// conjugate. Each root is polished with two Newton steps on the original
/// cubic.
pub fn cubic_roots(b: f64, c: f64, d: f64) -> [Complex64; 3] {
    // depressed form y³ + p·y + q, λ = y − b/3
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;

    let mut roots = if p.abs() < 1e-14 && q.abs() < 1e-14 {
        [Complex64::ZERO; 3]
    } else {
        let disc = -4.0 * p * p * p - 27.0 * q * q;
        if disc >= 0.0 {
            // three real roots (p < 0 here unless everything vanished above)
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
            let theta = arg.clamp(-1.0, 1.0).acos() / 3.0;
            let third = 2.0 * std::f64::consts::PI / 3.0;
            [
                Complex64::new(m * theta.cos(), 0.0),
                Complex64::new(m * (theta - third).cos(), 0.0),
                Complex64::new(m * (theta + third).cos(), 0.0),
            ]
        } else {
            // one real root and a conjugate pair (Cardano)
            let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
            let u = (-q / 2.0 + s).cbrt();
            let v = (-q / 2.0 - s).cbrt();
            let re = -(u + v) / 2.0;
            let im = (3.0f64).sqrt() / 2.0 * (u - v);
            [
                Complex64::new(u + v, 0.0),
                Complex64::new(re, im),
                Complex64::new(re, -im),
            ]
        }
    };

    for root in &mut roots {
        let mut lambda = *root - shift;
        for _ in 0..2 {
            let f = ((lambda + b) * lambda + c) * lambda + d;
            let df = (3.0 * lambda + 2.0 * b) * lambda + c;
            if df.norm() > 1e-30 {
                lambda -= f / df;
            }
        }
        *root = lambda;
    }
    roots
}

/// Eigenvalues of a real 3×3 matrix, sorted by descending real part, then
/// descending imaginary part.
pub fn eigenvalues(m: &[[f64; 3]; 3]) -> [Complex64; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    // sum of principal 2×2 minors
    let minors = m[1][1] * m[2][2] - m[1][2] * m[2][1] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[0][0] * m[1][1]
        - m[0][1] * m[1][0];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut roots = cubic_roots(-tr, minors, -det);
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    roots
}

fn cross(a: &[Complex64; 3], b: &[Complex64; 3]) -> [Complex64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(v: &[Complex64; 3]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(v: &[Complex64; 3], by: f64) -> [Complex64; 3] {
    [v[0] * by, v[1] * by, v[2] * by]
}

/// A unit-norm eigenvector for eigenvalue `lambda` of the real matrix `m`.
///
/// The kernel of A = m − λI is found from cross products of A's rows: when
/// rank(A) = 2 any nonzero pairwise cross product spans the kernel. For a
/// degenerate eigenvalue (rank(A) ≤ 1) `which` selects one of two
/// orthogonal kernel vectors.
pub fn eigenvector(m: &[[f64; 3]; 3], lambda: Complex64, which: usize) -> [Complex64; 3] {
    let row = |i: usize| -> [Complex64; 3] {
        [
            Complex64::new(m[i][0], 0.0) - if i == 0 { lambda } else { Complex64::ZERO },
            Complex64::new(m[i][1], 0.0) - if i == 1 { lambda } else { Complex64::ZERO },
            Complex64::new(m[i][2], 0.0) - if i == 2 { lambda } else { Complex64::ZERO },
        ]
    };
    let rows = [row(0), row(1), row(2)];
    let candidates = [
        cross(&rows[0], &rows[1]),
        cross(&rows[0], &rows[2]),
        cross(&rows[1], &rows[2]),
    ];
    let best = candidates
        .iter()
        .max_by(|a, b| norm(a).partial_cmp(&norm(b)).unwrap())
        .unwrap();
    let scale_ref = rows.iter().map(norm).fold(0.0f64, f64::max).max(1.0);
    if norm(best) > 1e-10 * scale_ref * scale_ref {
        return scale(best, 1.0 / norm(best));
    }

    // rank(A) ≤ 1: two-dimensional kernel. Build it from the largest row.
    let r = rows
        .iter()
        .max_by(|a, b| norm(a).partial_cmp(&norm(b)).unwrap())
        .unwrap();
    if norm(r) < 1e-12 * scale_ref {
        // A ≈ 0: every direction is an eigenvector
        let mut e = [Complex64::ZERO; 3];
        e[which.min(2)] = Complex64::new(1.0, 0.0);
        return e;
    }
    // vectors bilinearly orthogonal to r (r·v = 0 without conjugation)
    let perp = [
        [-r[1], r[0], Complex64::ZERO],
        [-r[2], Complex64::ZERO, r[0]],
        [Complex64::ZERO, -r[2], r[1]],
    ];
    let v1 = perp
        .iter()
        .max_by(|a, b| norm(a).partial_cmp(&norm(b)).unwrap())
        .unwrap();
    let v1 = scale(v1, 1.0 / norm(v1));
    if which == 0 {
        v1
    } else {
        let v2 = cross(r, &v1);
        scale(&v2, 1.0 / norm(&v2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn matvec(m: &[[f64; 3]; 3], v: &[Complex64; 3]) -> [Complex64; 3] {
        let mut out = [Complex64::ZERO; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i] += m[i][j] * v[j];
            }
        }
        out
    }

    #[test]
    fn known_real_spectrum() {
        // diag(3, 1, -2) permuted by a similarity the cubic sees through
        let m = [[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -2.0]];
        let l = eigenvalues(&m);
        assert_abs_diff_eq!(l[0].re, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[1].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[2].re, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn known_complex_pair() {
        // rotation block ⊕ 1: eigenvalues 1, ±i
        let m = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let l = eigenvalues(&m);
        assert_abs_diff_eq!(l[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[1].im, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[2].im, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_pair_eigenvectors_span_kernel() {
        // eigenvalues {1, -1, -1}; the -1 eigenspace is two-dimensional
        let m = [[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]];
        let l = eigenvalues(&m);
        let minus_one = Complex64::new(-1.0, 0.0);
        for which in 0..2 {
            let v = eigenvector(&m, minus_one, which);
            let mv = matvec(&m, &v);
            for i in 0..3 {
                assert_abs_diff_eq!((mv[i] - minus_one * v[i]).norm(), 0.0, epsilon = 1e-10);
            }
        }
        assert_abs_diff_eq!(l[1].re, -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(l[2].re, -1.0, epsilon = 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn residual_is_small_for_random_matrices(
            entries in proptest::array::uniform9(-2.0f64..2.0),
        ) {
            let m = [
                [entries[0], entries[1], entries[2]],
                [entries[3], entries[4], entries[5]],
                [entries[6], entries[7], entries[8]],
            ];
            let ls = eigenvalues(&m);
            // characteristic identities
            let tr = m[0][0] + m[1][1] + m[2][2];
            let sum: Complex64 = ls.iter().sum();
            prop_assert!((sum.re - tr).abs() < 1e-8);
            prop_assert!(sum.im.abs() < 1e-8);
            // eigenvector residuals, skipping near-degenerate spectra where
            // the kernel direction is ill-conditioned
            let well_separated = (0..3).all(|i| {
                (0..3).all(|j| i == j || (ls[i] - ls[j]).norm() > 1e-3)
            });
            if well_separated {
                for &l in &ls {
                    let v = eigenvector(&m, l, 0);
                    let mv = matvec(&m, &v);
                    for i in 0..3 {
                        prop_assert!((mv[i] - l * v[i]).norm() < 1e-7);
                    }
                }
            }
        }
    }
}
