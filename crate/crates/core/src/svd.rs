//! Singular value decomposition of complex matrices via one-sided Jacobi
//! column orthogonalization. Self-contained; no external solver.

use crate::complex::Amplitude;
use ndarray::Array2;
use num_complex::Complex64;

pub struct Svd {
    /// Left singular vectors, one column per singular value (zero columns
    /// where the singular value is zero).
    pub u: Array2<Amplitude>,
    /// Singular values, descending.
    pub sigma: Vec<f64>,
    /// Conjugate transpose of the right singular vectors.
    pub vdag: Array2<Amplitude>,
}

impl Svd {
    /// Number of singular values strictly above `tol * sigma_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let cutoff = tol * self.sigma.first().copied().unwrap_or(0.0);
        self.sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count()
    }
}

/// Decomposes `a = u * diag(sigma) * vdag`.
pub fn svd(a: &Array2<Amplitude>) -> Svd {
    let m = a.nrows();
    let n = a.ncols();
    let mut work = a.clone();
    let mut v: Array2<Amplitude> = Array2::eye(n);
    let tol = 1e-14;
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0f64;
                let mut aqq = 0.0f64;
                let mut apq = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let ap = work[(i, p)];
                    let aq = work[(i, q)];
                    app += ap.norm_sqr();
                    aqq += aq.norm_sqr();
                    apq += ap.conj() * aq;
                }
                if apq.norm_sqr() <= tol * tol * app * aqq || apq.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                let beta = apq.arg();
                let abs_apq = apq.norm();
                let tau = (aqq - app) / (2.0 * abs_apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let s_fwd = Complex64::from_polar(s, beta);
                let s_bwd = Complex64::from_polar(s, -beta);
                for i in 0..m {
                    let ap = work[(i, p)];
                    let aq = work[(i, q)];
                    work[(i, p)] = ap * c - aq * s_bwd;
                    work[(i, q)] = ap * s_fwd + aq * c;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * s_bwd;
                    v[(i, q)] = vp * s_fwd + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| work[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).unwrap());
    let mut u = Array2::zeros((m, n));
    let mut sigma = Vec::with_capacity(n);
    let mut vdag = Array2::zeros((n, n));
    for (new_j, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..m {
                u[(i, new_j)] = work[(i, j)] / s;
            }
        }
        for i in 0..n {
            vdag[(new_j, i)] = v[(i, j)].conj();
        }
    }
    Svd { u, sigma, vdag }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::approx_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reconstruct(d: &Svd, m: usize, n: usize) -> Array2<Amplitude> {
        let mut out = Array2::zeros((m, n));
        for i in 0..m {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (r, &s) in d.sigma.iter().enumerate() {
                    acc += d.u[(i, r)] * s * d.vdag[(r, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    fn random_matrix(m: usize, n: usize, seed: u64) -> Array2<Amplitude> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((m, n), |_| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        })
    }

    #[test]
    fn reconstructs_random_matrices() {
        for (m, n, seed) in [(4, 4, 1), (6, 3, 2), (3, 6, 3), (1, 5, 4), (5, 1, 5)] {
            let a = random_matrix(m, n, seed);
            let d = svd(&a);
            let back = reconstruct(&d, m, n);
            for i in 0..m {
                for j in 0..n {
                    assert!(approx_eq(a[(i, j)], back[(i, j)]), "mismatch at {i},{j} for {m}x{n}");
                }
            }
            for w in d.sigma.windows(2) {
                assert!(w[0] >= w[1] - 1e-12);
            }
        }
    }

    #[test]
    fn left_vectors_orthonormal() {
        let a = random_matrix(5, 4, 9);
        let d = svd(&a);
        let r = d.rank(1e-12);
        for p in 0..r {
            for q in 0..r {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in 0..5 {
                    dot += d.u[(i, p)].conj() * d.u[(i, q)];
                }
                let expect = if p == q { 1.0 } else { 0.0 };
                assert!((dot.re - expect).abs() < 1e-9 && dot.im.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rank_detects_exact_deficiency() {
        // Two identical columns: rank 1.
        let mut a = Array2::zeros((3, 2));
        for i in 0..3 {
            a[(i, 0)] = Complex64::new(i as f64 + 1.0, -1.0);
            a[(i, 1)] = a[(i, 0)];
        }
        let d = svd(&a);
        assert_eq!(d.rank(1e-12), 1);
    }

    #[test]
    fn zero_matrix() {
        let a: Array2<Amplitude> = Array2::zeros((2, 3));
        let d = svd(&a);
        assert_eq!(d.rank(1e-12), 0);
        assert!(d.sigma.iter().all(|&s| s == 0.0));
    }
}
