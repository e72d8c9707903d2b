//! Cyclic Jacobi diagonalization of complex Hermitian matrices.

use num_complex::Complex;
use num_traits::{One, Zero};

use super::matrix::ComplexMatrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Spectral decomposition `op = V diag(values) V^dagger`.
///
/// Eigenvalues are sorted in descending order; column `k` of `vectors` is
/// the eigenvector for `values[k]`, with its largest-modulus component made
/// real and nonnegative (first such component on ties).
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        self.vectors.column(k)
    }

    /// `V f(diag) V^dagger`.
    pub fn reassemble(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w.is_zero() {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)] * w;
                if vi.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn min_value(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }

    pub fn max_value(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }
}

/// Diagonalizes a matrix assumed Hermitian. Only the upper triangle's
/// relationship to the lower one is trusted up to roundoff.
pub(crate) fn jacobi_hermitian<T: Real>(input: &ComplexMatrix<T>) -> EigenDecomposition<T> {
    let n = input.rows();
    let mut a = input.clone();
    let mut v = ComplexMatrix::<T>::identity(n);
    let two = T::lit(2.0);

    let scale = a.frobenius_norm();
    // Off-diagonal entries below this are left in place.
    let negligible = T::epsilon() * scale;
    let hundred = T::lit(100.0);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let lost_in_diagonal =
                    app.abs() + hundred * g == app.abs() && aqq.abs() + hundred * g == aqq.abs();
                if g <= negligible || lost_in_diagonal {
                    continue;
                }
                rotated = true;
                // Phase on column q makes the (p, q) entry real and positive.
                let phase = apq.conj() / g;
                let theta = (aqq - app) / (two * g);
                let t = if theta.is_infinite() {
                    T::zero()
                } else {
                    let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let u_pp = Complex::new(c, T::zero());
                let u_pq = Complex::new(s, T::zero());
                let u_qp = phase * (-s);
                let u_qq = phase * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .re
            .partial_cmp(&a[(i, i)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let values: Vec<T> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut best = 0;
        let mut best_mod = T::neg_infinity();
        for i in 0..n {
            let m = v[(i, src)].norm();
            // Ties within roundoff go to the first index.
            if m > best_mod + T::epsilon() * T::lit(16.0) {
                best_mod = m;
                best = i;
            }
        }
        let pivot = v[(best, src)];
        let fix = if pivot.norm().is_zero() {
            Complex::one()
        } else {
            pivot.conj() / pivot.norm()
        };
        for i in 0..n {
            vectors[(i, col)] = v[(i, src)] * fix;
        }
        vectors[(best, col)] = Complex::new(vectors[(best, col)].norm(), T::zero());
    }
    EigenDecomposition { values, vectors }
}
