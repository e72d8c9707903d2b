use num_complex::Complex;
use num_traits::Zero;

use super::eig::{jacobi_hermitian, EigenDecomposition};
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Max-entry Hermiticity tolerance. Deviations below it are symmetrized away.
pub const TAU_HERM: f64 = 1e-10;
/// Eigenvalues at or below this make an operator singular for `inv_sqrt`.
pub const TAU_PD: f64 = 1e-12;

/// Square complex matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    /// Validates Hermiticity within [`TAU_HERM`], returning `(m + m^dagger) / 2`.
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let defect = matrix.hermiticity_defect();
        if !(defect <= T::tol(TAU_HERM)) {
            return Err(Error::NotHermitian {
                deviation: defect.as_f64(),
            });
        }
        Ok(Self::symmetrized(matrix))
    }

    /// Symmetrizes without checking. Used where Hermiticity holds algebraically.
    pub(crate) fn symmetrized(matrix: ComplexMatrix<T>) -> Self {
        let n = matrix.rows();
        let half = T::lit(0.5);
        let mut m = matrix;
        for i in 0..n {
            m[(i, i)] = Complex::new(m[(i, i)].re, T::zero());
            for j in (i + 1)..n {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * half;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Self { matrix: m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        Self {
            matrix: ComplexMatrix::from_real_diagonal(diag),
        }
    }

    /// `|psi><psi|` for an arbitrary (not necessarily normalized) vector.
    pub fn projector(psi: &[Complex<T>]) -> Self {
        Self::symmetrized(ComplexMatrix::outer(psi, psi))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    /// `tr(self * other)`, real for Hermitian pairs.
    pub fn trace_product(&self, other: &Self) -> T {
        self.matrix.trace_product(&other.matrix).re
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            matrix: self.matrix.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    /// `self += w * other`.
    pub fn add_scaled(&mut self, other: &Self, w: T) {
        self.matrix
            .add_scaled(&other.matrix, Complex::new(w, T::zero()));
    }

    /// `u * self * u^dagger`.
    pub fn conjugate_by(&self, u: &ComplexMatrix<T>) -> Self {
        Self::symmetrized(u.matmul(&self.matrix).matmul(&u.adjoint()))
    }

    /// `x * self * x` for Hermitian `x`.
    pub fn sandwich(&self, x: &Self) -> Self {
        Self::symmetrized(x.matrix.matmul(&self.matrix).matmul(&x.matrix))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn frobenius_norm(&self) -> T {
        self.matrix.frobenius_norm()
    }

    pub fn eig(&self) -> EigenDecomposition<T> {
        jacobi_hermitian(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.eig().values
    }

    /// Applies a real function to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Self {
        Self::symmetrized(self.eig().reassemble(f))
    }

    /// `tr(self^2)`.
    pub fn purity(&self) -> T {
        self.matrix.hs_inner(&self.matrix).re
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.as_slice().iter().all(|z| z.is_zero())
    }

    pub fn convert<U: Real>(&self) -> HermitianOperator<U> {
        HermitianOperator::symmetrized(self.matrix.convert())
    }
}

/// Spectral decomposition with descending eigenvalues.
pub fn eig_hermitian<T: Real>(op: &HermitianOperator<T>) -> EigenDecomposition<T> {
    op.eig()
}

/// `op^(-1/2)` for a positive definite operator.
pub fn inv_sqrt<T: Real>(op: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    let eig = op.eig();
    let min = eig.min_value();
    if !(min > T::lit(TAU_PD)) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min.as_f64(),
        });
    }
    Ok(HermitianOperator::symmetrized(
        eig.reassemble(|l| T::one() / l.sqrt()),
    ))
}

/// Pauli matrices `sigma_1`, `sigma_2`, `sigma_3`.
pub fn pauli<T: Real>() -> [HermitianOperator<T>; 3] {
    let o = T::zero();
    let l = T::one();
    let c = |re: T, im: T| Complex::new(re, im);
    let m = |v: [Complex<T>; 4]| HermitianOperator {
        matrix: ComplexMatrix::from_vec(2, 2, v.to_vec()).expect("2x2"),
    };
    [
        m([c(o, o), c(l, o), c(l, o), c(o, o)]),
        m([c(o, o), c(o, -l), c(o, l), c(o, o)]),
        m([c(l, o), c(o, o), c(o, o), c(-l, o)]),
    ]
}
