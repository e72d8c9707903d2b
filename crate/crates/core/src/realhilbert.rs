//! Quantum theory over a real Hilbert space, where the de Finetti
//! representation fails already for two systems.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opalg::{ComplexMatrix, HermitianOperator};
use crate::scalar::Real;
use crate::states_povm::{density_from_bloch, BlochVector, Ensemble, TAU_PSD, TAU_TRACE};

/// Real symmetric matrix, stored row-major and kept exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSymmetricOperator<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: Real> RealSymmetricOperator<T> {
    /// Accepts a row-major matrix that is symmetric up to `1e-12` relative
    /// to its largest entry and averages it with its transpose.
    pub fn new(dim: usize, entries: Vec<T>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "{} entries for dimension {dim}",
                entries.len()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("non-finite entry".into()));
        }
        let scale = entries.iter().fold(T::one(), |m, x| m.max(x.abs()));
        let mut deviation = T::zero();
        for i in 0..dim {
            for j in 0..i {
                deviation = deviation.max((entries[i * dim + j] - entries[j * dim + i]).abs());
            }
        }
        if deviation > T::tol(1e-12) * scale {
            return Err(Error::NotHermitian {
                deviation: deviation.as_f64(),
            });
        }
        Ok(Self::from_fn(dim, |i, j| {
            (entries[i * dim + j] + entries[j * dim + i]) * T::lit(0.5)
        }))
    }

    /// Builds from the upper triangle of `f`.
    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut entries = vec![T::zero(); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        Self { dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// Real part of a Hermitian operator whose imaginary part vanishes within `1e-12`.
    pub fn from_hermitian(op: &HermitianOperator<T>) -> Result<Self> {
        let m = op.matrix();
        let imag = m
            .as_slice()
            .iter()
            .fold(T::zero(), |acc, z| acc.max(z.im.abs()));
        if imag > T::tol(1e-12) {
            return Err(Error::Argument(format!(
                "operator has imaginary part {imag:e}"
            )));
        }
        Ok(Self::from_fn(op.dim(), |i, j| m[(i, j)].re))
    }

    pub fn to_hermitian(&self) -> HermitianOperator<T> {
        let m = ComplexMatrix::from_fn(self.dim, self.dim, |i, j| {
            Complex::new(self.get(i, j), T::zero())
        });
        HermitianOperator::new(m).expect("symmetric by construction")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `tr(A B)`.
    pub fn inner(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.inner(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: T) {
        for (a, &b) in self.entries.iter_mut().zip(&other.entries) {
            *a += b * s;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, -T::one());
        out
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (m, n) = (self.dim, other.dim);
        Self::from_fn(m * n, |r, c| {
            self.get(r / n, c / n) * other.get(r % n, c % n)
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.to_hermitian().eigenvalues()
    }
}

/// Dimensions of the real symmetric operators on `(R^d)^(x)n` and of the
/// span of their product operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionGap {
    pub lhs: u128,
    pub rhs: u128,
    pub gap_positive: bool,
}

/// `lhs = d^n (d^n + 1) / 2` against `rhs = (d (d + 1) / 2)^n`.
pub fn dimension_gap(d: u64, n: u32) -> Result<DimensionGap> {
    if d < 2 || n < 1 {
        return Err(Error::Argument(format!(
            "need d >= 2 and n >= 1, got d={d}, n={n}"
        )));
    }
    let overflow = || Error::Overflow(format!("dimension count for d={d}, n={n}"));
    let dn = u128::from(d).checked_pow(n).ok_or_else(overflow)?;
    let lhs = dn.checked_mul(dn + 1).ok_or_else(overflow)? / 2;
    let rhs = u128::from(real_basis_count(d))
        .checked_pow(n)
        .ok_or_else(overflow)?;
    Ok(DimensionGap {
        lhs,
        rhs,
        gap_positive: lhs > rhs,
    })
}

/// Dimension of the real symmetric `d x d` matrices.
pub fn real_basis_count(d: u64) -> u64 {
    d * (d + 1) / 2
}

/// Trace and positivity checks on a real symmetric operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealStateVerdict {
    pub valid: bool,
    pub trace: f64,
    pub trace_ok: bool,
    pub min_eigenvalue: f64,
    pub psd_ok: bool,
}

pub fn validate_real_state<T: Real>(op: &RealSymmetricOperator<T>) -> RealStateVerdict {
    let trace = op.trace();
    let min = op.eigenvalues().into_iter().fold(T::infinity(), T::min);
    let trace_ok = (trace - T::one()).abs() <= T::tol(TAU_TRACE);
    let psd_ok = min >= -T::tol(TAU_PSD);
    RealStateVerdict {
        valid: trace_ok && psd_ok,
        trace: trace.as_f64(),
        trace_ok,
        min_eigenvalue: min.as_f64(),
        psd_ok,
    }
}

/// Orthonormal basis (trace inner product) of the real symmetric `d x d`
/// matrices: `{I, s1, s3} / sqrt 2` for `d = 2`, otherwise `e_jj` and
/// `(e_jk + e_kj) / sqrt 2`.
pub fn real_symmetric_basis<T: Real>(d: usize) -> Vec<RealSymmetricOperator<T>> {
    let h = T::FRAC_1_SQRT_2();
    if d == 2 {
        return vec![
            RealSymmetricOperator::from_fn(2, |i, j| if i == j { h } else { T::zero() }),
            RealSymmetricOperator::from_fn(2, |i, j| if i != j { h } else { T::zero() }),
            RealSymmetricOperator::from_fn(2, |i, j| match (i, j) {
                (0, 0) => h,
                (1, 1) => -h,
                _ => T::zero(),
            }),
        ];
    }
    let mut out = Vec::with_capacity(d * (d + 1) / 2);
    for j in 0..d {
        out.push(RealSymmetricOperator::from_fn(d, |a, b| {
            if a == j && b == j {
                T::one()
            } else {
                T::zero()
            }
        }));
    }
    for j in 0..d {
        for k in j + 1..d {
            out.push(RealSymmetricOperator::from_fn(d, |a, b| {
                if a == j && b == k {
                    h
                } else {
                    T::zero()
                }
            }));
        }
    }
    out
}

/// Orthogonal projection onto the span of real symmetric product operators.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanProjection<T> {
    pub projection: RealSymmetricOperator<T>,
    pub residual_norm: T,
}

/// Projects a two-system operator on `R^d (x) R^d` onto
/// `span{S_i (x) S_j}`; a nonzero residual rules out every real separable form.
pub fn real_product_span_residual<T: Real>(
    op: &RealSymmetricOperator<T>,
    d: usize,
) -> Result<SpanProjection<T>> {
    if d < 1 || op.dim() != d * d {
        return Err(Error::Shape(format!(
            "operator of dimension {} is not on two {d}-dimensional systems",
            op.dim()
        )));
    }
    let basis = real_symmetric_basis::<T>(d);
    let mut projection = RealSymmetricOperator::from_fn(op.dim(), |_, _| T::zero());
    for a in &basis {
        for b in &basis {
            let e = a.kron(b);
            let c = e.inner(op);
            projection.add_scaled(&e, c);
        }
    }
    let residual_norm = op.sub(&projection).frobenius_norm();
    Ok(SpanProjection {
        projection,
        residual_norm,
    })
}

/// Equal mixture of the two `s2` eigenstates, `(I +- s2) / 2`.
pub fn sigma2_ensemble<T: Real>() -> Ensemble<T> {
    let plus = density_from_bloch(BlochVector::new(T::zero(), T::one(), T::zero()).unwrap());
    let minus = density_from_bloch(BlochVector::new(T::zero(), -T::one(), T::zero()).unwrap());
    Ensemble::new(vec![T::lit(0.5), T::lit(0.5)], vec![plus, minus]).expect("valid ensemble")
}

/// `(I (x) I + s2 (x) s2) / 4`, the two-system mixture of [`sigma2_ensemble`],
/// written as a real matrix.
pub fn sigma2_pair_state<T: Real>() -> RealSymmetricOperator<T> {
    let q = T::lit(0.25);
    RealSymmetricOperator::from_fn(4, |i, j| match (i, j) {
        (a, b) if a == b => q,
        (0, 3) => -q,
        (1, 2) => q,
        _ => T::zero(),
    })
}
