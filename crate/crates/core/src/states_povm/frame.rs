use num_complex::Complex;

use super::povm::{Povm, TAU_GRAM};
use crate::error::{Error, Result};
use crate::opalg::{ComplexMatrix, HermitianOperator};
use crate::scalar::Real;

/// Reconstruction residual accepted when validating a frame.
pub const TAU_FRAME: f64 = 1e-8;

/// Dual operators `D_a` with `A = sum_a tr(A E_a) D_a` for every operator `A`.
#[derive(Clone, Debug)]
pub struct DualFrame<T> {
    povm: Povm<T>,
    duals: Vec<HermitianOperator<T>>,
    gram_rank: usize,
    min_singular_value: T,
}

impl<T: Real> DualFrame<T> {
    pub fn povm(&self) -> &Povm<T> {
        &self.povm
    }

    pub fn duals(&self) -> &[HermitianOperator<T>] {
        &self.duals
    }

    pub fn gram_rank(&self) -> usize {
        self.gram_rank
    }

    pub fn min_singular_value(&self) -> T {
        self.min_singular_value
    }

    pub fn len(&self) -> usize {
        self.duals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.duals.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.povm.dim()
    }

    /// `sum_a c_a D_a` for arbitrary real coefficients.
    pub fn combine(&self, coeffs: &[T]) -> HermitianOperator<T> {
        let mut out = HermitianOperator::zeros(self.dim());
        for (&c, d) in coeffs.iter().zip(&self.duals) {
            out.add_scaled(d, c);
        }
        out
    }
}

/// Orthonormal Hermitian basis of `d x d` operators under the trace inner product.
pub fn hermitian_basis<T: Real>(d: usize) -> Vec<HermitianOperator<T>> {
    let r = T::FRAC_1_SQRT_2();
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(j, j)] = Complex::new(T::one(), T::zero());
        out.push(HermitianOperator::new(m).expect("diagonal"));
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = Complex::new(r, T::zero());
            sym[(k, j)] = Complex::new(r, T::zero());
            out.push(HermitianOperator::new(sym).expect("symmetric"));
            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(j, k)] = Complex::new(T::zero(), -r);
            anti[(k, j)] = Complex::new(T::zero(), r);
            out.push(HermitianOperator::new(anti).expect("Hermitian"));
        }
    }
    out
}

/// Builds the dual frame by inverting the Gram matrix `tr(E_a E_b)`.
pub fn dual_frame<T: Real>(povm: &Povm<T>) -> Result<DualFrame<T>> {
    let d = povm.dim();
    let n = povm.len();
    let gram = povm.gram_matrix().eig();
    let rank = gram
        .values
        .iter()
        .filter(|&&s| s > T::lit(TAU_GRAM))
        .count();
    if n != d * d || rank != d * d {
        return Err(Error::NotInformationallyComplete {
            rank,
            expected: d * d,
        });
    }
    let gram_inv = gram.reassemble(|s| T::one() / s);
    let duals: Vec<HermitianOperator<T>> = (0..n)
        .map(|a| {
            let mut acc = HermitianOperator::zeros(d);
            for (b, e) in povm.elements().iter().enumerate() {
                acc.add_scaled(e, gram_inv[(a, b)].re);
            }
            acc
        })
        .collect();
    let frame = DualFrame {
        povm: povm.clone(),
        duals,
        gram_rank: rank,
        min_singular_value: gram.min_value(),
    };
    for (i, a) in hermitian_basis::<T>(d).iter().enumerate() {
        let coeffs: Vec<T> = povm.elements().iter().map(|e| a.trace_product(e)).collect();
        let err = frame.combine(&coeffs).max_abs_diff(a);
        if !(err <= T::tol(TAU_FRAME)) {
            return Err(Error::Numerical(format!(
                "dual frame fails on basis element {i} with residual {err:e}"
            )));
        }
    }
    Ok(frame)
}

/// The unique operator `A` with `tr(A E_a) = p_a`. Hermitian with unit trace,
/// but not necessarily positive.
pub fn reconstruct_operator<T: Real>(
    p: &[T],
    frame: &DualFrame<T>,
) -> Result<HermitianOperator<T>> {
    if p.len() != frame.len() {
        return Err(Error::Shape(format!(
            "{} probabilities for a frame of {}",
            p.len(),
            frame.len()
        )));
    }
    let sum: T = p.iter().copied().sum();
    if !((sum - T::one()).abs() <= T::tol(1e-9)) {
        return Err(Error::Normalization { sum: sum.as_f64() });
    }
    Ok(frame.combine(p))
}
