use num_complex::Complex;

use crate::error::{Error, Result};
use crate::opalg::{pauli, ComplexMatrix, HermitianOperator};
use crate::scalar::Real;

/// Trace tolerance for density operators.
pub const TAU_TRACE: f64 = 1e-10;
/// Eigenvalues in `[-TAU_PSD, 0)` are clipped to zero; anything lower is rejected.
pub const TAU_PSD: f64 = 1e-9;

/// Unit-trace positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator<T> {
    op: HermitianOperator<T>,
}

impl<T: Real> DensityOperator<T> {
    pub fn new(op: HermitianOperator<T>) -> Result<Self> {
        let trace = op.trace();
        if !((trace - T::one()).abs() <= T::tol(TAU_TRACE)) {
            return Err(Error::Trace {
                trace: trace.as_f64(),
            });
        }
        let eig = op.eig();
        let min = eig.min_value();
        if min < -T::tol(TAU_PSD) {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min.as_f64(),
            });
        }
        if min >= T::zero() {
            return Ok(Self { op });
        }
        let clipped: Vec<T> = eig.values.iter().map(|&l| l.max(T::zero())).collect();
        let total: T = clipped.iter().copied().sum();
        let clipped = crate::opalg::EigenDecomposition {
            values: clipped.iter().map(|&l| l / total).collect(),
            vectors: eig.vectors,
        };
        Ok(Self {
            op: HermitianOperator::new(clipped.reassemble(|l| l))?,
        })
    }

    /// Normalizes `psi` and returns `|psi><psi|`.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if psi.is_empty() || !(norm > T::epsilon()) {
            return Err(Error::Argument("cannot normalize a zero vector".into()));
        }
        let unit: Vec<Complex<T>> = psi.iter().map(|z| z / norm).collect();
        Self::new(HermitianOperator::projector(&unit))
    }

    /// Computational basis state `|index><index|`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Argument(format!("basis index {index} >= {dim}")));
        }
        let mut diag = vec![T::zero(); dim];
        diag[index] = T::one();
        Ok(Self {
            op: HermitianOperator::from_real_diagonal(&diag),
        })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(T::one() / T::from_usize(dim).unwrap()),
        }
    }

    /// Wraps an operator already known to be a density operator.
    pub(crate) fn from_valid(op: HermitianOperator<T>) -> Self {
        Self { op }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    #[inline]
    pub fn as_operator(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn into_operator(self) -> HermitianOperator<T> {
        self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.op.matrix()
    }

    pub fn purity(&self) -> T {
        self.op.purity()
    }

    /// Bloch vector of a qubit state.
    pub fn bloch_vector(&self) -> Result<BlochVector<T>> {
        if self.dim() != 2 {
            return Err(Error::Shape(format!(
                "Bloch vector needs a qubit, got dimension {}",
                self.dim()
            )));
        }
        let [s1, s2, s3] = pauli::<T>();
        Ok(BlochVector {
            s: [
                self.op.trace_product(&s1),
                self.op.trace_product(&s2),
                self.op.trace_product(&s3),
            ],
        })
    }

    pub fn trace_distance(&self, other: &Self) -> T {
        trace_distance(&self.op, &other.op)
    }
}

/// `(1/2) sum |eig(a - b)|`.
pub fn trace_distance<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> T {
    let half = T::lit(0.5);
    a.sub(b)
        .eigenvalues()
        .into_iter()
        .map(|l| l.abs())
        .sum::<T>()
        * half
}

/// Qubit Bloch vector `S` with `rho = (I + S . sigma) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector<T> {
    s: [T; 3],
}

impl<T: Real> BlochVector<T> {
    pub fn new(s1: T, s2: T, s3: T) -> Result<Self> {
        let v = Self { s: [s1, s2, s3] };
        let norm = v.norm();
        if !(norm <= T::one() + T::tol(1e-12)) {
            return Err(Error::InvalidBloch {
                norm: norm.as_f64(),
            });
        }
        Ok(v)
    }

    pub fn components(&self) -> [T; 3] {
        self.s
    }

    pub fn norm(&self) -> T {
        self.s.iter().map(|&x| x * x).sum::<T>().sqrt()
    }
}

/// `(I + S . sigma) / 2`.
pub fn density_from_bloch<T: Real>(s: BlochVector<T>) -> DensityOperator<T> {
    let half = T::lit(0.5);
    let mut op = HermitianOperator::identity(2).scale(half);
    for (sigma, &si) in pauli::<T>().iter().zip(&s.s) {
        op.add_scaled(sigma, si * half);
    }
    // Eigenvalues (1 +- |S|)/2 may dip below zero by the Bloch tolerance only.
    DensityOperator::new(op).expect("Bloch state with |S| <= 1 is a density operator")
}

/// Discrete ensemble decomposition `sum_j p_j rho_j`.
#[derive(Clone, Debug)]
pub struct Ensemble<T> {
    weights: Vec<T>,
    states: Vec<DensityOperator<T>>,
}

impl<T: Real> Ensemble<T> {
    pub fn new(weights: Vec<T>, states: Vec<DensityOperator<T>>) -> Result<Self> {
        check_weights(&weights)?;
        if weights.len() != states.len() {
            return Err(Error::Shape(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        let d = states[0].dim();
        if states.iter().any(|s| s.dim() != d) {
            return Err(Error::Shape("ensemble states differ in dimension".into()));
        }
        Ok(Self { weights, states })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn states(&self) -> &[DensityOperator<T>] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }
}

/// Nonempty, nonnegative, summing to one within `1e-12`.
pub(crate) fn check_weights<T: Real>(weights: &[T]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::Argument("empty weight list".into()));
    }
    if weights.iter().any(|&w| !(w >= T::zero())) {
        return Err(Error::Argument("weights must be nonnegative".into()));
    }
    let sum: T = weights.iter().copied().sum();
    if !((sum - T::one()).abs() <= T::tol(1e-12)) {
        return Err(Error::Normalization { sum: sum.as_f64() });
    }
    Ok(())
}

/// Convex combination of the ensemble members.
pub fn ensemble_to_density<T: Real>(e: &Ensemble<T>) -> DensityOperator<T> {
    let mut op = HermitianOperator::zeros(e.dim());
    for (&w, s) in e.weights.iter().zip(&e.states) {
        op.add_scaled(s.as_operator(), w);
    }
    DensityOperator::from_valid(op)
}
