use num_complex::Complex;
use num_traits::Zero;

use super::density::{density_from_bloch, BlochVector, DensityOperator, TAU_PSD};
use crate::error::{Error, Result};
use crate::opalg::{inv_sqrt, ComplexMatrix, HermitianOperator};
use crate::scalar::Real;

/// Tolerance on `sum E_alpha = I` (max entry).
pub const TAU_IDENTITY: f64 = 1e-9;
/// Gram eigenvalues above this count towards the rank.
pub const TAU_GRAM: f64 = 1e-8;

/// Ordered resolution of the identity into PSD elements.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm<T> {
    label: String,
    elements: Vec<HermitianOperator<T>>,
}

impl<T: Real> Povm<T> {
    pub fn new(label: impl Into<String>, elements: Vec<HermitianOperator<T>>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidPovm("no elements".into()));
        };
        let dim = first.dim();
        if elements.iter().any(|e| e.dim() != dim) {
            return Err(Error::InvalidPovm("elements differ in dimension".into()));
        }
        for (i, e) in elements.iter().enumerate() {
            let min = e.eig().min_value();
            if min < -T::tol(TAU_PSD) {
                return Err(Error::InvalidPovm(format!(
                    "element {i} has eigenvalue {min}"
                )));
            }
        }
        let povm = Self {
            label: label.into(),
            elements,
        };
        let residual = povm.identity_residual();
        if !(residual <= T::tol(TAU_IDENTITY)) {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {residual:e}"
            )));
        }
        Ok(povm)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator<T>] {
        &self.elements
    }

    /// Max-entry distance of the element sum from the identity.
    pub fn identity_residual(&self) -> T {
        let mut sum = HermitianOperator::zeros(self.dim());
        for e in &self.elements {
            sum.add_scaled(e, T::one());
        }
        sum.max_abs_diff(&HermitianOperator::identity(self.dim()))
    }

    /// Real symmetric Gram matrix `tr(E_a E_b)` as a Hermitian operator.
    pub fn gram_matrix(&self) -> HermitianOperator<T> {
        let n = self.len();
        let mut g = ComplexMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let v = self.elements[a].trace_product(&self.elements[b]);
                g[(a, b)] = Complex::new(v, T::zero());
                g[(b, a)] = Complex::new(v, T::zero());
            }
        }
        HermitianOperator::new(g).expect("Gram matrix is symmetric")
    }

    /// Gram eigenvalues (= singular values, since the Gram matrix is PSD), descending.
    pub fn gram_spectrum(&self) -> Vec<T> {
        self.gram_matrix().eigenvalues()
    }

    pub fn gram_rank(&self) -> usize {
        self.gram_spectrum()
            .iter()
            .filter(|&&s| s > T::lit(TAU_GRAM))
            .count()
    }
}

/// Generalized Born rule `p_a = tr(rho E_a)`, clipped and renormalized.
pub fn born<T: Real>(rho: &DensityOperator<T>, povm: &Povm<T>) -> Result<Vec<T>> {
    if rho.dim() != povm.dim() {
        return Err(Error::Shape(format!(
            "state dimension {} vs POVM dimension {}",
            rho.dim(),
            povm.dim()
        )));
    }
    let raw: Vec<T> = povm
        .elements()
        .iter()
        .map(|e| rho.as_operator().trace_product(e))
        .collect();
    clip_probabilities(raw)
}

pub(crate) fn clip_probabilities<T: Real>(raw: Vec<T>) -> Result<Vec<T>> {
    let tau = T::tol(TAU_PSD);
    if let Some(bad) = raw.iter().find(|&&p| p < -tau) {
        return Err(Error::Numerical(format!("negative probability {bad}")));
    }
    let clipped: Vec<T> = raw.into_iter().map(|p| p.max(T::zero())).collect();
    let total: T = clipped.iter().copied().sum();
    if !(total > T::zero()) {
        return Err(Error::Numerical("all probabilities vanish".into()));
    }
    Ok(clipped.into_iter().map(|p| p / total).collect())
}

/// Which step of the three-step construction produced a projector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IcStep {
    /// `|e_j><e_j|`.
    Diagonal { j: usize },
    /// `(|e_j> + |e_k>)(<e_j| + <e_k|) / 2`.
    RealPair { j: usize, k: usize },
    /// `(|e_j> + i|e_k>)(<e_j| - i<e_k|) / 2`.
    ImaginaryPair { j: usize, k: usize },
}

/// The `d^2` linearly independent rank-1 projectors on the computational basis,
/// in construction order.
pub fn minimal_ic_projectors<T: Real>(d: usize) -> Result<Vec<(IcStep, HermitianOperator<T>)>> {
    if d < 2 {
        return Err(Error::Argument(format!("dimension {d} < 2")));
    }
    let r = T::FRAC_1_SQRT_2();
    let ket = |entries: &[(usize, Complex<T>)]| {
        let mut v = vec![Complex::zero(); d];
        for &(i, z) in entries {
            v[i] = z;
        }
        HermitianOperator::projector(&v)
    };
    let one = Complex::new(T::one(), T::zero());
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        out.push((IcStep::Diagonal { j }, ket(&[(j, one)])));
    }
    for j in 0..d {
        for k in (j + 1)..d {
            out.push((
                IcStep::RealPair { j, k },
                ket(&[
                    (j, Complex::new(r, T::zero())),
                    (k, Complex::new(r, T::zero())),
                ]),
            ));
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            out.push((
                IcStep::ImaginaryPair { j, k },
                ket(&[
                    (j, Complex::new(r, T::zero())),
                    (k, Complex::new(T::zero(), r)),
                ]),
            ));
        }
    }
    Ok(out)
}

/// `E_a = G^(-1/2) Pi_a G^(-1/2)` with `G = sum Pi_a`.
pub fn build_minimal_ic_povm<T: Real>(d: usize) -> Result<Povm<T>> {
    let projectors = minimal_ic_projectors::<T>(d)?;
    let mut g = HermitianOperator::zeros(d);
    for (_, p) in &projectors {
        g.add_scaled(p, T::one());
    }
    let g_inv_sqrt = inv_sqrt(&g)?;
    let elements = projectors
        .iter()
        .map(|(_, p)| p.sandwich(&g_inv_sqrt))
        .collect();
    Povm::new(format!("minimal-ic-d{d}"), elements)
}

/// Tetrahedron vertices on the Bloch sphere.
pub fn tetrahedron_directions<T: Real>() -> [[T; 3]; 4] {
    let s = T::one() / T::lit(3.0).sqrt();
    let (p, m) = (s, -s);
    [[p, p, p], [p, m, m], [m, p, m], [m, m, p]]
}

/// `E_a = |n_a><n_a| / 2` for the four tetrahedron vertices.
pub fn tetrahedron_povm<T: Real>() -> Povm<T> {
    let half = T::lit(0.5);
    let elements = tetrahedron_directions::<T>()
        .iter()
        .map(|n| {
            let b = BlochVector::new(n[0], n[1], n[2]).expect("unit vector");
            density_from_bloch(b).into_operator().scale(half)
        })
        .collect();
    Povm::new("tetrahedron", elements).expect("tetrahedron elements resolve the identity")
}
