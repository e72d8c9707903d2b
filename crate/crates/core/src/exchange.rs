//! Multi-system states: permutation symmetry, marginals and symmetric
//! extendibility.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opalg::{
    adjacent_transpositions, all_permutations, basis_permutation, partial_trace, tensor,
    tensor_power, ComplexMatrix, HermitianOperator, SubsystemShape, MAX_DIM,
};
use crate::scalar::Real;
use crate::states_povm::{hermitian_basis, DensityOperator};

/// Largest subsystem count for which the full symmetric group is enumerated.
pub const MAX_SYMMETRIZE: usize = 8;
/// Default iteration cap for [`extension_feasible`].
pub const DEFAULT_MAX_ITER: usize = 5000;
/// Default feasibility tolerance for [`extension_feasible`].
pub const DEFAULT_TOL: f64 = 1e-7;
/// Iterations over which a residual must keep improving.
pub const STALL_WINDOW: usize = 200;
const STALL_RELATIVE_GAIN: f64 = 1e-3;

/// Density operator on `H_d^(x)N` with its subsystem structure.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiSystemState<T> {
    shape: SubsystemShape,
    state: DensityOperator<T>,
}

impl<T: Real> MultiSystemState<T> {
    pub fn new(shape: SubsystemShape, state: DensityOperator<T>) -> Result<Self> {
        if state.dim() != shape.total_dim() {
            return Err(Error::Shape(format!(
                "state dimension {} vs {}^{}",
                state.dim(),
                shape.local_dim(),
                shape.count()
            )));
        }
        Ok(Self { shape, state })
    }

    /// `rho^(x)n`.
    pub fn product(rho: &DensityOperator<T>, n: usize) -> Result<Self> {
        let shape = SubsystemShape::new(rho.dim(), n)?;
        let op = tensor_power(rho.as_operator(), n)?;
        Ok(Self {
            shape,
            state: DensityOperator::from_valid(op),
        })
    }

    pub(crate) fn from_valid(shape: SubsystemShape, op: HermitianOperator<T>) -> Self {
        Self {
            shape,
            state: DensityOperator::from_valid(op),
        }
    }

    pub fn shape(&self) -> SubsystemShape {
        self.shape
    }

    pub fn density(&self) -> &DensityOperator<T> {
        &self.state
    }

    pub fn operator(&self) -> &HermitianOperator<T> {
        self.state.as_operator()
    }

    pub fn local_dim(&self) -> usize {
        self.shape.local_dim()
    }

    pub fn count(&self) -> usize {
        self.shape.count()
    }

    /// Reduced state on the listed subsystems.
    pub fn reduced(&self, keep: &[usize]) -> Result<Self> {
        let op = partial_trace(self.operator(), self.shape, keep)?;
        Ok(Self::from_valid(
            SubsystemShape::new(self.local_dim(), keep.len())?,
            op,
        ))
    }
}

/// Precomputed basis maps for averaging over the symmetric group.
pub(crate) struct Symmetrizer {
    maps: Vec<Vec<usize>>,
    dim: usize,
}

impl Symmetrizer {
    pub(crate) fn new(shape: SubsystemShape) -> Result<Self> {
        if shape.count() > MAX_SYMMETRIZE {
            return Err(Error::Resource(format!(
                "symmetrizing {} subsystems needs {}! permutations (limit {MAX_SYMMETRIZE})",
                shape.count(),
                shape.count()
            )));
        }
        if shape.total_dim() > MAX_DIM {
            return Err(Error::Resource(format!(
                "dimension {} exceeds {MAX_DIM}",
                shape.total_dim()
            )));
        }
        let maps = all_permutations(shape.count())
            .iter()
            .map(|p| basis_permutation(shape, p))
            .collect::<Result<_>>()?;
        Ok(Self {
            maps,
            dim: shape.total_dim(),
        })
    }

    pub(crate) fn apply<T: Real>(&self, m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let n = self.dim;
        let w = T::one() / T::from_usize(self.maps.len()).unwrap();
        let mut out = ComplexMatrix::zeros(n, n);
        for map in &self.maps {
            for i in 0..n {
                for j in 0..n {
                    let z = m[(i, j)];
                    if !z.is_zero() {
                        out[(map[i], map[j])] += z;
                    }
                }
            }
        }
        out.scale(w)
    }
}

/// Invariance under every adjacent transposition, hence under all permutations.
pub fn is_symmetric<T: Real>(state: &MultiSystemState<T>, tol: T) -> bool {
    operator_is_symmetric(state.operator(), state.shape(), tol)
}

pub(crate) fn operator_is_symmetric<T: Real>(
    op: &HermitianOperator<T>,
    shape: SubsystemShape,
    tol: T,
) -> bool {
    let m = op.matrix();
    let n = shape.total_dim();
    adjacent_transpositions(shape.count()).iter().all(|p| {
        let map = basis_permutation(shape, p).expect("valid transposition");
        (0..n).all(|i| (0..n).all(|j| (m[(map[i], map[j])] - m[(i, j)]).norm() <= tol))
    })
}

/// Group average over all `N!` subsystem permutations.
pub fn symmetrize<T: Real>(state: &MultiSystemState<T>) -> Result<MultiSystemState<T>> {
    let sym = Symmetrizer::new(state.shape())?;
    let op = HermitianOperator::symmetrized(sym.apply(state.operator().matrix()));
    Ok(MultiSystemState::from_valid(state.shape(), op))
}

/// Reduced state of the first `keep_n` subsystems.
pub fn marginal<T: Real>(
    state: &MultiSystemState<T>,
    keep_n: usize,
) -> Result<MultiSystemState<T>> {
    if keep_n == 0 || keep_n > state.count() {
        return Err(Error::Argument(format!(
            "cannot keep {keep_n} of {} subsystems",
            state.count()
        )));
    }
    let keep: Vec<usize> = (0..keep_n).collect();
    state.reduced(&keep)
}

/// `(|000> + |111>) / sqrt 2` as a projector.
pub fn ghz_state<T: Real>() -> MultiSystemState<T> {
    let mut psi = vec![Complex::zero(); 8];
    psi[0] = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
    psi[7] = psi[0];
    let shape = SubsystemShape::new(2, 3).expect("3 qubits");
    MultiSystemState::new(shape, DensityOperator::pure(&psi).expect("unit vector"))
        .expect("8-dimensional")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionVerdict {
    Feasible,
    Infeasible,
    Undetermined,
}

/// Why an extension was declared infeasible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasibilityReason {
    /// A pure state only extends as `state (x) tau`, which cannot be symmetric.
    PureMarginal,
    /// Marginals of symmetric states are symmetric.
    NotSymmetric,
    /// Alternating projections stopped improving above `10 * tol`.
    Stalled,
}

#[derive(Clone, Debug)]
pub struct ExtensionReport<T> {
    pub verdict: ExtensionVerdict,
    pub reason: Option<InfeasibilityReason>,
    pub residual: T,
    pub iterations: usize,
    pub certificate: Option<MultiSystemState<T>>,
}

/// Exact verdict for pure inputs: any extension of a pure state factorizes as
/// `state (x) tau`, which is symmetric only when the state is `sigma^(x)N`.
pub fn pure_marginal_shortcut<T: Real>(
    state: &MultiSystemState<T>,
    extra_m: usize,
) -> Option<ExtensionVerdict> {
    if extra_m == 0 {
        return None;
    }
    let eig = state.operator().eig();
    if eig.max_value() < T::one() - T::tol(1e-9) {
        return None;
    }
    let single = state.reduced(&[0]).ok()?;
    let single_pure = single.density().purity() >= T::one() - T::tol(1e-9);
    let is_power = tensor_power(single.operator(), state.count())
        .map(|p| p.max_abs_diff(state.operator()) <= T::tol(1e-7))
        .unwrap_or(false);
    if single_pure && is_power {
        None
    } else {
        Some(ExtensionVerdict::Infeasible)
    }
}

/// Searches for a symmetric state on `N + extra_m` subsystems whose first-`N`
/// marginal is `state`, by alternating projections between the PSD cone and
/// the affine set of symmetric, correctly-marginalizing operators.
pub fn extension_feasible<T: Real>(
    state: &MultiSystemState<T>,
    extra_m: usize,
    max_iter: usize,
    tol: T,
) -> Result<ExtensionReport<T>> {
    if extra_m == 0 {
        return Err(Error::Argument(
            "extension must add at least one system".into(),
        ));
    }
    if !(tol > T::zero()) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let d = state.local_dim();
    let n_sys = state.count();
    let big = SubsystemShape::new(d, n_sys + extra_m).map_err(|e| match e {
        Error::Overflow(s) => Error::Resource(s),
        other => other,
    })?;
    if big.total_dim() > MAX_DIM {
        return Err(Error::Resource(format!(
            "extension dimension {} exceeds {MAX_DIM}",
            big.total_dim()
        )));
    }
    let infeasible = |reason| ExtensionReport {
        verdict: ExtensionVerdict::Infeasible,
        reason: Some(reason),
        residual: T::infinity(),
        iterations: 0,
        certificate: None,
    };
    if pure_marginal_shortcut(state, extra_m) == Some(ExtensionVerdict::Infeasible) {
        return Ok(infeasible(InfeasibilityReason::PureMarginal));
    }
    if !is_symmetric(state, tol) {
        return Ok(infeasible(InfeasibilityReason::NotSymmetric));
    }

    let affine = AffineProjector::new(state, big)?;
    let env_dim = big.total_dim() / state.shape().total_dim();
    let start = tensor(
        state.operator(),
        &HermitianOperator::identity(env_dim).scale(T::one() / T::from_usize(env_dim).unwrap()),
    )?;
    let mut a = affine.project(start.matrix());
    let mut history: Vec<T> = Vec::new();
    let ten = T::lit(10.0);
    let mut residual = T::infinity();

    for iter in 1..=max_iter {
        let a_op = HermitianOperator::symmetrized(a);
        let b = a_op.map_spectrum(|l| l.max(T::zero()));
        residual = a_op.sub(&b).frobenius_norm();
        if residual <= tol {
            if let Some(cert) = affine.certify(&b, tol) {
                return Ok(ExtensionReport {
                    verdict: ExtensionVerdict::Feasible,
                    reason: None,
                    residual,
                    iterations: iter,
                    certificate: Some(cert),
                });
            }
        }
        history.push(residual);
        if history.len() > STALL_WINDOW && residual > ten * tol {
            let before = history[history.len() - 1 - STALL_WINDOW];
            if before - residual <= T::lit(STALL_RELATIVE_GAIN) * before {
                return Ok(ExtensionReport {
                    verdict: ExtensionVerdict::Infeasible,
                    reason: Some(InfeasibilityReason::Stalled),
                    residual,
                    iterations: iter,
                    certificate: None,
                });
            }
        }
        a = affine.project(b.matrix());
    }
    Ok(ExtensionReport {
        verdict: ExtensionVerdict::Undetermined,
        reason: None,
        residual,
        iterations: max_iter,
        certificate: None,
    })
}

/// Orthogonal projection onto `{X symmetric : tr_M X = rho}`.
struct AffineProjector<T> {
    target: MultiSystemState<T>,
    big: SubsystemShape,
    sym: Symmetrizer,
    basis: Vec<HermitianOperator<T>>,
    /// Pseudo-inverse of `K = L P_sym L^dagger` in `basis` coordinates.
    k_pinv: ComplexMatrix<T>,
}

impl<T: Real> AffineProjector<T> {
    fn new(target: &MultiSystemState<T>, big: SubsystemShape) -> Result<Self> {
        let sym = Symmetrizer::new(big)?;
        let small = target.shape().total_dim();
        let basis = hermitian_basis::<T>(small);
        let env = big.total_dim() / small;
        let id_env = HermitianOperator::<T>::identity(env);
        let n = basis.len();
        let mut k = ComplexMatrix::zeros(n, n);
        let mut images = Vec::with_capacity(n);
        for b in &basis {
            let lifted = sym.apply(&b.matrix().kron(id_env.matrix()));
            images.push(Self::marginal_of(&lifted, big, target.count()));
        }
        for (col, img) in images.iter().enumerate() {
            for (row, b) in basis.iter().enumerate() {
                k[(row, col)] = Complex::new(b.trace_product(img), T::zero());
            }
        }
        let eig = HermitianOperator::symmetrized(k).eig();
        let cutoff = eig.max_value() * T::tol(1e-10);
        let k_pinv = eig.reassemble(|l| if l > cutoff { T::one() / l } else { T::zero() });
        Ok(Self {
            target: target.clone(),
            big,
            sym,
            basis,
            k_pinv,
        })
    }

    fn marginal_of(
        m: &ComplexMatrix<T>,
        big: SubsystemShape,
        keep_n: usize,
    ) -> HermitianOperator<T> {
        let keep: Vec<usize> = (0..keep_n).collect();
        partial_trace(&HermitianOperator::symmetrized(m.clone()), big, &keep)
            .expect("shapes agree by construction")
    }

    fn project(&self, y: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let ys = self.sym.apply(y);
        let gap = Self::marginal_of(&ys, self.big, self.target.count()).sub(self.target.operator());
        let coords: Vec<T> = self.basis.iter().map(|b| b.trace_product(&gap)).collect();
        let n = self.basis.len();
        let mut correction = HermitianOperator::zeros(self.target.shape().total_dim());
        for (row, b) in self.basis.iter().enumerate() {
            let c: T = (0..n)
                .map(|col| self.k_pinv[(row, col)].re * coords[col])
                .sum();
            correction.add_scaled(b, c);
        }
        let env = self.big.total_dim() / self.target.shape().total_dim();
        let lifted = self
            .sym
            .apply(&correction.matrix().kron(&ComplexMatrix::identity(env)));
        &ys - &lifted
    }

    fn certify(&self, psd: &HermitianOperator<T>, tol: T) -> Option<MultiSystemState<T>> {
        let sym = HermitianOperator::symmetrized(self.sym.apply(psd.matrix()));
        let tr = sym.trace();
        if !(tr > T::zero()) {
            return None;
        }
        let cert = sym.scale(T::one() / tr);
        let state = DensityOperator::new(cert).ok()?;
        let candidate = MultiSystemState::new(self.big, state).ok()?;
        let marg = marginal(&candidate, self.target.count()).ok()?;
        let ok = is_symmetric(&candidate, tol)
            && marg.operator().max_abs_diff(self.target.operator()) <= tol;
        ok.then_some(candidate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_mixed;
    use crate::states_povm::{density_from_bloch, BlochVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bloch(s1: f64, s2: f64, s3: f64) -> DensityOperator<f64> {
        density_from_bloch(BlochVector::new(s1, s2, s3).unwrap())
    }

    fn pair(a: &DensityOperator<f64>, b: &DensityOperator<f64>) -> MultiSystemState<f64> {
        let shape = SubsystemShape::new(a.dim(), 2).unwrap();
        let op = tensor(a.as_operator(), b.as_operator()).unwrap();
        MultiSystemState::new(shape, DensityOperator::new(op).unwrap()).unwrap()
    }

    #[test]
    fn symmetry_examples() {
        let rho = bloch(0.1, 0.2, 0.3);
        assert!(is_symmetric(
            &MultiSystemState::product(&rho, 3).unwrap(),
            1e-12
        ));
        assert!(is_symmetric(&ghz_state::<f64>(), 1e-12));
        assert!(!is_symmetric(&pair(&rho, &bloch(0.0, 0.0, -0.5)), 1e-12));
    }

    #[test]
    fn symmetrize_examples() {
        let rho = bloch(0.1, 0.2, 0.3);
        let sigma = bloch(-0.4, 0.0, 0.5);
        let s = symmetrize(&pair(&rho, &sigma)).unwrap();
        let expect = pair(&rho, &sigma)
            .operator()
            .add(pair(&sigma, &rho).operator())
            .scale(0.5);
        assert!(s.operator().max_abs_diff(&expect) < 1e-15);
        let g = ghz_state::<f64>();
        assert!(
            symmetrize(&g)
                .unwrap()
                .operator()
                .max_abs_diff(g.operator())
                < 1e-12
        );
        let big = SubsystemShape::new(2, 9).unwrap();
        let mm = MultiSystemState::<f64>::new(big, DensityOperator::maximally_mixed(512)).unwrap();
        assert!(matches!(symmetrize(&mm), Err(Error::Resource(_))));
    }

    #[test]
    fn symmetrize_idempotent_on_random_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let shape = SubsystemShape::new(2, 3).unwrap();
        let st = MultiSystemState::new(shape, random_mixed::<f64, _>(8, &mut rng)).unwrap();
        let once = symmetrize(&st).unwrap();
        let twice = symmetrize(&once).unwrap();
        assert!(once.operator().max_abs_diff(twice.operator()) <= 1e-10);
        assert!(is_symmetric(&once, 1e-10));
        assert!((once.operator().trace() - 1.0).abs() < 1e-12);
        for p in adjacent_transpositions(3) {
            let moved = crate::opalg::permute_subsystems(once.operator(), shape, &p).unwrap();
            assert!(moved.max_abs_diff(once.operator()) <= 1e-10);
        }
    }

    #[test]
    fn marginal_examples() {
        let rho = bloch(0.3, 0.0, -0.2);
        let m = marginal(&MultiSystemState::product(&rho, 3).unwrap(), 2).unwrap();
        assert!(
            m.operator()
                .max_abs_diff(MultiSystemState::product(&rho, 2).unwrap().operator())
                < 1e-15
        );
        let g = ghz_state::<f64>();
        let g2 = marginal(&g, 2).unwrap();
        assert!(
            g2.operator()
                .max_abs_diff(&HermitianOperator::from_real_diagonal(&[
                    0.5, 0.0, 0.0, 0.5
                ]))
                < 1e-15
        );
        assert_eq!(marginal(&g, 3).unwrap(), g);
        assert!(marginal(&g, 0).is_err() && marginal(&g, 4).is_err());
        let single = marginal(&g, 1).unwrap();
        assert!(
            single
                .operator()
                .max_abs_diff(&HermitianOperator::identity(2).scale(0.5))
                < 1e-15
        );
        assert!((g.density().purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn marginal_subset_choice_is_immaterial_for_symmetric_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let shape = SubsystemShape::new(2, 3).unwrap();
        let st =
            symmetrize(&MultiSystemState::new(shape, random_mixed::<f64, _>(8, &mut rng)).unwrap())
                .unwrap();
        let first = st.reduced(&[0, 1]).unwrap();
        for keep in [[0, 2], [1, 2]] {
            assert!(
                st.reduced(&keep)
                    .unwrap()
                    .operator()
                    .max_abs_diff(first.operator())
                    <= 1e-10
            );
        }
    }

    #[test]
    fn shortcut_examples() {
        assert_eq!(
            pure_marginal_shortcut(&ghz_state::<f64>(), 1),
            Some(ExtensionVerdict::Infeasible)
        );
        let zero = DensityOperator::<f64>::basis(2, 0).unwrap();
        assert_eq!(
            pure_marginal_shortcut(&MultiSystemState::product(&zero, 3).unwrap(), 1),
            None
        );
        let mixed = MultiSystemState::product(&bloch(0.0, 0.0, 0.5), 2).unwrap();
        assert_eq!(pure_marginal_shortcut(&mixed, 1), None);
    }

    #[test]
    fn ghz_is_not_extendible() {
        let r = extension_feasible(&ghz_state::<f64>(), 1, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, ExtensionVerdict::Infeasible);
        assert_eq!(r.reason, Some(InfeasibilityReason::PureMarginal));
        assert!(r.certificate.is_none());
    }

    #[test]
    fn product_state_extends() {
        let rho = bloch(0.2, -0.3, 0.4);
        let st = MultiSystemState::product(&rho, 2).unwrap();
        let r = extension_feasible(&st, 1, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, ExtensionVerdict::Feasible);
        let cert = r.certificate.unwrap();
        assert_eq!(cert.count(), 3);
        assert!(is_symmetric(&cert, 1e-7));
        assert!(
            marginal(&cert, 2)
                .unwrap()
                .operator()
                .max_abs_diff(st.operator())
                <= 1e-7
        );
    }

    #[test]
    fn pure_product_extends_to_its_power() {
        let zero = DensityOperator::<f64>::basis(2, 0).unwrap();
        let st = MultiSystemState::product(&zero, 3).unwrap();
        let r = extension_feasible(&st, 1, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, ExtensionVerdict::Feasible);
        let four = MultiSystemState::product(&zero, 4).unwrap();
        assert!(
            r.certificate
                .unwrap()
                .operator()
                .max_abs_diff(four.operator())
                <= 1e-6
        );
    }

    #[test]
    fn non_symmetric_input_is_rejected() {
        let st = pair(&bloch(0.0, 0.0, 0.5), &bloch(0.5, 0.0, 0.0));
        let r = extension_feasible(&st, 1, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert_eq!(r.reason, Some(InfeasibilityReason::NotSymmetric));
    }

    #[test]
    fn oversize_extension_is_a_resource_error() {
        let st = MultiSystemState::product(&bloch(0.0, 0.0, 0.5), 3).unwrap();
        assert!(matches!(
            extension_feasible(&st, 10, 10, 1e-7),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn antisymmetric_two_qubit_state_stalls() {
        // Werner state with singlet weight 0.9: swap-invariant but not
        // symmetrically extendible. Mixed, so only the projection loop applies.
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [
            Complex::new(0.0, 0.0),
            Complex::new(r2, 0.0),
            Complex::new(-r2, 0.0),
            Complex::new(0.0, 0.0),
        ];
        let singlet = DensityOperator::pure(&psi).unwrap();
        let noisy = singlet
            .as_operator()
            .scale(0.9)
            .add(&HermitianOperator::identity(4).scale(0.025));
        let shape = SubsystemShape::new(2, 2).unwrap();
        let st = MultiSystemState::new(shape, DensityOperator::new(noisy).unwrap()).unwrap();
        let r = extension_feasible(&st, 1, DEFAULT_MAX_ITER, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, ExtensionVerdict::Infeasible);
        assert_eq!(r.reason, Some(InfeasibilityReason::Stalled));
    }
}
