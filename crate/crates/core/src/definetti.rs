//! Discrete de Finetti mixtures, the sequence statistics they induce under
//! tensor-power measurements, reconstruction of `rho^(N)` from those
//! statistics, and the negative-eigenvalue witness.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exchange::MultiSystemState;
use crate::opalg::{
    all_permutations, tensor_power, ComplexMatrix, HermitianOperator, SubsystemShape, MAX_DIM,
};
use crate::scalar::Real;
use crate::states_povm::{clip_probabilities, DensityOperator, DualFrame, Ensemble, Povm};

/// Discrete mixing measure over single-system density operators.
pub type MixingEnsemble<T> = Ensemble<T>;

/// Largest sequence table `induced_sequence_distribution` will enumerate.
pub const MAX_TABLE: usize = 1 << 20;

/// `sum_i w_i rho_i^(x)n`.
pub fn mix_product_states<T: Real>(
    ens: &MixingEnsemble<T>,
    n: usize,
) -> Result<MultiSystemState<T>> {
    let ops: Vec<HermitianOperator<T>> = ens
        .states()
        .iter()
        .map(|s| s.as_operator().clone())
        .collect();
    let op = mix_product_operators(ens.weights(), &ops, n)?;
    let shape = SubsystemShape::new(ens.dim(), n)?;
    MultiSystemState::new(shape, DensityOperator::new(op)?)
}

/// `sum_i w_i A_i^(x)n` for arbitrary Hermitian components, with no
/// positivity requirement on the result.
pub fn mix_product_operators<T: Real>(
    weights: &[T],
    components: &[HermitianOperator<T>],
    n: usize,
) -> Result<HermitianOperator<T>> {
    if weights.len() != components.len() || components.is_empty() {
        return Err(Error::Shape(format!(
            "{} weights for {} components",
            weights.len(),
            components.len()
        )));
    }
    let d = components[0].dim();
    if components.iter().any(|c| c.dim() != d) {
        return Err(Error::Shape("components differ in dimension".into()));
    }
    let shape = SubsystemShape::new(d, n).map_err(resource)?;
    if shape.total_dim() > MAX_DIM {
        return Err(Error::Resource(format!(
            "dimension {} exceeds {MAX_DIM}",
            shape.total_dim()
        )));
    }
    let mut op = HermitianOperator::zeros(shape.total_dim());
    for (&w, a) in weights.iter().zip(components) {
        op.add_scaled(&tensor_power(a, n)?, w);
    }
    Ok(op)
}

fn resource(e: Error) -> Error {
    match e {
        Error::Overflow(s) => Error::Resource(s),
        other => other,
    }
}

/// Joint outcome probabilities of `N` trials, lexicographic with trial 1
/// most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceDistribution<T> {
    outcomes: usize,
    n_trials: usize,
    probs: Vec<T>,
}

impl<T: Real> SequenceDistribution<T> {
    pub fn new(outcomes: usize, n_trials: usize, probs: Vec<T>) -> Result<Self> {
        let expected = table_size(outcomes, n_trials)?;
        if probs.len() != expected {
            return Err(Error::Shape(format!(
                "{} entries for {outcomes}^{n_trials} sequences",
                probs.len()
            )));
        }
        Ok(Self {
            outcomes,
            n_trials,
            probs,
        })
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn n_trials(&self) -> usize {
        self.n_trials
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn index_of(&self, seq: &[usize]) -> usize {
        seq.iter().fold(0, |acc, &a| acc * self.outcomes + a)
    }

    pub fn sequence_of(&self, mut index: usize) -> Vec<usize> {
        let mut seq = vec![0; self.n_trials];
        for slot in seq.iter_mut().rev() {
            *slot = index % self.outcomes;
            index /= self.outcomes;
        }
        seq
    }

    pub fn prob(&self, seq: &[usize]) -> T {
        self.probs[self.index_of(seq)]
    }

    /// Largest change of any entry under any permutation of the trials.
    pub fn exchangeability_residual(&self) -> T {
        let perms = all_permutations(self.n_trials);
        let mut worst = T::zero();
        let mut moved = vec![0; self.n_trials];
        for (i, &p) in self.probs.iter().enumerate() {
            let seq = self.sequence_of(i);
            for perm in &perms {
                for (k, &a) in seq.iter().enumerate() {
                    moved[perm[k]] = a;
                }
                worst = worst.max((self.prob(&moved) - p).abs());
            }
        }
        worst
    }

    /// Entrywise `a * self + (1 - a) * other`.
    pub fn mix(&self, other: &Self, a: T) -> Result<Self> {
        if (self.outcomes, self.n_trials) != (other.outcomes, other.n_trials) {
            return Err(Error::Shape("sequence tables differ in shape".into()));
        }
        let probs = self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(&p, &q)| a * p + (T::one() - a) * q)
            .collect();
        Ok(Self { probs, ..*self })
    }
}

fn table_size(outcomes: usize, n_trials: usize) -> Result<usize> {
    u32::try_from(n_trials)
        .ok()
        .and_then(|n| outcomes.checked_pow(n))
        .filter(|&s| s <= MAX_TABLE)
        .ok_or_else(|| {
            Error::Resource(format!(
                "{outcomes}^{n_trials} sequences exceed the table limit {MAX_TABLE}"
            ))
        })
}

/// `tr_1[(e (x) I) x]` on `d^k -> d^(k-1)` dimensional operators.
fn contract_first<T: Real>(x: &ComplexMatrix<T>, e: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let d = e.rows();
    let rest = x.rows() / d;
    ComplexMatrix::from_fn(rest, rest, |i, j| {
        let mut acc = Complex::zero();
        for a in 0..d {
            for b in 0..d {
                let eab = e[(a, b)];
                if !eab.is_zero() {
                    acc += eab * x[(b * rest + i, a * rest + j)];
                }
            }
        }
        acc
    })
}

fn fill_table<T: Real>(x: &ComplexMatrix<T>, povm: &Povm<T>, out: &mut Vec<T>) {
    for e in povm.elements() {
        let reduced = contract_first(x, e.matrix());
        if reduced.rows() == 1 {
            out.push(reduced[(0, 0)].re);
        } else {
            fill_table(&reduced, povm, out);
        }
    }
}

/// `p(a_1..a_N) = tr(rho^(N) E_a1 (x) ... (x) E_aN)`.
pub fn induced_sequence_distribution<T: Real>(
    state: &MultiSystemState<T>,
    povm: &Povm<T>,
) -> Result<SequenceDistribution<T>> {
    if povm.dim() != state.local_dim() {
        return Err(Error::Shape(format!(
            "POVM dimension {} vs local dimension {}",
            povm.dim(),
            state.local_dim()
        )));
    }
    let size = table_size(povm.len(), state.count())?;
    let mut raw = Vec::with_capacity(size);
    fill_table(state.operator().matrix(), povm, &mut raw);
    SequenceDistribution::new(povm.len(), state.count(), clip_probabilities(raw)?)
}

fn assemble<T: Real>(probs: &[T], k: usize, frame: &DualFrame<T>) -> HermitianOperator<T> {
    if k == 1 {
        return frame.combine(probs);
    }
    let block = probs.len() / frame.len();
    let mut out: Option<ComplexMatrix<T>> = None;
    for (a, dual) in frame.duals().iter().enumerate() {
        let chunk = &probs[a * block..(a + 1) * block];
        if chunk.iter().all(|p| p.is_zero()) {
            continue;
        }
        let term = dual.matrix().kron(assemble(chunk, k - 1, frame).matrix());
        out = Some(match out {
            None => term,
            Some(acc) => &acc + &term,
        });
    }
    let dim = frame.dim().pow(k as u32);
    HermitianOperator::symmetrized(out.unwrap_or_else(|| ComplexMatrix::zeros(dim, dim)))
}

/// `sum_a p(a) D_a1 (x) ... (x) D_aN` for an arbitrary table; no positivity check.
pub fn reconstruct_multisystem_operator<T: Real>(
    seq: &SequenceDistribution<T>,
    frame: &DualFrame<T>,
) -> Result<HermitianOperator<T>> {
    if seq.outcomes() != frame.len() {
        return Err(Error::Shape(format!(
            "table over {} outcomes, frame of {}",
            seq.outcomes(),
            frame.len()
        )));
    }
    let dim = SubsystemShape::new(frame.dim(), seq.n_trials()).map_err(resource)?;
    if dim.total_dim() > MAX_DIM {
        return Err(Error::Resource(format!(
            "dimension {} exceeds {MAX_DIM}",
            dim.total_dim()
        )));
    }
    Ok(assemble(seq.probs(), seq.n_trials(), frame))
}

/// Inverts [`induced_sequence_distribution`].
pub fn reconstruct_multisystem<T: Real>(
    seq: &SequenceDistribution<T>,
    frame: &DualFrame<T>,
) -> Result<MultiSystemState<T>> {
    let op = reconstruct_multisystem_operator(seq, frame)?;
    let shape = SubsystemShape::new(frame.dim(), seq.n_trials())?;
    MultiSystemState::new(shape, DensityOperator::new(op)?)
}

/// Binary measurement `{pi_tilde, pi}` built on the most negative eigenvector.
#[derive(Clone, Debug)]
pub struct Witness<T> {
    pub pi_tilde: HermitianOperator<T>,
    pub pi: HermitianOperator<T>,
    /// Magnitude of the negative eigenvalue.
    pub lambda: T,
}

/// Witness for a trace-one Hermitian operator with a negative eigenvalue.
pub fn witness_from_operator<T: Real>(a: &HermitianOperator<T>) -> Result<Witness<T>> {
    let tr = a.trace();
    if !((tr - T::one()).abs() <= T::tol(1e-9)) {
        return Err(Error::Trace { trace: tr.as_f64() });
    }
    let eig = a.eig();
    let min = eig.min_value();
    if !(min < -T::tol(1e-12)) {
        return Err(Error::NotAWitness {
            min_eigenvalue: min.as_f64(),
        });
    }
    let slack = T::epsilon() * T::lit(16.0) * eig.max_value().abs().max(T::one());
    let k = eig
        .values
        .iter()
        .position(|&l| l <= min + slack)
        .expect("minimum is attained");
    let psi = eig.vector(k);
    let pi_tilde = HermitianOperator::projector(&psi);
    let pi = HermitianOperator::identity(a.dim()).sub(&pi_tilde);
    Ok(Witness {
        pi_tilde,
        pi,
        lambda: -min,
    })
}

/// `tr(rho^(N) Pi^(x)N)` per requested even `N`, plus the first `N` above one.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport<T> {
    pub values: Vec<(usize, T)>,
    pub first_exceeding: Option<usize>,
}

/// Evaluates `sum_i w_i [tr(A_i Pi)]^N` for a discrete mixture of trace-one
/// Hermitian operators, some possibly nonphysical.
pub fn illegal_probability_growth<T: Real>(
    weights: &[T],
    components: &[HermitianOperator<T>],
    pi: &HermitianOperator<T>,
    n_list: &[usize],
) -> Result<GrowthReport<T>> {
    if weights.len() != components.len() || weights.is_empty() {
        return Err(Error::Shape(format!(
            "{} weights for {} components",
            weights.len(),
            components.len()
        )));
    }
    if let Some(&odd) = n_list.iter().find(|&&n| n % 2 == 1 || n == 0) {
        return Err(Error::Argument(format!(
            "N = {odd} is not a positive even number"
        )));
    }
    if components.iter().any(|a| a.dim() != pi.dim()) {
        return Err(Error::Shape("component and Pi dimensions differ".into()));
    }
    let single: Vec<T> = components.iter().map(|a| a.trace_product(pi)).collect();
    let values: Vec<(usize, T)> = n_list
        .iter()
        .map(|&n| {
            let v = weights
                .iter()
                .zip(&single)
                .map(|(&w, &t)| w * t.powi(n as i32))
                .sum();
            (n, v)
        })
        .collect();
    let first_exceeding = values.iter().find(|(_, v)| *v > T::one()).map(|&(n, _)| n);
    Ok(GrowthReport {
        values,
        first_exceeding,
    })
}

/// Builds the witness from the nonphysical component and tabulates growth.
#[derive(Clone, Debug)]
pub struct WitnessReport<T> {
    pub lambda: T,
    pub pi_op: HermitianOperator<T>,
    pub growth: Vec<(usize, T)>,
    pub first_exceeding: Option<usize>,
}

pub fn witness_report<T: Real>(
    weights: &[T],
    components: &[HermitianOperator<T>],
    nonphysical: usize,
    n_list: &[usize],
) -> Result<WitnessReport<T>> {
    let target = components
        .get(nonphysical)
        .ok_or_else(|| Error::Argument(format!("no component {nonphysical}")))?;
    let w = witness_from_operator(target)?;
    let g = illegal_probability_growth(weights, components, &w.pi, n_list)?;
    Ok(WitnessReport {
        lambda: w.lambda,
        pi_op: w.pi,
        growth: g.values,
        first_exceeding: g.first_exceeding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::{extension_feasible, is_symmetric, ExtensionVerdict, DEFAULT_TOL};
    use crate::opalg::{pauli, tensor, tensor_power};
    use crate::random::{random_mixed, random_qubit, random_weights};
    use crate::states_povm::{born, density_from_bloch, dual_frame, tetrahedron_povm, BlochVector};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn y_states() -> (DensityOperator<f64>, DensityOperator<f64>) {
        (
            density_from_bloch(BlochVector::new(0.0, 1.0, 0.0).unwrap()),
            density_from_bloch(BlochVector::new(0.0, -1.0, 0.0).unwrap()),
        )
    }

    fn real_counterexample(n: usize) -> MultiSystemState<f64> {
        let (p, m) = y_states();
        mix_product_states(&Ensemble::new(vec![0.5, 0.5], vec![p, m]).unwrap(), n).unwrap()
    }

    fn random_ensemble(rng: &mut ChaCha8Rng, k: usize) -> MixingEnsemble<f64> {
        let w = random_weights(k, rng);
        let states = (0..k).map(|_| random_qubit(rng)).collect();
        Ensemble::new(w, states).unwrap()
    }

    #[test]
    fn single_component_is_a_power() {
        let rho = density_from_bloch(BlochVector::new(0.1, 0.5, -0.3).unwrap());
        let ens = Ensemble::new(vec![1.0], vec![rho.clone()]).unwrap();
        let mixed = mix_product_states(&ens, 3).unwrap();
        let power = tensor_power(rho.as_operator(), 3).unwrap();
        assert!(mixed.operator().max_abs_diff(&power) < 1e-15);
    }

    #[test]
    fn y_mixture_cancels_odd_terms() {
        let st = real_counterexample(2);
        let [_, s2, _] = pauli::<f64>();
        let expect = HermitianOperator::identity(4)
            .add(&tensor(&s2, &s2).unwrap())
            .scale(0.25);
        assert!(st.operator().max_abs_diff(&expect) < 1e-15);
        assert!(st
            .operator()
            .matrix()
            .as_slice()
            .iter()
            .all(|z| z.im.abs() < 1e-15));
    }

    #[test]
    fn random_mixtures_are_symmetric_and_extendible() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..3 {
            let ens = random_ensemble(&mut rng, 3);
            let st = mix_product_states(&ens, 3).unwrap();
            assert!(is_symmetric(&st, 1e-12));
        }
        let ens = random_ensemble(&mut rng, 2);
        let st = mix_product_states(&ens, 2).unwrap();
        for m in [1, 2] {
            let r = extension_feasible(&st, m, 5000, DEFAULT_TOL).unwrap();
            assert_eq!(r.verdict, ExtensionVerdict::Feasible, "M = {m}");
        }
    }

    #[test]
    fn y_mixture_extends_by_two() {
        let st = real_counterexample(2);
        let r = extension_feasible(&st, 2, 5000, DEFAULT_TOL).unwrap();
        assert_eq!(r.verdict, ExtensionVerdict::Feasible);
        // explicit certificate checked by marginalization
        let four = real_counterexample(4);
        let marg = crate::exchange::marginal(&four, 2).unwrap();
        assert!(marg.operator().max_abs_diff(st.operator()) < 1e-15);
    }

    #[test]
    fn one_trial_reduces_to_born() {
        let povm = tetrahedron_povm::<f64>();
        let rho = density_from_bloch(BlochVector::new(0.2, 0.1, 0.4).unwrap());
        let seq =
            induced_sequence_distribution(&MultiSystemState::product(&rho, 1).unwrap(), &povm)
                .unwrap();
        let p = born(&rho, &povm).unwrap();
        for (a, b) in seq.probs().iter().zip(&p) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn product_states_give_product_tables() {
        let povm = tetrahedron_povm::<f64>();
        let rho = density_from_bloch(BlochVector::new(-0.3, 0.1, 0.4).unwrap());
        let p = born(&rho, &povm).unwrap();
        let seq =
            induced_sequence_distribution(&MultiSystemState::product(&rho, 2).unwrap(), &povm)
                .unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((seq.prob(&[a, b]) - p[a] * p[b]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn y_mixture_table_is_transpose_invariant() {
        let seq =
            induced_sequence_distribution(&real_counterexample(2), &tetrahedron_povm()).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((seq.prob(&[a, b]) - seq.prob(&[b, a])).abs() < 1e-15);
            }
        }
        assert!(seq.exchangeability_residual() < 1e-15);
    }

    #[test]
    fn round_trips() {
        let povm = tetrahedron_povm::<f64>();
        let frame = dual_frame(&povm).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_qubit::<f64, _>(&mut rng);
        for st in [
            MultiSystemState::product(&rho, 2).unwrap(),
            crate::exchange::ghz_state(),
            real_counterexample(2),
        ] {
            let seq = induced_sequence_distribution(&st, &povm).unwrap();
            let back = reconstruct_multisystem(&seq, &frame).unwrap();
            assert!(back.operator().max_abs_diff(st.operator()) <= 1e-8);
        }
    }

    #[test]
    fn reconstruction_is_linear() {
        let povm = tetrahedron_povm::<f64>();
        let frame = dual_frame(&povm).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let shape = SubsystemShape::new(2, 2).unwrap();
        let a = MultiSystemState::new(shape, random_mixed(4, &mut rng)).unwrap();
        let b = MultiSystemState::new(shape, random_mixed(4, &mut rng)).unwrap();
        let pa = induced_sequence_distribution(&a, &povm).unwrap();
        let pb = induced_sequence_distribution(&b, &povm).unwrap();
        let lam = 0.3;
        let lhs = reconstruct_multisystem_operator(&pa.mix(&pb, lam).unwrap(), &frame).unwrap();
        let rhs = reconstruct_multisystem_operator(&pa, &frame)
            .unwrap()
            .scale(lam)
            .add(
                &reconstruct_multisystem_operator(&pb, &frame)
                    .unwrap()
                    .scale(1.0 - lam),
            );
        assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn table_shape_checks() {
        assert!(SequenceDistribution::<f64>::new(4, 2, vec![0.0; 15]).is_err());
        assert!(matches!(
            SequenceDistribution::<f64>::new(4, 11, vec![]),
            Err(Error::Resource(_))
        ));
        let frame = dual_frame(&tetrahedron_povm::<f64>()).unwrap();
        let wrong = SequenceDistribution::new(9, 1, vec![1.0 / 9.0; 9]).unwrap();
        assert!(matches!(
            reconstruct_multisystem(&wrong, &frame),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn witness_examples() {
        let a = HermitianOperator::<f64>::from_real_diagonal(&[1.25, -0.25]);
        let w = witness_from_operator(&a).unwrap();
        assert!((w.lambda - 0.25).abs() < 1e-15);
        assert!((a.trace_product(&w.pi) - 1.25).abs() < 1e-15);

        let frame = dual_frame(&tetrahedron_povm::<f64>()).unwrap();
        let aq = crate::states_povm::reconstruct_operator(&[0.75, 0.125, 0.0625, 0.0625], &frame)
            .unwrap();
        let w = witness_from_operator(&aq).unwrap();
        assert!(w.lambda > 0.0);
        assert!((aq.trace_product(&w.pi) - (1.0 + w.lambda)).abs() < 1e-9);

        let rho = density_from_bloch(BlochVector::new(0.0, 0.0, 0.5).unwrap());
        assert!(matches!(
            witness_from_operator(rho.as_operator()),
            Err(Error::NotAWitness { .. })
        ));
        assert!(matches!(
            witness_from_operator(&HermitianOperator::from_real_diagonal(&[2.0, -0.5])),
            Err(Error::Trace { .. })
        ));
    }

    #[test]
    fn growth_examples() {
        let aq = HermitianOperator::from_real_diagonal(&[1.25, -0.25]);
        let pi = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
        let r =
            illegal_probability_growth(&[1.0], std::slice::from_ref(&aq), &pi, &[2, 4, 6]).unwrap();
        for &(n, v) in &r.values {
            assert!((v - 1.25f64.powi(n as i32)).abs() < 1e-12);
        }
        assert_eq!(r.first_exceeding, Some(2));

        let mixed = HermitianOperator::identity(2).scale(0.5);
        let ns: Vec<usize> = (1..=15).map(|k| 2 * k).collect();
        let r = illegal_probability_growth(&[0.1, 0.9], &[aq, mixed.clone()], &pi, &ns).unwrap();
        // scalar oracle
        let first = ns
            .iter()
            .copied()
            .find(|&n| 0.1 * 1.25f64.powi(n as i32) + 0.9 * 0.5f64.powi(n as i32) > 1.0);
        assert_eq!(r.first_exceeding, first);
        assert_eq!(first, Some(12));

        let valid = illegal_probability_growth(&[1.0], &[mixed], &pi, &ns).unwrap();
        assert!(valid.values.iter().all(|&(_, v)| v <= 1.0));
        assert!(valid.first_exceeding.is_none());

        assert!(matches!(
            illegal_probability_growth(&[1.0], std::slice::from_ref(&pi), &pi, &[3]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn growth_matches_operator_expectation() {
        let aq = HermitianOperator::<f64>::from_real_diagonal(&[1.25, -0.25]);
        let rho = density_from_bloch(BlochVector::new(0.3, -0.2, 0.1).unwrap());
        let w = witness_from_operator(&aq).unwrap();
        let ops = [aq, rho.into_operator()];
        let weights = [0.1, 0.9];
        let r = illegal_probability_growth(&weights, &ops, &w.pi, &[2, 4, 6]).unwrap();
        for &(n, v) in &r.values {
            let mut mix = HermitianOperator::zeros(1 << n);
            for (&wt, a) in weights.iter().zip(&ops) {
                mix.add_scaled(&tensor_power(a, n).unwrap(), wt);
            }
            let direct = mix.trace_product(&tensor_power(&w.pi, n).unwrap());
            assert!((direct - v).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn witness_is_sound(x in 0.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, stretch in 1.05f64..3.0) {
            // Bloch-like operator with |S| > 1 has eigenvalue (1 - |S|)/2 < 0.
            let norm = (x * x + y * y + z * z).sqrt().max(1e-3);
            let s = [x, y, z].map(|c| c / norm * stretch);
            let [s1, s2, s3] = pauli::<f64>();
            let mut a = HermitianOperator::identity(2).scale(0.5);
            a.add_scaled(&s1, s[0] / 2.0);
            a.add_scaled(&s2, s[1] / 2.0);
            a.add_scaled(&s3, s[2] / 2.0);
            let w = witness_from_operator(&a).unwrap();
            prop_assert!((a.trace_product(&w.pi) - (1.0 + w.lambda)).abs() <= 1e-9);
        }

        #[test]
        fn growth_dominates(w in 1e-3f64..0.5, lambda in 0.05f64..1.0) {
            let aq = HermitianOperator::from_real_diagonal(&[1.0 + lambda, -lambda]);
            let pi = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
            let rest = HermitianOperator::from_real_diagonal(&[0.3, 0.7]);
            let eps = lambda / 10.0;
            let bound = 2 * ((1.0 / w).ln() / (1.0 + lambda - eps).ln()).ceil() as usize;
            let ns: Vec<usize> = (1..=bound.div_ceil(2).max(1)).map(|k| 2 * k).collect();
            let r = illegal_probability_growth(&[w, 1.0 - w], &[aq, rest], &pi, &ns).unwrap();
            prop_assert!(r.first_exceeding.is_some());
        }

        #[test]
        fn de_finetti_round_trip(seed in 0u64..1000, k in 1usize..=4, n in 2usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ens = random_ensemble(&mut rng, k);
            let povm = tetrahedron_povm::<f64>();
            let frame = dual_frame(&povm).unwrap();
            let st = mix_product_states(&ens, n).unwrap();
            let seq = induced_sequence_distribution(&st, &povm).unwrap();
            prop_assert!(seq.exchangeability_residual() <= 1e-10);
            let back = reconstruct_multisystem(&seq, &frame).unwrap();
            prop_assert!(back.operator().max_abs_diff(st.operator()) <= 1e-8);
        }
    }
}
