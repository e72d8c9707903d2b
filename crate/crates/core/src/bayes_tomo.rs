//! Bayesian state tomography over a discrete prior on density operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::definetti::mix_product_states;
use crate::error::{Error, Result};
use crate::exchange::MultiSystemState;
use crate::opalg::HermitianOperator;
use crate::scalar::Real;
use crate::states_povm::{
    born, check_weights, density_from_bloch, BlochVector, DensityOperator, Ensemble, Povm,
};

/// Outcome counts from `total` i.i.d. trials of one POVM.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub povm_id: String,
    pub counts: Vec<u64>,
    pub total: u64,
    pub seed: u64,
}

impl MeasurementRecord {
    pub fn new(povm_id: impl Into<String>, counts: Vec<u64>, seed: u64) -> Self {
        let total = counts.iter().sum();
        Self {
            povm_id: povm_id.into(),
            counts,
            total,
            seed,
        }
    }

    /// Pools two records of the same POVM. The merged seed is `self.seed`.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.povm_id != other.povm_id || self.counts.len() != other.counts.len() {
            return Err(Error::Argument("records come from different POVMs".into()));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::new(self.povm_id.clone(), counts, self.seed))
    }
}

/// Inverse-CDF sampler over Born probabilities, seeded per record.
pub struct OutcomeSampler {
    rng: ChaCha8Rng,
    cdf: Vec<f64>,
}

impl OutcomeSampler {
    pub fn new<T: Real>(rho: &DensityOperator<T>, povm: &Povm<T>, seed: u64) -> Result<Self> {
        let p = born(rho, povm)?;
        let mut acc = 0.0;
        let cdf = p
            .iter()
            .map(|&x| {
                acc += x.as_f64();
                acc
            })
            .collect();
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            cdf,
        })
    }

    /// Independent stream `stream` of the same seed.
    pub fn with_stream(mut self, stream: u64) -> Self {
        self.rng.set_stream(stream);
        self
    }

    pub fn sample(&mut self) -> usize {
        let u: f64 = self.rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        self.cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cdf.len() - 1)
    }

    pub fn sample_into(&mut self, counts: &mut [u64], k: u64) {
        for _ in 0..k {
            counts[self.sample()] += 1;
        }
    }
}

/// `k` i.i.d. outcomes of `povm` on `rho_true`; deterministic in `seed`.
pub fn simulate_record<T: Real>(
    rho_true: &DensityOperator<T>,
    povm: &Povm<T>,
    k: u64,
    seed: u64,
) -> Result<MeasurementRecord> {
    let mut sampler = OutcomeSampler::new(rho_true, povm, seed)?;
    let mut counts = vec![0; povm.len()];
    sampler.sample_into(&mut counts, k);
    Ok(MeasurementRecord::new(povm.label(), counts, seed))
}

fn check_record<T: Real>(record: &MeasurementRecord, povm: &Povm<T>) -> Result<()> {
    if record.counts.len() != povm.len() {
        return Err(Error::Shape(format!(
            "record has {} outcomes, POVM {}",
            record.counts.len(),
            povm.len()
        )));
    }
    if record.povm_id != povm.label() {
        return Err(Error::Argument(format!(
            "record for POVM '{}' applied to '{}'",
            record.povm_id,
            povm.label()
        )));
    }
    Ok(())
}

fn log_likelihood_from_probs<T: Real>(counts: &[u64], probs: &[T]) -> T {
    let mut acc = T::zero();
    for (&c, &p) in counts.iter().zip(probs) {
        if c == 0 {
            continue;
        }
        if !(p > T::zero()) {
            return T::neg_infinity();
        }
        acc += T::from_u64(c).unwrap() * p.ln();
    }
    acc
}

/// `sum_a n_a log p_a(rho)`; the multinomial coefficient is omitted.
pub fn log_likelihood<T: Real>(
    record: &MeasurementRecord,
    rho: &DensityOperator<T>,
    povm: &Povm<T>,
) -> Result<T> {
    check_record(record, povm)?;
    Ok(log_likelihood_from_probs(&record.counts, &born(rho, povm)?))
}

/// Discrete prior (or posterior) over density operators.
#[derive(Clone, Debug)]
pub struct PriorGrid<T> {
    points: Vec<DensityOperator<T>>,
    weights: Vec<T>,
}

impl<T: Real> PriorGrid<T> {
    pub fn new(points: Vec<DensityOperator<T>>, weights: Vec<T>) -> Result<Self> {
        check_weights(&weights)?;
        if points.len() != weights.len() {
            return Err(Error::Shape(format!(
                "{} points, {} weights",
                points.len(),
                weights.len()
            )));
        }
        let d = points[0].dim();
        if points.iter().any(|p| p.dim() != d) {
            return Err(Error::Shape("grid points differ in dimension".into()));
        }
        Ok(Self { points, weights })
    }

    pub fn uniform(points: Vec<DensityOperator<T>>) -> Result<Self> {
        let n = T::from_usize(points.len().max(1)).unwrap();
        let w = vec![T::one() / n; points.len()];
        Self::new(points, w)
    }

    /// Weights `1 - r^2 + 0.01`, where `r` is the generalized Bloch radius,
    /// favoring mixed states while keeping every weight positive.
    pub fn mixed_biased(points: Vec<DensityOperator<T>>) -> Result<Self> {
        let raw: Vec<T> = points
            .iter()
            .map(|p| {
                let d = T::from_usize(p.dim()).unwrap();
                let r2 = (d * p.purity() - T::one()) / (d - T::one());
                (T::one() - r2).max(T::zero()) + T::lit(0.01)
            })
            .collect();
        let total: T = raw.iter().copied().sum();
        Self::new(points, raw.into_iter().map(|w| w / total).collect())
    }

    pub fn points(&self) -> &[DensityOperator<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every weight strictly positive.
    pub fn is_open_minded(&self) -> bool {
        self.weights.iter().all(|&w| w > T::zero())
    }

    /// Posterior-mean single-system state.
    pub fn mean(&self) -> DensityOperator<T> {
        let mut op = HermitianOperator::zeros(self.points[0].dim());
        for (&w, p) in self.weights.iter().zip(&self.points) {
            op.add_scaled(p.as_operator(), w);
        }
        DensityOperator::new(op).expect("convex combination of states")
    }

    pub fn as_ensemble(&self) -> Ensemble<T> {
        Ensemble::new(self.weights.clone(), self.points.clone()).expect("validated grid")
    }

    /// `|sum w - 1|`.
    pub fn normalization_error(&self) -> T {
        (self.weights.iter().copied().sum::<T>() - T::one()).abs()
    }

    fn reweighted(&self, log_likelihoods: &[T]) -> Result<Self> {
        let logs: Vec<T> = self
            .weights
            .iter()
            .zip(log_likelihoods)
            .map(|(&w, &ll)| {
                if w > T::zero() {
                    w.ln() + ll
                } else {
                    T::neg_infinity()
                }
            })
            .collect();
        let top = logs.iter().copied().fold(T::neg_infinity(), T::max);
        if !top.is_finite() {
            return Err(Error::DegeneratePosterior);
        }
        let raw: Vec<T> = logs.iter().map(|&l| (l - top).exp()).collect();
        let total: T = raw.iter().copied().sum();
        Ok(Self {
            points: self.points.clone(),
            weights: raw.into_iter().map(|w| w / total).collect(),
        })
    }
}

/// `P(rho | D) = P(D | rho) P(rho) / P(D)`, computed in log space.
pub fn posterior_update<T: Real>(
    prior: &PriorGrid<T>,
    record: &MeasurementRecord,
    povm: &Povm<T>,
) -> Result<PriorGrid<T>> {
    check_record(record, povm)?;
    let lls = prior
        .points
        .iter()
        .map(|p| Ok(log_likelihood_from_probs(&record.counts, &born(p, povm)?)))
        .collect::<Result<Vec<T>>>()?;
    prior.reweighted(&lls)
}

/// `sum_i P(rho_i | D) rho_i^(x)n`.
pub fn predictive_state<T: Real>(
    posterior: &PriorGrid<T>,
    n: usize,
) -> Result<MultiSystemState<T>> {
    mix_product_states(&posterior.as_ensemble(), n)
}

/// Points of the default qubit grid: the center plus shells at `radii`,
/// each carrying a share of directions proportional to `r^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radii: Vec<f64>,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            radii: vec![0.25, 0.5, 0.75, 1.0],
            points: 200,
        }
    }
}

/// Fibonacci lattice on the unit sphere including both poles.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    if n == 1 {
        return vec![[0.0, 0.0, 1.0]];
    }
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * i as f64 / (n - 1) as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Bloch-ball grid described by `spec`.
pub fn bloch_ball_grid<T: Real>(spec: &GridSpec) -> Result<Vec<DensityOperator<T>>> {
    if spec.radii.is_empty() || spec.points <= spec.radii.len() {
        return Err(Error::Argument(format!(
            "{} points cannot cover {} shells plus the center",
            spec.points,
            spec.radii.len()
        )));
    }
    if spec.radii.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::Argument("shell radii must lie in (0, 1]".into()));
    }
    let budget = spec.points - 1;
    let total_r2: f64 = spec.radii.iter().map(|r| r * r).sum();
    // largest-remainder apportionment, at least one direction per shell
    let quotas: Vec<f64> = spec
        .radii
        .iter()
        .map(|r| budget as f64 * r * r / total_r2)
        .collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q.floor() as usize).max(1)).collect();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| {
        (quotas[b] - quotas[b].floor())
            .partial_cmp(&(quotas[a] - quotas[a].floor()))
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut assigned: usize = counts.iter().sum();
    for &i in order.iter().cycle() {
        if assigned == budget {
            break;
        }
        if assigned < budget {
            counts[i] += 1;
            assigned += 1;
        } else if counts[i] > 1 {
            counts[i] -= 1;
            assigned -= 1;
        }
    }
    let mut out = vec![DensityOperator::maximally_mixed(2)];
    for (&r, &c) in spec.radii.iter().zip(&counts) {
        for n in fibonacci_sphere(c) {
            let b = BlochVector::new(T::lit(r * n[0]), T::lit(r * n[1]), T::lit(r * n[2]))?;
            out.push(density_from_bloch(b));
        }
    }
    Ok(out)
}

/// Trace distances between the two posterior means and the truth after `k` trials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub k: u64,
    pub dist_ab: f64,
    pub dist_a_true: f64,
    pub dist_b_true: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub rows: Vec<ConvergenceRow>,
    /// Largest `|sum w - 1|` over every posterior computed.
    pub max_normalization_error: f64,
    pub final_counts: Vec<u64>,
}

/// Trace-distance radius defining a prior's support near the true state.
pub const SUPPORT_RADIUS: f64 = 0.05;
/// Minimum prior weight that counts as support.
pub const SUPPORT_WEIGHT: f64 = 1e-6;

fn check_support<T: Real>(
    prior: &PriorGrid<T>,
    rho: &DensityOperator<T>,
    name: &str,
) -> Result<()> {
    let ok = prior.points.iter().zip(&prior.weights).any(|(p, &w)| {
        w >= T::lit(SUPPORT_WEIGHT) && p.trace_distance(rho) <= T::lit(SUPPORT_RADIUS)
    });
    if ok {
        Ok(())
    } else {
        Err(Error::PriorSupport(format!(
            "{name} puts less than {SUPPORT_WEIGHT:e} weight within trace distance {SUPPORT_RADIUS} of the true state"
        )))
    }
}

/// Updates two priors on one shared record and reports how their posterior
/// means approach each other and the truth.
pub fn convergence_experiment<T: Real>(
    prior_a: &PriorGrid<T>,
    prior_b: &PriorGrid<T>,
    rho_true: &DensityOperator<T>,
    povm: &Povm<T>,
    k_schedule: &[u64],
    seed: u64,
) -> Result<ConvergenceTrace> {
    check_support(prior_a, rho_true, "prior A")?;
    check_support(prior_b, rho_true, "prior B")?;
    if k_schedule.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Argument("K schedule must be nondecreasing".into()));
    }
    let log_probs = |prior: &PriorGrid<T>| {
        prior
            .points
            .iter()
            .map(|p| born(p, povm))
            .collect::<Result<Vec<Vec<T>>>>()
    };
    let probs_a = log_probs(prior_a)?;
    let probs_b = log_probs(prior_b)?;
    let mut sampler = OutcomeSampler::new(rho_true, povm, seed)?;
    let mut counts = vec![0u64; povm.len()];
    let mut drawn = 0u64;
    let mut rows = Vec::with_capacity(k_schedule.len());
    let mut worst_norm = T::zero();
    for &k in k_schedule {
        sampler.sample_into(&mut counts, k - drawn);
        drawn = k;
        let post = |prior: &PriorGrid<T>, probs: &[Vec<T>]| {
            let lls: Vec<T> = probs
                .iter()
                .map(|p| log_likelihood_from_probs(&counts, p))
                .collect();
            prior.reweighted(&lls)
        };
        let pa = post(prior_a, &probs_a)?;
        let pb = post(prior_b, &probs_b)?;
        worst_norm = worst_norm
            .max(pa.normalization_error())
            .max(pb.normalization_error());
        let (ma, mb) = (pa.mean(), pb.mean());
        rows.push(ConvergenceRow {
            k,
            dist_ab: ma.trace_distance(&mb).as_f64(),
            dist_a_true: ma.trace_distance(rho_true).as_f64(),
            dist_b_true: mb.trace_distance(rho_true).as_f64(),
        });
    }
    Ok(ConvergenceTrace {
        rows,
        max_normalization_error: worst_norm.as_f64(),
        final_counts: counts,
    })
}
