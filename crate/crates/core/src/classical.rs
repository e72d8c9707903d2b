//! Classical exchangeability: i.i.d. and symmetric tables, exact extension
//! feasibility, and the finite urn representation for binary variables.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Field;

/// Largest joint table (in assignments) that will be enumerated.
pub const MAX_TABLE: usize = 1 << 20;

fn tolerance<F: Field>() -> F {
    if F::is_exact() {
        F::zero()
    } else {
        F::from_f64_value(1e-12).expect("finite literal")
    }
}

fn check_probabilities<F: Field>(probs: &[F], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::Shape(format!("empty {what}")));
    }
    if let Some(bad) = probs.iter().find(|p| p.is_negative()) {
        return Err(Error::Argument(format!("{what} has negative entry {bad}")));
    }
    let sum = probs.iter().fold(F::zero(), |acc, p| acc + p.clone());
    if (sum.clone() - F::one()).abs() > tolerance() {
        return Err(Error::Normalization {
            sum: sum.to_f64_value(),
        });
    }
    Ok(())
}

fn table_size(arity: usize, n: usize) -> Result<usize> {
    u32::try_from(n)
        .ok()
        .and_then(|n| arity.checked_pow(n))
        .filter(|&s| s <= MAX_TABLE)
        .ok_or_else(|| Error::Resource(format!("{arity}^{n} assignments exceed {MAX_TABLE}")))
}

fn digits(mut index: usize, arity: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = index % arity;
        index /= arity;
    }
    out
}

fn index_of(assignment: &[usize], arity: usize) -> usize {
    assignment.iter().fold(0, |acc, &x| acc * arity + x)
}

fn occupation(assignment: &[usize], arity: usize) -> Vec<usize> {
    let mut counts = vec![0; arity];
    for &x in assignment {
        counts[x] += 1;
    }
    counts
}

/// Point of the probability simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint<F> {
    p: Vec<F>,
}

impl<F: Field> SimplexPoint<F> {
    pub fn new(p: Vec<F>) -> Result<Self> {
        check_probabilities(&p, "simplex point")?;
        Ok(Self { p })
    }

    pub fn probs(&self) -> &[F] {
        &self.p
    }

    pub fn arity(&self) -> usize {
        self.p.len()
    }
}

/// Probability table over `arity^n_vars` assignments, first variable most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution<F> {
    n_vars: usize,
    arity: usize,
    probs: Vec<F>,
}

impl<F: Field> JointDistribution<F> {
    pub fn new(n_vars: usize, arity: usize, probs: Vec<F>) -> Result<Self> {
        if arity < 2 || n_vars < 1 {
            return Err(Error::Argument(format!(
                "need at least one variable with two outcomes, got n={n_vars}, k={arity}"
            )));
        }
        let size = table_size(arity, n_vars)?;
        if probs.len() != size {
            return Err(Error::Shape(format!(
                "expected {size} entries, got {}",
                probs.len()
            )));
        }
        check_probabilities(&probs, "joint distribution")?;
        Ok(Self {
            n_vars,
            arity,
            probs,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn prob(&self, assignment: &[usize]) -> &F {
        &self.probs[index_of(assignment, self.arity)]
    }

    /// Distribution of the first `keep` variables.
    pub fn marginal(&self, keep: usize) -> Result<Self> {
        if keep == 0 || keep > self.n_vars {
            return Err(Error::Argument(format!(
                "cannot keep {keep} of {} variables",
                self.n_vars
            )));
        }
        let stride = self.arity.pow((self.n_vars - keep) as u32);
        let probs = self
            .probs
            .chunks(stride)
            .map(|c| c.iter().fold(F::zero(), |a, p| a + p.clone()))
            .collect();
        Ok(Self {
            n_vars: keep,
            arity: self.arity,
            probs,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> F {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a.clone() - b.clone()).abs())
            .fold(F::zero(), |m, x| if x > m { x } else { m })
    }
}

/// `p(x_1..x_n) = p_{x_1} ... p_{x_n}`.
pub fn iid_joint<F: Field>(p: &SimplexPoint<F>, n: usize) -> Result<JointDistribution<F>> {
    let k = p.arity();
    let size = table_size(k, n)?;
    let probs = (0..size)
        .map(|i| {
            digits(i, k, n)
                .into_iter()
                .fold(F::one(), |acc, x| acc * p.p[x].clone())
        })
        .collect();
    JointDistribution::new(n, k, probs)
}

/// Finite mixture of i.i.d. tables.
pub fn mixture_of_iid<F: Field>(
    weights: &[F],
    points: &[SimplexPoint<F>],
    n: usize,
) -> Result<JointDistribution<F>> {
    check_probabilities(weights, "mixture weights")?;
    if weights.len() != points.len() {
        return Err(Error::Shape(format!(
            "{} weights, {} points",
            weights.len(),
            points.len()
        )));
    }
    let k = points[0].arity();
    if points.iter().any(|p| p.arity() != k) {
        return Err(Error::Shape("simplex points differ in arity".into()));
    }
    let mut probs = vec![F::zero(); table_size(k, n)?];
    for (w, p) in weights.iter().zip(points) {
        for (acc, x) in probs.iter_mut().zip(iid_joint(p, n)?.probs) {
            *acc += w.clone() * x;
        }
    }
    JointDistribution::new(n, k, probs)
}

/// First pair of assignments related by an adjacent transposition whose
/// probabilities differ by more than `tol`.
pub fn asymmetry_witness<F: Field>(
    j: &JointDistribution<F>,
    tol: &F,
) -> Option<(Vec<usize>, Vec<usize>)> {
    for idx in 0..j.probs.len() {
        let x = digits(idx, j.arity, j.n_vars);
        for s in 0..j.n_vars.saturating_sub(1) {
            if x[s] == x[s + 1] {
                continue;
            }
            let mut y = x.clone();
            y.swap(s, s + 1);
            let other = &j.probs[index_of(&y, j.arity)];
            if (j.probs[idx].clone() - other.clone()).abs() > *tol {
                return Some((x, y));
            }
        }
    }
    None
}

/// Invariance under every adjacent transposition of arguments within `tol`.
pub fn is_symmetric_dist<F: Field>(j: &JointDistribution<F>, tol: &F) -> bool {
    asymmetry_witness(j, tol).is_none()
}

/// Occupation type of a symmetric table, shown as its sorted representative
/// assignment (`q011` is the per-assignment mass of one 0 and two 1s).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitLabel(pub Vec<usize>);

impl fmt::Display for OrbitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q")?;
        let sep = if self.0.iter().any(|&x| x > 9) {
            ","
        } else {
            ""
        };
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(sep))
    }
}

/// `sum coeff * q = rhs` over orbit masses.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFact<F> {
    pub terms: Vec<(OrbitLabel, F)>,
    pub rhs: F,
}

impl<F: Field> LinearFact<F> {
    pub fn single(label: OrbitLabel, value: F) -> Self {
        Self {
            terms: vec![(label, F::one())],
            rhs: value,
        }
    }
}

impl<F: Field> fmt::Display for LinearFact<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (label, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.is_one() {
                write!(f, "{label}")?;
            } else {
                write!(f, "{c}*{label}")?;
            }
        }
        write!(f, " = {}", self.rhs)
    }
}

/// Two facts that no nonnegative orbit masses satisfy together.
#[derive(Clone, Debug, PartialEq)]
pub struct Contradiction<F> {
    pub derived: LinearFact<F>,
    pub violated: LinearFact<F>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalVerdict {
    Feasible,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClassicalCertificate<F> {
    /// Symmetric table on `n + extra_m` variables whose marginal is the input.
    Extension(JointDistribution<F>),
    /// The input itself is not symmetric.
    Asymmetric {
        assignment: Vec<usize>,
        swapped: Vec<usize>,
    },
    /// `y` with `y^T A <= 0` and `y^T b > 0` for the marginal system `A q = b`,
    /// plus the forced-value trail when propagation alone reaches a contradiction.
    Farkas {
        multipliers: Vec<F>,
        trail: Vec<LinearFact<F>>,
        contradiction: Option<Contradiction<F>>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalExtension<F> {
    pub verdict: ClassicalVerdict,
    pub certificate: ClassicalCertificate<F>,
}

/// Nondecreasing assignments of length `len` over `0..arity`, in lexicographic order.
fn orbit_representatives(arity: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; len];
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..len).rev().find(|&i| cur[i] + 1 < arity) else {
            return out;
        };
        let v = cur[pos] + 1;
        for slot in &mut cur[pos..] {
            *slot = v;
        }
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

struct MarginalSystem<F> {
    labels: Vec<OrbitLabel>,
    occupations: Vec<Vec<usize>>,
    rows: Vec<Vec<F>>,
    rhs: Vec<F>,
}

impl<F: Field> MarginalSystem<F> {
    fn build(j: &JointDistribution<F>, extra_m: usize) -> Self {
        let k = j.arity;
        let big = orbit_representatives(k, j.n_vars + extra_m);
        let occupations: Vec<Vec<usize>> = big.iter().map(|r| occupation(r, k)).collect();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for rep in orbit_representatives(k, j.n_vars) {
            let a = occupation(&rep, k);
            let row = occupations
                .iter()
                .map(|c| {
                    if c.iter().zip(&a).any(|(ci, ai)| ci < ai) {
                        return F::zero();
                    }
                    let denom: u64 = c
                        .iter()
                        .zip(&a)
                        .map(|(ci, ai)| factorial(ci - ai))
                        .product();
                    F::from_u64(factorial(extra_m) / denom)
                })
                .collect();
            rows.push(row);
            rhs.push(j.prob(&rep).clone());
        }
        Self {
            labels: big.into_iter().map(OrbitLabel).collect(),
            occupations,
            rows,
            rhs,
        }
    }

    fn fact(&self, row: usize) -> LinearFact<F> {
        LinearFact {
            terms: self.rows[row]
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(v, c)| (self.labels[v].clone(), c.clone()))
                .collect(),
            rhs: self.rhs[row].clone(),
        }
    }

    /// Unit propagation on the nonnegative system: zero right-hand sides
    /// force every variable to 0, single unknowns take their forced value.
    fn propagate(&self) -> (Vec<LinearFact<F>>, Option<Contradiction<F>>) {
        let tol = tolerance::<F>();
        let mut known: Vec<Option<F>> = vec![None; self.labels.len()];
        let mut trail = Vec::new();
        let mut changed = true;
        while changed {
            changed = false;
            for r in 0..self.rows.len() {
                let mut rest = self.rhs[r].clone();
                let mut unknown = Vec::new();
                let mut fixed_terms = Vec::new();
                for (v, c) in self.rows[r].iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    match &known[v] {
                        Some(x) => {
                            rest -= c.clone() * x.clone();
                            fixed_terms.push((v, c.clone()));
                        }
                        None => unknown.push(v),
                    }
                }
                let infeasible = rest < -tol.clone() || (unknown.is_empty() && rest.abs() > tol);
                if infeasible {
                    let derived = LinearFact {
                        terms: fixed_terms
                            .iter()
                            .map(|(v, c)| (self.labels[*v].clone(), c.clone()))
                            .collect(),
                        rhs: fixed_terms.iter().fold(F::zero(), |a, (v, c)| {
                            a + c.clone() * known[*v].clone().unwrap()
                        }),
                    };
                    return (
                        trail,
                        Some(Contradiction {
                            derived,
                            violated: self.fact(r),
                        }),
                    );
                }
                if unknown.is_empty() {
                    continue;
                }
                if rest.abs() <= tol {
                    for v in unknown {
                        known[v] = Some(F::zero());
                        trail.push(LinearFact::single(self.labels[v].clone(), F::zero()));
                    }
                    changed = true;
                } else if unknown.len() == 1 {
                    let v = unknown[0];
                    let value = rest / self.rows[r][v].clone();
                    trail.push(LinearFact::single(self.labels[v].clone(), value.clone()));
                    known[v] = Some(value);
                    changed = true;
                }
            }
        }
        (trail, None)
    }
}

enum PhaseOne<F> {
    Feasible(Vec<F>),
    Infeasible(Vec<F>),
}

/// Phase-I simplex with Bland's rule for `A q = b, q >= 0`.
fn phase_one<F: Field>(a: &[Vec<F>], b: &[F]) -> PhaseOne<F> {
    let eps = tolerance::<F>();
    let m = a.len();
    let nv = a[0].len();
    let width = nv + m + 1;
    let mut signs = Vec::with_capacity(m);
    let mut t: Vec<Vec<F>> = Vec::with_capacity(m);
    for (r, (row, rhs)) in a.iter().zip(b).enumerate() {
        let s = if rhs.is_negative() {
            -F::one()
        } else {
            F::one()
        };
        let mut line = vec![F::zero(); width];
        for (dst, x) in line.iter_mut().zip(row) {
            *dst = s.clone() * x.clone();
        }
        line[nv + r] = F::one();
        line[width - 1] = s.clone() * rhs.clone();
        t.push(line);
        signs.push(s);
    }
    let mut basis: Vec<usize> = (nv..nv + m).collect();
    let cost = |j: usize| {
        if j >= nv && j < nv + m {
            F::one()
        } else {
            F::zero()
        }
    };
    loop {
        let entering = (0..width - 1).filter(|j| !basis.contains(j)).find(|&j| {
            let z = (0..m).fold(F::zero(), |acc, r| acc + cost(basis[r]) * t[r][j].clone());
            z - cost(j) > eps
        });
        let Some(e) = entering else { break };
        let mut leave: Option<(usize, F)> = None;
        for r in 0..m {
            if t[r][e] > eps {
                let ratio = t[r][width - 1].clone() / t[r][e].clone();
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
        }
        let Some((p, _)) = leave else { break };
        let pivot = t[p][e].clone();
        for x in t[p].iter_mut() {
            *x /= pivot.clone();
        }
        let prow = t[p].clone();
        for (r, line) in t.iter_mut().enumerate() {
            if r == p || line[e].is_zero() {
                continue;
            }
            let f = line[e].clone();
            for (x, px) in line.iter_mut().zip(&prow) {
                *x -= f.clone() * px.clone();
            }
        }
        basis[p] = e;
    }
    let objective = (0..m).fold(F::zero(), |acc, r| {
        acc + cost(basis[r]) * t[r][width - 1].clone()
    });
    if objective > eps {
        let y = (0..m)
            .map(|i| {
                let yi = (0..m).fold(F::zero(), |acc, r| {
                    acc + cost(basis[r]) * t[r][nv + i].clone()
                });
                signs[i].clone() * yi
            })
            .collect();
        PhaseOne::Infeasible(y)
    } else {
        let mut q = vec![F::zero(); nv];
        for (r, &bv) in basis.iter().enumerate() {
            if bv < nv {
                q[bv] = t[r][width - 1].clone();
            }
        }
        PhaseOne::Feasible(q)
    }
}

/// Checks `y^T A <= 0` and `y^T b > 0`.
pub fn verify_farkas<F: Field>(a: &[Vec<F>], b: &[F], y: &[F]) -> bool {
    let eps = tolerance::<F>();
    let cols_ok = (0..a[0].len()).all(|j| {
        let s = a.iter().zip(y).fold(F::zero(), |acc, (row, yi)| {
            acc + row[j].clone() * yi.clone()
        });
        s <= eps
    });
    let yb = b
        .iter()
        .zip(y)
        .fold(F::zero(), |acc, (bi, yi)| acc + bi.clone() * yi.clone());
    cols_ok && yb > eps
}

/// Decides whether `j` is the marginal of a symmetric table on
/// `n_vars + extra_m` variables by linear feasibility over orbit masses.
pub fn extension_feasible_classical<F: Field>(
    j: &JointDistribution<F>,
    extra_m: usize,
) -> Result<ClassicalExtension<F>> {
    let total = j.n_vars + extra_m;
    let size = table_size(j.arity, total)?;
    if let Some((assignment, swapped)) = asymmetry_witness(j, &tolerance()) {
        return Ok(ClassicalExtension {
            verdict: ClassicalVerdict::Infeasible,
            certificate: ClassicalCertificate::Asymmetric {
                assignment,
                swapped,
            },
        });
    }
    let system = MarginalSystem::build(j, extra_m);
    match phase_one(&system.rows, &system.rhs) {
        PhaseOne::Feasible(q) => {
            let probs = (0..size)
                .map(|i| {
                    let occ = occupation(&digits(i, j.arity, total), j.arity);
                    let v = system.occupations.iter().position(|o| *o == occ).unwrap();
                    q[v].clone()
                })
                .collect();
            Ok(ClassicalExtension {
                verdict: ClassicalVerdict::Feasible,
                certificate: ClassicalCertificate::Extension(JointDistribution::new(
                    total, j.arity, probs,
                )?),
            })
        }
        PhaseOne::Infeasible(multipliers) => {
            if !verify_farkas(&system.rows, &system.rhs, &multipliers) {
                return Err(Error::Numerical(
                    "Farkas certificate failed verification".into(),
                ));
            }
            let (trail, contradiction) = system.propagate();
            Ok(ClassicalExtension {
                verdict: ClassicalVerdict::Infeasible,
                certificate: ClassicalCertificate::Farkas {
                    multipliers,
                    trail,
                    contradiction,
                },
            })
        }
    }
}

/// The two-variable table with `p(0,1) = p(1,0) = 1/2`.
pub fn anticorrelation_table<F: Field>() -> JointDistribution<F> {
    let half = F::one() / F::from_u64(2);
    JointDistribution::new(2, 2, vec![F::zero(), half.clone(), half, F::zero()])
        .expect("valid table")
}

/// Binomial coefficient as a running product.
pub fn binomial<F: Field>(n: usize, r: usize) -> F {
    if r > n {
        return F::zero();
    }
    let r = r.min(n - r);
    (0..r).fold(F::one(), |acc, i| {
        acc * F::from_u64((n - i) as u64) / F::from_u64((i + 1) as u64)
    })
}

/// `(m)_n (M-m)_{N-n} / (M)_N`: probability of a particular order of `n`
/// ones in `N` draws without replacement from an urn with `m` ones of `M`.
pub fn urn_conditional<F: Field>(
    n: usize,
    n_trials: usize,
    m: usize,
    m_trials: usize,
) -> Result<F> {
    if n > n_trials || n_trials > m_trials || m > m_trials {
        return Err(Error::Argument(format!(
            "need n <= N <= M and m <= M, got n={n}, N={n_trials}, m={m}, M={m_trials}"
        )));
    }
    // one factor of (M)_N per draw, paired with the matching numerator factor
    let mut acc = F::one();
    for t in 0..n_trials {
        let num = if t < n {
            m.checked_sub(t)
        } else {
            (m_trials - m).checked_sub(t - n)
        };
        match num {
            Some(0) | None => return Ok(F::zero()),
            Some(x) => acc = acc * F::from_u64(x as u64) / F::from_u64((m_trials - t) as u64),
        }
    }
    Ok(acc)
}

/// `p(m, M)` for `m = 0..=M`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountDistribution<F> {
    probs: Vec<F>,
}

impl<F: Field> CountDistribution<F> {
    pub fn new(probs: Vec<F>) -> Result<Self> {
        check_probabilities(&probs, "count distribution")?;
        Ok(Self { probs })
    }

    pub fn max_m(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }
}

/// `p(n, N) = C(N, n) sum_m (m)_n (M-m)_{N-n} / (M)_N p(m, M)`.
pub fn finite_representation<F: Field>(
    count_dist: &CountDistribution<F>,
    n_trials: usize,
) -> Result<Vec<F>> {
    let big_m = count_dist.max_m();
    if n_trials > big_m {
        return Err(Error::Argument(format!(
            "N = {n_trials} exceeds M = {big_m}"
        )));
    }
    (0..=n_trials)
        .map(|n| {
            let mut s = F::zero();
            for (m, p) in count_dist.probs.iter().enumerate() {
                if !p.is_zero() {
                    s += urn_conditional::<F>(n, n_trials, m, big_m)? * p.clone();
                }
            }
            Ok(binomial::<F>(n_trials, n) * s)
        })
        .collect()
}

/// Symmetric binary table on `M` variables spreading `p(m, M)` evenly over
/// the assignments with `m` ones.
pub fn symmetric_table_from_counts<F: Field>(
    count_dist: &CountDistribution<F>,
) -> Result<JointDistribution<F>> {
    let big_m = count_dist.max_m();
    if big_m == 0 {
        return Err(Error::Argument("need M >= 1".into()));
    }
    let size = table_size(2, big_m)?;
    let probs = (0..size)
        .map(|i| {
            let m = i.count_ones() as usize;
            count_dist.probs[m].clone() / binomial::<F>(big_m, m)
        })
        .collect();
    JointDistribution::new(big_m, 2, probs)
}

/// Distribution of the number of ones in a binary table.
pub fn count_ones_distribution<F: Field>(j: &JointDistribution<F>) -> Result<Vec<F>> {
    if j.arity != 2 {
        return Err(Error::Argument(
            "count distribution needs binary variables".into(),
        ));
    }
    let mut out = vec![F::zero(); j.n_vars + 1];
    for (i, p) in j.probs.iter().enumerate() {
        out[i.count_ones() as usize] += p.clone();
    }
    Ok(out)
}

/// `p(n, N)` by building the full symmetric `M`-table and marginalizing.
pub fn enumerated_representation<F: Field>(
    count_dist: &CountDistribution<F>,
    n_trials: usize,
) -> Result<Vec<F>> {
    if n_trials == 0 || n_trials > count_dist.max_m() {
        return Err(Error::Argument(format!(
            "N = {n_trials} must lie in 1..={}",
            count_dist.max_m()
        )));
    }
    count_ones_distribution(&symmetric_table_from_counts(count_dist)?.marginal(n_trials)?)
}

/// Rule assigning a count distribution to each `M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CountFamily {
    /// `p(m, M) = 1 / (M + 1)`; its limit is the uniform density on `[0, 1]`.
    Uniform,
    /// All mass on `m = round(z M)`.
    PointMass { z: f64 },
}

impl CountFamily {
    pub fn at<F: Field>(&self, big_m: usize) -> Result<CountDistribution<F>> {
        match *self {
            CountFamily::Uniform => {
                let w = F::one() / F::from_u64(big_m as u64 + 1);
                CountDistribution::new(vec![w; big_m + 1])
            }
            CountFamily::PointMass { z } => {
                if !(0.0..=1.0).contains(&z) {
                    return Err(Error::Argument(format!(
                        "point mass at z = {z} outside [0, 1]"
                    )));
                }
                let mut probs = vec![F::zero(); big_m + 1];
                probs[(z * big_m as f64).round() as usize] = F::one();
                CountDistribution::new(probs)
            }
        }
    }

    /// `C(N, n) int z^n (1-z)^(N-n) P(z) dz` for the family's limit density.
    pub fn limit(&self, n_trials: usize) -> Vec<f64> {
        match *self {
            CountFamily::Uniform => vec![1.0 / (n_trials as f64 + 1.0); n_trials + 1],
            CountFamily::PointMass { z } => (0..=n_trials)
                .map(|n| {
                    binomial::<f64>(n_trials, n)
                        * z.powi(n as i32)
                        * (1.0 - z).powi((n_trials - n) as i32)
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitRow<F> {
    pub m_trials: usize,
    pub values: Vec<F>,
    /// `max_n |p_M(n, N) - p_inf(n, N)|`.
    pub max_gap: f64,
}

/// `p_M(n, N)` for each `M` in `m_list`, compared with the family's limit.
pub fn limit_convergence_demo<F: Field>(
    family: &CountFamily,
    n_trials: usize,
    m_list: &[usize],
) -> Result<Vec<LimitRow<F>>> {
    if m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Argument("M list must be strictly increasing".into()));
    }
    let limit = family.limit(n_trials);
    m_list
        .iter()
        .map(|&big_m| {
            let values = finite_representation(&family.at::<F>(big_m)?, n_trials)?;
            let max_gap = values
                .iter()
                .zip(&limit)
                .map(|(v, l)| (v.to_f64_value() - l).abs())
                .fold(0.0, f64::max);
            Ok(LimitRow {
                m_trials: big_m,
                values,
                max_gap,
            })
        })
        .collect()
}
