use super::hermitian::HermitianOperator;
use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest total Hilbert-space dimension any operation will allocate.
pub const MAX_DIM: usize = 4096;

/// `count` copies of a `local_dim`-dimensional system. Subsystem 0 is the
/// leftmost, slowest-varying tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubsystemShape {
    local_dim: usize,
    count: usize,
    total: usize,
}

impl SubsystemShape {
    pub fn new(local_dim: usize, count: usize) -> Result<Self> {
        if local_dim < 2 {
            return Err(Error::Argument(format!("local dimension {local_dim} < 2")));
        }
        if count == 0 {
            return Err(Error::Argument("subsystem count must be positive".into()));
        }
        let total = u32::try_from(count)
            .ok()
            .and_then(|c| local_dim.checked_pow(c))
            .ok_or_else(|| Error::Overflow(format!("{local_dim}^{count}")))?;
        Ok(Self {
            local_dim,
            count,
            total,
        })
    }

    #[inline]
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn total_dim(&self) -> usize {
        self.total
    }

    /// Digits of a basis index, subsystem 0 first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.count];
        for slot in out.iter_mut().rev() {
            *slot = index % self.local_dim;
            index /= self.local_dim;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &x| acc * self.local_dim + x)
    }

    /// Positional weight of subsystem `k`.
    fn stride(&self, k: usize) -> usize {
        self.local_dim.pow((self.count - 1 - k) as u32)
    }

    /// Offsets into the full index for every joint value of the listed subsystems.
    fn offsets(&self, subsystems: &[usize]) -> Vec<usize> {
        let mut offs = vec![0usize];
        for &k in subsystems {
            let stride = self.stride(k);
            offs = offs
                .iter()
                .flat_map(|&o| (0..self.local_dim).map(move |x| o + x * stride))
                .collect();
        }
        offs
    }

    fn check_op<T: Real>(&self, op: &HermitianOperator<T>) -> Result<()> {
        if op.dim() != self.total {
            return Err(Error::Shape(format!(
                "operator dimension {} does not match {}^{} = {}",
                op.dim(),
                self.local_dim,
                self.count,
                self.total
            )));
        }
        Ok(())
    }
}

fn checked_dim(a: usize, b: usize) -> Result<usize> {
    a.checked_mul(b)
        .filter(|&n| n <= MAX_DIM)
        .ok_or_else(|| Error::Overflow(format!("dimension {a} x {b} exceeds {MAX_DIM}")))
}

/// Kronecker product `a (x) b`.
pub fn tensor<T: Real>(
    a: &HermitianOperator<T>,
    b: &HermitianOperator<T>,
) -> Result<HermitianOperator<T>> {
    checked_dim(a.dim(), b.dim())?;
    Ok(HermitianOperator::symmetrized(a.matrix().kron(b.matrix())))
}

/// `a^(x)n`.
pub fn tensor_power<T: Real>(a: &HermitianOperator<T>, n: usize) -> Result<HermitianOperator<T>> {
    if n == 0 {
        return Err(Error::Argument("tensor power must be positive".into()));
    }
    let mut dim = a.dim();
    for _ in 1..n {
        dim = checked_dim(dim, a.dim())?;
    }
    let mut out = a.clone();
    for _ in 1..n {
        out = HermitianOperator::symmetrized(out.matrix().kron(a.matrix()));
    }
    Ok(out)
}

/// Traces out every subsystem not in `keep` (0-based). The result's factors
/// appear in ascending subsystem order.
pub fn partial_trace<T: Real>(
    op: &HermitianOperator<T>,
    shape: SubsystemShape,
    keep: &[usize],
) -> Result<HermitianOperator<T>> {
    shape.check_op(op)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.len() != keep.len() || *kept.last().unwrap() >= shape.count() {
        return Err(Error::Shape(format!(
            "keep set {keep:?} is not a nonempty subset of 0..{}",
            shape.count()
        )));
    }
    let traced: Vec<usize> = (0..shape.count()).filter(|k| !kept.contains(k)).collect();
    let keep_offs = shape.offsets(&kept);
    let trace_offs = shape.offsets(&traced);
    let n = keep_offs.len();
    let m = op.matrix();
    let out = ComplexMatrix::from_fn(n, n, |i, j| {
        trace_offs
            .iter()
            .map(|&t| m[(keep_offs[i] + t, keep_offs[j] + t)])
            .sum()
    });
    Ok(HermitianOperator::symmetrized(out))
}

/// Moves subsystem `k` of the input to position `perm[k]` of the output.
pub fn permute_subsystems<T: Real>(
    op: &HermitianOperator<T>,
    shape: SubsystemShape,
    perm: &[usize],
) -> Result<HermitianOperator<T>> {
    shape.check_op(op)?;
    let map = basis_permutation(shape, perm)?;
    let m = op.matrix();
    let n = shape.total_dim();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(map[i], map[j])] = m[(i, j)];
        }
    }
    Ok(HermitianOperator::symmetrized(out))
}

/// Image of every basis index under a subsystem permutation.
pub(crate) fn basis_permutation(shape: SubsystemShape, perm: &[usize]) -> Result<Vec<usize>> {
    let n = shape.count();
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Argument(format!(
            "permutation of length {} for {n} subsystems",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::Argument(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    let mut out_digits = vec![0; n];
    Ok((0..shape.total_dim())
        .map(|i| {
            for (k, x) in shape.digits(i).into_iter().enumerate() {
                out_digits[perm[k]] = x;
            }
            shape.index_of(&out_digits)
        })
        .collect())
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Adjacent transpositions `(k, k+1)` generating the symmetric group.
pub fn adjacent_transpositions(n: usize) -> Vec<Vec<usize>> {
    (0..n.saturating_sub(1))
        .map(|k| {
            let mut p: Vec<usize> = (0..n).collect();
            p.swap(k, k + 1);
            p
        })
        .collect()
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}
