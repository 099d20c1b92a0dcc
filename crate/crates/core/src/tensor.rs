//! Small dense tensors with variance flags.
//!
//! Everything on a chart of dimension `n <= 8` and rank `<= 4` lives in a
//! row-major `Vec<f64>`.  Each slot is marked [`Variance::Upper`] or
//! [`Variance::Lower`] so that contraction and index raising can reject
//! meaningless pairings instead of silently producing numbers.
//!
//! Slot positions in the public operations are 1-based, matching the
//! coordinate naming `t1..tn` used everywhere else; element multi-indices
//! in [`Tensor::get`]/[`Tensor::set`] are 0-based.

use thiserror::Error;

pub const MAX_RANK: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variance {
    Upper,
    Lower,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("rank {0} exceeds the supported maximum {MAX_RANK}")]
    RankOverflow(usize),
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("slots must be distinct, got {0} twice")]
    DuplicateSlot(usize),
    #[error("variance mismatch: {0}")]
    VarianceMismatch(String),
    #[error("metric must be rank 2 and match dimension {dim}, got rank {rank}, dim {metric_dim}")]
    BadMetric {
        dim: usize,
        rank: usize,
        metric_dim: usize,
    },
}

/// Permutation sets accepted by [`Tensor::sym_residual`].
#[derive(Clone, Copy, Debug)]
pub enum SymGroup {
    /// `{identity, transposition}` of the two given 1-based slots.
    Swap(usize, usize),
    /// The full symmetric group on all slots.
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dim: usize,
    variance: Vec<Variance>,
    data: Vec<f64>,
}

impl Tensor {
    /// Zero tensor. Panics on rank above [`MAX_RANK`]; construction rank is
    /// a programming error, not input data.
    pub fn zeros(dim: usize, variance: &[Variance]) -> Tensor {
        assert!(
            variance.len() <= MAX_RANK,
            "rank {} exceeds maximum {MAX_RANK}",
            variance.len()
        );
        assert!(dim >= 1, "dimension must be at least 1");
        Tensor {
            dim,
            variance: variance.to_vec(),
            data: vec![0.0; dim.pow(variance.len() as u32)],
        }
    }

    pub fn from_fn(
        dim: usize,
        variance: &[Variance],
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Tensor {
        let mut t = Tensor::zeros(dim, variance);
        let rank = variance.len();
        for idx in multi_indices(dim, rank) {
            let flat = flat_index(dim, &idx[..rank]);
            t.data[flat] = f(&idx[..rank]);
        }
        t
    }

    pub fn scalar(v: f64) -> Tensor {
        Tensor {
            dim: 1,
            variance: Vec::new(),
            data: vec![v],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.rank());
        self.data[flat_index(self.dim, idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        debug_assert_eq!(idx.len(), self.rank());
        let flat = flat_index(self.dim, idx);
        self.data[flat] = v;
    }

    pub fn add_at(&mut self, idx: &[usize], v: f64) {
        let flat = flat_index(self.dim, idx);
        self.data[flat] += v;
    }

    /// Einstein contraction of one upper slot against one lower slot
    /// (1-based positions). The result keeps the remaining slots in order.
    pub fn contract(&self, slot_a: usize, slot_b: usize) -> Result<Tensor, TensorError> {
        let (a, b) = (self.check_slot(slot_a)?, self.check_slot(slot_b)?);
        if a == b {
            return Err(TensorError::DuplicateSlot(slot_a));
        }
        if self.variance[a] == self.variance[b] {
            return Err(TensorError::VarianceMismatch(format!(
                "contraction needs one upper and one lower slot, got {:?} and {:?}",
                self.variance[a], self.variance[b]
            )));
        }
        let keep: Vec<usize> = (0..self.rank()).filter(|&s| s != a && s != b).collect();
        let out_var: Vec<Variance> = keep.iter().map(|&s| self.variance[s]).collect();
        let mut out = Tensor::zeros(self.dim, &out_var);
        let mut src = vec![0usize; self.rank()];
        for idx in multi_indices(self.dim, keep.len()) {
            for (pos, &s) in keep.iter().enumerate() {
                src[s] = idx[pos];
            }
            let mut sum = 0.0;
            for m in 0..self.dim {
                src[a] = m;
                src[b] = m;
                sum += self.get(&src);
            }
            out.set(&idx[..keep.len()], sum);
        }
        Ok(out)
    }

    /// Flips the variance of one slot by contracting with `metric`, which
    /// must be rank 2 with both slots opposite to the slot being flipped
    /// (the metric to lower an upper index, its inverse to raise).
    pub fn raise_lower(&self, slot: usize, metric: &Tensor) -> Result<Tensor, TensorError> {
        let s = self.check_slot(slot)?;
        if metric.rank() != 2 || metric.dim != self.dim {
            return Err(TensorError::BadMetric {
                dim: self.dim,
                rank: metric.rank(),
                metric_dim: metric.dim,
            });
        }
        let target = match self.variance[s] {
            Variance::Upper => Variance::Lower,
            Variance::Lower => Variance::Upper,
        };
        if metric.variance[0] != target || metric.variance[1] != target {
            return Err(TensorError::VarianceMismatch(format!(
                "flipping a {:?} slot needs a metric with both slots {:?}",
                self.variance[s], target
            )));
        }
        let mut out_var = self.variance.clone();
        out_var[s] = target;
        let mut out = Tensor::zeros(self.dim, &out_var);
        let rank = self.rank();
        let mut src = vec![0usize; rank];
        for idx in multi_indices(self.dim, rank) {
            src.copy_from_slice(&idx[..rank]);
            let mut sum = 0.0;
            for m in 0..self.dim {
                src[s] = m;
                sum += metric.get(&[idx[s], m]) * self.get(&src);
            }
            out.set(&idx[..rank], sum);
        }
        Ok(out)
    }

    /// Metric trace of two lower slots: contracts `ginv^{ab}` against the
    /// slots at the two given 1-based positions.
    pub fn trace_g(&self, slot_a: usize, slot_b: usize, ginv: &Tensor) -> Result<Tensor, TensorError> {
        let (a, b) = (self.check_slot(slot_a)?, self.check_slot(slot_b)?);
        if a == b {
            return Err(TensorError::DuplicateSlot(slot_a));
        }
        if self.variance[a] != Variance::Lower || self.variance[b] != Variance::Lower {
            return Err(TensorError::VarianceMismatch(
                "trace_g needs two lower slots".into(),
            ));
        }
        if ginv.rank() != 2
            || ginv.dim != self.dim
            || ginv.variance != [Variance::Upper, Variance::Upper]
        {
            return Err(TensorError::BadMetric {
                dim: self.dim,
                rank: ginv.rank(),
                metric_dim: ginv.dim,
            });
        }
        let keep: Vec<usize> = (0..self.rank()).filter(|&s| s != a && s != b).collect();
        let out_var: Vec<Variance> = keep.iter().map(|&s| self.variance[s]).collect();
        let mut out = Tensor::zeros(self.dim, &out_var);
        let mut src = vec![0usize; self.rank()];
        for idx in multi_indices(self.dim, keep.len()) {
            for (pos, &s) in keep.iter().enumerate() {
                src[s] = idx[pos];
            }
            let mut sum = 0.0;
            for p in 0..self.dim {
                for q in 0..self.dim {
                    src[a] = p;
                    src[b] = q;
                    sum += ginv.get(&[p, q]) * self.get(&src);
                }
            }
            out.set(&idx[..keep.len()], sum);
        }
        Ok(out)
    }

    /// Max-norm distance from the average over the permutation group, i.e.
    /// how far the tensor is from being symmetric under `group`.
    pub fn sym_residual(&self, group: SymGroup) -> Result<f64, TensorError> {
        let perms = self.permutations(group)?;
        let rank = self.rank();
        let mut worst = 0.0f64;
        let mut permuted = vec![0usize; rank];
        for idx in multi_indices(self.dim, rank) {
            let mut avg = 0.0;
            for perm in &perms {
                for (pos, &p) in perm.iter().enumerate() {
                    permuted[pos] = idx[p];
                }
                avg += self.get(&permuted);
            }
            avg /= perms.len() as f64;
            worst = worst.max((self.get(&idx[..rank]) - avg).abs());
        }
        Ok(worst)
    }

    /// Permutations as slot-source maps: entry `perm[k] = p` means output
    /// slot `k` reads input slot `p`.
    fn permutations(&self, group: SymGroup) -> Result<Vec<Vec<usize>>, TensorError> {
        let rank = self.rank();
        match group {
            SymGroup::Swap(slot_a, slot_b) => {
                let (a, b) = (self.check_slot(slot_a)?, self.check_slot(slot_b)?);
                if a == b {
                    return Err(TensorError::DuplicateSlot(slot_a));
                }
                if self.variance[a] != self.variance[b] {
                    return Err(TensorError::VarianceMismatch(
                        "swapped slots must share variance".into(),
                    ));
                }
                let id: Vec<usize> = (0..rank).collect();
                let mut swap = id.clone();
                swap.swap(a, b);
                Ok(vec![id, swap])
            }
            SymGroup::Full => {
                if rank == 0 {
                    return Ok(vec![Vec::new()]);
                }
                if self.variance.iter().any(|&v| v != self.variance[0]) {
                    return Err(TensorError::VarianceMismatch(
                        "full symmetrization requires uniform variance".into(),
                    ));
                }
                Ok(all_permutations(rank))
            }
        }
    }

    fn check_slot(&self, slot: usize) -> Result<usize, TensorError> {
        if slot == 0 || slot > self.rank() {
            return Err(TensorError::SlotOutOfRange {
                slot,
                rank: self.rank(),
            });
        }
        Ok(slot - 1)
    }

    pub fn add(&self, rhs: &Tensor) -> Tensor {
        self.zip(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Tensor) -> Tensor {
        self.zip(rhs, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Tensor {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= c;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, rhs: &Tensor) -> f64 {
        self.sub(rhs).max_abs()
    }

    fn zip(&self, rhs: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        assert_eq!(self.variance, rhs.variance, "variance mismatch");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a = f(*a, *b);
        }
        out
    }
}

fn flat_index(dim: usize, idx: &[usize]) -> usize {
    let mut flat = 0;
    for &i in idx {
        debug_assert!(i < dim);
        flat = flat * dim + i;
    }
    flat
}

/// Iterates all multi-indices of the given rank in row-major order.
/// Yields a fixed-size array; callers slice to `rank`.
pub fn multi_indices(dim: usize, rank: usize) -> impl Iterator<Item = [usize; MAX_RANK]> {
    debug_assert!(rank <= MAX_RANK);
    let total = dim.pow(rank as u32);
    (0..total).map(move |mut flat| {
        let mut idx = [0usize; MAX_RANK];
        for pos in (0..rank).rev() {
            idx[pos] = flat % dim;
            flat /= dim;
        }
        idx
    })
}

fn all_permutations(rank: usize) -> Vec<Vec<usize>> {
    let mut items: Vec<usize> = (0..rank).collect();
    let mut out = Vec::new();
    heap_permute(&mut items, rank, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}
