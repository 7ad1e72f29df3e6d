//! The freeze/thaw pipeline: pad a private vector to a multiple of the
//! compression factor, split it into groups, map each group through the
//! public matrices into a frozen part and a key part, and later recover the
//! aggregated vector from aggregated parts by inverting the base matrix.

use crate::field::FieldError;
use crate::linalg::{FreezeMatrixSet, LinalgError};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PvfError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("input vector is empty")]
    EmptyInput,
    #[error("vector length {len} is not compatible with {expected} (lambda = {lambda})")]
    GroupMismatch { len: usize, expected: usize, lambda: usize },
    #[error("frozen sum has {y_groups} groups but key sum has {k_groups}")]
    InconsistentGroups { y_groups: usize, k_groups: usize },
}

/// How much padding to apply beyond the input length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PadPolicy {
    /// Pad with `(lambda - m mod lambda) mod lambda` entries, i.e. none when
    /// lambda divides m.
    #[default]
    Minimal,
    /// Always append at least one full group of padding; used by the
    /// worst-case padding benchmark.
    FullGroup,
}

/// A private vector padded to a whole number of groups. The first
/// `original_len` entries are the raw input; the tail is uniform random
/// field material that is discarded after thawing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedVector {
    original_len: usize,
    entries: Vec<u64>,
    pad_seed: u64,
}

impl PaddedVector {
    /// Wraps a vector verbatim for the identity (lambda = 1) plan, where no
    /// padding or grouping happens.
    pub fn unpadded(entries: Vec<u64>) -> Self {
        PaddedVector { original_len: entries.len(), entries, pad_seed: 0 }
    }

    /// Adds one to the chosen entry mod p. Models a user deriving its key
    /// vector from a different vector than the committed one; tests and
    /// tamper demos only.
    #[doc(hidden)]
    pub fn bump_entry(&mut self, index: usize, field: &crate::field::Zp) {
        self.entries[index] = field.add(self.entries[index], 1);
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn padded_len(&self) -> usize {
        self.entries.len()
    }

    pub fn pad_seed(&self) -> u64 {
        self.pad_seed
    }

    /// Number of groups of `lambda` entries.
    pub fn group_count(&self, lambda: usize) -> usize {
        self.entries.len() / lambda
    }
}

/// The two images of one padded vector: the frozen part `y` (sent outside
/// the aggregation backend) and the key part `k` (the only data the backend
/// processes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrozenPair {
    pub y: Vec<u64>,
    pub k: Vec<u64>,
    pub groups: usize,
}

/// Aggregated inputs to thawing: the survivor sums of frozen and key parts.
#[derive(Debug, Clone)]
pub struct ThawInput<'a> {
    pub sum_y: &'a [u64],
    pub sum_k: &'a [u64],
    pub matrices: &'a FreezeMatrixSet,
    pub original_len: usize,
}

/// Pads `x` with uniform random field elements up to a multiple of lambda
/// and records the grouping. Entries must already be field elements.
pub fn pad_and_group(
    x: &[u64],
    matrices: &FreezeMatrixSet,
    pad_seed: u64,
) -> Result<PaddedVector, PvfError> {
    pad_and_group_with_policy(x, matrices, pad_seed, PadPolicy::Minimal)
}

pub fn pad_and_group_with_policy(
    x: &[u64],
    matrices: &FreezeMatrixSet,
    pad_seed: u64,
    policy: PadPolicy,
) -> Result<PaddedVector, PvfError> {
    if x.is_empty() {
        return Err(PvfError::EmptyInput);
    }
    let field = matrices.field();
    field.check_vec(x)?;
    let lambda = matrices.lambda();
    let mut pad = (lambda - x.len() % lambda) % lambda;
    if policy == PadPolicy::FullGroup && pad == 0 {
        pad = lambda;
    }
    let mut entries = Vec::with_capacity(x.len() + pad);
    entries.extend_from_slice(x);
    let mut rng = ChaCha20Rng::seed_from_u64(pad_seed);
    entries.extend((0..pad).map(|_| field.sample(&mut rng)));
    Ok(PaddedVector { original_len: x.len(), entries, pad_seed })
}

/// Applies the incomplete and residual matrices group by group, producing
/// `groups * (lambda - delta - 1)` frozen entries and `groups * (delta + 1)`
/// key entries.
pub fn freeze(xp: &PaddedVector, matrices: &FreezeMatrixSet) -> Result<FrozenPair, PvfError> {
    let lambda = matrices.lambda();
    if xp.entries.len() % lambda != 0 {
        return Err(PvfError::GroupMismatch {
            len: xp.entries.len(),
            expected: (xp.entries.len() / lambda + 1) * lambda,
            lambda,
        });
    }
    let field = matrices.field();
    let groups = xp.entries.len() / lambda;
    let mut y = Vec::with_capacity(groups * matrices.frozen_rows());
    let mut k = Vec::with_capacity(groups * matrices.key_rows());
    for group in xp.entries.chunks_exact(lambda) {
        y.extend(matrices.a_check().mat_vec(group, &field)?);
        k.extend(matrices.alpha().mat_vec(group, &field)?);
    }
    Ok(FrozenPair { y, k, groups })
}

/// Recovers the aggregated padded vector from aggregated frozen and key
/// sums, then truncates the padding tail. For each group the right-hand side
/// is the frozen segment stacked over the key segment, matching the row
/// split of the base matrix.
pub fn thaw(input: &ThawInput) -> Result<Vec<u64>, PvfError> {
    let m = input.matrices;
    let frozen_rows = m.frozen_rows();
    let key_rows = m.key_rows();
    if input.sum_y.len() % frozen_rows != 0 {
        return Err(PvfError::GroupMismatch {
            len: input.sum_y.len(),
            expected: frozen_rows,
            lambda: m.lambda(),
        });
    }
    if input.sum_k.len() % key_rows != 0 {
        return Err(PvfError::GroupMismatch {
            len: input.sum_k.len(),
            expected: key_rows,
            lambda: m.lambda(),
        });
    }
    let y_groups = input.sum_y.len() / frozen_rows;
    let k_groups = input.sum_k.len() / key_rows;
    if y_groups != k_groups {
        return Err(PvfError::InconsistentGroups { y_groups, k_groups });
    }
    let field = m.field();
    let mut out = Vec::with_capacity(y_groups * m.lambda());
    let mut rhs = vec![0u64; m.lambda()];
    for j in 0..y_groups {
        rhs[..frozen_rows].copy_from_slice(&input.sum_y[j * frozen_rows..(j + 1) * frozen_rows]);
        rhs[frozen_rows..].copy_from_slice(&input.sum_k[j * key_rows..(j + 1) * key_rows]);
        out.extend(m.a_inv().mat_vec(&rhs, &field)?);
    }
    out.truncate(input.original_len);
    Ok(out)
}

/// Fraction of entries that enter the secure-aggregation backend:
/// `(delta + 1) / lambda`.
pub fn compression_ratio(matrices: &FreezeMatrixSet) -> Ratio<u64> {
    Ratio::new(matrices.key_rows() as u64, matrices.lambda() as u64)
}
