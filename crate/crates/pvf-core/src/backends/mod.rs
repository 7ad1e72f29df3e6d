//! Pluggable secure-aggregation backends: the plain oracle, pairwise
//! masking with threshold recovery, and single-private-key additively
//! homomorphic encryption. The orchestrator treats each as a black box that
//! turns per-user key vectors into an aggregated sum over survivors.

mod he;
mod mask;

pub use he::{decrypt_aggregate, he_backend_round};
pub use mask::mask_backend_round;

use crate::field::Zp;
use crate::paillier::{Ciphertext, PaillierError};
use crate::shamir::ShamirError;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BackendError {
    #[error("input vectors have differing lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no surviving users to aggregate")]
    EmptySurvivorSet,
    #[error("round unrecoverable: {survivors} survivors below threshold {threshold}")]
    UnrecoverableRound { survivors: usize, threshold: usize },
    #[error("threshold {t} invalid for {n} users")]
    BadThreshold { t: usize, n: usize },
    #[error("paillier modulus too small for {users} users over this field")]
    ModulusTooSmall { users: usize },
    #[error(transparent)]
    Shamir(#[from] ShamirError),
    #[error(transparent)]
    Paillier(#[from] PaillierError),
}

/// Static facts the orchestrator needs to wire a backend into a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendDescriptor {
    pub name: &'static str,
    /// False when the server only ever sees ciphertext sums.
    pub server_learns_sum: bool,
    pub dropout_tolerant: bool,
    /// Recovery threshold, for backends that secret-share.
    pub threshold: Option<usize>,
}

/// The aggregated key vector, in whichever form the backend produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SumK {
    Plain(Vec<u64>),
    Encrypted(Vec<Ciphertext>),
}

/// Wall-clock spent inside the backend, split by side. `user_total` sums
/// the per-user computations; callers divide by the participant count for a
/// per-user figure.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BackendTimings {
    pub user_total: Duration,
    pub server: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationOutcome {
    pub survivors: BTreeSet<usize>,
    pub sum_k: SumK,
    /// Entries each user fed into the backend; the compression contract is
    /// asserted against this, never inferred.
    pub entries_per_user: usize,
    /// Bytes a fully participating user sends during the backend protocol.
    pub per_user_bytes_sent: u64,
    pub timings: BackendTimings,
}

pub(crate) fn check_inputs(
    inputs: &BTreeMap<usize, Vec<u64>>,
    dropouts: &BTreeSet<usize>,
) -> Result<(usize, BTreeSet<usize>), BackendError> {
    let mut len = None;
    for v in inputs.values() {
        match len {
            None => len = Some(v.len()),
            Some(l) if l != v.len() => {
                return Err(BackendError::LengthMismatch(l, v.len()));
            }
            _ => {}
        }
    }
    let survivors: BTreeSet<usize> =
        inputs.keys().copied().filter(|u| !dropouts.contains(u)).collect();
    if survivors.is_empty() {
        return Err(BackendError::EmptySurvivorSet);
    }
    Ok((len.unwrap_or(0), survivors))
}

/// Unprotected componentwise summation over the surviving users: the
/// correctness oracle every other backend is tested against.
pub fn plain_aggregate(
    inputs: &BTreeMap<usize, Vec<u64>>,
    dropouts: &BTreeSet<usize>,
    field: &Zp,
) -> Result<AggregationOutcome, BackendError> {
    let (len, survivors) = check_inputs(inputs, dropouts)?;
    let start = std::time::Instant::now();
    let mut sum = vec![0u64; len];
    for id in &survivors {
        field.sum_vec(&mut sum, &inputs[id]);
    }
    let server = start.elapsed();
    Ok(AggregationOutcome {
        survivors,
        sum_k: SumK::Plain(sum),
        entries_per_user: len,
        per_user_bytes_sent: crate::wire::field_vec_wire_len(len),
        timings: BackendTimings { user_total: Duration::ZERO, server },
    })
}
