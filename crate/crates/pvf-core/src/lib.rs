//! Cost compression for secure vector aggregation.
//!
//! Most of the expense in secure-aggregation protocols is per-entry
//! encryption or masking. This crate freezes the bulk of each private
//! vector through public finite-field linear transforms so that only a
//! `(delta + 1) / lambda` fraction (the key vector) runs through the
//! aggregation backend; the aggregated remainder is thawed afterwards by
//! inverting the transform on the summed images. The result equals plain
//! aggregation exactly, while individual vectors stay hidden behind
//! underdetermined linear systems.
//!
//! The crate ships the matrix machinery, the freeze/thaw pipeline, a
//! commitment extension binding users to consistent inputs, a result
//! verification extension protecting users from a forging server, a
//! delta-security parameterization for partially compromised vectors, two
//! representative aggregation backends (pairwise masking and additively
//! homomorphic encryption) plus a plain oracle, and a deterministic round
//! simulator with dropout injection for benchmarking.

pub mod backends;
pub mod bigprime;
pub mod dh;
pub mod field;
pub mod kdf;
pub mod linalg;
pub mod orchestrator;
pub mod paillier;
pub mod pedersen;
pub mod prg;
pub mod profile;
pub mod pvf;
pub mod rve;
pub mod shamir;
pub mod wire;

pub use backends::{
    decrypt_aggregate, he_backend_round, mask_backend_round, plain_aggregate, AggregationOutcome,
    BackendDescriptor, BackendError, BackendTimings, SumK,
};
pub use field::{FieldConfig, FieldError, Zp, DEFAULT_MAX_ENTRY, DEFAULT_MAX_USERS, DEFAULT_PRIME};
pub use linalg::{
    generate_freeze_matrices, generate_freeze_matrices_with_budget, privacy_check, FieldMatrix,
    FreezeMatrixSet, LinalgError,
};
pub use orchestrator::{
    generate_inputs, parse_round_config, run_adversarial_round, run_campaign, run_round,
    BackendKind, CampaignCell, ConfigError, Extension, ForgeTarget, PhaseDurations, RoundConfig,
    RoundError, RoundReport, SweepGrid, TamperSpec, ThawSide,
};
pub use paillier::{Ciphertext, PaillierError, PaillierKeypair, PaillierPublicKey};
pub use pedersen::{
    commit_vector, pc_reveal, pc_setup, verify_aggregate_commitments, AggregateCheck,
    CommitmentVector, PedersenError, PedersenParams,
};
pub use profile::SecurityProfile;
pub use pvf::{
    compression_ratio, freeze, pad_and_group, pad_and_group_with_policy, thaw, FrozenPair,
    PadPolicy, PaddedVector, PvfError, ThawInput,
};
pub use rve::{
    derive_verification_keys, mask_frozen, verify_frozen_sums, MaskedFrozenSubmission, RveError,
    VerificationKeys,
};
pub use shamir::{shamir_reconstruct, shamir_share, ShamirError, ShamirShare};
