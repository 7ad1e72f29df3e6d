//! Deterministic multi-user round simulator: Setup, Freeze, SecAgg over a
//! chosen backend, optional consistency or result verification, and Thaw on
//! the server or user side, with dropout injection and oracle checking.
//!
//! Users are simulated in process with explicit message accounting. All
//! randomness descends from the round's master seed, so identical
//! `(config, inputs)` produce identical aggregates, survivor sets, and byte
//! counts.

use crate::backends::{
    decrypt_aggregate, he_backend_round, mask_backend_round, plain_aggregate, AggregationOutcome,
    BackendDescriptor, BackendError, BackendTimings, SumK,
};
use crate::dh::DhGroup;
use crate::field::{FieldConfig, Zp};
use crate::kdf::derive_seed;
use crate::linalg::{generate_freeze_matrices, FreezeMatrixSet, LinalgError};
use crate::paillier::PaillierKeypair;
use crate::pedersen::{
    commit_vector, pc_setup, verify_aggregate_commitments, AggregateCheck, CommitmentVector,
    PedersenError, PedersenParams,
};
use crate::profile::SecurityProfile;
use crate::pvf::{
    freeze, pad_and_group_with_policy, thaw, FrozenPair, PadPolicy, PaddedVector, PvfError,
    ThawInput,
};
use crate::rve::{derive_verification_keys, mask_frozen, verify_frozen_sums, RveError};
use crate::wire::{field_vec_wire_len, residue_vec_wire_len};
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BackendKind {
    Plain,
    Mask,
    He,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Extension {
    #[default]
    None,
    Uce,
    Rve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThawSide {
    Server,
    User,
}

impl FromStr for BackendKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "plain" => Ok(BackendKind::Plain),
            "mask" => Ok(BackendKind::Mask),
            "he" => Ok(BackendKind::He),
            other => Err(ConfigError::Parse(format!("unknown backend {other:?}"))),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Plain => write!(f, "plain"),
            BackendKind::Mask => write!(f, "mask"),
            BackendKind::He => write!(f, "he"),
        }
    }
}

impl FromStr for Extension {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "none" => Ok(Extension::None),
            "uce" => Ok(Extension::Uce),
            "rve" => Ok(Extension::Rve),
            other => Err(ConfigError::Parse(format!("unknown extension {other:?}"))),
        }
    }
}

impl fmt::Display for Extension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extension::None => write!(f, "none"),
            Extension::Uce => write!(f, "uce"),
            Extension::Rve => write!(f, "rve"),
        }
    }
}

impl FromStr for ThawSide {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "server" => Ok(ThawSide::Server),
            "user" => Ok(ThawSide::User),
            other => Err(ConfigError::Parse(format!("unknown thaw side {other:?}"))),
        }
    }
}

impl fmt::Display for ThawSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThawSide::Server => write!(f, "server"),
            ThawSide::User => write!(f, "user"),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("compression factor {0} must be 1 (identity) or greater than 2")]
    LambdaInvalid(usize),
    #[error("delta {delta} invalid for lambda {lambda}")]
    DeltaInvalid { delta: usize, lambda: usize },
    #[error("dropout rate {0} must lie in [0, 1)")]
    EtaOutOfRange(f64),
    #[error("user count {n} exceeds the field configuration bound {n_max}")]
    TooManyUsers { n: usize, n_max: u64 },
    #[error("user count must be positive")]
    NoUsers,
    #[error("vector length must be positive")]
    EmptyVector,
    #[error("consistency commitments require server-side thawing")]
    UceNeedsServerThaw,
    #[error("consistency commitments require a backend that reveals the sum to the server")]
    UceNeedsPlaintextBackend,
    #[error("result verification requires user-side thawing")]
    RveNeedsUserThaw,
    #[error("the encrypted backend cannot thaw on the server: it never sees the plaintext sum")]
    HeCannotThawOnServer,
    #[error("expected inputs for users 0..{expected}, got {got} entries")]
    InputCount { expected: usize, got: usize },
    #[error("user {user} submitted {got} entries, expected {expected}")]
    InputLength { user: usize, expected: usize, got: usize },
    #[error("config parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Error)]
pub enum RoundError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Pvf(#[from] PvfError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Pedersen(#[from] PedersenError),
    #[error(transparent)]
    Rve(#[from] RveError),
    #[error("commitment verification failed at position {index}: a user deviated from the protocol")]
    UceRejected { index: usize },
    #[error("result verification failed at position {index}: the server returned a forged frozen sum")]
    RveRejected { index: usize },
}

/// Full description of one simulated aggregation round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundConfig {
    pub n: usize,
    pub m: usize,
    pub lambda: usize,
    pub delta: usize,
    pub eta: f64,
    pub backend: BackendKind,
    pub extension: Extension,
    pub thaw_side: ThawSide,
    pub master_seed: u64,
    pub profile: SecurityProfile,
    pub pad_policy: PadPolicy,
    pub field: FieldConfig,
}

impl RoundConfig {
    /// A plain-backend, no-extension, server-thaw round; callers adjust
    /// fields from there.
    pub fn new(n: usize, m: usize, lambda: usize, delta: usize, master_seed: u64) -> Self {
        RoundConfig {
            n,
            m,
            lambda,
            delta,
            eta: 0.0,
            backend: BackendKind::Plain,
            extension: Extension::None,
            thaw_side: ThawSide::Server,
            master_seed,
            profile: SecurityProfile::Standard,
            pad_policy: PadPolicy::Minimal,
            field: FieldConfig::default(),
        }
    }

    pub fn backend_descriptor(&self) -> BackendDescriptor {
        match self.backend {
            BackendKind::Plain => BackendDescriptor {
                name: "plain",
                server_learns_sum: true,
                dropout_tolerant: true,
                threshold: None,
            },
            BackendKind::Mask => BackendDescriptor {
                name: "mask",
                server_learns_sum: true,
                dropout_tolerant: true,
                threshold: Some(self.mask_threshold()),
            },
            BackendKind::He => BackendDescriptor {
                name: "he",
                server_learns_sum: false,
                dropout_tolerant: true,
                threshold: None,
            },
        }
    }

    /// Recovery threshold for the mask backend: ceil(2n/3), matching the
    /// 30% dropout ceiling.
    pub fn mask_threshold(&self) -> usize {
        (2 * self.n).div_ceil(3)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::NoUsers);
        }
        if self.m == 0 {
            return Err(ConfigError::EmptyVector);
        }
        if self.lambda == 0 || self.lambda == 2 {
            return Err(ConfigError::LambdaInvalid(self.lambda));
        }
        if self.lambda == 1 {
            if self.delta != 0 {
                return Err(ConfigError::DeltaInvalid { delta: self.delta, lambda: 1 });
            }
        } else if self.delta + 1 >= self.lambda {
            return Err(ConfigError::DeltaInvalid { delta: self.delta, lambda: self.lambda });
        }
        if !(0.0..1.0).contains(&self.eta) {
            return Err(ConfigError::EtaOutOfRange(self.eta));
        }
        if self.n as u64 > self.field.max_users() {
            return Err(ConfigError::TooManyUsers { n: self.n, n_max: self.field.max_users() });
        }
        match self.extension {
            Extension::Uce => {
                if self.thaw_side != ThawSide::Server {
                    return Err(ConfigError::UceNeedsServerThaw);
                }
                if !self.backend_descriptor().server_learns_sum {
                    return Err(ConfigError::UceNeedsPlaintextBackend);
                }
            }
            Extension::Rve => {
                if self.thaw_side != ThawSide::User {
                    return Err(ConfigError::RveNeedsUserThaw);
                }
            }
            Extension::None => {}
        }
        if self.backend == BackendKind::He && self.thaw_side == ThawSide::Server {
            return Err(ConfigError::HeCannotThawOnServer);
        }
        Ok(())
    }

    /// Advisory notes about unusual but permitted settings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.eta > 0.3 {
            out.push(format!(
                "dropout rate {} exceeds the 30% design ceiling; recovery may fail",
                self.eta
            ));
        }
        out
    }

    /// Number of dropouts injected at rate eta.
    pub fn dropout_count(&self) -> usize {
        (self.eta * self.n as f64).floor() as usize
    }
}

/// Where a tampering party interferes with the round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TamperSpec {
    /// The user derives its key vector from a different vector than the one
    /// it froze and committed to.
    UserInconsistentFreeze { user: usize },
    /// The user applies a residual matrix that disagrees with the public
    /// parameters.
    UserWrongAlpha { user: usize },
    /// The server adds `delta` to one entry of an aggregated frozen sum:
    /// the plain frozen sum when no extension runs, or the chosen masked
    /// form under result verification.
    ServerForgeSumY { index: usize, delta: u64, target: ForgeTarget },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForgeTarget {
    /// The multiplicatively masked form (or the plain frozen sum when no
    /// extension is active).
    Grave,
    /// The additively masked form.
    Acute,
}

/// Per-phase wall-clock of one round. Phases executed by users hold the
/// per-user figure (totals divided by the number of participants, or a
/// representative user's cost where all users do identical work); phases
/// executed by the server hold the server total.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseDurations {
    pub freeze: Duration,
    pub secagg_user: Duration,
    pub secagg_server: Duration,
    pub verify: Duration,
    pub thaw: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub survivors: BTreeSet<usize>,
    pub aggregate: Vec<u64>,
    pub phases: PhaseDurations,
    /// Total per-user computation across phases.
    pub user_compute: Duration,
    /// Total server computation across phases.
    pub server_compute: Duration,
    /// Bytes a fully participating user sends over the round.
    pub user_bytes: u64,
    /// Entries each user handed to the backend.
    pub backend_entries_per_user: usize,
    /// Raw timings from inside the backend: total user compute and the
    /// server's own masking-recovery or ciphertext-product step, without
    /// the orchestrator's frozen-sum work.
    pub backend_timings: BackendTimings,
    /// Exact equality of the aggregate with the plain oracle on survivors.
    pub correctness: bool,
    pub warnings: Vec<String>,
}

/// Generates per-user input vectors with entries bounded by the field
/// configuration's entry bound, as a benchmark workload.
pub fn generate_inputs(
    field_cfg: &FieldConfig,
    n: usize,
    m: usize,
    seed: u64,
) -> BTreeMap<usize, Vec<u64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let bound = field_cfg.max_entry() as u128 + 1;
    (0..n)
        .map(|id| {
            let v = (0..m).map(|_| ((rng.next_u64() as u128 * bound) >> 64) as u64).collect();
            (id, v)
        })
        .collect()
}

pub fn run_round(
    cfg: &RoundConfig,
    inputs: &BTreeMap<usize, Vec<u64>>,
) -> Result<RoundReport, RoundError> {
    run_pipeline(cfg, inputs, None)
}

/// Runs the pipeline with one party deviating. With the matching extension
/// enabled the round aborts with the extension's error; otherwise it
/// completes and the report's correctness flag exposes the damage.
pub fn run_adversarial_round(
    cfg: &RoundConfig,
    inputs: &BTreeMap<usize, Vec<u64>>,
    tamper: TamperSpec,
) -> Result<RoundReport, RoundError> {
    run_pipeline(cfg, inputs, Some(tamper))
}

/// Either a real matrix set or the identity pass-through used for the
/// lambda = 1 baseline, where the whole vector is the key vector.
enum CompressionPlan {
    Identity,
    Freeze(Box<FreezeMatrixSet>),
}

struct FrozenUser {
    padded: PaddedVector,
    pair: FrozenPair,
    commitments: Option<CommitmentVector>,
}

fn run_pipeline(
    cfg: &RoundConfig,
    inputs: &BTreeMap<usize, Vec<u64>>,
    tamper: Option<TamperSpec>,
) -> Result<RoundReport, RoundError> {
    cfg.validate()?;
    if inputs.len() != cfg.n || inputs.keys().copied().ne(0..cfg.n) {
        return Err(ConfigError::InputCount { expected: cfg.n, got: inputs.len() }.into());
    }
    let field = cfg.field.field();
    for (&user, v) in inputs {
        if v.len() != cfg.m {
            return Err(
                ConfigError::InputLength { user, expected: cfg.m, got: v.len() }.into()
            );
        }
        field.check_vec(v).map_err(PvfError::from)?;
    }

    // Setup: public parameters, untimed (amortized across rounds).
    let plan = if cfg.lambda == 1 {
        CompressionPlan::Identity
    } else {
        CompressionPlan::Freeze(Box::new(generate_freeze_matrices(
            &cfg.field,
            cfg.lambda,
            cfg.delta,
            derive_seed(cfg.master_seed, "round.matrices", 0),
        )?))
    };
    let pedersen: Option<PedersenParams> = (cfg.extension == Extension::Uce)
        .then(|| pc_setup(cfg.profile, derive_seed(cfg.master_seed, "round.pedersen", 0)));
    let paillier: Option<PaillierKeypair> = (cfg.backend == BackendKind::He).then(|| {
        PaillierKeypair::generate(cfg.profile, derive_seed(cfg.master_seed, "round.paillier", 0))
    });
    let dh_group: Option<DhGroup> =
        (cfg.backend == BackendKind::Mask).then(|| DhGroup::for_profile(cfg.profile));

    // Deterministic dropout draw.
    let dropouts: BTreeSet<usize> = {
        let mut ids: Vec<usize> = (0..cfg.n).collect();
        let mut rng =
            ChaCha20Rng::seed_from_u64(derive_seed(cfg.master_seed, "round.dropouts", 0));
        ids.shuffle(&mut rng);
        ids.into_iter().take(cfg.dropout_count()).collect()
    };

    // Phase 1: freeze. Every user computes; dropouts happen later, at
    // upload time.
    let freeze_clock = Instant::now();
    let mut frozen: BTreeMap<usize, FrozenUser> = BTreeMap::new();
    for (&id, x) in inputs {
        let pad_seed = derive_seed(cfg.master_seed, "round.pad", id as u64);
        let (padded, pair) = match &plan {
            CompressionPlan::Identity => {
                let padded = PaddedVector::unpadded(x.clone());
                let pair = FrozenPair { y: Vec::new(), k: x.clone(), groups: x.len() };
                (padded, pair)
            }
            CompressionPlan::Freeze(set) => {
                let padded = pad_and_group_with_policy(x, set, pad_seed, cfg.pad_policy)?;
                let pair = freeze(&padded, set)?;
                (padded, pair)
            }
        };
        let commitments = pedersen.as_ref().map(|params| {
            commit_vector(
                params,
                &padded,
                derive_seed(cfg.master_seed, "round.zeta", id as u64),
                &field,
            )
        });
        frozen.insert(id, FrozenUser { padded, pair, commitments });
    }
    let freeze_per_user = freeze_clock.elapsed() / cfg.n as u32;

    if let Some(spec) = tamper {
        apply_user_tamper(cfg, &plan, &mut frozen, spec, &field)?;
    }

    // Contract: the backend sees exactly ceil(m'/lambda) * (delta + 1)
    // entries per user. Asserted, never inferred.
    let padded_len = frozen[&0].padded.padded_len();
    let expected_entries = padded_len / cfg.lambda * (cfg.delta + 1);
    for user in frozen.values() {
        assert_eq!(
            user.pair.k.len(),
            expected_entries,
            "key vector violates the backend entry-count contract"
        );
    }

    // Phase 2: secure aggregation over key vectors.
    let backend_inputs: BTreeMap<usize, Vec<u64>> =
        frozen.iter().map(|(&id, u)| (id, u.pair.k.clone())).collect();
    let outcome: AggregationOutcome = match cfg.backend {
        BackendKind::Plain => plain_aggregate(&backend_inputs, &dropouts, &field)?,
        BackendKind::Mask => mask_backend_round(
            &backend_inputs,
            &dropouts,
            cfg.mask_threshold(),
            derive_seed(cfg.master_seed, "round.mask", 0),
            dh_group.as_ref().expect("mask backend implies a group"),
            &field,
        )?,
        BackendKind::He => he_backend_round(
            &backend_inputs,
            &dropouts,
            paillier.as_ref().expect("he backend implies keys"),
            derive_seed(cfg.master_seed, "round.he", 0),
            &field,
        )?,
    };
    assert_eq!(outcome.entries_per_user, expected_entries);
    let backend_timings = outcome.timings;
    let survivors = outcome.survivors.clone();
    let mut secagg_user = outcome.timings.user_total / cfg.n as u32;
    let mut secagg_server = outcome.timings.server;
    let mut user_bytes = outcome.per_user_bytes_sent;

    // Frozen-vector transport. The plaintext form rides along with the
    // backend upload; under result verification only the two masked forms
    // travel and the plaintext is never sent.
    let y_len = frozen[&0].pair.y.len();
    let rve_keys = (cfg.extension == Extension::Rve).then(|| {
        derive_verification_keys(
            derive_seed(cfg.master_seed, "round.rve-shared", 0),
            y_len,
            &field,
        )
    });
    let mut sum_y = vec![0u64; y_len];
    let mut sum_grave = vec![0u64; y_len];
    let mut sum_acute = vec![0u64; y_len];
    if let Some(keys) = &rve_keys {
        let mask_clock = Instant::now();
        let mut masked = BTreeMap::new();
        for (&id, user) in &frozen {
            masked.insert(id, mask_frozen(&user.pair.y, keys, &field)?);
        }
        secagg_user += mask_clock.elapsed() / cfg.n as u32;
        if y_len > 0 {
            user_bytes += 2 * field_vec_wire_len(y_len);
        }
        let sum_clock = Instant::now();
        for id in &survivors {
            field.sum_vec(&mut sum_grave, &masked[id].grave_y);
            field.sum_vec(&mut sum_acute, &masked[id].acute_y);
        }
        secagg_server += sum_clock.elapsed();
    } else {
        if y_len > 0 {
            user_bytes += field_vec_wire_len(y_len);
        }
        let sum_clock = Instant::now();
        for id in &survivors {
            field.sum_vec(&mut sum_y, &frozen[id].pair.y);
        }
        secagg_server += sum_clock.elapsed();
    }
    if let Some(params) = &pedersen {
        // Commitment vector plus the blinding vector revealed afterwards.
        user_bytes += residue_vec_wire_len(padded_len, params.element_bytes());
        user_bytes += field_vec_wire_len(padded_len);
    }

    // Server-side forgery lands on the aggregated sums.
    if let Some(TamperSpec::ServerForgeSumY { index, delta, target }) = tamper {
        let victim = match (cfg.extension, target) {
            (Extension::Rve, ForgeTarget::Acute) => &mut sum_acute,
            (Extension::Rve, ForgeTarget::Grave) => &mut sum_grave,
            _ => &mut sum_y,
        };
        if !victim.is_empty() {
            let index = index % victim.len();
            victim[index] = field.add(victim[index], delta % field.modulus());
        }
    }

    // Phase 3: verify and thaw.
    let (phases, aggregate) = match cfg.thaw_side {
        ThawSide::Server => {
            let SumK::Plain(sum_k) = &outcome.sum_k else {
                unreachable!("validated: server thaw implies a plaintext backend");
            };
            let thaw_clock = Instant::now();
            // Thaw to the padded aggregate; the consistency check runs on
            // it before the padding is truncated away.
            let mut padded_sum = match &plan {
                CompressionPlan::Identity => sum_k.clone(),
                CompressionPlan::Freeze(set) => thaw(&ThawInput {
                    sum_y: &sum_y,
                    sum_k,
                    matrices: set,
                    original_len: padded_len,
                })?,
            };
            let thaw_elapsed = thaw_clock.elapsed();
            let mut verify_time = Duration::ZERO;
            if let Some(params) = &pedersen {
                let verify_clock = Instant::now();
                let survivor_commitments: Vec<&CommitmentVector> = survivors
                    .iter()
                    .map(|id| frozen[id].commitments.as_ref().expect("commitments exist"))
                    .collect();
                let mut zeta_sums = vec![0u128; padded_len];
                for cv in &survivor_commitments {
                    for (acc, &z) in zeta_sums.iter_mut().zip(&cv.zeta) {
                        *acc += z as u128;
                    }
                }
                let check = verify_aggregate_commitments(
                    params,
                    &survivor_commitments,
                    &padded_sum,
                    &zeta_sums,
                    &field,
                )?;
                verify_time = verify_clock.elapsed();
                if let AggregateCheck::Mismatch { index } = check {
                    return Err(RoundError::UceRejected { index });
                }
            }
            padded_sum.truncate(cfg.m);
            (
                PhaseDurations {
                    freeze: freeze_per_user,
                    secagg_user,
                    secagg_server,
                    verify: verify_time,
                    thaw: thaw_elapsed,
                },
                padded_sum,
            )
        }
        ThawSide::User => {
            // A representative surviving user does the post-aggregation
            // work once; every user's computation is identical.
            let mut verify_time = Duration::ZERO;
            let recovered_sum_y = if let Some(keys) = &rve_keys {
                let verify_clock = Instant::now();
                let recovered =
                    verify_frozen_sums(&sum_grave, &sum_acute, keys, survivors.len(), &field)
                        .map_err(|e| match e {
                            RveError::VerificationFailed { index } => {
                                RoundError::RveRejected { index }
                            }
                            other => RoundError::Rve(other),
                        })?;
                verify_time = verify_clock.elapsed();
                recovered
            } else {
                sum_y
            };
            let sum_k = match &outcome.sum_k {
                SumK::Plain(v) => v.clone(),
                SumK::Encrypted(cts) => {
                    let decrypt_clock = Instant::now();
                    let keys = paillier.as_ref().expect("encrypted sum implies keys");
                    let plain = decrypt_aggregate(keys, cts, &field)?;
                    secagg_user += decrypt_clock.elapsed();
                    plain
                }
            };
            let thaw_clock = Instant::now();
            let mut out = match &plan {
                CompressionPlan::Identity => sum_k,
                CompressionPlan::Freeze(set) => thaw(&ThawInput {
                    sum_y: &recovered_sum_y,
                    sum_k: &sum_k,
                    matrices: set,
                    original_len: padded_len,
                })?,
            };
            out.truncate(cfg.m);
            let thaw_elapsed = thaw_clock.elapsed();
            (
                PhaseDurations {
                    freeze: freeze_per_user,
                    secagg_user,
                    secagg_server,
                    verify: verify_time,
                    thaw: thaw_elapsed,
                },
                out,
            )
        }
    };

    Ok(assemble_report(
        cfg,
        inputs,
        survivors,
        aggregate,
        phases,
        user_bytes,
        expected_entries,
        backend_timings,
        &field,
    ))
}

fn apply_user_tamper(
    cfg: &RoundConfig,
    plan: &CompressionPlan,
    frozen: &mut BTreeMap<usize, FrozenUser>,
    spec: TamperSpec,
    field: &Zp,
) -> Result<(), RoundError> {
    match spec {
        TamperSpec::UserInconsistentFreeze { user } => {
            let user = user % cfg.n;
            let state = frozen.get_mut(&user).expect("user ids are dense");
            // Key vector computed from a shifted vector; the frozen vector
            // and commitments stay bound to the original.
            let mut other = state.padded.clone();
            other.bump_entry(0, field);
            state.pair.k = match plan {
                CompressionPlan::Identity => other.entries().to_vec(),
                CompressionPlan::Freeze(set) => freeze(&other, set)?.k,
            };
        }
        TamperSpec::UserWrongAlpha { user } => {
            let user = user % cfg.n;
            let state = frozen.get_mut(&user).expect("user ids are dense");
            match plan {
                CompressionPlan::Identity => {
                    // No residual matrix exists at lambda = 1; model the
                    // mismatch as a directly perturbed key vector.
                    state.pair.k[0] = field.add(state.pair.k[0], 1);
                }
                CompressionPlan::Freeze(set) => {
                    let wrong = set.alpha_perturbed();
                    let mut k = Vec::with_capacity(state.pair.k.len());
                    for group in state.padded.entries().chunks_exact(set.lambda()) {
                        k.extend(wrong.mat_vec(group, field).map_err(PvfError::from)?);
                    }
                    state.pair.k = k;
                }
            }
        }
        TamperSpec::ServerForgeSumY { .. } => {}
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn assemble_report(
    cfg: &RoundConfig,
    inputs: &BTreeMap<usize, Vec<u64>>,
    survivors: BTreeSet<usize>,
    aggregate: Vec<u64>,
    phases: PhaseDurations,
    user_bytes: u64,
    backend_entries_per_user: usize,
    backend_timings: BackendTimings,
    field: &Zp,
) -> RoundReport {
    let mut oracle = vec![0u64; cfg.m];
    for id in &survivors {
        field.sum_vec(&mut oracle, &inputs[id]);
    }
    let correctness = aggregate == oracle;
    let user_thaws = cfg.thaw_side == ThawSide::User;
    let user_compute = phases.freeze
        + phases.secagg_user
        + if cfg.extension == Extension::Rve { phases.verify } else { Duration::ZERO }
        + if user_thaws { phases.thaw } else { Duration::ZERO };
    let server_compute = phases.secagg_server
        + if cfg.extension == Extension::Uce { phases.verify } else { Duration::ZERO }
        + if user_thaws { Duration::ZERO } else { phases.thaw };
    RoundReport {
        survivors,
        aggregate,
        phases,
        user_compute,
        server_compute,
        user_bytes,
        backend_entries_per_user,
        backend_timings,
        correctness,
        warnings: cfg.warnings(),
    }
}

/// One cell execution inside a parameter sweep.
#[derive(Debug, Clone)]
pub struct CampaignCell {
    pub config: RoundConfig,
    pub rep: usize,
    pub result: Result<RoundReport, String>,
}

/// Cartesian parameter grid for [`run_campaign`].
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub lambdas: Vec<usize>,
    pub deltas: Vec<usize>,
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    pub etas: Vec<f64>,
    pub backends: Vec<BackendKind>,
    pub extensions: Vec<Extension>,
}

/// Runs the full cartesian sweep with `repetitions` rounds per cell.
///
/// Identity cells (lambda = 1) always use delta = 0 and are deduplicated,
/// so every sweep has exactly one baseline per surrounding configuration.
/// Input vectors depend only on (n, m, rep): cells that differ in
/// compression parameters aggregate identical workloads. Round errors are
/// recorded in the cell, never fatal to the campaign.
pub fn run_campaign(
    grid: &SweepGrid,
    repetitions: usize,
    profile: SecurityProfile,
    pad_policy: PadPolicy,
    master_seed: u64,
    field: FieldConfig,
) -> Vec<CampaignCell> {
    let mut cells = Vec::new();
    let mut seen = BTreeSet::new();
    for &backend in &grid.backends {
        for &extension in &grid.extensions {
            for &n in &grid.ns {
                for &m in &grid.ms {
                    for &eta in &grid.etas {
                        for &lambda in &grid.lambdas {
                            for &delta in &grid.deltas {
                                let delta = if lambda == 1 { 0 } else { delta };
                                let key = (
                                    backend as u8,
                                    extension as u8,
                                    n,
                                    m,
                                    (eta * 1e6) as u64,
                                    lambda,
                                    delta,
                                );
                                if !seen.insert(key) {
                                    continue;
                                }
                                let thaw_side = match (backend, extension) {
                                    (BackendKind::He, _) => ThawSide::User,
                                    (_, Extension::Rve) => ThawSide::User,
                                    _ => ThawSide::Server,
                                };
                                for rep in 0..repetitions {
                                    let cell_seed = derive_seed(
                                        master_seed,
                                        &format!(
                                            "campaign.{backend}.{extension}.{n}.{m}.{eta}.{lambda}.{delta}"
                                        ),
                                        rep as u64,
                                    );
                                    let cfg = RoundConfig {
                                        n,
                                        m,
                                        lambda,
                                        delta,
                                        eta,
                                        backend,
                                        extension,
                                        thaw_side,
                                        master_seed: cell_seed,
                                        profile,
                                        pad_policy,
                                        field,
                                    };
                                    let inputs = generate_inputs(
                                        &field,
                                        n,
                                        m,
                                        derive_seed(master_seed, &format!("inputs.{n}.{m}"), rep as u64),
                                    );
                                    let result =
                                        run_round(&cfg, &inputs).map_err(|e| e.to_string());
                                    cells.push(CampaignCell { config: cfg, rep, result });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    cells
}

/// Parses the flat `key=value` round configuration format. Recognized keys:
/// n, m, lambda, delta, eta, backend, extension, thaw_side, seed, reps, and
/// optionally profile. Returns the config and the repetition count.
pub fn parse_round_config(text: &str) -> Result<(RoundConfig, usize), ConfigError> {
    let mut cfg = RoundConfig::new(1, 1, 1, 0, 0);
    let mut reps = 1usize;
    let mut thaw_explicit = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Parse(format!(
                "line {}: expected key=value, got {raw:?}",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| ConfigError::Parse(format!("line {}: bad {what}: {value:?}", lineno + 1));
        match key {
            "n" => cfg.n = value.parse().map_err(|_| bad("n"))?,
            "m" => cfg.m = value.parse().map_err(|_| bad("m"))?,
            "lambda" => cfg.lambda = value.parse().map_err(|_| bad("lambda"))?,
            "delta" => cfg.delta = value.parse().map_err(|_| bad("delta"))?,
            "eta" => cfg.eta = value.parse().map_err(|_| bad("eta"))?,
            "backend" => cfg.backend = value.parse()?,
            "extension" => cfg.extension = value.parse()?,
            "thaw_side" => {
                cfg.thaw_side = value.parse()?;
                thaw_explicit = true;
            }
            "seed" => cfg.master_seed = value.parse().map_err(|_| bad("seed"))?,
            "reps" => reps = value.parse().map_err(|_| bad("reps"))?,
            "profile" => {
                cfg.profile = value
                    .parse()
                    .map_err(|e: crate::profile::UnsupportedProfile| ConfigError::Parse(e.to_string()))?
            }
            other => {
                return Err(ConfigError::Parse(format!(
                    "line {}: unknown key {other:?}",
                    lineno + 1
                )));
            }
        }
    }
    if !thaw_explicit {
        cfg.thaw_side = match (cfg.backend, cfg.extension) {
            (BackendKind::He, _) | (_, Extension::Rve) => ThawSide::User,
            _ => ThawSide::Server,
        };
    }
    cfg.validate()?;
    Ok((cfg, reps))
}
