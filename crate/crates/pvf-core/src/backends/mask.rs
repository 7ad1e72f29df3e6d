//! Pairwise-masking backend with threshold recovery: users agree on
//! pairwise seeds, double-mask their vectors with a self mask and signed
//! pairwise masks, and secret-share the material the server needs to
//! unmask after dropouts.
//!
//! Dropped users complete key agreement, sharing, and masking, but their
//! vector upload never arrives; the server takes the expensive path of
//! reconstructing their agreement secrets to cancel the orphaned pairwise
//! masks, and the survivors' self-mask seeds to remove the rest.

use super::{check_inputs, AggregationOutcome, BackendError, BackendTimings, SumK};
use crate::dh::{DhGroup, DhKeypair};
use crate::field::Zp;
use crate::kdf::{derive_seed, kdf_bytes};
use crate::prg::expand_to_field_vec;
use crate::shamir::{shamir_reconstruct, shamir_share, ShamirShare};
use crate::wire;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

/// Limb split used to push agreement secrets through field-element Shamir
/// shares.
fn limb_layout(group: &DhGroup, field: &Zp) -> (u64, usize) {
    let limb_bits = 32u64.min(field.modulus().next_power_of_two().trailing_zeros() as u64 - 1);
    let count = group.exponent_bits().div_ceil(limb_bits) as usize;
    (limb_bits, count)
}

fn secret_to_limbs(secret: &BigUint, limb_bits: u64, count: usize) -> Vec<u64> {
    let mask = (BigUint::from(1u8) << limb_bits) - 1u8;
    (0..count)
        .map(|i| ((secret >> (i as u64 * limb_bits)) & &mask).to_u64().unwrap())
        .collect()
}

fn limbs_to_secret(limbs: &[u64], limb_bits: u64) -> BigUint {
    let mut out = BigUint::from(0u8);
    for (i, &limb) in limbs.iter().enumerate() {
        out |= BigUint::from(limb) << (i as u64 * limb_bits);
    }
    out
}

fn self_mask_key(b: u64) -> [u8; 16] {
    let d = kdf_bytes("pvf.mask.self", &b.to_le_bytes());
    d[..16].try_into().unwrap()
}

struct UserState {
    id: usize,
    keypair: DhKeypair,
    self_seed: u64,
    self_shares: Vec<ShamirShare>,
    secret_shares: Vec<Vec<ShamirShare>>,
    masked: Vec<u64>,
}

/// Runs one pairwise-masking round. Deterministic for a fixed seed and
/// dropout set; the plaintext result equals the plain oracle on survivors.
pub fn mask_backend_round(
    inputs: &BTreeMap<usize, Vec<u64>>,
    dropouts: &BTreeSet<usize>,
    threshold: usize,
    seed: u64,
    group: &DhGroup,
    field: &Zp,
) -> Result<AggregationOutcome, BackendError> {
    let (len, survivors) = check_inputs(inputs, dropouts)?;
    let n = inputs.len();
    if threshold < 1 || threshold > n {
        return Err(BackendError::BadThreshold { t: threshold, n });
    }
    if survivors.len() < threshold {
        return Err(BackendError::UnrecoverableRound {
            survivors: survivors.len(),
            threshold,
        });
    }
    let (limb_bits, limb_count) = limb_layout(group, field);
    let ids: Vec<usize> = inputs.keys().copied().collect();

    let user_clock = Instant::now();

    // Key agreement advertisement plus self-mask seed draw.
    let mut users: Vec<UserState> = ids
        .iter()
        .map(|&id| {
            let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "mask.user", id as u64));
            let keypair = group.keygen(&mut rng);
            let self_seed = field.sample(&mut rng);
            UserState {
                id,
                keypair,
                self_seed,
                self_shares: Vec::new(),
                secret_shares: Vec::new(),
                masked: Vec::new(),
            }
        })
        .collect();

    // Sharing: each user splits its self-mask seed and its agreement
    // secret (as limbs) across all users.
    for idx in 0..n {
        let id = users[idx].id as u64;
        users[idx].self_shares = shamir_share(
            users[idx].self_seed,
            threshold,
            n,
            derive_seed(seed, "mask.share.self", id),
            field,
        )?;
        let limbs = secret_to_limbs(&users[idx].keypair.secret, limb_bits, limb_count);
        users[idx].secret_shares = limbs
            .iter()
            .enumerate()
            .map(|(li, &limb)| {
                shamir_share(
                    limb,
                    threshold,
                    n,
                    derive_seed(seed, "mask.share.sk", id << 16 | li as u64),
                    field,
                )
            })
            .collect::<Result<_, _>>()?;
    }

    // Masking: every user (dropouts included) computes its upload.
    for idx in 0..n {
        let mut masked = inputs[&users[idx].id].clone();
        let self_stream = expand_to_field_vec(self_mask_key(users[idx].self_seed), len, field);
        for (m, s) in masked.iter_mut().zip(&self_stream) {
            *m = field.add(*m, *s);
        }
        for peer in 0..n {
            if peer == idx {
                continue;
            }
            let pair = group.pair_seed(
                &users[idx].keypair.secret,
                &users[peer].keypair.public,
                users[idx].id,
                users[peer].id,
            );
            let stream = expand_to_field_vec(pair[..16].try_into().unwrap(), len, field);
            if users[idx].id < users[peer].id {
                for (m, s) in masked.iter_mut().zip(&stream) {
                    *m = field.add(*m, *s);
                }
            } else {
                for (m, s) in masked.iter_mut().zip(&stream) {
                    *m = field.sub(*m, *s);
                }
            }
        }
        users[idx].masked = masked;
    }

    let user_total = user_clock.elapsed();

    // Server: aggregate survivor uploads, then unmask.
    let server_clock = Instant::now();
    let mut sum = vec![0u64; len];
    for user in &users {
        if survivors.contains(&user.id) {
            field.sum_vec(&mut sum, &user.masked);
        }
    }

    // Responding share set: the first `threshold` survivors.
    let responders: Vec<usize> = ids
        .iter()
        .enumerate()
        .filter(|(_, id)| survivors.contains(id))
        .map(|(idx, _)| idx)
        .take(threshold)
        .collect();

    // Remove survivors' self masks.
    for (idx, user) in users.iter().enumerate() {
        if !survivors.contains(&user.id) {
            continue;
        }
        let shares: Vec<ShamirShare> =
            responders.iter().map(|&r| users[idx].self_shares[r]).collect();
        let b = shamir_reconstruct(&shares, threshold, field)?;
        let stream = expand_to_field_vec(self_mask_key(b), len, field);
        for (m, s) in sum.iter_mut().zip(&stream) {
            *m = field.sub(*m, *s);
        }
    }

    // Cancel pairwise masks left over from dropped users.
    for (idx, dropped) in users.iter().enumerate() {
        if survivors.contains(&dropped.id) {
            continue;
        }
        let limbs: Vec<u64> = (0..limb_count)
            .map(|li| {
                let shares: Vec<ShamirShare> =
                    responders.iter().map(|&r| users[idx].secret_shares[li][r]).collect();
                shamir_reconstruct(&shares, threshold, field)
            })
            .collect::<Result<_, _>>()?;
        let secret = limbs_to_secret(&limbs, limb_bits);
        for survivor in &users {
            if !survivors.contains(&survivor.id) {
                continue;
            }
            let pair =
                group.pair_seed(&secret, &survivor.keypair.public, dropped.id, survivor.id);
            let stream = expand_to_field_vec(pair[..16].try_into().unwrap(), len, field);
            // Survivor i added sign(i, j) * stream; subtract the same term.
            if survivor.id < dropped.id {
                for (m, s) in sum.iter_mut().zip(&stream) {
                    *m = field.sub(*m, *s);
                }
            } else {
                for (m, s) in sum.iter_mut().zip(&stream) {
                    *m = field.add(*m, *s);
                }
            }
        }
    }
    let server = server_clock.elapsed();

    // A fully participating user sends: its public key, the two share
    // fan-outs, the masked vector, and the recovery responses.
    let share_bytes = 16u64; // evaluation point + value
    let fanout = (n as u64 - 1) * (1 + limb_count as u64) * share_bytes;
    let recovery = (dropouts.len() as u64 * limb_count as u64
        + survivors.len() as u64)
        * share_bytes;
    let per_user_bytes_sent = group.element_bytes() as u64
        + fanout
        + wire::field_vec_wire_len(len)
        + recovery;

    Ok(AggregationOutcome {
        survivors,
        sum_k: SumK::Plain(sum),
        entries_per_user: len,
        per_user_bytes_sent,
        timings: BackendTimings { user_total, server },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::plain_aggregate;
    use crate::field::DEFAULT_PRIME;
    use crate::profile::SecurityProfile;
    use proptest::prelude::*;

    fn f() -> Zp {
        Zp::new_unchecked(DEFAULT_PRIME)
    }

    fn group() -> DhGroup {
        DhGroup::for_profile(SecurityProfile::Test)
    }

    fn random_inputs(n: usize, m: usize, seed: u64) -> BTreeMap<usize, Vec<u64>> {
        let field = f();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..n).map(|id| (id, (0..m).map(|_| field.sample(&mut rng)).collect())).collect()
    }

    fn expect_plain(out: &AggregationOutcome) -> &[u64] {
        match &out.sum_k {
            SumK::Plain(v) => v,
            SumK::Encrypted(_) => panic!("mask backend must produce plaintext"),
        }
    }

    #[test]
    fn matches_oracle_without_dropouts() {
        let inputs = random_inputs(3, 8, 1);
        let none = BTreeSet::new();
        let out = mask_backend_round(&inputs, &none, 2, 77, &group(), &f()).unwrap();
        let oracle = plain_aggregate(&inputs, &none, &f()).unwrap();
        assert_eq!(out.sum_k, oracle.sum_k);
    }

    #[test]
    fn matches_oracle_with_dropout() {
        let inputs = random_inputs(3, 8, 2);
        let dropouts: BTreeSet<usize> = [1].into();
        let out = mask_backend_round(&inputs, &dropouts, 2, 78, &group(), &f()).unwrap();
        let oracle = plain_aggregate(&inputs, &dropouts, &f()).unwrap();
        assert_eq!(out.sum_k, oracle.sum_k);
        assert_eq!(out.survivors, [0, 2].into());
    }

    #[test]
    fn threshold_violation_is_unrecoverable() {
        let inputs = random_inputs(3, 4, 3);
        let dropouts: BTreeSet<usize> = [2].into();
        assert_eq!(
            mask_backend_round(&inputs, &dropouts, 3, 79, &group(), &f()),
            Err(BackendError::UnrecoverableRound { survivors: 2, threshold: 3 })
        );
    }

    #[test]
    fn bad_threshold_is_rejected() {
        let inputs = random_inputs(3, 4, 4);
        let none = BTreeSet::new();
        assert!(matches!(
            mask_backend_round(&inputs, &none, 0, 80, &group(), &f()),
            Err(BackendError::BadThreshold { .. })
        ));
        assert!(matches!(
            mask_backend_round(&inputs, &none, 4, 80, &group(), &f()),
            Err(BackendError::BadThreshold { .. })
        ));
    }

    #[test]
    fn deterministic_per_seed() {
        let inputs = random_inputs(4, 16, 5);
        let dropouts: BTreeSet<usize> = [3].into();
        let a = mask_backend_round(&inputs, &dropouts, 3, 81, &group(), &f()).unwrap();
        let b = mask_backend_round(&inputs, &dropouts, 3, 81, &group(), &f()).unwrap();
        assert_eq!(a.sum_k, b.sum_k);
        assert_eq!(a.per_user_bytes_sent, b.per_user_bytes_sent);
    }

    #[test]
    fn single_user_round_works() {
        let inputs = random_inputs(1, 5, 6);
        let none = BTreeSet::new();
        let out = mask_backend_round(&inputs, &none, 1, 82, &group(), &f()).unwrap();
        assert_eq!(expect_plain(&out), inputs[&0].as_slice());
    }

    #[test]
    fn limb_roundtrip_covers_full_secret() {
        let g = group();
        let (limb_bits, count) = limb_layout(&g, &f());
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let kp = g.keygen(&mut rng);
        let limbs = secret_to_limbs(&kp.secret, limb_bits, count);
        assert!(limbs.iter().all(|&l| l < f().modulus()));
        assert_eq!(limbs_to_secret(&limbs, limb_bits), kp.secret);
    }

    #[test]
    fn standard_profile_group_also_cancels() {
        let inputs = random_inputs(3, 4, 7);
        let dropouts: BTreeSet<usize> = [0].into();
        let g = DhGroup::for_profile(SecurityProfile::Standard);
        let out = mask_backend_round(&inputs, &dropouts, 2, 83, &g, &f()).unwrap();
        let oracle = plain_aggregate(&inputs, &dropouts, &f()).unwrap();
        assert_eq!(out.sum_k, oracle.sum_k);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn oracle_equivalence_random(
            seed in any::<u64>(),
            n in 1usize..9,
            m in 1usize..24,
            drop_mask in any::<u16>(),
        ) {
            let field = f();
            let inputs = random_inputs(n, m, seed);
            // Keep at least ceil(2n/3) survivors.
            let threshold = n.div_ceil(3).max(1).min(n);
            let mut dropouts: BTreeSet<usize> = BTreeSet::new();
            for id in 0..n {
                if drop_mask >> id & 1 == 1 && n - dropouts.len() - 1 >= threshold {
                    dropouts.insert(id);
                }
            }
            let out = mask_backend_round(&inputs, &dropouts, threshold, seed ^ 1, &group(), &field).unwrap();
            let oracle = plain_aggregate(&inputs, &dropouts, &field).unwrap();
            prop_assert_eq!(out.sum_k, oracle.sum_k);
        }
    }
}
