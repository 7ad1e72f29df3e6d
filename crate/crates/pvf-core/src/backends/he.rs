//! Single-private-key additively homomorphic backend: every user holds the
//! Paillier private key, the server holds only the public part and can
//! therefore aggregate but never read the sum.

use super::{check_inputs, AggregationOutcome, BackendError, BackendTimings, SumK};
use crate::field::Zp;
use crate::kdf::derive_seed;
use crate::paillier::{Ciphertext, PaillierKeypair};
use crate::wire;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

/// Runs one HE round: users encrypt entrywise, the server multiplies the
/// survivors' ciphertexts entrywise. The outcome carries the encrypted sum;
/// decryption happens on the user side via [`decrypt_aggregate`].
pub fn he_backend_round(
    inputs: &BTreeMap<usize, Vec<u64>>,
    dropouts: &BTreeSet<usize>,
    keys: &PaillierKeypair,
    seed: u64,
    field: &Zp,
) -> Result<AggregationOutcome, BackendError> {
    let (len, survivors) = check_inputs(inputs, dropouts)?;
    let n = inputs.len();
    // Sums must not wrap modulo the Paillier modulus.
    let bound = BigUint::from(n as u64) * BigUint::from(field.modulus());
    if keys.public().modulus() <= &bound {
        return Err(BackendError::ModulusTooSmall { users: n });
    }

    let user_clock = Instant::now();
    let mut encrypted: BTreeMap<usize, Vec<Ciphertext>> = BTreeMap::new();
    for (&id, vector) in inputs {
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(seed, "he.user", id as u64));
        let cts = vector
            .iter()
            .map(|&entry| keys.encrypt(&BigUint::from(entry), &mut rng))
            .collect::<Result<Vec<_>, _>>()?;
        encrypted.insert(id, cts);
    }
    let user_total = user_clock.elapsed();

    let server_clock = Instant::now();
    let mut iter = survivors.iter();
    let first = iter.next().expect("survivor set checked nonempty");
    let mut sum = encrypted[first].clone();
    for id in iter {
        for (acc, c) in sum.iter_mut().zip(&encrypted[id]) {
            *acc = keys.public().add(acc, c);
        }
    }
    let server = server_clock.elapsed();

    Ok(AggregationOutcome {
        survivors,
        sum_k: SumK::Encrypted(sum),
        entries_per_user: len,
        per_user_bytes_sent: wire::residue_vec_wire_len(len, keys.public().ciphertext_bytes()),
        timings: BackendTimings { user_total, server },
    })
}

/// Keyholder-side decryption of an encrypted aggregate, reduced into the
/// data field.
pub fn decrypt_aggregate(
    keys: &PaillierKeypair,
    sum: &[Ciphertext],
    field: &Zp,
) -> Result<Vec<u64>, BackendError> {
    let p = BigUint::from(field.modulus());
    sum.iter()
        .map(|c| {
            let m = keys.decrypt(c)?;
            Ok((m % &p).to_u64().expect("residue below a 64-bit modulus"))
        })
        .collect()
}
