//! Result verification for user-side thawing: users derive shared secret
//! vectors, submit their frozen vector twice under different maskings, and
//! later check that the two aggregated forms agree, which pins the server
//! to the true frozen sum.

use crate::field::Zp;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RveError {
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no survivors to verify against")]
    NoSurvivors,
    #[error("aggregated frozen sums disagree at index {index}")]
    VerificationFailed { index: usize },
}

/// The shared random vectors: a multiplicative mask (all entries nonzero,
/// hence invertible) and an additive mask. Derived from a seed the users
/// share and the server never sees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationKeys {
    pub kappa1: Vec<u64>,
    pub kappa2: Vec<u64>,
}

/// The two masked forms of one frozen vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedFrozenSubmission {
    pub grave_y: Vec<u64>,
    pub acute_y: Vec<u64>,
}

pub fn derive_verification_keys(shared_seed: u64, len: usize, field: &Zp) -> VerificationKeys {
    let mut rng = ChaCha20Rng::seed_from_u64(shared_seed);
    let kappa1 = (0..len).map(|_| field.sample_nonzero(&mut rng)).collect();
    let kappa2 = (0..len).map(|_| field.sample(&mut rng)).collect();
    VerificationKeys { kappa1, kappa2 }
}

/// Componentwise `kappa1 * y` and `y + kappa2`.
pub fn mask_frozen(
    y: &[u64],
    keys: &VerificationKeys,
    field: &Zp,
) -> Result<MaskedFrozenSubmission, RveError> {
    if y.len() != keys.kappa1.len() {
        return Err(RveError::LengthMismatch(y.len(), keys.kappa1.len()));
    }
    let grave_y = y.iter().zip(&keys.kappa1).map(|(&v, &k)| field.mul(v, k)).collect();
    let acute_y = y.iter().zip(&keys.kappa2).map(|(&v, &k)| field.add(v, k)).collect();
    Ok(MaskedFrozenSubmission { grave_y, acute_y })
}

/// Checks `sum_grave / kappa1 == sum_acute - survivors * kappa2` at every
/// index and returns the recovered frozen sum on success.
pub fn verify_frozen_sums(
    sum_grave: &[u64],
    sum_acute: &[u64],
    keys: &VerificationKeys,
    survivors: usize,
    field: &Zp,
) -> Result<Vec<u64>, RveError> {
    if sum_grave.len() != sum_acute.len() {
        return Err(RveError::LengthMismatch(sum_grave.len(), sum_acute.len()));
    }
    if sum_grave.len() != keys.kappa1.len() {
        return Err(RveError::LengthMismatch(sum_grave.len(), keys.kappa1.len()));
    }
    if survivors == 0 {
        return Err(RveError::NoSurvivors);
    }
    let count = survivors as u64 % field.modulus();
    let mut recovered = Vec::with_capacity(sum_grave.len());
    for index in 0..sum_grave.len() {
        let unmasked = field.mul(sum_grave[index], field.inv(keys.kappa1[index]));
        let expected = field.sub(sum_acute[index], field.mul(count, keys.kappa2[index]));
        if unmasked != expected {
            return Err(RveError::VerificationFailed { index });
        }
        recovered.push(unmasked);
    }
    Ok(recovered)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DEFAULT_PRIME;
    use proptest::prelude::*;

    fn f() -> Zp {
        Zp::new_unchecked(DEFAULT_PRIME)
    }

    #[test]
    fn keys_are_shared_and_invertible() {
        let field = f();
        let a = derive_verification_keys(99, 1000, &field);
        let b = derive_verification_keys(99, 1000, &field);
        assert_eq!(a, b);
        assert!(a.kappa1.iter().all(|&k| k != 0));
        let c = derive_verification_keys(100, 1000, &field);
        assert_ne!(a, c);
    }

    #[test]
    fn masking_worked_example() {
        let field = f();
        let keys = VerificationKeys { kappa1: vec![2], kappa2: vec![3] };
        let sub = mask_frozen(&[4], &keys, &field).unwrap();
        assert_eq!(sub.grave_y, vec![8]);
        assert_eq!(sub.acute_y, vec![7]);
        let recovered = verify_frozen_sums(&sub.grave_y, &sub.acute_y, &keys, 1, &field).unwrap();
        assert_eq!(recovered, vec![4]);
    }

    #[test]
    fn zero_vector_masks_to_kappa2() {
        let field = f();
        let keys = derive_verification_keys(5, 4, &field);
        let sub = mask_frozen(&[0, 0, 0, 0], &keys, &field).unwrap();
        assert_eq!(sub.grave_y, vec![0, 0, 0, 0]);
        assert_eq!(sub.acute_y, keys.kappa2);
    }

    #[test]
    fn tampered_sum_is_detected_at_index() {
        let field = f();
        let keys = derive_verification_keys(7, 3, &field);
        let sub = mask_frozen(&[10, 20, 30], &keys, &field).unwrap();
        let mut grave = sub.grave_y.clone();
        grave[2] = field.add(grave[2], 1);
        assert_eq!(
            verify_frozen_sums(&grave, &sub.acute_y, &keys, 1, &field),
            Err(RveError::VerificationFailed { index: 2 })
        );
    }

    #[test]
    fn exhaustive_single_entry_tampering_small_field() {
        // Over a tiny field, every nonzero additive change to either
        // aggregated form at one index is caught.
        let field = Zp::new_unchecked(251);
        let keys = derive_verification_keys(3, 2, &field);
        let y1 = vec![17, 40];
        let y2 = vec![200, 9];
        let s1 = mask_frozen(&y1, &keys, &field).unwrap();
        let s2 = mask_frozen(&y2, &keys, &field).unwrap();
        let sum_grave: Vec<u64> =
            s1.grave_y.iter().zip(&s2.grave_y).map(|(&a, &b)| field.add(a, b)).collect();
        let sum_acute: Vec<u64> =
            s1.acute_y.iter().zip(&s2.acute_y).map(|(&a, &b)| field.add(a, b)).collect();
        assert!(verify_frozen_sums(&sum_grave, &sum_acute, &keys, 2, &field).is_ok());
        for delta in 1..251u64 {
            let mut grave = sum_grave.clone();
            grave[0] = field.add(grave[0], delta);
            assert!(verify_frozen_sums(&grave, &sum_acute, &keys, 2, &field).is_err());
            let mut acute = sum_acute.clone();
            acute[1] = field.add(acute[1], delta);
            assert!(verify_frozen_sums(&sum_grave, &acute, &keys, 2, &field).is_err());
        }
    }

    #[test]
    fn survivor_count_zero_is_rejected() {
        let field = f();
        let keys = derive_verification_keys(1, 1, &field);
        assert_eq!(
            verify_frozen_sums(&[0], &[0], &keys, 0, &field),
            Err(RveError::NoSurvivors)
        );
    }

    proptest! {
        // Completeness: honest execution always verifies and recovers the
        // plain frozen sum.
        #[test]
        fn honest_rounds_always_verify(
            seed in any::<u64>(),
            n_users in 1usize..8,
            len in 1usize..40,
        ) {
            let field = f();
            let keys = derive_verification_keys(seed, len, &field);
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed ^ 0x5555);
            let ys: Vec<Vec<u64>> = (0..n_users)
                .map(|_| (0..len).map(|_| field.sample(&mut rng)).collect())
                .collect();
            let mut expected = vec![0u64; len];
            let mut sum_grave = vec![0u64; len];
            let mut sum_acute = vec![0u64; len];
            for y in &ys {
                field.sum_vec(&mut expected, y);
                let sub = mask_frozen(y, &keys, &field).unwrap();
                field.sum_vec(&mut sum_grave, &sub.grave_y);
                field.sum_vec(&mut sum_acute, &sub.acute_y);
            }
            let recovered = verify_frozen_sums(&sum_grave, &sum_acute, &keys, n_users, &field).unwrap();
            prop_assert_eq!(recovered, expected);
        }
    }
}
