//! Probabilistic primality testing and prime generation over `BigUint`,
//! shared by the commitment group, the Paillier keypair, and the key
//! agreement group.

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, Zero};
use rand::RngCore;

const MILLER_RABIN_ROUNDS: usize = 40;

// Sieve by the first few hundred primes before spending modpows.
fn small_primes() -> &'static [u64] {
    use std::sync::OnceLock;
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut primes = Vec::with_capacity(303);
        let mut n = 2u64;
        while primes.len() < 303 {
            if crate::field::is_prime_u64(n) {
                primes.push(n);
            }
            n += 1;
        }
        primes
    })
}

pub fn is_prime<R: RngCore + ?Sized>(n: &BigUint, rng: &mut R) -> bool {
    if n < &BigUint::from(2u8) {
        return false;
    }
    for &sp in small_primes() {
        let spb = BigUint::from(sp);
        if n == &spb {
            return true;
        }
        if (n % spb).is_zero() {
            return false;
        }
    }
    let one = BigUint::one();
    let two = BigUint::from(2u8);
    let n_minus_1 = n - &one;
    let mut d = n_minus_1.clone();
    let mut r = 0u64;
    while (&d % &two).is_zero() {
        d >>= 1;
        r += 1;
    }
    'witness: for _ in 0..MILLER_RABIN_ROUNDS {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Uniform random prime with exactly `bits` bits.
pub fn gen_prime<R: RngCore + ?Sized>(bits: u64, rng: &mut R) -> BigUint {
    assert!(bits >= 8);
    loop {
        let mut candidate = rng.gen_biguint(bits);
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        if is_prime(&candidate, rng) {
            return candidate;
        }
    }
}

/// Finds a prime `p = q * r + 1` with exactly `p_bits` bits for the given
/// prime subgroup order `q`, returning `(p, r)`.
pub fn gen_schnorr_modulus<R: RngCore + ?Sized>(
    q: &BigUint,
    p_bits: u64,
    rng: &mut R,
) -> (BigUint, BigUint) {
    let q_bits = q.bits();
    assert!(p_bits > q_bits + 8);
    let r_bits = p_bits - q_bits;
    loop {
        let mut r = rng.gen_biguint(r_bits);
        r.set_bit(r_bits - 1, true);
        r.set_bit(0, false); // keep p = q*r + 1 odd for odd q
        let p = q * &r + BigUint::one();
        if p.bits() != p_bits {
            continue;
        }
        if is_prime(&p, rng) {
            return (p, r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn small_values() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert!(is_prime(&BigUint::from(2u8), &mut rng));
        assert!(is_prime(&BigUint::from(65537u32), &mut rng));
        assert!(!is_prime(&BigUint::from(1u8), &mut rng));
        assert!(!is_prime(&BigUint::from(561u32), &mut rng));
        assert!(is_prime(&BigUint::from((1u64 << 61) - 1), &mut rng));
    }

    #[test]
    fn generated_primes_have_requested_size() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let p = gen_prime(96, &mut rng);
        assert_eq!(p.bits(), 96);
        assert!(is_prime(&p, &mut rng));
    }

    #[test]
    fn schnorr_modulus_structure() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let q = gen_prime(64, &mut rng);
        let (p, r) = gen_schnorr_modulus(&q, 160, &mut rng);
        assert_eq!(p.bits(), 160);
        assert_eq!(&q * &r + BigUint::one(), p);
        assert!(is_prime(&p, &mut rng));
    }
}
