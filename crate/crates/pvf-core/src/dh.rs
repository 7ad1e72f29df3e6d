//! Diffie-Hellman key agreement over a safe-prime group, plus derivation of
//! symmetric mask seeds from agreed secrets.

use crate::kdf::kdf_bytes;
use crate::profile::SecurityProfile;
use num_bigint::{BigUint, RandBigInt};
use rand::RngCore;

/// RFC 3526 group 14: 2048-bit MODP safe prime, generator 2.
const MODP_2048_HEX: &str = concat!(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1",
    "29024E088A67CC74020BBEA63B139B22514A08798E3404DD",
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245",
    "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED",
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D",
    "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F",
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D",
    "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B",
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9",
    "DE2BCBF6955817183995497CEA956AE515D2261898FA0510",
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF"
);

/// Small safe prime used by the fast test profile.
const TEST_PRIME: u64 = 0x4000_0000_0000_19c3;

/// A multiplicative group modulo a safe prime, with the exponent width used
/// for secret keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DhGroup {
    prime: BigUint,
    generator: BigUint,
    exponent_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DhKeypair {
    pub secret: BigUint,
    pub public: BigUint,
}

impl DhGroup {
    pub fn for_profile(profile: SecurityProfile) -> Self {
        match profile {
            SecurityProfile::Standard => DhGroup {
                prime: BigUint::parse_bytes(MODP_2048_HEX.as_bytes(), 16)
                    .expect("constant parses"),
                generator: BigUint::from(2u8),
                exponent_bits: 256,
            },
            SecurityProfile::Test => DhGroup {
                prime: BigUint::from(TEST_PRIME),
                generator: BigUint::from(2u8),
                exponent_bits: 62,
            },
        }
    }

    pub fn prime(&self) -> &BigUint {
        &self.prime
    }

    /// Wire width of one group element in bytes.
    pub fn element_bytes(&self) -> usize {
        self.prime.bits().div_ceil(8) as usize
    }

    pub fn exponent_bits(&self) -> u64 {
        self.exponent_bits
    }

    pub fn keygen<R: RngCore + ?Sized>(&self, rng: &mut R) -> DhKeypair {
        let secret = loop {
            let s = rng.gen_biguint(self.exponent_bits);
            if s.bits() >= 2 {
                break s;
            }
        };
        let public = self.generator.modpow(&secret, &self.prime);
        DhKeypair { secret, public }
    }

    /// Recomputes the public key for a known secret.
    pub fn public_of(&self, secret: &BigUint) -> BigUint {
        self.generator.modpow(secret, &self.prime)
    }

    /// Derives the symmetric pairwise seed both endpoints agree on. The
    /// user indices only label the pair; the secret material is the DH
    /// shared value.
    pub fn pair_seed(&self, own_secret: &BigUint, peer_public: &BigUint, a: usize, b: usize) -> [u8; 32] {
        let shared = peer_public.modpow(own_secret, &self.prime);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut material = shared.to_bytes_be();
        material.extend_from_slice(&(lo as u64).to_le_bytes());
        material.extend_from_slice(&(hi as u64).to_le_bytes());
        kdf_bytes("pvf.dh.pair-seed", &material)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigprime::is_prime;
    use num_bigint::BigUint;
    use num_traits::One;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn test_group_prime_is_a_safe_prime() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let p = BigUint::from(TEST_PRIME);
        let q: BigUint = (&p - BigUint::one()) >> 1;
        assert!(is_prime(&p, &mut rng));
        assert!(is_prime(&q, &mut rng));
    }

    #[test]
    fn agreement_is_symmetric() {
        for profile in [SecurityProfile::Test, SecurityProfile::Standard] {
            let group = DhGroup::for_profile(profile);
            let mut rng = ChaCha20Rng::seed_from_u64(5);
            let alice = group.keygen(&mut rng);
            let bob = group.keygen(&mut rng);
            let s1 = group.pair_seed(&alice.secret, &bob.public, 0, 1);
            let s2 = group.pair_seed(&bob.secret, &alice.public, 1, 0);
            assert_eq!(s1, s2);
        }
    }

    #[test]
    fn distinct_pairs_get_distinct_seeds() {
        let group = DhGroup::for_profile(SecurityProfile::Test);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let a = group.keygen(&mut rng);
        let b = group.keygen(&mut rng);
        let c = group.keygen(&mut rng);
        let ab = group.pair_seed(&a.secret, &b.public, 0, 1);
        let ac = group.pair_seed(&a.secret, &c.public, 0, 2);
        assert_ne!(ab, ac);
    }

    #[test]
    fn standard_group_sizes() {
        let group = DhGroup::for_profile(SecurityProfile::Standard);
        assert_eq!(group.prime().bits(), 2048);
        assert_eq!(group.element_bytes(), 256);
    }
}
