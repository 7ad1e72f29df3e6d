//! Additively homomorphic Paillier encryption with `g = n + 1`, CRT-
//! accelerated private operations, and the keypair sizes used by the
//! single-private-key aggregation backend.

use crate::bigprime::gen_prime;
use crate::profile::SecurityProfile;
use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::One;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PaillierError {
    #[error("plaintext is not below the modulus")]
    PlaintextTooLarge,
    #[error("ciphertext residue is not below n^2")]
    CiphertextOutOfRange,
    #[error("primes must be distinct")]
    PrimesNotDistinct,
}

/// Public half: everything the aggregating server holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaillierPublicKey {
    n: BigUint,
    n2: BigUint,
}

/// Full keypair held by every user in the single-private-key setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaillierKeypair {
    public: PaillierPublicKey,
    p: BigUint,
    q: BigUint,
    p2: BigUint,
    q2: BigUint,
    // CRT combination of residues mod p^2 and q^2 into one mod n^2.
    p2_inv_mod_q2: BigUint,
    // Decryption constants: h_p = L_p(g^{p-1} mod p^2)^{-1} mod p, etc.
    hp: BigUint,
    hq: BigUint,
    p_inv_mod_q: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext(BigUint);

impl Ciphertext {
    pub fn residue(&self) -> &BigUint {
        &self.0
    }
}

impl PaillierPublicKey {
    pub fn modulus(&self) -> &BigUint {
        &self.n
    }

    pub fn modulus_squared(&self) -> &BigUint {
        &self.n2
    }

    /// Wire width of one ciphertext in bytes.
    pub fn ciphertext_bytes(&self) -> usize {
        self.n2.bits().div_ceil(8) as usize
    }

    /// Public-path encryption: `(1 + n*m) * r^n mod n^2`.
    pub fn encrypt<R: RngCore + ?Sized>(
        &self,
        m: &BigUint,
        rng: &mut R,
    ) -> Result<Ciphertext, PaillierError> {
        if m >= &self.n {
            return Err(PaillierError::PlaintextTooLarge);
        }
        let r = sample_unit(&self.n, rng);
        let gm = (BigUint::one() + &self.n * m) % &self.n2;
        let rn = r.modpow(&self.n, &self.n2);
        Ok(Ciphertext(gm * rn % &self.n2))
    }

    /// Homomorphic addition of plaintexts.
    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
        Ciphertext(&a.0 * &b.0 % &self.n2)
    }

    pub fn check(&self, c: &Ciphertext) -> Result<(), PaillierError> {
        if c.0 >= self.n2 {
            return Err(PaillierError::CiphertextOutOfRange);
        }
        Ok(())
    }
}

fn l_function(x: &BigUint, d: &BigUint) -> BigUint {
    (x - BigUint::one()) / d
}

impl PaillierKeypair {
    /// Deterministic keypair for the given profile: 1024-bit modulus for
    /// standard, 192-bit for test.
    pub fn generate(profile: SecurityProfile, seed: u64) -> Self {
        let bits = match profile {
            SecurityProfile::Standard => 1024,
            SecurityProfile::Test => 192,
        };
        Self::generate_with_modulus_bits(bits, seed)
    }

    pub fn generate_with_modulus_bits(modulus_bits: u64, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let half = modulus_bits / 2;
        let p = gen_prime(half, &mut rng);
        let q = loop {
            let q = gen_prime(half, &mut rng);
            if q != p {
                break q;
            }
        };
        Self::from_primes(p, q).expect("generated primes are distinct")
    }

    /// Builds a keypair from caller-supplied distinct odd primes.
    pub fn from_primes(p: BigUint, q: BigUint) -> Result<Self, PaillierError> {
        if p == q {
            return Err(PaillierError::PrimesNotDistinct);
        }
        let n = &p * &q;
        let n2 = &n * &n;
        let p2 = &p * &p;
        let q2 = &q * &q;
        let p2_inv_mod_q2 = modinv(&p2, &q2);
        let p_inv_mod_q = modinv(&p, &q);
        // g = n + 1; h_p = L_p(g^{p-1} mod p^2)^{-1} mod p.
        let g = &n + BigUint::one();
        let pm1 = &p - BigUint::one();
        let qm1 = &q - BigUint::one();
        let hp = modinv(&(l_function(&g.modpow(&pm1, &p2), &p) % &p), &p);
        let hq = modinv(&(l_function(&g.modpow(&qm1, &q2), &q) % &q), &q);
        Ok(PaillierKeypair {
            public: PaillierPublicKey { n, n2 },
            p,
            q,
            p2,
            q2,
            p2_inv_mod_q2,
            hp,
            hq,
            p_inv_mod_q,
        })
    }

    pub fn public(&self) -> &PaillierPublicKey {
        &self.public
    }

    /// CRT-accelerated encryption, available to keyholders. Produces the
    /// same distribution as the public path.
    pub fn encrypt<R: RngCore + ?Sized>(
        &self,
        m: &BigUint,
        rng: &mut R,
    ) -> Result<Ciphertext, PaillierError> {
        let n = &self.public.n;
        if m >= n {
            return Err(PaillierError::PlaintextTooLarge);
        }
        let r = sample_unit(n, rng);
        let cp = (BigUint::one() + n * m) % &self.p2 * r.modpow(n, &self.p2) % &self.p2;
        let cq = (BigUint::one() + n * m) % &self.q2 * r.modpow(n, &self.q2) % &self.q2;
        Ok(Ciphertext(self.crt_combine(&cp, &cq)))
    }

    fn crt_combine(&self, rp: &BigUint, rq: &BigUint) -> BigUint {
        // x = rp + p^2 * ((rq - rp) * p2^{-1} mod q^2)
        let diff = ((rq + &self.q2) - (rp % &self.q2)) % &self.q2;
        rp + &self.p2 * (diff * &self.p2_inv_mod_q2 % &self.q2)
    }

    pub fn decrypt(&self, c: &Ciphertext) -> Result<BigUint, PaillierError> {
        self.public.check(c)?;
        let pm1 = &self.p - BigUint::one();
        let qm1 = &self.q - BigUint::one();
        let mp = l_function(&c.0.modpow(&pm1, &self.p2), &self.p) * &self.hp % &self.p;
        let mq = l_function(&c.0.modpow(&qm1, &self.q2), &self.q) * &self.hq % &self.q;
        // CRT over p and q.
        let diff = ((&mq + &self.q) - (&mp % &self.q)) % &self.q;
        Ok(&mp + &self.p * (diff * &self.p_inv_mod_q % &self.q))
    }
}

fn modinv(a: &BigUint, m: &BigUint) -> BigUint {
    a.modinv(m).expect("inputs are coprime")
}

// Uniform element of Z_n^*. Only matters for toy moduli; for real key
// sizes a shared factor amounts to factoring n.
fn sample_unit<R: RngCore + ?Sized>(n: &BigUint, rng: &mut R) -> BigUint {
    loop {
        let r = rng.gen_biguint_range(&BigUint::one(), n);
        if r.gcd(n).is_one() {
            return r;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> PaillierKeypair {
        PaillierKeypair::from_primes(BigUint::from(11u8), BigUint::from(13u8)).unwrap()
    }

    #[test]
    fn exhaustive_roundtrip_tiny_modulus() {
        let kp = tiny();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        for m in 0u32..143 {
            let m = BigUint::from(m);
            let c = kp.encrypt(&m, &mut rng).unwrap();
            assert_eq!(kp.decrypt(&c).unwrap(), m);
            let c2 = kp.public().encrypt(&m, &mut rng).unwrap();
            assert_eq!(kp.decrypt(&c2).unwrap(), m);
        }
    }

    #[test]
    fn additive_homomorphism_tiny_exhaustive() {
        let kp = tiny();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for a in (0u32..143).step_by(7) {
            for b in (0u32..143).step_by(11) {
                let ca = kp.encrypt(&BigUint::from(a), &mut rng).unwrap();
                let cb = kp.encrypt(&BigUint::from(b), &mut rng).unwrap();
                let sum = kp.decrypt(&kp.public().add(&ca, &cb)).unwrap();
                assert_eq!(sum, BigUint::from((a + b) % 143));
            }
        }
    }

    #[test]
    fn enc_two_plus_enc_three_is_five() {
        let kp = PaillierKeypair::generate(SecurityProfile::Test, 7);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let c2 = kp.encrypt(&BigUint::from(2u8), &mut rng).unwrap();
        let c3 = kp.encrypt(&BigUint::from(3u8), &mut rng).unwrap();
        assert_eq!(
            kp.decrypt(&kp.public().add(&c2, &c3)).unwrap(),
            BigUint::from(5u8)
        );
    }

    #[test]
    fn crt_path_matches_public_path_semantics() {
        let kp = PaillierKeypair::generate(SecurityProfile::Test, 3);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for i in 0..50u64 {
            let m = BigUint::from(i * 977);
            let fast = kp.encrypt(&m, &mut rng).unwrap();
            let slow = kp.public().encrypt(&m, &mut rng).unwrap();
            assert_eq!(kp.decrypt(&fast).unwrap(), m);
            assert_eq!(kp.decrypt(&slow).unwrap(), m);
        }
    }

    #[test]
    fn rejects_oversized_plaintext_and_ciphertext() {
        let kp = PaillierKeypair::generate(SecurityProfile::Test, 5);
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let n = kp.public().modulus().clone();
        assert_eq!(
            kp.encrypt(&n, &mut rng),
            Err(PaillierError::PlaintextTooLarge)
        );
        let bad = Ciphertext(kp.public().modulus_squared().clone());
        assert_eq!(kp.decrypt(&bad), Err(PaillierError::CiphertextOutOfRange));
    }

    #[test]
    fn keygen_is_deterministic_per_seed() {
        let a = PaillierKeypair::generate(SecurityProfile::Test, 11);
        let b = PaillierKeypair::generate(SecurityProfile::Test, 11);
        assert_eq!(a, b);
        let c = PaillierKeypair::generate(SecurityProfile::Test, 12);
        assert_ne!(a, c);
    }

    #[test]
    fn no_wrap_at_field_boundary() {
        // Summing the maximal field element from many users stays below n,
        // so the decrypted sum equals the integer sum.
        let kp = PaillierKeypair::generate(SecurityProfile::Test, 8);
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let p_field = crate::field::DEFAULT_PRIME;
        let users = 16u64;
        assert!(kp.public().modulus() > &(BigUint::from(users) * BigUint::from(p_field)));
        let entry = BigUint::from(p_field - 1);
        let mut acc = kp.encrypt(&BigUint::from(0u8), &mut rng).unwrap();
        for _ in 0..users {
            let c = kp.encrypt(&entry, &mut rng).unwrap();
            acc = kp.public().add(&acc, &c);
        }
        assert_eq!(kp.decrypt(&acc).unwrap(), BigUint::from(users) * entry);
    }
}
