//! Pedersen commitments over a Schnorr subgroup of a prime field, and the
//! aggregate-consistency check that binds every user's frozen and key
//! vectors to one committed original vector.

use crate::bigprime::{gen_prime, gen_schnorr_modulus, is_prime};
use crate::field::Zp;
use crate::kdf::kdf_bytes;
use crate::profile::SecurityProfile;
use crate::pvf::PaddedVector;
use num_bigint::BigUint;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PedersenError {
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid group parameters: {0}")]
    InvalidParams(String),
}

/// Public commitment parameters: a prime-order subgroup of Z_P^* with two
/// generators whose mutual discrete log is unknown (h is hashed to the
/// group from a fixed public string).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PedersenParams {
    modulus: BigUint,
    order: BigUint,
    g: BigUint,
    h: BigUint,
}

/// Per-entry commitments to one padded vector together with the private
/// blinding vector (revealed to the server only at verification time).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitmentVector {
    pub commitments: Vec<BigUint>,
    pub zeta: Vec<u64>,
}

/// Outcome of the aggregate-consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregateCheck {
    Consistent,
    Mismatch { index: usize },
}

/// Generates commitment parameters: a 256-bit-order subgroup of a 2048-bit
/// prime field in the standard profile, a 64-bit-order subgroup of a
/// 160-bit field in the test profile. Deterministic per seed.
pub fn pc_setup(profile: SecurityProfile, seed: u64) -> PedersenParams {
    let (order_bits, modulus_bits) = match profile {
        SecurityProfile::Standard => (256, 2048),
        SecurityProfile::Test => (64, 160),
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let order = gen_prime(order_bits, &mut rng);
    let (modulus, cofactor) = gen_schnorr_modulus(&order, modulus_bits, &mut rng);
    let one = BigUint::one();
    // First small base that lands on a generator of the order-q subgroup.
    let mut base = BigUint::from(2u8);
    let g = loop {
        let candidate = base.modpow(&cofactor, &modulus);
        if candidate != one {
            break candidate;
        }
        base += 1u8;
    };
    let h = hash_to_subgroup(&modulus, &cofactor, &g);
    PedersenParams { modulus, order, g, h }
}

fn hash_to_subgroup(modulus: &BigUint, cofactor: &BigUint, g: &BigUint) -> BigUint {
    let one = BigUint::one();
    let width = modulus.bits().div_ceil(8) as usize + 16;
    let mut counter = 0u64;
    loop {
        let mut material = modulus.to_bytes_be();
        material.extend_from_slice(&counter.to_le_bytes());
        let mut bytes = Vec::with_capacity(width);
        let mut block = 0u64;
        while bytes.len() < width {
            let mut chunk = material.clone();
            chunk.extend_from_slice(&block.to_le_bytes());
            bytes.extend_from_slice(&kdf_bytes("pvf.pedersen.h", &chunk));
            block += 1;
        }
        bytes.truncate(width);
        let u = BigUint::from_bytes_be(&bytes) % modulus;
        let h = u.modpow(cofactor, modulus);
        if h != one && &h != g {
            return h;
        }
        counter += 1;
    }
}

impl PedersenParams {
    /// Builds parameters from explicit constants, checking the group
    /// structure. Intended for tiny hand-picked groups in tests and demos.
    pub fn from_raw(
        modulus: BigUint,
        order: BigUint,
        g: BigUint,
        h: BigUint,
    ) -> Result<Self, PedersenError> {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        if !is_prime(&modulus, &mut rng) {
            return Err(PedersenError::InvalidParams("modulus is not prime".into()));
        }
        if !is_prime(&order, &mut rng) {
            return Err(PedersenError::InvalidParams("order is not prime".into()));
        }
        let one = BigUint::one();
        for (name, e) in [("g", &g), ("h", &h)] {
            if e <= &one || e >= &modulus {
                return Err(PedersenError::InvalidParams(format!("{name} out of range")));
            }
            if e.modpow(&order, &modulus) != one {
                return Err(PedersenError::InvalidParams(format!(
                    "{name} does not have the claimed order"
                )));
            }
        }
        if g == h {
            return Err(PedersenError::InvalidParams("g and h must differ".into()));
        }
        Ok(PedersenParams { modulus, order, g, h })
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn generators(&self) -> (&BigUint, &BigUint) {
        (&self.g, &self.h)
    }

    /// Wire width of one group element in bytes (big-endian residues).
    pub fn element_bytes(&self) -> usize {
        self.modulus.bits().div_ceil(8) as usize
    }

    /// `g^value * h^blind mod P`.
    pub fn commit(&self, value: u64, blind: u64) -> BigUint {
        self.g.modpow(&BigUint::from(value), &self.modulus)
            * self.h.modpow(&BigUint::from(blind), &self.modulus)
            % &self.modulus
    }
}

/// Commits to every entry of the padded vector with fresh uniform blinding
/// drawn from the seed.
pub fn commit_vector(
    params: &PedersenParams,
    xp: &PaddedVector,
    seed: u64,
    field: &Zp,
) -> CommitmentVector {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let zeta: Vec<u64> = (0..xp.padded_len()).map(|_| field.sample(&mut rng)).collect();
    let commitments = xp
        .entries()
        .iter()
        .zip(&zeta)
        .map(|(&x, &z)| params.commit(x, z))
        .collect();
    CommitmentVector { commitments, zeta }
}

/// Direct opening check: does `c` commit to `(s, t)`?
pub fn pc_reveal(params: &PedersenParams, c: &BigUint, s: u64, t: u64) -> bool {
    &params.commit(s, t) == c
}

/// Checks the per-position product of all survivors' commitments against
/// the thawed padded aggregate and the exact integer sums of the revealed
/// blinding vectors.
///
/// The aggregate is only known modulo the data prime p while the committed
/// exponents sum over the integers, so each position is accepted if the
/// product matches `g^(sum + w*p) h^zeta_sum` for some wrap count
/// `w < survivors`. Any such match proves consistency mod p, which is what
/// thawing delivers.
pub fn verify_aggregate_commitments(
    params: &PedersenParams,
    users: &[&CommitmentVector],
    sum: &[u64],
    zeta_sums: &[u128],
    field: &Zp,
) -> Result<AggregateCheck, PedersenError> {
    if sum.len() != zeta_sums.len() {
        return Err(PedersenError::LengthMismatch(sum.len(), zeta_sums.len()));
    }
    for user in users {
        if user.commitments.len() != sum.len() {
            return Err(PedersenError::LengthMismatch(user.commitments.len(), sum.len()));
        }
    }
    let modulus = &params.modulus;
    let g_p = params.g.modpow(&BigUint::from(field.modulus()), modulus);
    for r in 0..sum.len() {
        let mut product = BigUint::one();
        for user in users {
            product = product * &user.commitments[r] % modulus;
        }
        let mut rhs = params.g.modpow(&BigUint::from(sum[r]), modulus)
            * params.h.modpow(&BigUint::from(zeta_sums[r]), modulus)
            % modulus;
        let mut matched = product == rhs;
        let mut wraps = 1;
        while !matched && wraps < users.len() {
            rhs = rhs * &g_p % modulus;
            matched = product == rhs;
            wraps += 1;
        }
        if !matched {
            return Ok(AggregateCheck::Mismatch { index: r });
        }
    }
    Ok(AggregateCheck::Consistent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldConfig;
    use crate::linalg::generate_freeze_matrices;
    use crate::pvf::pad_and_group;

    fn test_params() -> PedersenParams {
        pc_setup(SecurityProfile::Test, 42)
    }

    /// Order-11 subgroup of Z_23^*.
    fn tiny_params() -> PedersenParams {
        PedersenParams::from_raw(
            BigUint::from(23u8),
            BigUint::from(11u8),
            BigUint::from(2u8),
            BigUint::from(3u8),
        )
        .unwrap()
    }

    #[test]
    fn setup_is_deterministic_and_sized() {
        let a = test_params();
        let b = pc_setup(SecurityProfile::Test, 42);
        assert_eq!(a, b);
        assert_eq!(a.order().bits(), 64);
        assert_eq!(a.modulus().bits(), 160);
        let one = BigUint::one();
        let (g, h) = a.generators();
        assert_eq!(g.modpow(a.order(), a.modulus()), one);
        assert_eq!(h.modpow(a.order(), a.modulus()), one);
    }

    #[test]
    fn group_law_roundtrip() {
        let params = test_params();
        let (g, _) = params.generators();
        let a = 123456u64;
        let b = 987654u64;
        let ga = g.modpow(&BigUint::from(a), params.modulus());
        let gb = g.modpow(&BigUint::from(b), params.modulus());
        let gab = g.modpow(&BigUint::from(a + b), params.modulus());
        assert_eq!(ga * gb % params.modulus(), gab);
    }

    #[test]
    fn reveal_accepts_and_rejects() {
        let params = test_params();
        let c = params.commit(5, 7);
        assert!(pc_reveal(&params, &c, 5, 7));
        assert!(!pc_reveal(&params, &c, 5, 8));
        assert!(pc_reveal(&params, &BigUint::one(), 0, 0));
    }

    #[test]
    fn homomorphism_identity() {
        let params = test_params();
        let c1 = params.commit(10, 3);
        let c2 = params.commit(20, 9);
        let combined = c1 * c2 % params.modulus();
        assert_eq!(combined, params.commit(30, 12));
    }

    #[test]
    fn commitments_to_padded_vector_open_entrywise() {
        let cfg = FieldConfig::default();
        let field = cfg.field();
        let matrices = generate_freeze_matrices(&cfg, 3, 0, 1).unwrap();
        let params = test_params();
        let xp = pad_and_group(&[10, 20, 30, 40], &matrices, 5).unwrap();
        let cv = commit_vector(&params, &xp, 77, &field);
        assert_eq!(cv.commitments.len(), xp.padded_len());
        for (i, &x) in xp.entries().iter().enumerate() {
            assert!(pc_reveal(&params, &cv.commitments[i], x, cv.zeta[i]));
        }
        // Determinism.
        let cv2 = commit_vector(&params, &xp, 77, &field);
        assert_eq!(cv, cv2);
    }

    #[test]
    fn aggregate_check_accepts_honest_sums_with_wraps() {
        let cfg = FieldConfig::default();
        let field = cfg.field();
        let matrices = generate_freeze_matrices(&cfg, 3, 0, 2).unwrap();
        let params = test_params();
        // Large entries force modular wrap-around in the aggregate.
        let big = field.modulus() - 3;
        let users_x = [vec![big, 1, 2, big], vec![big, 4, 5, big], vec![big, 6, 7, big]];
        let mut padded = Vec::new();
        let mut cvs = Vec::new();
        for (i, x) in users_x.iter().enumerate() {
            let xp = pad_and_group(x, &matrices, i as u64).unwrap();
            cvs.push(commit_vector(&params, &xp, 1000 + i as u64, &field));
            padded.push(xp);
        }
        let m_padded = padded[0].padded_len();
        let mut sum = vec![0u64; m_padded];
        let mut zeta_sums = vec![0u128; m_padded];
        for (xp, cv) in padded.iter().zip(&cvs) {
            for r in 0..m_padded {
                sum[r] = field.add(sum[r], xp.entries()[r]);
                zeta_sums[r] += cv.zeta[r] as u128;
            }
        }
        let refs: Vec<&CommitmentVector> = cvs.iter().collect();
        assert_eq!(
            verify_aggregate_commitments(&params, &refs, &sum, &zeta_sums, &field).unwrap(),
            AggregateCheck::Consistent
        );
    }

    #[test]
    fn aggregate_check_flags_tampered_position() {
        let cfg = FieldConfig::default();
        let field = cfg.field();
        let matrices = generate_freeze_matrices(&cfg, 3, 0, 2).unwrap();
        let params = test_params();
        let xp = pad_and_group(&[1, 2, 3], &matrices, 0).unwrap();
        let cv = commit_vector(&params, &xp, 9, &field);
        let mut sum: Vec<u64> = xp.entries().to_vec();
        let zeta_sums: Vec<u128> = cv.zeta.iter().map(|&z| z as u128).collect();
        sum[1] = field.add(sum[1], 1);
        let got =
            verify_aggregate_commitments(&params, &[&cv], &sum, &zeta_sums, &field).unwrap();
        assert_eq!(got, AggregateCheck::Mismatch { index: 1 });
    }

    #[test]
    fn aggregate_check_rejects_length_mismatch() {
        let params = test_params();
        let field = FieldConfig::default().field();
        let cv = CommitmentVector { commitments: vec![BigUint::one()], zeta: vec![0] };
        assert!(verify_aggregate_commitments(&params, &[&cv], &[1, 2], &[0], &field).is_err());
    }

    #[test]
    fn tiny_group_hiding_is_exact() {
        // Exhaustively over the blinding space, commitments to two distinct
        // values induce identical distributions over the subgroup.
        let params = tiny_params();
        let spread = |x: u64| {
            let mut all: Vec<BigUint> = (0..11u64).map(|z| params.commit(x, z)).collect();
            all.sort();
            all
        };
        let a = spread(3);
        let b = spread(7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 11);
        let mut dedup = a.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 11, "each subgroup element appears exactly once");
    }

    #[test]
    fn from_raw_validates_structure() {
        assert!(PedersenParams::from_raw(
            BigUint::from(24u8),
            BigUint::from(11u8),
            BigUint::from(2u8),
            BigUint::from(3u8),
        )
        .is_err());
        assert!(PedersenParams::from_raw(
            BigUint::from(23u8),
            BigUint::from(11u8),
            BigUint::from(5u8), // order 22, not 11
            BigUint::from(3u8),
        )
        .is_err());
        assert!(PedersenParams::from_raw(
            BigUint::from(23u8),
            BigUint::from(11u8),
            BigUint::from(2u8),
            BigUint::from(2u8),
        )
        .is_err());
    }
}
