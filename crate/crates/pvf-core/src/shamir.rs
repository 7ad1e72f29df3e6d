//! Standard (t, n) Shamir secret sharing over Z_p with Lagrange
//! interpolation at zero.

use crate::field::Zp;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShamirError {
    #[error("threshold {t} out of range for {n} shares")]
    BadThreshold { t: usize, n: usize },
    #[error("share count {n} exceeds the field size")]
    TooManyShares { n: usize },
    #[error("need at least {t} shares, got {got}")]
    NotEnoughShares { t: usize, got: usize },
    #[error("duplicate evaluation point {0}")]
    DuplicatePoint(u64),
}

/// One share of a secret: the evaluation of a degree `t - 1` polynomial at
/// the holder's nonzero point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShamirShare {
    pub holder: usize,
    pub x: u64,
    pub y: u64,
}

/// Splits `secret` into `n` shares with reconstruction threshold `t`.
/// Holder `i` receives the evaluation at `x = i + 1`.
pub fn shamir_share(
    secret: u64,
    t: usize,
    n: usize,
    seed: u64,
    field: &Zp,
) -> Result<Vec<ShamirShare>, ShamirError> {
    if t < 1 || t > n {
        return Err(ShamirError::BadThreshold { t, n });
    }
    if n as u128 >= field.modulus() as u128 {
        return Err(ShamirError::TooManyShares { n });
    }
    debug_assert!(secret < field.modulus());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut coeffs = Vec::with_capacity(t);
    coeffs.push(secret);
    coeffs.extend((1..t).map(|_| field.sample(&mut rng)));
    let shares = (0..n)
        .map(|holder| {
            let x = (holder + 1) as u64;
            // Horner evaluation from the top coefficient down.
            let mut y = 0u64;
            for &c in coeffs.iter().rev() {
                y = field.add(field.mul(y, x), c);
            }
            ShamirShare { holder, x, y }
        })
        .collect();
    Ok(shares)
}

/// Reconstructs the secret from at least `t` shares by Lagrange
/// interpolation at zero. Only the first `t` shares are used.
pub fn shamir_reconstruct(
    shares: &[ShamirShare],
    t: usize,
    field: &Zp,
) -> Result<u64, ShamirError> {
    if shares.len() < t {
        return Err(ShamirError::NotEnoughShares { t, got: shares.len() });
    }
    let used = &shares[..t];
    for (i, s) in used.iter().enumerate() {
        if used[..i].iter().any(|o| o.x == s.x) {
            return Err(ShamirError::DuplicatePoint(s.x));
        }
    }
    let mut secret = 0u64;
    for (i, si) in used.iter().enumerate() {
        let mut num = 1u64;
        let mut den = 1u64;
        for (j, sj) in used.iter().enumerate() {
            if i == j {
                continue;
            }
            num = field.mul(num, sj.x);
            den = field.mul(den, field.sub(sj.x, si.x));
        }
        let weight = field.mul(num, field.inv(den));
        secret = field.add(secret, field.mul(si.y, weight));
    }
    Ok(secret)
}
