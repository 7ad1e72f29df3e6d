//! Exact modular arithmetic in the prime field Z_p used for all vector and
//! matrix computations.

use rand::RngCore;
use thiserror::Error;

/// Default prime modulus, the Mersenne prime 2^61 - 1.
pub const DEFAULT_PRIME: u64 = (1 << 61) - 1;
/// Default inclusive upper bound on raw input entries (32-bit space).
pub const DEFAULT_MAX_ENTRY: u64 = u32::MAX as u64;
/// Default maximum supported user count.
pub const DEFAULT_MAX_USERS: u64 = 1 << 28;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("prime {p} too small: must exceed n_max * max_entry = {bound}")]
    PrimeTooSmall { p: u64, bound: u128 },
    #[error("entry {value} at index {index} is not a field element (p = {p})")]
    OutOfRange { index: usize, value: u64, p: u64 },
}

/// Arithmetic in Z_p for a fixed prime p. All operations are exact; no
/// floating point is involved anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Zp {
    p: u64,
}

impl Zp {
    /// Builds the field without a primality check. Callers outside tests
    /// should go through [`FieldConfig`].
    pub fn new_unchecked(p: u64) -> Self {
        debug_assert!(p >= 2);
        Zp { p }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a as u128 + b as u128;
        if s >= self.p as u128 {
            (s - self.p as u128) as u64
        } else {
            s as u64
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + (self.p - b)
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a as u128 * b as u128 % self.p as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem. Panics on zero.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "zero has no multiplicative inverse");
        self.pow(a, self.p - 2)
    }

    /// Uniform field element by rejection sampling, unbiased for any p.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        let mask = u64::MAX >> (self.p - 1).leading_zeros();
        loop {
            let v = rng.next_u64() & mask;
            if v < self.p {
                return v;
            }
        }
    }

    /// Uniform nonzero field element.
    pub fn sample_nonzero<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        loop {
            let v = self.sample(rng);
            if v != 0 {
                return v;
            }
        }
    }

    pub fn sum_vec(&self, acc: &mut [u64], v: &[u64]) {
        debug_assert_eq!(acc.len(), v.len());
        for (a, &b) in acc.iter_mut().zip(v) {
            *a = self.add(*a, b);
        }
    }

    pub fn check_vec(&self, v: &[u64]) -> Result<(), FieldError> {
        for (index, &value) in v.iter().enumerate() {
            if value >= self.p {
                return Err(FieldError::OutOfRange {
                    index,
                    value,
                    p: self.p,
                });
            }
        }
        Ok(())
    }
}

/// Public field parameters shared by every participant: the prime modulus,
/// the entry bound for raw inputs, and the maximum number of users the
/// deployment supports. The constructor enforces `p > n_max * max_entry`, so
/// sums of bounded entries never wrap relative to their integer sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldConfig {
    p: u64,
    max_entry: u64,
    n_max: u64,
}

impl FieldConfig {
    pub fn new(p: u64, max_entry: u64, n_max: u64) -> Result<Self, FieldError> {
        if !is_prime_u64(p) {
            return Err(FieldError::NotPrime(p));
        }
        let bound = n_max as u128 * max_entry as u128;
        if p as u128 <= bound {
            return Err(FieldError::PrimeTooSmall { p, bound });
        }
        Ok(FieldConfig { p, max_entry, n_max })
    }

    pub fn field(&self) -> Zp {
        Zp::new_unchecked(self.p)
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn max_entry(&self) -> u64 {
        self.max_entry
    }

    pub fn max_users(&self) -> u64 {
        self.n_max
    }
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig::new(DEFAULT_PRIME, DEFAULT_MAX_ENTRY, DEFAULT_MAX_USERS)
            .expect("default field parameters are consistent")
    }
}

/// Deterministic Miller-Rabin for u64 (the witness set below is exact for
/// all 64-bit integers).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &sp in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == sp {
            return true;
        }
        if n % sp == 0 {
            return false;
        }
    }
    let field = Zp::new_unchecked(n);
    let mut d = n - 1;
    let mut r = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        r += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = field.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = field.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn default_config_is_valid() {
        let cfg = FieldConfig::default();
        assert_eq!(cfg.prime(), DEFAULT_PRIME);
        // 2^61 - 1 > 2^28 * (2^32 - 1)
        assert!(cfg.prime() as u128 > cfg.max_users() as u128 * cfg.max_entry() as u128);
    }

    #[test]
    fn rejects_composite_modulus() {
        assert_eq!(
            FieldConfig::new(1 << 61, 10, 10),
            Err(FieldError::NotPrime(1 << 61))
        );
    }

    #[test]
    fn rejects_small_prime_vs_bounds() {
        assert!(matches!(
            FieldConfig::new(101, 100, 100),
            Err(FieldError::PrimeTooSmall { .. })
        ));
    }

    #[test]
    fn primality_known_values() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(DEFAULT_PRIME));
        assert!(is_prime_u64(65537));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(561)); // Carmichael
        assert!(!is_prime_u64((1 << 61) - 3));
    }

    #[test]
    fn arithmetic_wraps_correctly() {
        let f = Zp::new_unchecked(DEFAULT_PRIME);
        let a = DEFAULT_PRIME - 1;
        assert_eq!(f.add(a, 5), 4);
        assert_eq!(f.sub(3, 5), DEFAULT_PRIME - 2);
        assert_eq!(f.mul(a, a), f.pow(a, 2));
        assert_eq!(f.neg(0), 0);
        assert_eq!(f.add(f.neg(17), 17), 0);
    }

    #[test]
    fn inverse_roundtrip() {
        let f = Zp::new_unchecked(DEFAULT_PRIME);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = f.sample_nonzero(&mut rng);
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
    }

    #[test]
    fn sampling_is_in_range_and_deterministic() {
        let f = Zp::new_unchecked(251);
        let mut r1 = ChaCha20Rng::seed_from_u64(9);
        let mut r2 = ChaCha20Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let a = f.sample(&mut r1);
            assert!(a < 251);
            assert_eq!(a, f.sample(&mut r2));
        }
    }
}
