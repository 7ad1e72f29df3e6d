//! AES-128-CTR pseudorandom expansion of short seeds into long field
//! vectors, used for the self-mask and pairwise-mask streams.

use crate::field::Zp;
use aes::cipher::{KeyIvInit, StreamCipher};
use aes::Aes128;

type Aes128Ctr = ctr::Ctr64LE<Aes128>;

/// Stream of uniform field elements keyed by a 16-byte seed.
pub struct FieldPrg {
    cipher: Aes128Ctr,
    buf: [u8; 8192],
    pos: usize,
    filled: usize,
}

impl FieldPrg {
    pub fn new(key: [u8; 16]) -> Self {
        let iv = [0u8; 16];
        FieldPrg {
            cipher: Aes128Ctr::new(&key.into(), &iv.into()),
            buf: [0u8; 8192],
            pos: 0,
            filled: 0,
        }
    }

    fn next_u64(&mut self) -> u64 {
        if self.pos == self.filled {
            self.buf.fill(0);
            self.cipher.apply_keystream(&mut self.buf);
            self.pos = 0;
            self.filled = self.buf.len();
        }
        let v = u64::from_le_bytes(self.buf[self.pos..self.pos + 8].try_into().unwrap());
        self.pos += 8;
        v
    }

    /// Next uniform field element (rejection sampling, unbiased).
    pub fn next_field(&mut self, field: &Zp) -> u64 {
        let mask = u64::MAX >> (field.modulus() - 1).leading_zeros();
        loop {
            let v = self.next_u64() & mask;
            if v < field.modulus() {
                return v;
            }
        }
    }

    /// Expands the stream into `len` field elements.
    pub fn expand(&mut self, len: usize, field: &Zp) -> Vec<u64> {
        (0..len).map(|_| self.next_field(field)).collect()
    }
}

/// One-shot expansion of a keyed stream into a field vector.
pub fn expand_to_field_vec(key: [u8; 16], len: usize, field: &Zp) -> Vec<u64> {
    FieldPrg::new(key).expand(len, field)
}
