//! Wire formats used for byte accounting and file serialization: field
//! vectors as length-prefixed fixed-width little-endian words, big-number
//! residues as length-prefixed fixed-width big-endian blocks.

use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WireError {
    #[error("buffer truncated: wanted {wanted} more bytes, had {have}")]
    Truncated { wanted: usize, have: usize },
    #[error("declared length {0} is implausibly large")]
    LengthOverflow(u64),
}

/// Encodes a field vector: u64 little-endian count, then 8 bytes per entry.
pub fn encode_field_vec(v: &[u64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + v.len() * 8);
    out.extend_from_slice(&(v.len() as u64).to_le_bytes());
    for &e in v {
        out.extend_from_slice(&e.to_le_bytes());
    }
    out
}

pub fn decode_field_vec(bytes: &[u8]) -> Result<Vec<u64>, WireError> {
    if bytes.len() < 8 {
        return Err(WireError::Truncated { wanted: 8, have: bytes.len() });
    }
    let len = u64::from_le_bytes(bytes[..8].try_into().unwrap());
    let need = (len as usize).checked_mul(8).ok_or(WireError::LengthOverflow(len))?;
    let body = &bytes[8..];
    if body.len() < need {
        return Err(WireError::Truncated { wanted: need, have: body.len() });
    }
    Ok(body[..need]
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Bytes occupied by a field vector of the given length on the wire.
pub fn field_vec_wire_len(len: usize) -> u64 {
    8 + 8 * len as u64
}

/// Bytes occupied by a vector of fixed-width residues (group elements or
/// ciphertexts) of the given element width.
pub fn residue_vec_wire_len(len: usize, element_bytes: usize) -> u64 {
    8 + (len as u64) * element_bytes as u64
}

/// Encodes one residue as a fixed-width big-endian block.
pub fn encode_residue(value: &BigUint, element_bytes: usize) -> Vec<u8> {
    let mut bytes = value.to_bytes_be();
    assert!(bytes.len() <= element_bytes, "residue wider than its declared width");
    let mut out = vec![0u8; element_bytes - bytes.len()];
    out.append(&mut bytes);
    out
}

pub fn decode_residue(bytes: &[u8]) -> BigUint {
    BigUint::from_bytes_be(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_layout() {
        let encoded = encode_field_vec(&[1, 2]);
        assert_eq!(encoded.len(), field_vec_wire_len(2) as usize);
        assert_eq!(&encoded[..8], &2u64.to_le_bytes());
        assert_eq!(&encoded[8..16], &1u64.to_le_bytes());
    }

    #[test]
    fn truncation_is_reported() {
        let mut encoded = encode_field_vec(&[1, 2, 3]);
        encoded.truncate(encoded.len() - 1);
        assert!(matches!(decode_field_vec(&encoded), Err(WireError::Truncated { .. })));
        assert!(matches!(decode_field_vec(&[1, 2]), Err(WireError::Truncated { .. })));
    }

    #[test]
    fn residue_blocks_are_fixed_width() {
        let v = BigUint::from(0xABCDu32);
        let block = encode_residue(&v, 8);
        assert_eq!(block.len(), 8);
        assert_eq!(decode_residue(&block), v);
        assert_eq!(&block[..6], &[0, 0, 0, 0, 0, 0]);
    }

    proptest! {
        #[test]
        fn field_vec_roundtrip(v in proptest::collection::vec(any::<u64>(), 0..64)) {
            prop_assert_eq!(decode_field_vec(&encode_field_vec(&v)).unwrap(), v);
        }
    }
}
