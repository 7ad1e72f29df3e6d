//! Domain-separated seed and key derivation. Every piece of randomness in a
//! simulated round is derived from one master seed through these helpers, so
//! rounds are reproducible from `(config, inputs)` alone.

use sha2::{Digest, Sha256};

fn digest(master: u64, domain: &str, index: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"pvf.kdf.v1");
    h.update(master.to_le_bytes());
    h.update((domain.len() as u64).to_le_bytes());
    h.update(domain.as_bytes());
    h.update(index.to_le_bytes());
    h.finalize().into()
}

/// Derives a child seed for an independent RNG stream.
pub fn derive_seed(master: u64, domain: &str, index: u64) -> u64 {
    let d = digest(master, domain, index);
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Derives a 16-byte cipher key (for the AES-CTR expander).
pub fn derive_key16(master: u64, domain: &str, index: u64) -> [u8; 16] {
    let d = digest(master, domain, index);
    d[..16].try_into().unwrap()
}

/// Hashes arbitrary bytes down to a 32-byte value under a context label;
/// used to turn agreed shared secrets into seeds.
pub fn kdf_bytes(context: &str, material: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"pvf.kdf.bytes.v1");
    h.update((context.len() as u64).to_le_bytes());
    h.update(context.as_bytes());
    h.update(material);
    h.finalize().into()
}
