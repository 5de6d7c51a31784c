//! Deterministic seed derivation so that every random draw in an experiment
//! is a pure function of the configured base seed.

/// FNV-1a over a byte slice. Also used for state hashing in [`crate::agent`].
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Derive a child seed from a base seed, a label, and an index.
///
/// The derivation is stable across runs and platforms, so recorded seeds
/// replay bit-for-bit.
pub fn derive_seed(base: u64, label: &str, index: u64) -> u64 {
    let mut bytes = Vec::with_capacity(16 + label.len());
    bytes.extend_from_slice(&base.to_le_bytes());
    bytes.extend_from_slice(label.as_bytes());
    bytes.extend_from_slice(&index.to_le_bytes());
    fnv1a64(&bytes)
}
