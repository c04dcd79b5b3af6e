//! Deterministic seed derivation.
//!
//! Every stochastic stage of an experiment (ensemble draw, sampling matrix,
//! noise, per-point trials) gets its own seed derived from the master seed
//! and a fixed tag path. Derivation is a SplitMix64 chain, so the mapping is
//! stable across platforms and releases and independent of scheduling.

/// One SplitMix64 step.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a tag path.
///
/// Tags are folded in order; different paths give independent streams.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(master ^ 0x6D70_7231_7365_6564); // "mpr1seed"
    for &tag in tags {
        state = splitmix64(state ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    }
    state
}

/// Stable 64-bit identifier from a byte description.
///
/// FNV-1a; used for content identifiers on ensembles and sampling matrices.
pub fn stable_id(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}
