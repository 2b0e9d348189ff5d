//! Deterministic seed derivation.
//!
//! A single master seed fans out into independent per-stage streams so that
//! one `--seed` flag reproduces an entire experiment. Derivation is
//! splitmix64 over the master seed mixed with a stage tag and an index,
//! which keeps streams decorrelated without any shared RNG state.

/// One splitmix64 step.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Derive the `index`-th seed of the stream named `tag` from `master`.
pub fn derive(master: u64, tag: &str, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ fnv1a(tag)).wrapping_add(index))
}
