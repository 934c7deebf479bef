//! Seeded randomness helpers.
//!
//! All randomness in the crate comes from [`ChaCha8Rng`], whose output
//! stream is fixed across platforms and releases of `rand_chacha`.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 64-bit FNV-1a. Used to derive stable per-name seeds.
pub fn stable_hash(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed for a named sub-task, stable across runs and platforms.
pub fn derive_seed(master: u64, name: &str) -> u64 {
    master.wrapping_add(stable_hash(name))
}
