//! Seeded fixtures shared by the benchmarks.

use rand::Rng;
use skewclass::rng::seeded;
use skewclass::{SequenceBatch, VectorDataset};

/// `n` points in `dim` dimensions with a 10:3:1 class profile.
pub fn skewed_points(n: usize, dim: usize, seed: u64) -> VectorDataset {
    let mut rng = seeded(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let labels = (0..n)
        .map(|i| match i % 14 {
            0..=9 => 0,
            10..=12 => 1,
            _ => 2,
        })
        .collect();
    VectorDataset::numbered(rows, labels).expect("consistent fixture")
}

/// `n` random token rows of length up to `max_len` over `vocab` ids.
pub fn token_batch(n: usize, max_len: usize, vocab: usize, classes: usize, seed: u64) -> SequenceBatch {
    let mut rng = seeded(seed);
    let rows: Vec<Vec<u32>> = (0..n)
        .map(|_| {
            (0..rng.gen_range(1..=max_len))
                .map(|_| rng.gen_range(1..vocab as u32))
                .collect()
        })
        .collect();
    let labels = (0..n).map(|i| i % classes).collect();
    SequenceBatch::from_rows(&rows, labels, max_len)
}
