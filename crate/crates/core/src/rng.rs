//! Seeded random streams.
//!
//! Every randomized operation takes an explicit rng so runs are reproducible
//! from a single `u64` seed. A run derives one independent ChaCha stream per
//! concern (task IDs, allocation, init, batches) so adding draws to one stage
//! never shifts the others.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Stream used for the task-ID permutation.
pub const STREAM_TASK_IDS: u64 = 0;
/// Stream used for the contextualise/actor-set allocation.
pub const STREAM_ALLOCATION: u64 = 1;
/// Stream used for network weight initialization.
pub const STREAM_INIT: u64 = 2;
/// Stream used for batch sampling during training.
pub const STREAM_BATCHES: u64 = 3;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn substream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard normal draw via Box-Muller, kept in-crate so initialization is
/// stable across dependency upgrades.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // u1 in (0, 1] so the log is finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Uniformly random permutation of `0..n` (Fisher-Yates).
pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Uniform sample of `k` distinct items from `pool`, order not meaningful.
pub fn sample_distinct<R: Rng>(pool: &[usize], k: usize, rng: &mut R) -> Vec<usize> {
    assert!(k <= pool.len(), "sample size exceeds pool");
    let mut pool = pool.to_vec();
    // Partial Fisher-Yates: the first k slots end up a uniform sample.
    for i in 0..k {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}
