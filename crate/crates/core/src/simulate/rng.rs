//! Reproducible sharded sampling.
//!
//! Samples are split into fixed-size shards. Shard `s` of a run with seed
//! `seed` draws from ChaCha8 keyed by `seed` on stream `s`, so shards never
//! overlap and the result does not depend on how rayon schedules them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const SHARD_SIZE: u64 = 8192;

pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Runs `work(rng, count)` on every shard and folds the results with `combine`.
/// `combine` must be associative and commutative (counts are summed).
pub(crate) fn run_sharded<T, W, C>(samples: u64, seed: u64, zero: T, work: W, combine: C) -> T
where
    T: Send + Sync + Clone,
    W: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
    C: Fn(T, T) -> T + Sync + Send,
{
    let shards = samples.div_ceil(SHARD_SIZE);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let count = SHARD_SIZE.min(samples - s * SHARD_SIZE);
            work(&mut shard_rng(seed, s), count)
        })
        .reduce(|| zero.clone(), &combine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_differ_and_repeat() {
        let a: u64 = shard_rng(7, 0).random();
        let b: u64 = shard_rng(7, 1).random();
        let c: u64 = shard_rng(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn shards_cover_every_sample() {
        for samples in [1u64, 8191, 8192, 8193, 50_000] {
            let total = run_sharded(samples, 1, 0u64, |_, n| n, |x, y| x + y);
            assert_eq!(total, samples);
        }
    }

    #[test]
    fn result_is_independent_of_thread_count() {
        let work = |rng: &mut ChaCha8Rng, n: u64| (0..n).filter(|_| rng.random::<f64>() < 0.3).count() as u64;
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = serial.install(|| run_sharded(100_000, 9, 0u64, work, |x, y| x + y));
        let b = wide.install(|| run_sharded(100_000, 9, 0u64, work, |x, y| x + y));
        assert_eq!(a, b);
    }
}
