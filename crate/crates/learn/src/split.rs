//! Seeded train/test split.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG streams used by the learning stage. Scenario generation owns the
/// plain user-index streams of the scenario seed, so everything here lives
/// in disjoint high ranges.
pub mod streams {
    pub const THZ_PILOT_BASE: u64 = 1 << 32;
    pub const SPLIT: u64 = 2 << 32;
    pub const ESTIMATOR_BASE: u64 = 3 << 32;
    pub const PREDICTOR_BASE: u64 = 4 << 32;
    pub const BASELINE_BASE: u64 = 5 << 32;
    /// Offsets within a trainer's base stream.
    pub const OFF_INIT: u64 = 0;
    pub const OFF_SHUFFLE: u64 = 1;
    pub const OFF_DROPOUT: u64 = 2;
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Splits `0..n` into train/test index lists by a seeded shuffle.
///
/// The same `(n, train_fraction, seed)` always yields the same split, so
/// every pipeline command sees identical partitions.
pub fn train_test_split(n: usize, train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(seed, streams::SPLIT);
    idx.shuffle(&mut rng);
    let mut n_train = (n as f64 * train_fraction).round() as usize;
    if n >= 2 {
        n_train = n_train.clamp(1, n - 1);
    } else {
        n_train = n;
    }
    let test = idx.split_off(n_train);
    (idx, test)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let (train_a, test_a) = train_test_split(100, 0.8, 7);
        let (train_b, test_b) = train_test_split(100, 0.8, 7);
        assert_eq!(train_a, train_b);
        assert_eq!(test_a, test_b);
        assert_eq!(train_a.len(), 80);
        assert_eq!(test_a.len(), 20);
        let mut all: Vec<usize> = train_a.iter().chain(&test_a).cloned().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn different_seeds_differ() {
        let (a, _) = train_test_split(50, 0.8, 1);
        let (b, _) = train_test_split(50, 0.8, 2);
        assert_ne!(a, b);
    }

    #[test]
    fn tiny_sets_keep_both_sides_nonempty() {
        let (train, test) = train_test_split(2, 0.8, 3);
        assert_eq!(train.len(), 1);
        assert_eq!(test.len(), 1);
    }
}
