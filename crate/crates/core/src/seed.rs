//! Seed streams: every Monte Carlo trial draws from its own ChaCha stream, so results do
//! not depend on how trials are scheduled across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream reserved for bootstrap resampling of a run's trial outputs.
pub const BOOTSTRAP_STREAM: u64 = u64::MAX;
/// Stream reserved for drawing random point pairs in experiments.
pub const PAIRS_STREAM: u64 = u64::MAX - 1;

/// RNG for stream `stream` of `master_seed`.
pub fn stream_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// `split(master_seed, i)`: the 64-bit seed handed to trial `i`.
pub fn split(master_seed: u64, i: u64) -> u64 {
    stream_rng(master_seed, i).next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_pure_and_distinct() {
        assert_eq!(split(11, 3), split(11, 3));
        assert_ne!(split(11, 3), split(11, 4));
        assert_ne!(split(11, 3), split(12, 3));
    }
}
