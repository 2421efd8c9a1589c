//! Seed derivation. Every randomized component receives its own stream,
//! derived from a master seed, so results never depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// One step of the splitmix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `stream`-th child of `master`.
#[inline]
pub fn derive(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream.wrapping_add(0xA076_1D64_78BD_642F)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn child_rng(master: u64, stream: u64) -> Rng {
    rng(derive(master, stream))
}

/// Named streams for the pipeline stages.
pub mod stream {
    pub const SPLIT: u64 = 1;
    pub const RFE: u64 = 2;
    pub const PSO: u64 = 3;
    pub const FITNESS: u64 = 4;
    pub const FOREST: u64 = 5;
    pub const GBT: u64 = 6;
    pub const VOTE_WEIGHTS: u64 = 7;
    pub const FOLDS: u64 = 8;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct() {
        let a: Vec<u64> = (0..100).map(|i| derive(42, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(a.len(), b.len());
        assert_ne!(derive(1, 0), derive(2, 0));
    }
}
