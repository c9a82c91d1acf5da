//! Deterministic seed derivation for parallel sampling.
//!
//! All randomness in the crate flows from a single master seed. Sub-streams
//! are keyed by integer tags (level index, sample index, purpose tags) via
//! SplitMix64, so every sample point owns an independent generator and
//! results do not depend on evaluation order or thread count.

use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

/// SplitMix64 finalizer; full-period mixing of a 64-bit state.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a stream tag.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_mul(0xA076_1D64_78BD_642F)))
}

/// Generator for sub-stream `tag` of `seed`.
pub fn stream_rng(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let a = derive_seed(42, 0);
        let b = derive_seed(42, 1);
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(42, 0));
    }

    #[test]
    fn streams_are_independent_of_visit_order() {
        let mut r0 = stream_rng(7, 0);
        let mut r1 = stream_rng(7, 1);
        let x1: f64 = r1.random();
        let x0: f64 = r0.random();
        let mut r0b = stream_rng(7, 0);
        let mut r1b = stream_rng(7, 1);
        assert_eq!(x0, r0b.random::<f64>());
        assert_eq!(x1, r1b.random::<f64>());
    }
}
