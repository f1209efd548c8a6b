//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! seeded from a root seed plus a path of integer coordinates, so results do
//! not depend on evaluation order or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(root), |acc, &p| mix(acc ^ mix(p)))
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived(root: u64, path: &[u64]) -> Rng {
    seeded(derive_seed(root, path))
}
