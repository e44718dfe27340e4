//! Named, reproducible RNG sub-streams derived from one master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the sub-stream identified by `tag` and integer coordinates.
/// Independent of scheduling: the same inputs always give the same seed.
pub fn stream_seed(master: u64, tag: &str, coords: &[u64]) -> u64 {
    let mut h = splitmix(master);
    for b in tag.bytes() {
        h = splitmix(h ^ b as u64);
    }
    for &c in coords {
        h = splitmix(h ^ c);
    }
    h
}

pub fn stream(master: u64, tag: &str, coords: &[u64]) -> Rng {
    Rng::seed_from_u64(stream_seed(master, tag, coords))
}

pub fn seeded(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}
