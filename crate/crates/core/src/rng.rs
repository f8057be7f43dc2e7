//! Keyed random streams. Every consumer derives its generator from
//! `(seed, domain, major, minor)`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Distinct purposes that draw randomness from the same user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Population,
    Crossover,
    Mutation,
    AnalogNoise,
    DigitalNoise,
    Calibration,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Population => 0x01,
            Domain::Crossover => 0x02,
            Domain::Mutation => 0x03,
            Domain::AnalogNoise => 0x11,
            Domain::DigitalNoise => 0x12,
            Domain::Calibration => 0x13,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for item `minor` of step `major` in `domain`.
pub fn stream(seed: u64, domain: Domain, major: u64, minor: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(seed) ^ domain.tag());
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(key ^ major.rotate_left(32)));
    rng.set_stream(minor);
    rng
}
