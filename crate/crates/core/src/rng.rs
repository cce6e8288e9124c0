//! Seed derivation for independent, schedule-independent random streams.
//!
//! Every consumer of randomness draws from a ChaCha stream keyed by
//! `(master seed, domain, index)`, so results do not depend on the order or
//! thread on which streams are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Randomness domains. Adding a domain never perturbs the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Fleet = 1,
    Photovoltaic = 2,
    Optimizer = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the 64-bit seed of sub-stream `index` in `domain`.
pub fn derive_seed(master: u64, domain: Domain, index: u64) -> u64 {
    let a = splitmix64(master ^ splitmix64(domain as u64));
    splitmix64(a ^ splitmix64(index.wrapping_add(0xA5A5_A5A5)))
}

pub fn stream(master: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, domain, index))
}
