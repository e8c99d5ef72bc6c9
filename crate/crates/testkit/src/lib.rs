//! Test support: synthetic corpora, random trees and brute-force oracles.
//!
//! Nothing here calls into the code paths it is used to check; the oracles
//! recompute every quantity from its definition on plain strings.

pub mod oracles;
pub mod synth;

pub use rand;

use rand::rngs::StdRng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
