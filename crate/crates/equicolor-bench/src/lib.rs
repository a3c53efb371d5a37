//! Shared fixtures for the criterion benches.

use equicolor::{gen_bounded, Hypergraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The reference pipeline instance: 4096 vertices, 256 edges of 32.
pub fn bounded_instance(seed: u64) -> Hypergraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_bounded(4096, 32, 32, 256, &mut rng).expect("feasible generator budget")
}
