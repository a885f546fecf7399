//! Feature-extractor training through classifier anonymization.
//!
//! The extractor is trained against a stream of freshly solved weak
//! classifiers, each fitted on a small class-covering batch of frozen
//! features, instead of one jointly trained classifier. The crate contains
//! the dense network core, dataset tooling, the weak-classifier solvers, the
//! anonymized and joint trainers, the geometric/statistical analysis suite
//! and a configuration-driven experiment runner.

pub mod analysis;
pub mod checkpoint;
pub mod datasets;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod linalg;
pub mod nn;
pub mod render;
pub mod trainers;
pub mod weak;

pub use error::{FocaError, Result};
pub use exec::Exec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The crate-wide RNG: ChaCha8 seeded from `seed`, with `stream` selecting an
/// independent sequence for each consumer of the same seed.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed; used to give every repetition/iteration its own
/// reproducible stream.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
