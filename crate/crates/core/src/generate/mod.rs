//! Seeded instance generators.

mod adversarial;
mod rng;
mod uniform;

pub use adversarial::{gen_adversarial, lower_bound_ratio, AdversarialInstance, AdversaryParams};
pub use rng::{uniform_inclusive, SeededRng};
pub use uniform::{gen_uniform, UniformParams};
