//! What a coalition of curious nodes can learn about a node's initial value.

mod adversary;
mod checks;

pub use adversary::{adversary_enumerate, interior_protocols, interior_states, observe, AdversaryView, HypothesisSpace, InferenceResult, Observation};
pub use checks::{event_offset_privacy, zero_sum_privacy, PrivacyCondition, PrivacyVerdict};
