//! Finite-time privacy-preserving quantized average consensus over
//! directed graphs.
//!
//! Nodes hold integer initial values and compute their exact average as a
//! ratio of integers by passing integer mass pairs along a round-robin
//! order. Two masking strategies hide individual initial values from
//! colluding curious nodes without disturbing the final average:
//!
//! * [`alg1`]: a negative initial offset repaid in installments at event
//!   firings;
//! * [`alg2`]: zero-sum offsets exchanged with out-neighbors before the
//!   first step.
//!
//! [`sim`] runs mixed populations with per-step conservation audits,
//! [`privacy`] checks topological privacy conditions and brute-forces what
//! a coalition can infer, and [`harness`] reproduces the experiment sweeps.

pub mod alg1;
pub mod alg2;
pub mod error;
pub mod graph;
pub mod harness;
pub mod privacy;
pub mod protocol;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{Digraph, NodeId, Role, RoleMap};
pub use protocol::{MassPair, Message, NodeCore, Ratio, StateVars};
