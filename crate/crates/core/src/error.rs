use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("no strongly connected digraph found for n={n}, p={p} after {attempts} attempts")]
    RetryBudgetExhausted { n: usize, p: f64, attempts: u32 },

    #[error("node {node} is not an out-neighbor of node {of}")]
    NotAnOutNeighbor { node: NodeId, of: NodeId },

    #[error("offset message from node {sender} to node {receiver} does not follow an edge")]
    NotAnInNeighbor { sender: NodeId, receiver: NodeId },

    #[error("infeasible offset configuration: {0}")]
    InfeasibleOffsets(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("event-trigger conditions do not hold at node {0}")]
    NotTriggered(NodeId),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("conservation audit failed at step {step}: {detail}")]
    Audit { step: u64, detail: String },

    #[error("hypothesis space of {size} assignments exceeds the budget of {budget}")]
    BudgetExceeded { size: u128, budget: u128 },

    #[error("trace does not carry per-step messages; rerun with full tracing")]
    TraceTooShallow,

    #[error("run did not converge within {0} steps")]
    NotConverged(u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
