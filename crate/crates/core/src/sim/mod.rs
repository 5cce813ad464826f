//! Deterministic synchronous simulator for mixed protocol populations.

mod config;
mod convergence;
mod export;
mod network;
mod run;

pub use config::{
    theoretical_bound, GraphSpec, Protocol, ProtocolKind, ProtocolSpec, RunOptions, Scenario, SimConfig, TraceLevel,
};
pub use convergence::{detect_convergence, ConvergenceDetector, ConvergenceVerdict};
pub use export::{mean_table, step_table, TABLE_HEADER};
pub use network::Network;
pub use run::{
    masked_initial_states, run, simulate, AuditReport, NodeSnapshot, OffsetLedger, RunSummary, SimTrace, StepRecord,
    World,
};
