//! Initial zero-sum offset strategy.
//!
//! Before the first step each participating node sends an integer offset to
//! every out-neighbor and subtracts their sum from its own state. Received
//! offsets are added to the receiver's initial state, so the network sum is
//! unchanged and the unmodified averaging protocol runs afterwards.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Digraph, NodeId};
use crate::protocol::NodeCore;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetScheduleB {
    /// Offset sent to each out-neighbor.
    pub per_out: BTreeMap<NodeId, i64>,
    /// Balancing self-offset, minus the sum of `per_out`.
    pub u_self: i64,
}

impl OffsetScheduleB {
    pub fn new(per_out: BTreeMap<NodeId, i64>) -> Self {
        let u_self = -per_out.values().sum::<i64>();
        OffsetScheduleB { per_out, u_self }
    }

    pub fn zero(out_neighbors: &[NodeId]) -> Self {
        Self::new(out_neighbors.iter().map(|&l| (l, 0)).collect())
    }

    /// Pre-round messages from `me`.
    pub fn offset_messages(&self, me: NodeId) -> Vec<OffsetMessage> {
        self.per_out
            .iter()
            .map(|(&receiver, &value)| OffsetMessage { sender: me, receiver, value })
            .collect()
    }

    /// Checks the balance and that the keys are exactly `me`'s out-neighbors.
    pub fn check(&self, g: &Digraph, me: NodeId) -> Result<()> {
        let mut expected: Vec<NodeId> = g.out_neighbors(me).to_vec();
        expected.sort();
        if !self.per_out.keys().copied().eq(expected) {
            return Err(Error::InvalidSchedule(format!("offsets of {me} not keyed by its out-neighbors")));
        }
        if self.u_self != -self.per_out.values().sum::<i64>() {
            return Err(Error::InvalidSchedule(format!("self-offset of {me} does not balance")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OffsetMessage {
    pub sender: NodeId,
    pub receiver: NodeId,
    pub value: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alg2Config {
    /// Inclusive range for each per-out-neighbor offset.
    pub per_out_range: (i64, i64),
}

impl Default for Alg2Config {
    fn default() -> Self {
        Alg2Config { per_out_range: (-20, 20) }
    }
}

pub fn sample_schedule_b<R: Rng + ?Sized>(out_neighbors: &[NodeId], rng: &mut R, config: &Alg2Config) -> Result<OffsetScheduleB> {
    let (lo, hi) = config.per_out_range;
    if lo > hi {
        return Err(Error::InfeasibleOffsets(format!("empty offset range [{lo},{hi}]")));
    }
    let mut sorted = out_neighbors.to_vec();
    sorted.sort();
    Ok(OffsetScheduleB::new(sorted.into_iter().map(|l| (l, rng.gen_range(lo..=hi))).collect()))
}

/// `y0 + u_self + sum of received offsets`.
pub fn masked_initial_state(y0: i64, schedule: &OffsetScheduleB, received: &[OffsetMessage]) -> i64 {
    y0 + schedule.u_self + received.iter().map(|m| m.value).sum::<i64>()
}

/// Folds the pre-round offsets into the initial state of node `me`.
/// Plain in-neighbors send nothing and count as zero.
pub fn exchange_and_init_alg2(
    g: &Digraph,
    me: NodeId,
    y0: i64,
    schedule: &OffsetScheduleB,
    received: &[OffsetMessage],
) -> Result<NodeCore> {
    for m in received {
        if m.receiver != me || !g.has_edge(me, m.sender) {
            return Err(Error::NotAnInNeighbor { sender: m.sender, receiver: m.receiver });
        }
    }
    Ok(NodeCore::init_plain(masked_initial_state(y0, schedule, received)))
}

/// True iff the distorted initial states keep the original sum.
pub fn preserves_sum(original: &[i64], distorted: &[i64]) -> bool {
    original.len() == distorted.len() && original.iter().sum::<i64>() == distorted.iter().sum::<i64>()
}
