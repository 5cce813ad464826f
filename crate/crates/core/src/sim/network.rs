//! Synchronous message-passing engine shared by the simulator and the
//! adversary oracle.
//!
//! A message sent during step `k` is delivered at the start of step `k + 1`.
//! Within a step every node absorbs its deliveries, then all triggered nodes
//! fire together.

use crate::graph::{Digraph, NodeId};
use crate::protocol::{MassPair, Message, NodeCore};

#[derive(Debug, Clone)]
pub struct Network<'g> {
    graph: &'g Digraph,
    cores: Vec<NodeCore>,
    in_flight: Vec<Message>,
    step: u64,
}

impl<'g> Network<'g> {
    /// Nodes start from the given (already masked) initial values.
    pub fn new(graph: &'g Digraph, initial: &[i64]) -> Self {
        assert_eq!(graph.node_count(), initial.len());
        Network {
            graph,
            cores: initial.iter().map(|&y| NodeCore::init_plain(y)).collect(),
            in_flight: Vec::new(),
            step: 0,
        }
    }

    pub fn graph(&self) -> &'g Digraph {
        self.graph
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn cores(&self) -> &[NodeCore] {
        &self.cores
    }

    pub fn core(&self, j: NodeId) -> &NodeCore {
        &self.cores[j.0]
    }

    /// Messages sent during the current step, or awaiting delivery.
    pub fn in_flight(&self) -> &[Message] {
        &self.in_flight
    }

    /// Step 0: every node transmits its initial mass to its order-0 neighbor.
    pub fn initial_round(&mut self) {
        debug_assert!(self.step == 0 && self.in_flight.is_empty());
        for j in self.graph.nodes() {
            let msg = self.cores[j.0].initial_transmit(self.graph, j);
            self.in_flight.push(msg);
        }
    }

    /// Advances to the next step and absorbs every pending delivery.
    pub fn deliver(&mut self) {
        self.step += 1;
        for msg in std::mem::take(&mut self.in_flight) {
            self.cores[msg.receiver.0].absorb(std::iter::once(&msg));
        }
    }

    /// Nodes whose event-trigger conditions hold after delivery.
    pub fn triggered(&self) -> Vec<bool> {
        self.cores.iter().map(|c| c.mass.z > 0 && c.check_event()).collect()
    }

    /// Fires node `j`, adding `injection` to its numerator; the message is
    /// queued for delivery at the next step.
    pub fn fire(&mut self, j: NodeId, injection: i64) -> Message {
        let msg = self.cores[j.0]
            .fire_with_injection(self.graph, j, self.step, injection)
            .expect("fire called on a node whose conditions do not hold");
        self.in_flight.push(msg);
        msg
    }

    /// Total mass held by nodes and carried by pending messages.
    pub fn total_mass(&self) -> (i128, u128) {
        let held = self.cores.iter().map(|c| c.mass);
        let moving = self.in_flight.iter().map(|m| m.payload);
        held.chain(moving)
            .fold((0i128, 0u128), |(y, z), p| (y + p.y as i128, z + p.z as u128))
    }

    /// Every nonzero mass, held or in flight.
    pub fn masses(&self) -> impl Iterator<Item = MassPair> + '_ {
        self.cores
            .iter()
            .map(|c| c.mass)
            .chain(self.in_flight.iter().map(|m| m.payload))
            .filter(|p| p.z > 0)
    }

    /// Nodes holding a leading mass: maximal in `(z, y)` among nonzero masses.
    pub fn leading_nodes(&self) -> Vec<NodeId> {
        let best = self.cores.iter().map(|c| c.mass).filter(|p| p.z > 0).max_by(|a, b| a.lead_cmp(b));
        match best {
            None => Vec::new(),
            Some(best) => self
                .graph
                .nodes()
                .filter(|j| self.cores[j.0].mass == best)
                .collect(),
        }
    }
}
