//! Event-triggered quantized averaging by mass summation.
//!
//! Every node holds a mass pair `(y, z)` that travels through the network
//! and a state pair `(y_s, z_s)` whose ratio is the node's estimate of the
//! average. Incoming masses are summed; when the summed mass dominates the
//! stored state (larger counter, or equal counter and no smaller numerator)
//! the node adopts it as its state and forwards it to the next out-neighbor
//! in round-robin order.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Digraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MassPair {
    pub y: i64,
    pub z: u64,
}

impl MassPair {
    pub const ZERO: MassPair = MassPair { y: 0, z: 0 };

    pub fn new(y: i64, z: u64) -> Self {
        MassPair { y, z }
    }

    pub fn is_empty(&self) -> bool {
        self.z == 0
    }

    /// Lexicographic order on `(z, y)`: the order that decides which mass
    /// leads.
    pub fn lead_cmp(&self, other: &MassPair) -> Ordering {
        (self.z, self.y).cmp(&(other.z, other.y))
    }
}

/// Last accepted mass; `q_s = y_s / z_s` is kept as the integer pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateVars {
    pub y_s: i64,
    pub z_s: u64,
}

impl StateVars {
    pub fn q(&self) -> Ratio {
        Ratio::new(self.y_s, self.z_s)
    }

    /// Exact test `y_s / z_s == sum / n` by cross-multiplication.
    pub fn equals_average(&self, sum: i64, n: usize) -> bool {
        self.y_s as i128 * n as i128 == sum as i128 * self.z_s as i128
    }
}

/// A reduced fraction with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: i64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: i64, den: u64) -> Self {
        assert!(den > 0, "ratio with zero denominator");
        let g = (num.unsigned_abs()).gcd(&den).max(1);
        Ratio { num: num / g as i64, den: den / g }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeCore {
    pub mass: MassPair,
    pub state: StateVars,
    /// Transmissions so far.
    pub c: u64,
    /// Order of the next out-neighbor to receive a transmission.
    pub e: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub sender: NodeId,
    pub receiver: NodeId,
    pub payload: MassPair,
    pub send_step: u64,
}

impl NodeCore {
    /// Node holding the integer initial state `y0` with unit counter.
    pub fn init_plain(y0: i64) -> Self {
        NodeCore {
            mass: MassPair::new(y0, 1),
            state: StateVars { y_s: y0, z_s: 1 },
            c: 0,
            e: 0,
        }
    }

    /// Sums every delivered payload into the mass variables.
    pub fn absorb<'a>(&mut self, inbox: impl IntoIterator<Item = &'a Message>) {
        for msg in inbox {
            self.mass.y += msg.payload.y;
            self.mass.z += msg.payload.z;
        }
    }

    /// Event-trigger check: `z > z_s`, or `z == z_s` and `y >= y_s`.
    pub fn check_event(&self) -> bool {
        self.mass.z > self.state.z_s || (self.mass.z == self.state.z_s && self.mass.y >= self.state.y_s)
    }

    /// Adopts the mass as state, sends it to the current round-robin
    /// out-neighbor and empties the mass.
    pub fn fire_and_transmit(&mut self, g: &Digraph, me: NodeId, step: u64) -> Result<Message> {
        self.fire_with_injection(g, me, step, 0)
    }

    /// Like [`fire_and_transmit`](Self::fire_and_transmit) but adds
    /// `injection` to the numerator after the trigger check and before the
    /// state update.
    pub fn fire_with_injection(&mut self, g: &Digraph, me: NodeId, step: u64, injection: i64) -> Result<Message> {
        if !self.check_event() {
            return Err(Error::NotTriggered(me));
        }
        Ok(self.transmit(g, me, step, injection))
    }

    /// Initialization transmission; unconditional.
    pub fn initial_transmit(&mut self, g: &Digraph, me: NodeId) -> Message {
        self.transmit(g, me, 0, 0)
    }

    fn transmit(&mut self, g: &Digraph, me: NodeId, step: u64, injection: i64) -> Message {
        let d_plus = g.out_degree(me);
        assert!(d_plus > 0, "node {me} has no out-neighbors");
        let payload = MassPair::new(self.mass.y + injection, self.mass.z);
        debug_assert!(payload.z >= 1);
        self.state = StateVars { y_s: payload.y, z_s: payload.z };
        let receiver = g.target_at(me, self.e);
        self.mass = MassPair::ZERO;
        self.c += 1;
        self.e = (self.c % d_plus as u64) as usize;
        Message { sender: me, receiver, payload, send_step: step }
    }
}

/// True iff every state equals `exact_sum / n` exactly.
pub fn consensus_reached<'a>(states: impl IntoIterator<Item = &'a StateVars>, exact_sum: i64, n: usize) -> bool {
    states.into_iter().all(|s| s.equals_average(exact_sum, n))
}
