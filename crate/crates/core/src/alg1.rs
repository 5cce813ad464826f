//! Event-based offset strategy.
//!
//! A node starts from `y0 + u_init` with `u_init = -(u[0] + ... + u[L])` and
//! pays the offset back in nonnegative installments, one per event firing,
//! so the network sum is restored after `L + 1` events.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Digraph, NodeId};
use crate::protocol::{Message, NodeCore};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetScheduleA {
    /// Offset adding steps `L`; installments has `L + 1` entries.
    pub steps: usize,
    pub installments: Vec<i64>,
    pub u_init: i64,
}

impl OffsetScheduleA {
    /// Validates a schedule for a node with out-degree `d_plus`.
    pub fn new(d_plus: usize, installments: Vec<i64>) -> Result<Self> {
        if installments.is_empty() {
            return Err(Error::InvalidSchedule("no installments".into()));
        }
        let steps = installments.len() - 1;
        if steps < d_plus {
            return Err(Error::InvalidSchedule(format!(
                "offset adding steps {steps} smaller than out-degree {d_plus}"
            )));
        }
        if let Some(bad) = installments.iter().find(|&&u| u < 0) {
            return Err(Error::InvalidSchedule(format!("negative installment {bad}")));
        }
        let u_init = -installments.iter().sum::<i64>();
        Ok(OffsetScheduleA { steps, installments, u_init })
    }

    /// All-zero schedule with `L = d_plus`.
    pub fn zero(d_plus: usize) -> Self {
        OffsetScheduleA { steps: d_plus, installments: vec![0; d_plus + 1], u_init: 0 }
    }

    /// Installment paid at the `l`-th event; zero past `L`.
    pub fn installment(&self, l: usize) -> i64 {
        self.installments.get(l).copied().unwrap_or(0)
    }

    /// Offset still owed after `events` firings.
    pub fn outstanding_after(&self, events: usize) -> i64 {
        self.u_init + self.installments.iter().take(events).sum::<i64>()
    }

    pub fn check(&self, d_plus: usize) -> Result<()> {
        let rebuilt = OffsetScheduleA::new(d_plus, self.installments.clone())?;
        if rebuilt != *self {
            return Err(Error::InvalidSchedule("u_init or steps inconsistent with installments".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alg1Config {
    /// Inclusive range for `L`.
    pub steps_range: (usize, usize),
    /// Inclusive range for `|u_init|`.
    pub magnitude_range: (i64, i64),
}

impl Default for Alg1Config {
    fn default() -> Self {
        Alg1Config { steps_range: (20, 40), magnitude_range: (50, 100) }
    }
}

/// Samples `L` uniformly (raised to at least `d_plus`), a magnitude
/// uniformly (raised to at least `d_plus`), and a uniformly random
/// composition of the magnitude into `L + 1` nonnegative installments.
pub fn sample_schedule_a<R: Rng + ?Sized>(d_plus: usize, rng: &mut R, config: &Alg1Config) -> Result<OffsetScheduleA> {
    let (l_lo, l_hi) = config.steps_range;
    let (m_lo, m_hi) = config.magnitude_range;
    if l_lo > l_hi || m_lo > m_hi || m_lo < 0 {
        return Err(Error::InfeasibleOffsets(format!("malformed ranges {config:?}")));
    }
    if l_hi < d_plus {
        return Err(Error::InfeasibleOffsets(format!("steps range max {l_hi} below out-degree {d_plus}")));
    }
    if m_hi < d_plus as i64 {
        return Err(Error::InfeasibleOffsets(format!("magnitude range max {m_hi} below out-degree {d_plus}")));
    }
    let steps = rng.gen_range(l_lo.max(d_plus)..=l_hi);
    let magnitude = rng.gen_range(m_lo.max(d_plus as i64)..=m_hi) as usize;

    // stars and bars: choose `steps` bar positions among magnitude + steps slots
    let mut bars = index::sample(rng, magnitude + steps, steps).into_vec();
    bars.sort_unstable();
    let mut installments = Vec::with_capacity(steps + 1);
    let mut prev: isize = -1;
    for b in bars {
        installments.push((b as isize - prev - 1) as i64);
        prev = b as isize;
    }
    installments.push(((magnitude + steps) as isize - prev - 1) as i64);
    OffsetScheduleA::new(d_plus, installments)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alg1Node {
    pub core: NodeCore,
    pub schedule: OffsetScheduleA,
    /// Event firings so far (the initialization transmission excluded).
    pub l: usize,
}

impl Alg1Node {
    pub fn init(y0: i64, schedule: OffsetScheduleA) -> Self {
        Alg1Node { core: NodeCore::init_plain(y0 + schedule.u_init), schedule, l: 0 }
    }

    pub fn initial_transmit(&mut self, g: &Digraph, me: NodeId) -> Message {
        self.core.initial_transmit(g, me)
    }

    /// Event firing: adds installment `u[l]`, advances `l`, then adopts and
    /// forwards the mass. Returns the message and the installment paid.
    pub fn fire_and_transmit(&mut self, g: &Digraph, me: NodeId, step: u64) -> Result<(Message, i64)> {
        let injection = self.schedule.installment(self.l);
        let msg = self.core.fire_with_injection(g, me, step, injection)?;
        self.l += 1;
        Ok((msg, injection))
    }

    /// Net offset this node has injected so far, initial offset included.
    pub fn injected_total(&self) -> i64 {
        self.schedule.outstanding_after(self.l)
    }
}

/// Per-node schedule summary carried in traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleDump {
    #[serde(rename = "L")]
    pub steps: usize,
    pub installments: Vec<i64>,
    pub u_init: i64,
    pub firings: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::MassPair;
    use crate::seed::rng_from;
    use proptest::prelude::*;

    #[test]
    fn worked_example_schedule() {
        let s = OffsetScheduleA::new(4, vec![1, 3, 2, 4, 1, 2, 5]).unwrap();
        assert_eq!(s.steps, 6);
        assert_eq!(s.u_init, -18);
    }

    #[test]
    fn minimal_schedule() {
        let s = OffsetScheduleA::new(1, vec![0, 1]).unwrap();
        assert_eq!(s.u_init, -1);
    }

    #[test]
    fn invalid_schedules() {
        assert!(OffsetScheduleA::new(3, vec![1, 1, 1]).is_err());
        assert!(OffsetScheduleA::new(1, vec![2, -1]).is_err());
        assert!(OffsetScheduleA::new(1, vec![]).is_err());
    }

    #[test]
    fn infeasible_config() {
        let mut rng = rng_from(0);
        let cfg = Alg1Config { steps_range: (2, 3), magnitude_range: (50, 100) };
        assert!(sample_schedule_a(4, &mut rng, &cfg).is_err());
        let cfg = Alg1Config { steps_range: (5, 6), magnitude_range: (1, 3) };
        assert!(sample_schedule_a(4, &mut rng, &cfg).is_err());
    }

    #[test]
    fn init_applies_offset() {
        let s = OffsetScheduleA::new(4, vec![1, 3, 2, 4, 1, 2, 5]).unwrap();
        let n = Alg1Node::init(6, s);
        assert_eq!(n.core.mass, MassPair::new(-12, 1));
        assert_eq!(n.core.state.y_s, -12);
        assert_eq!(n.l, 0);
    }

    #[test]
    fn zero_schedule_matches_plain() {
        let n = Alg1Node::init(0, OffsetScheduleA::zero(2));
        assert_eq!(n.core, NodeCore::init_plain(0));
    }

    #[test]
    fn firing_adds_installment() {
        let g = Digraph::complete(5).unwrap();
        let s = OffsetScheduleA::new(4, vec![1, 3, 2, 4, 1, 2, 5]).unwrap();
        let mut n = Alg1Node::init(6, s);
        let (m, inj) = n.fire_and_transmit(&g, NodeId(0), 1).unwrap();
        assert_eq!(inj, 1);
        assert_eq!(m.payload, MassPair::new(-11, 1));
        assert_eq!(n.l, 1);
    }

    #[test]
    fn installments_past_l_are_zero() {
        let g = Digraph::cycle(2).unwrap();
        let s = OffsetScheduleA::new(1, vec![2, 3]).unwrap();
        let mut n = Alg1Node::init(10, s);
        n.initial_transmit(&g, NodeId(0));
        let mut paid = Vec::new();
        for step in 1..=4 {
            n.core.mass = MassPair::new(100, 5 + step);
            let (m, inj) = n.fire_and_transmit(&g, NodeId(0), step).unwrap();
            paid.push(inj);
            assert_eq!(m.payload.y, 100 + inj);
        }
        assert_eq!(paid, vec![2, 3, 0, 0]);
        assert_eq!(n.injected_total(), 0);
    }

    proptest! {
        #[test]
        fn sampled_schedules_are_valid(seed in any::<u64>(), d_plus in 1usize..20) {
            let mut rng = rng_from(seed);
            let s = sample_schedule_a(d_plus, &mut rng, &Alg1Config::default()).unwrap();
            prop_assert!(s.steps >= d_plus && s.steps >= 20 && s.steps <= 40);
            prop_assert_eq!(s.installments.len(), s.steps + 1);
            prop_assert!(s.installments.iter().all(|&u| u >= 0));
            prop_assert_eq!(s.u_init + s.installments.iter().sum::<i64>(), 0);
            prop_assert!(s.u_init <= -(d_plus as i64));
            prop_assert!((-100..=-50).contains(&s.u_init));
            prop_assert!(s.check(d_plus).is_ok());
        }

        #[test]
        fn installments_repay_the_offset(seed in any::<u64>(), d_plus in 1usize..6) {
            let mut rng = rng_from(seed);
            let cfg = Alg1Config { steps_range: (1, 8), magnitude_range: (0, 30) };
            let s = sample_schedule_a(d_plus, &mut rng, &cfg).unwrap();
            prop_assert_eq!(s.outstanding_after(s.steps + 1), 0);
            prop_assert_eq!(s.outstanding_after(s.steps + 7), 0);
        }
    }
}
