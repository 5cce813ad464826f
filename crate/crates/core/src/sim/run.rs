use serde::{Deserialize, Serialize};

use crate::alg1::{OffsetScheduleA, ScheduleDump};
use crate::alg2::{exchange_and_init_alg2, OffsetMessage};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::protocol::{MassPair, Message, Ratio, StateVars};

use super::config::{Protocol, RunOptions, Scenario, SimConfig, TraceLevel};
use super::convergence::{ConvergenceDetector, ConvergenceVerdict};
use super::network::Network;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSnapshot {
    pub mass: MassPair,
    pub state: StateVars,
    pub c: u64,
    pub e: usize,
    pub l: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub nodes: Vec<NodeSnapshot>,
    /// Messages sent during this step.
    pub messages: Vec<Message>,
    pub fired: Vec<NodeId>,
    /// Installments added by event-based-offset nodes this step.
    pub injections: Vec<(NodeId, i64)>,
}

/// Repayment bookkeeping of one event-based-offset node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetLedger {
    pub node: NodeId,
    pub schedule: ScheduleDump,
    /// Net offset injected so far, starting from the initial offset.
    pub injected: i64,
    /// Net injected offset right after the `(L+1)`-th event.
    pub injected_at_completion: Option<i64>,
    pub completion_step: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n: usize,
    pub m: usize,
    pub exact_sum: i64,
    pub exact_average: Ratio,
    pub steps_executed: u64,
    pub steps_to_consensus: Option<u64>,
    pub theoretical_bound: u64,
    pub l_max: Option<usize>,
    pub converged: bool,
    /// The absorbing condition held at the end: every state and every
    /// remaining mass equals the average and every installment is paid.
    pub certified: bool,
    pub within_bound: bool,
    pub final_states: Vec<StateVars>,
    pub final_q: Vec<Ratio>,
    pub verdict: ConvergenceVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub initial: Vec<i64>,
    /// Initial values after offsets, as first transmitted.
    pub masked_initial: Vec<i64>,
    /// Pre-round offset messages.
    pub offset_messages: Vec<OffsetMessage>,
    pub offsets: Vec<OffsetLedger>,
    /// Mean of the node estimates after every step.
    pub mean_q: Vec<f64>,
    /// Present with [`TraceLevel::Full`].
    pub steps: Vec<StepRecord>,
    pub summary: RunSummary,
}

impl SimTrace {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Structured result of a per-step invariant audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub step: u64,
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone)]
struct Alg1Track {
    node: NodeId,
    schedule: OffsetScheduleA,
    events: usize,
    injected: i64,
    injected_at_completion: Option<i64>,
    completion_step: Option<u64>,
}

/// Pre-round of the zero-sum offsets. Every node adds what it receives;
/// only nodes running that strategy send anything. Returns the masked
/// initial values and the offset messages.
pub fn masked_initial_states(scenario: &Scenario) -> Result<(Vec<i64>, Vec<OffsetMessage>)> {
    let g = &scenario.graph;
    let mut inbox: Vec<Vec<OffsetMessage>> = vec![Vec::new(); g.node_count()];
    let mut all = Vec::new();
    for (j, p) in g.nodes().zip(&scenario.protocols) {
        if let Protocol::Alg2(s) = p {
            for m in s.offset_messages(j) {
                inbox[m.receiver.0].push(m);
                all.push(m);
            }
        }
    }
    let masked = g
        .nodes()
        .map(|j| {
            let y0 = scenario.initial[j.0];
            let received = &inbox[j.0];
            Ok(match &scenario.protocols[j.0] {
                Protocol::Alg2(s) => exchange_and_init_alg2(g, j, y0, s, received)?.mass.y,
                Protocol::Alg1(s) => y0 + s.u_init + received.iter().map(|m| m.value).sum::<i64>(),
                Protocol::Plain => y0 + received.iter().map(|m| m.value).sum::<i64>(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((masked, all))
}

/// Simulation state plus the ground truth needed to audit it.
pub struct World<'g> {
    pub network: Network<'g>,
    alg1: Vec<Alg1Track>,
    // alg1 index per node
    alg1_slot: Vec<Option<usize>>,
    exact_sum: i64,
    previous_states: Vec<StateVars>,
}

impl<'g> World<'g> {
    fn new(scenario: &'g Scenario, masked: &[i64]) -> Self {
        let network = Network::new(&scenario.graph, masked);
        let mut alg1 = Vec::new();
        let mut alg1_slot = vec![None; scenario.initial.len()];
        for (j, p) in scenario.graph.nodes().zip(&scenario.protocols) {
            if let Protocol::Alg1(s) = p {
                alg1_slot[j.0] = Some(alg1.len());
                alg1.push(Alg1Track {
                    node: j,
                    schedule: s.clone(),
                    events: 0,
                    injected: s.u_init,
                    injected_at_completion: None,
                    completion_step: None,
                });
            }
        }
        let previous_states = network.cores().iter().map(|c| c.state).collect();
        World { network, alg1, alg1_slot, exact_sum: scenario.exact_sum(), previous_states }
    }

    /// Offset injected by event-based-offset nodes and not yet repaid.
    pub fn outstanding_offset(&self) -> i64 {
        self.alg1.iter().map(|t| t.injected).sum()
    }

    /// Conservation checks on the current state.
    pub fn audit_step(&self) -> AuditReport {
        let step = self.network.step();
        let n = self.network.graph().node_count();
        let mut violations = Vec::new();
        let (y, z) = self.network.total_mass();
        if z != n as u128 {
            violations.push(format!("counter mass {z} != n = {n}"));
        }
        let expected_y = self.exact_sum as i128 + self.outstanding_offset() as i128;
        if y != expected_y {
            violations.push(format!("numerator mass {y} != {expected_y} (initial sum plus outstanding offsets)"));
        }
        for (j, (now, before)) in self.network.cores().iter().zip(&self.previous_states).enumerate() {
            if now.state.z_s < before.z_s {
                violations.push(format!("z_s of v{j} decreased from {} to {}", before.z_s, now.state.z_s));
            }
        }
        AuditReport { step, violations }
    }

    /// True when no future step can move any estimate off the average.
    pub fn certified(&self) -> bool {
        let n = self.network.graph().node_count();
        let states_ok = self.network.cores().iter().all(|c| c.state.equals_average(self.exact_sum, n));
        let masses_ok = self
            .network
            .masses()
            .all(|p| StateVars { y_s: p.y, z_s: p.z }.equals_average(self.exact_sum, n));
        let repaid = self.alg1.iter().all(|t| t.events > t.schedule.steps);
        states_ok && masses_ok && repaid
    }

    fn snapshot(&self) -> Vec<NodeSnapshot> {
        self.network
            .cores()
            .iter()
            .enumerate()
            .map(|(j, c)| NodeSnapshot {
                mass: c.mass,
                state: c.state,
                c: c.c,
                e: c.e,
                l: self.alg1_slot[j].map_or(0, |i| self.alg1[i].events),
            })
            .collect()
    }

    /// One synchronous step. Returns (fired, injections), or the leading-mass
    /// violation list when the leading mass did not fire.
    fn advance(&mut self) -> (Vec<NodeId>, Vec<(NodeId, i64)>, Vec<String>) {
        self.previous_states = self.network.cores().iter().map(|c| c.state).collect();
        self.network.deliver();
        let triggered = self.network.triggered();
        let stalled: Vec<String> = self
            .network
            .leading_nodes()
            .into_iter()
            .filter(|j| !triggered[j.0])
            .map(|j| format!("leading mass at {j} did not trigger"))
            .collect();
        let step = self.network.step();
        let mut fired = Vec::new();
        let mut injections = Vec::new();
        for (j, _) in triggered.iter().enumerate().filter(|(_, &t)| t) {
            let j = NodeId(j);
            let mut injection = 0;
            if let Some(i) = self.alg1_slot[j.0] {
                let track = &mut self.alg1[i];
                injection = track.schedule.installment(track.events);
                track.events += 1;
                track.injected += injection;
                if track.events == track.schedule.steps + 1 {
                    track.injected_at_completion = Some(track.injected);
                    track.completion_step = Some(step);
                }
                injections.push((j, injection));
            }
            self.network.fire(j, injection);
            fired.push(j);
        }
        (fired, injections, stalled)
    }
}

pub fn run(config: &SimConfig) -> Result<SimTrace> {
    let scenario = config.resolve()?;
    simulate(&scenario, &config.options())
}

pub fn simulate(scenario: &Scenario, options: &RunOptions) -> Result<SimTrace> {
    scenario.validate()?;
    let g = &scenario.graph;
    let n = g.node_count();
    let m = g.edge_count();
    let bound = scenario.theoretical_bound();
    let max_steps = options.max_steps.unwrap_or(bound.saturating_mul(2));
    if max_steps < bound && options.horizon.is_none() {
        log::warn!("max_steps {max_steps} is below the theoretical bound {bound}");
    }
    let window = options.stability_window.unwrap_or((m as u64).pow(2));
    let full = options.trace == TraceLevel::Full;

    let (masked, offset_messages) = masked_initial_states(scenario)?;
    let mut world = World::new(scenario, &masked);
    if options.audit {
        let expected = scenario.exact_sum() + world.outstanding_offset();
        let got: i64 = masked.iter().sum();
        if got != expected {
            return Err(Error::Audit { step: 0, detail: format!("masked initial sum {got} != {expected}") });
        }
    }

    let mut detector = ConvergenceDetector::new(scenario.exact_sum(), n, window);
    let mut steps = Vec::new();
    let mut mean_q = Vec::new();

    world.network.initial_round();
    let record = |world: &World, fired: Vec<NodeId>, injections: Vec<(NodeId, i64)>, steps: &mut Vec<StepRecord>, mean_q: &mut Vec<f64>| {
        let states: Vec<StateVars> = world.network.cores().iter().map(|c| c.state).collect();
        mean_q.push(states.iter().map(|s| s.q().to_f64()).sum::<f64>() / n as f64);
        if full {
            steps.push(StepRecord {
                step: world.network.step(),
                nodes: world.snapshot(),
                messages: world.network.in_flight().to_vec(),
                fired,
                injections,
            });
        }
        states
    };
    let audit = |world: &World, extra: Vec<String>| -> Result<()> {
        if !options.audit {
            return Ok(());
        }
        let mut report = world.audit_step();
        report.violations.extend(extra);
        if report.passed() {
            Ok(())
        } else {
            Err(Error::Audit { step: report.step, detail: report.violations.join("; ") })
        }
    };

    audit(&world, Vec::new())?;
    let states = record(&world, g.nodes().collect(), Vec::new(), &mut steps, &mut mean_q);
    detector.observe(0, &states);

    let mut certified = world.certified();
    loop {
        let step = world.network.step();
        match options.horizon {
            Some(h) if step >= h => break,
            Some(_) => {}
            None => {
                if (options.stop_on_certificate && certified) || detector.stable(step) || step >= max_steps {
                    break;
                }
            }
        }
        let (fired, injections, stalled) = world.advance();
        audit(&world, stalled)?;
        let states = record(&world, fired, injections, &mut steps, &mut mean_q);
        detector.observe(world.network.step(), &states);
        certified = world.certified();
    }

    let last = world.network.step();
    let final_states: Vec<StateVars> = world.network.cores().iter().map(|c| c.state).collect();
    let verdict = detector.verdict(last, certified, &final_states);
    let steps_to_consensus = verdict.steps;
    if !verdict.converged && options.horizon.is_none() {
        log::warn!("no stable consensus within {last} steps");
    }
    let summary = RunSummary {
        n,
        m,
        exact_sum: scenario.exact_sum(),
        exact_average: Ratio::new(scenario.exact_sum(), n as u64),
        steps_executed: last,
        steps_to_consensus,
        theoretical_bound: bound,
        l_max: scenario.l_max(),
        converged: verdict.converged,
        certified,
        within_bound: steps_to_consensus.is_some_and(|s| s <= bound),
        final_q: final_states.iter().map(|s| s.q()).collect(),
        final_states,
        verdict,
    };
    let offsets = world
        .alg1
        .iter()
        .map(|t| OffsetLedger {
            node: t.node,
            schedule: ScheduleDump {
                steps: t.schedule.steps,
                installments: t.schedule.installments.clone(),
                u_init: t.schedule.u_init,
                firings: t.events,
            },
            injected: t.injected,
            injected_at_completion: t.injected_at_completion,
            completion_step: t.completion_step,
        })
        .collect();
    Ok(SimTrace {
        initial: scenario.initial.clone(),
        masked_initial: masked,
        offset_messages,
        offsets,
        mean_q,
        steps,
        summary,
    })
}
