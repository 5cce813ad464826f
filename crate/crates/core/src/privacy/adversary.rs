//! Exhaustive inference oracle for a coalition of curious nodes.
//!
//! The coalition knows the topology, every node's protocol and its own
//! parameters, sees every mass and offset message on edges touching one of
//! its members, and learns the final average. The oracle searches every
//! assignment of the hidden quantities (initial values of the other nodes,
//! their offsets and installments, inside bounded ranges) and keeps the
//! ones that reproduce the observations exactly.
//!
//! Offsets exchanged between two hidden nodes only matter through the net
//! amount each node receives, and installments only through their timing,
//! so the search runs in two stages: first the masked initial values and
//! offset totals (the "roots"), then a depth-first re-simulation that picks
//! installments lazily at each firing and backtracks as soon as an
//! observed message disagrees.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Mutex;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alg1::OffsetScheduleA;
use crate::alg2::{sample_schedule_b, Alg2Config, OffsetMessage};
use crate::error::{Error, Result};
use crate::graph::{Digraph, NodeId, Role, RoleMap};
use crate::protocol::Message;
use crate::seed::rng_from;
use crate::sim::{simulate, Network, Protocol, ProtocolKind, RunOptions, Scenario, SimTrace, TraceLevel};

/// Bounds on everything the coalition does not know.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisSpace {
    /// Inclusive range of hidden initial values.
    pub state_range: (i64, i64),
    /// Inclusive range of each unobserved zero-sum offset.
    pub offset_range: (i64, i64),
    /// Largest single installment.
    pub installment_max: i64,
    /// Offset adding steps range up to out-degree plus this.
    pub extra_steps: usize,
    /// Refuse when the hypothesis count exceeds this.
    pub budget: u128,
}

impl Default for HypothesisSpace {
    fn default() -> Self {
        HypothesisSpace { state_range: (0, 5), offset_range: (-2, 2), installment_max: 2, extra_steps: 1, budget: 10_000_000 }
    }
}

/// One observed mass message, `(sender, receiver, y, z)`.
pub type Observation = (usize, usize, i64, u64);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryView {
    pub graph: Digraph,
    pub protocols: Vec<ProtocolKind>,
    pub coalition: BTreeSet<NodeId>,
    /// Initial values and parameters of the coalition members.
    pub known_initial: BTreeMap<NodeId, i64>,
    pub known_protocols: BTreeMap<NodeId, Protocol>,
    /// Sum of all initial values, from the final average.
    pub exact_sum: i64,
    pub offset_observations: Vec<OffsetMessage>,
    /// Observed messages sent during each step, sorted.
    pub observations: Vec<Vec<Observation>>,
}

impl AdversaryView {
    /// Extracts what the curious nodes of `roles` see of a full trace.
    pub fn new(scenario: &Scenario, roles: &RoleMap, trace: &SimTrace) -> Result<Self> {
        if trace.steps.is_empty() {
            return Err(Error::TraceTooShallow);
        }
        let g = &scenario.graph;
        if roles.len() != g.node_count() {
            return Err(Error::InvalidConfig("role map size differs from graph".into()));
        }
        let coalition: BTreeSet<NodeId> = roles.members(Role::Curious).collect();
        let mut flags = vec![false; g.node_count()];
        for c in &coalition {
            flags[c.0] = true;
        }
        let observations = trace.steps.iter().map(|s| observe_messages(&flags, &s.messages)).collect();
        let offset_observations = trace
            .offset_messages
            .iter()
            .filter(|m| flags[m.sender.0] || flags[m.receiver.0])
            .copied()
            .collect();
        Ok(AdversaryView {
            graph: g.clone(),
            protocols: scenario.protocols.iter().map(Protocol::kind).collect(),
            known_initial: coalition.iter().map(|&c| (c, scenario.initial[c.0])).collect(),
            known_protocols: coalition.iter().map(|&c| (c, scenario.protocols[c.0].clone())).collect(),
            coalition,
            exact_sum: trace.summary.exact_sum,
            offset_observations,
            observations,
        })
    }

    /// Last observed step.
    pub fn horizon(&self) -> u64 {
        self.observations.len() as u64 - 1
    }
}

fn observe_messages<'a>(coalition: &[bool], messages: impl IntoIterator<Item = &'a Message>) -> Vec<Observation> {
    let mut seen: Vec<Observation> = messages
        .into_iter()
        .filter(|m| coalition[m.sender.0] || coalition[m.receiver.0])
        .map(|m| (m.sender.0, m.receiver.0, m.payload.y, m.payload.z))
        .collect();
    seen.sort_unstable();
    seen
}

/// Runs `scenario` to certified convergence, then again for `slack` more
/// steps (default `m^2`) with a full trace, and returns that trace with
/// the coalition's view of it.
pub fn observe(scenario: &Scenario, roles: &RoleMap, slack: Option<u64>) -> Result<(SimTrace, AdversaryView)> {
    let first = simulate(scenario, &RunOptions::default())?;
    if !first.summary.certified {
        return Err(Error::NotConverged(first.summary.steps_executed));
    }
    let m = scenario.graph.edge_count() as u64;
    let horizon = first.summary.steps_executed + slack.unwrap_or(m * m);
    let options = RunOptions { horizon: Some(horizon), trace: TraceLevel::Full, ..RunOptions::default() };
    let trace = simulate(scenario, &options)?;
    let view = AdversaryView::new(scenario, roles, &trace)?;
    Ok((trace, view))
}

/// Values strictly inside `range` when it has an interior.
fn interior(range: (i64, i64)) -> (i64, i64) {
    if range.1 - range.0 >= 2 {
        (range.0 + 1, range.1 - 1)
    } else {
        range
    }
}

/// Initial values drawn from the interior of the hypothesis state range.
pub fn interior_states(n: usize, space: &HypothesisSpace, seed: u64) -> Vec<i64> {
    let (lo, hi) = interior(space.state_range);
    let mut rng = rng_from(seed);
    (0..n).map(|_| rng.gen_range(lo..=hi)).collect()
}

/// Privacy-seeking nodes run `case`, everyone else the plain protocol.
/// Offsets and installments are drawn from the interior of `space`, so the
/// true parameters can move either way without leaving it.
pub fn interior_protocols(g: &Digraph, roles: &RoleMap, case: ProtocolKind, space: &HypothesisSpace, seed: u64) -> Result<Vec<Protocol>> {
    let mut rng = rng_from(seed);
    g.nodes()
        .map(|j| {
            if roles.role(j) != Role::PrivacySeeking {
                return Ok(Protocol::Plain);
            }
            Ok(match case {
                ProtocolKind::Plain => Protocol::Plain,
                ProtocolKind::Alg1 => {
                    let d = g.out_degree(j);
                    let steps = rng.gen_range(d..=d + space.extra_steps);
                    let (lo, hi) = interior((0, space.installment_max));
                    Protocol::Alg1(OffsetScheduleA::new(d, (0..=steps).map(|_| rng.gen_range(lo..=hi)).collect())?)
                }
                ProtocolKind::Alg2 => {
                    let config = Alg2Config { per_out_range: interior(space.offset_range) };
                    Protocol::Alg2(sample_schedule_b(g.out_neighbors(j), &mut rng, &config)?)
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub target: NodeId,
    pub consistent_values: BTreeSet<i64>,
    pub privacy_preserved: bool,
    /// Hypotheses in the searched space.
    pub space_size: u128,
}

// Step-0 choice: masked values of the hidden nodes and the total each
// hidden event-offset node pays back.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Root {
    masked: Vec<i64>,
    totals: Vec<i64>,
}

/// All initial values of `target` the coalition cannot rule out.
pub fn adversary_enumerate(view: &AdversaryView, target: NodeId, space: &HypothesisSpace) -> Result<InferenceResult> {
    let g = &view.graph;
    let n = g.node_count();
    if target.0 >= n {
        return Err(Error::InvalidConfig(format!("{target} not in graph")));
    }
    if view.coalition.contains(&target) {
        return Err(Error::InvalidConfig(format!("{target} belongs to the coalition")));
    }
    let (lo, hi) = space.state_range;
    let (off_lo, off_hi) = space.offset_range;
    if lo > hi || off_lo > off_hi || space.installment_max < 0 {
        return Err(Error::InvalidConfig("empty hypothesis range".into()));
    }
    let in_coalition: Vec<bool> = g.nodes().map(|j| view.coalition.contains(&j)).collect();
    let hidden: Vec<NodeId> = g.nodes().filter(|j| !in_coalition[j.0]).collect();
    let slot_of: Vec<Option<usize>> = {
        let mut s = vec![None; n];
        for (i, h) in hidden.iter().enumerate() {
            s[h.0] = Some(i);
        }
        s
    };
    let t_idx = slot_of[target.0].expect("target is hidden");

    // installment slots of hidden event-offset nodes
    let slots: Vec<usize> = hidden
        .iter()
        .map(|&h| match view.protocols[h.0] {
            ProtocolKind::Alg1 => g.out_degree(h) + space.extra_steps + 1,
            _ => 0,
        })
        .collect();

    // masked initial values known exactly to the coalition
    let mut known_masked = vec![0i64; n];
    let mut net_known = vec![0i64; n];
    for m in &view.offset_observations {
        net_known[m.receiver.0] += m.value;
        net_known[m.sender.0] -= m.value;
    }
    for (&c, &y0) in &view.known_initial {
        let own = match &view.known_protocols[&c] {
            Protocol::Alg1(s) => s.u_init,
            _ => 0,
        };
        known_masked[c.0] = y0 + own + net_known[c.0];
    }
    // a hidden node whose first transmission reaches the coalition reveals
    // its masked value
    let first = view.observations.first().ok_or(Error::TraceTooShallow)?;
    let pinned: Vec<Option<i64>> = hidden
        .iter()
        .map(|&h| first.iter().find(|o| o.0 == h.0).map(|o| o.2))
        .collect();

    // net offsets between hidden nodes, over all unobserved offset choices
    let unknown_edges: Vec<(usize, usize)> = g
        .edges()
        .filter(|&(r, s)| view.protocols[s.0] == ProtocolKind::Alg2 && !in_coalition[s.0] && !in_coalition[r.0])
        .map(|(r, s)| (slot_of[s.0].unwrap(), slot_of[r.0].unwrap()))
        .collect();
    let mut shifts: BTreeSet<Vec<i64>> = BTreeSet::from([vec![0; hidden.len()]]);
    for &(s, r) in &unknown_edges {
        shifts = shifts
            .iter()
            .flat_map(|d| {
                (off_lo..=off_hi).map(move |x| {
                    let mut d = d.clone();
                    d[r] += x;
                    d[s] -= x;
                    d
                })
            })
            .collect();
    }

    let known_sum: i64 = view.known_initial.values().sum();
    let hidden_sum = view.exact_sum - known_sum;
    let mut roots: BTreeMap<Root, BTreeSet<i64>> = BTreeMap::new();
    let mut y0 = vec![0i64; hidden.len()];
    let mut root = Root { masked: vec![0; hidden.len()], totals: vec![0; hidden.len()] };
    for d in &shifts {
        let ctx = RootCtx {
            range: (lo, hi),
            hidden_sum,
            slots: &slots,
            inst_max: space.installment_max,
            pinned: &pinned,
            base: hidden.iter().zip(d).map(|(h, d)| net_known[h.0] + d).collect(),
            target: t_idx,
        };
        ctx.expand(0, 0, &mut y0, &mut root, &mut roots);
    }

    let comps: Vec<Vec<u128>> = slots.iter().map(|&k| compositions(k, space.installment_max)).collect();
    let space_size: u128 = roots
        .iter()
        .map(|(r, vals)| {
            let paths: u128 = r.totals.iter().zip(&comps).map(|(&t, c)| c.get(t as usize).copied().unwrap_or(1)).product();
            paths * vals.len() as u128
        })
        .sum();
    if space_size > space.budget {
        return Err(Error::BudgetExceeded { size: space_size, budget: space.budget });
    }

    let found: Mutex<BTreeSet<i64>> = Mutex::new(BTreeSet::new());
    let roots: Vec<(Root, BTreeSet<i64>)> = roots.into_iter().collect();
    roots.par_iter().for_each(|(root, values)| {
        if values.is_subset(&found.lock().unwrap()) {
            return;
        }
        let mut initial = known_masked.clone();
        let mut pays: Vec<Pay> = vec![Pay::Nothing; n];
        for (&c, p) in &view.known_protocols {
            if let Protocol::Alg1(s) = p {
                pays[c.0] = Pay::Known { installments: &s.installments, l: 0 };
            }
        }
        for (i, h) in hidden.iter().enumerate() {
            initial[h.0] = root.masked[i];
            if slots[i] > 0 {
                pays[h.0] = Pay::Unknown { slots: slots[i], l: 0, rem: root.totals[i] };
            }
        }
        let mut search = Search {
            coalition: &in_coalition,
            observations: &view.observations,
            horizon: view.horizon(),
            inst_max: space.installment_max,
            failed: HashSet::new(),
        };
        let mut net = Network::new(g, &initial);
        net.initial_round();
        if search.matches(&net) && search.explore(net, pays) {
            found.lock().unwrap().extend(values.iter().copied());
        }
    });
    let consistent_values = found.into_inner().unwrap();
    Ok(InferenceResult { target, privacy_preserved: consistent_values.len() >= 2, consistent_values, space_size })
}

struct RootCtx<'a> {
    range: (i64, i64),
    hidden_sum: i64,
    slots: &'a [usize],
    inst_max: i64,
    pinned: &'a [Option<i64>],
    base: Vec<i64>,
    target: usize,
}

impl RootCtx<'_> {
    fn expand(&self, i: usize, sum: i64, y0: &mut [i64], root: &mut Root, out: &mut BTreeMap<Root, BTreeSet<i64>>) {
        let k = y0.len();
        if i == k {
            if sum == self.hidden_sum {
                out.entry(root.clone()).or_default().insert(y0[self.target]);
            }
            return;
        }
        let (lo, hi) = self.range;
        let left = (k - i - 1) as i64;
        for v in lo..=hi {
            let s = sum + v;
            if s + left * lo > self.hidden_sum || s + left * hi < self.hidden_sum {
                continue;
            }
            y0[i] = v;
            for t in 0..=self.inst_max * self.slots[i] as i64 {
                let masked = v - t + self.base[i];
                if self.pinned[i].is_some_and(|p| p != masked) {
                    continue;
                }
                root.masked[i] = masked;
                root.totals[i] = t;
                self.expand(i + 1, s, y0, root, out);
            }
        }
    }
}

/// Number of sequences of `slots` installments in `[0, max]` with each
/// possible total.
fn compositions(slots: usize, max: i64) -> Vec<u128> {
    let mut ways = vec![1u128];
    for _ in 0..slots {
        let mut next = vec![0u128; ways.len() + max as usize];
        for (t, &w) in ways.iter().enumerate() {
            for u in 0..=max as usize {
                next[t + u] += w;
            }
        }
        ways = next;
    }
    ways
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pay<'a> {
    Nothing,
    Known { installments: &'a [i64], l: usize },
    /// Hidden installments: `rem` still to pay over the remaining slots.
    Unknown { slots: usize, l: usize, rem: i64 },
}

struct Search<'a> {
    coalition: &'a [bool],
    observations: &'a [Vec<Observation>],
    horizon: u64,
    inst_max: i64,
    failed: HashSet<Vec<i64>>,
}

impl<'g> Search<'_> {
    fn matches(&self, net: &Network) -> bool {
        observe_messages(self.coalition, net.in_flight()) == self.observations[net.step() as usize]
    }

    fn key(net: &Network, pays: &[Pay]) -> Vec<i64> {
        let mut key = Vec::with_capacity(1 + net.cores().len() * 7);
        key.push(net.step() as i64);
        let mut pending = vec![(0i64, 0u64); net.cores().len()];
        for m in net.in_flight() {
            pending[m.receiver.0].0 += m.payload.y;
            pending[m.receiver.0].1 += m.payload.z;
        }
        for ((c, p), pay) in net.cores().iter().zip(&pending).zip(pays) {
            key.extend([c.mass.y + p.0, (c.mass.z + p.1) as i64, c.state.y_s, c.state.z_s as i64, c.e as i64]);
            match *pay {
                Pay::Nothing => {}
                Pay::Known { installments, l } => key.push(l.min(installments.len()) as i64),
                Pay::Unknown { slots, l, rem } => key.extend([l.min(slots) as i64, rem]),
            }
        }
        key
    }

    fn options(&self, pay: &Pay) -> Vec<i64> {
        match *pay {
            Pay::Unknown { slots, l, rem } if l < slots => {
                let after = (slots - l - 1) as i64;
                let lo = (rem - self.inst_max * after).max(0);
                let hi = rem.min(self.inst_max);
                (lo..=hi).collect()
            }
            _ => vec![0],
        }
    }

    /// Whether some installment choice from here on reproduces every
    /// observation and repays all hidden offsets within the horizon.
    fn explore<'g2>(&mut self, mut net: Network<'g2>, mut pays: Vec<Pay<'_>>) -> bool {
        let mut path = Vec::new();
        loop {
            if net.step() >= self.horizon {
                let repaid = pays.iter().all(|p| !matches!(p, Pay::Unknown { rem, .. } if *rem != 0));
                if !repaid {
                    self.failed.extend(path);
                }
                return repaid;
            }
            let key = Self::key(&net, &pays);
            if self.failed.contains(&key) {
                self.failed.extend(path);
                return false;
            }
            path.push(key);
            net.deliver();
            let firing: Vec<usize> = net.triggered().iter().enumerate().filter(|(_, &t)| t).map(|(j, _)| j).collect();
            let choices: Vec<Vec<i64>> = firing.iter().map(|&j| self.options(&pays[j])).collect();
            let total: usize = choices.iter().map(Vec::len).product();
            if total == 1 {
                fire_all(&mut net, &mut pays, &firing, |i| choices[i][0]);
                if !self.matches(&net) {
                    self.failed.extend(path);
                    return false;
                }
                continue;
            }
            for mut idx in 0..total {
                let mut branch = net.clone();
                let mut branch_pays = pays.clone();
                let picks: Vec<i64> = choices
                    .iter()
                    .map(|c| {
                        let v = c[idx % c.len()];
                        idx /= c.len();
                        v
                    })
                    .collect();
                fire_all(&mut branch, &mut branch_pays, &firing, |i| picks[i]);
                if self.matches(&branch) && self.explore(branch, branch_pays) {
                    return true;
                }
            }
            self.failed.extend(path);
            return false;
        }
    }
}

fn fire_all(net: &mut Network, pays: &mut [Pay], firing: &[usize], pick: impl Fn(usize) -> i64) {
    for (i, &j) in firing.iter().enumerate() {
        let injection = match &mut pays[j] {
            Pay::Nothing => 0,
            Pay::Known { installments, l } => {
                let u = installments.get(*l).copied().unwrap_or(0);
                *l += 1;
                u
            }
            Pay::Unknown { l, rem, .. } => {
                let u = pick(i);
                *l += 1;
                *rem -= u;
                u
            }
        };
        net.fire(NodeId(j), injection);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alg2::OffsetScheduleB;

    fn bidirectional(n: usize, pairs: &[(usize, usize)]) -> Digraph {
        Digraph::new(n, pairs.iter().flat_map(|&(a, b)| [(a, b), (b, a)])).unwrap()
    }

    fn zero_sum(g: &Digraph, j: usize, values: &[i64]) -> Protocol {
        let out = g.out_neighbors(NodeId(j));
        let mut sorted = out.to_vec();
        sorted.sort();
        Protocol::Alg2(OffsetScheduleB::new(sorted.into_iter().zip(values.iter().copied()).collect()))
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(0, 2), vec![1]);
        assert_eq!(compositions(2, 2), vec![1, 2, 3, 2, 1]);
        assert_eq!(compositions(3, 1).iter().sum::<u128>(), 8);
    }

    #[test]
    fn shielded_zero_sum_node_keeps_privacy() {
        // path 2 - 0 - 1 with 0 and 1 masking, 2 curious
        let g = bidirectional(3, &[(0, 1), (0, 2)]);
        let roles = RoleMap::from_sets(3, &[0, 1], &[2]).unwrap();
        let scenario = Scenario {
            protocols: vec![zero_sum(&g, 0, &[1, -1]), zero_sum(&g, 1, &[1]), Protocol::Plain],
            graph: g,
            initial: vec![3, 2, 4],
        };
        let (_, view) = observe(&scenario, &roles, None).unwrap();
        let res = adversary_enumerate(&view, NodeId(0), &HypothesisSpace::default()).unwrap();
        assert!(res.consistent_values.contains(&3));
        assert!(res.privacy_preserved, "{res:?}");
    }

    #[test]
    fn surrounded_event_offset_node_is_exposed() {
        // 0 talks only to curious 1 and 2; 3 is plain behind them
        let g = bidirectional(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let roles = RoleMap::from_sets(4, &[0], &[1, 2]).unwrap();
        let scenario = Scenario {
            protocols: vec![
                Protocol::Alg1(OffsetScheduleA::new(2, vec![1, 0, 2]).unwrap()),
                Protocol::Plain,
                Protocol::Plain,
                Protocol::Plain,
            ],
            graph: g,
            initial: vec![2, 4, 1, 3],
        };
        let (_, view) = observe(&scenario, &roles, None).unwrap();
        let res = adversary_enumerate(&view, NodeId(0), &HypothesisSpace::default()).unwrap();
        assert_eq!(res.consistent_values, BTreeSet::from([2]));
        assert!(!res.privacy_preserved);
    }

    #[test]
    fn empty_coalition_allows_every_value_with_the_right_sum() {
        let g = bidirectional(3, &[(0, 1), (1, 2)]);
        let roles = RoleMap::from_sets(3, &[0], &[]).unwrap();
        let scenario = Scenario {
            protocols: vec![zero_sum(&g, 0, &[1]), Protocol::Plain, Protocol::Plain],
            graph: g,
            initial: vec![1, 0, 0],
        };
        let (_, view) = observe(&scenario, &roles, None).unwrap();
        let res = adversary_enumerate(&view, NodeId(0), &HypothesisSpace::default()).unwrap();
        // the three values sum to 1, so the target is 0 or 1
        assert_eq!(res.consistent_values, BTreeSet::from([0, 1]));
    }

    #[test]
    fn refuses_over_budget() {
        let g = bidirectional(3, &[(0, 1), (0, 2)]);
        let roles = RoleMap::from_sets(3, &[0], &[2]).unwrap();
        let scenario = Scenario {
            protocols: vec![zero_sum(&g, 0, &[0, 0]), Protocol::Plain, Protocol::Plain],
            graph: g,
            initial: vec![3, 2, 4],
        };
        let (_, view) = observe(&scenario, &roles, None).unwrap();
        let space = HypothesisSpace { budget: 1, ..HypothesisSpace::default() };
        assert!(matches!(adversary_enumerate(&view, NodeId(0), &space), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn coalition_target_rejected() {
        let g = bidirectional(2, &[(0, 1)]);
        let roles = RoleMap::from_sets(2, &[], &[0]).unwrap();
        let scenario = Scenario::uniform_plain(g, vec![1, 2]);
        let (_, view) = observe(&scenario, &roles, None).unwrap();
        assert!(adversary_enumerate(&view, NodeId(0), &HypothesisSpace::default()).is_err());
    }

    #[test]
    fn view_hides_internal_messages() {
        let g = bidirectional(3, &[(0, 1), (1, 2)]);
        let roles = RoleMap::from_sets(3, &[], &[2]).unwrap();
        let scenario = Scenario::uniform_plain(g, vec![1, 2, 3]);
        let (trace, view) = observe(&scenario, &roles, Some(2)).unwrap();
        assert_eq!(view.observations.len(), trace.steps.len());
        for obs in &view.observations {
            assert!(obs.iter().all(|o| o.0 == 2 || o.1 == 2));
        }
        assert_eq!(view.known_initial, BTreeMap::from([(NodeId(2), 3)]));
    }

    #[test]
    fn interior_truth() {
        let g = Digraph::complete(4).unwrap();
        let roles = RoleMap::from_sets(4, &[0, 1], &[2]).unwrap();
        let space = HypothesisSpace::default();
        assert!(interior_states(50, &space, 1).iter().all(|v| (1..=4).contains(v)));
        for p in interior_protocols(&g, &roles, ProtocolKind::Alg1, &space, 1).unwrap().iter().take(2) {
            let Protocol::Alg1(s) = p else { panic!("expected event offsets") };
            assert!(s.steps == 3 || s.steps == 4);
            assert!(s.installments.iter().all(|&u| u == 1));
        }
        let p = interior_protocols(&g, &roles, ProtocolKind::Alg2, &space, 1).unwrap();
        let Protocol::Alg2(s) = &p[0] else { panic!("expected zero-sum offsets") };
        assert!(s.per_out.values().all(|v| (-1..=1).contains(v)));
        assert_eq!(p[2], Protocol::Plain);
        assert_eq!(p[3], Protocol::Plain);
    }
}
