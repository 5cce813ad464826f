//! Experiment runner: random-digraph sweeps, single runs and the
//! neighborhood demand aggregation scenario.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alg1::Alg1Config;
use crate::alg2::{preserves_sum, Alg2Config};
use crate::error::{Error, Result};
use crate::graph::{generate_random_digraph, Digraph, GraphFile, NodeId};
use crate::protocol::Ratio;
use crate::seed::{derive_seed, rng_from, STREAM_STATES};
use crate::sim::{run, GraphSpec, ProtocolKind, RunSummary, SimConfig, SimTrace};

/// Daily demands of the eight houses in the bundled neighborhood.
pub const NEIGHBORHOOD_DEMANDS: [i64; 8] = [30, 35, 28, 34, 27, 37, 29, 32];

const NEIGHBORHOOD_GRAPH: &str = include_str!("../data/neighborhood.json");

/// The bundled eight-house neighborhood: a bidirectional ring with three
/// chords. House 0 is the one whose meter is read.
pub fn neighborhood_graph() -> Digraph {
    let file: GraphFile = serde_json::from_str(NEIGHBORHOOD_GRAPH).expect("bundled graph parses");
    Digraph::try_from(file).expect("bundled graph is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// One graph, `trials` ignored.
    Single,
    #[default]
    Sweep,
    /// Neighborhood graph and demands unless overridden.
    Smartgrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum InitialStates {
    Explicit { values: Vec<i64> },
    /// Uniform integers in `range`; with `sum`, redrawn until they add up
    /// to it.
    Uniform {
        range: (i64, i64),
        #[serde(default)]
        sum: Option<i64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub kind: ExperimentKind,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default = "twenty")]
    pub n: usize,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub seed: u64,
    pub case: ProtocolKind,
    #[serde(default)]
    pub alg1: Alg1Config,
    #[serde(default)]
    pub alg2: Alg2Config,
    #[serde(default = "default_initial")]
    pub initial: InitialStates,
    /// Explicit topology instead of random graphs.
    #[serde(default)]
    pub graph: Option<Digraph>,
    #[serde(default)]
    pub max_steps: Option<u64>,
}

fn one() -> usize {
    1
}

fn twenty() -> usize {
    20
}

fn default_p() -> f64 {
    0.3
}

fn default_initial() -> InitialStates {
    InitialStates::Uniform { range: (3, 19), sum: None }
}

impl ExperimentSpec {
    pub fn sweep(n: usize, p: f64, trials: usize, seed: u64, case: ProtocolKind) -> Self {
        ExperimentSpec {
            kind: ExperimentKind::Sweep,
            trials,
            n,
            p,
            seed,
            case,
            alg1: Alg1Config::default(),
            alg2: Alg2Config::default(),
            initial: default_initial(),
            graph: None,
            max_steps: None,
        }
    }

    pub fn smartgrid(case: ProtocolKind, seed: u64) -> Self {
        ExperimentSpec {
            kind: ExperimentKind::Smartgrid,
            trials: 1,
            n: NEIGHBORHOOD_DEMANDS.len(),
            initial: InitialStates::Explicit { values: NEIGHBORHOOD_DEMANDS.to_vec() },
            graph: Some(neighborhood_graph()),
            ..Self::sweep(NEIGHBORHOOD_DEMANDS.len(), 0.3, 1, seed, case)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        let (lo, hi) = self.alg2.per_out_range;
        if lo > hi {
            return Err(Error::InfeasibleOffsets(format!("empty offset range [{lo},{hi}]")));
        }
        let (l_lo, l_hi) = self.alg1.steps_range;
        let (m_lo, m_hi) = self.alg1.magnitude_range;
        if l_lo > l_hi || m_lo > m_hi || m_lo < 0 {
            return Err(Error::InfeasibleOffsets(format!("malformed ranges {:?}", self.alg1)));
        }
        if let InitialStates::Uniform { range, sum } = &self.initial {
            if range.0 > range.1 {
                return Err(Error::InvalidConfig(format!("empty state range {range:?}")));
            }
            let n = self.node_count() as i64;
            if let Some(s) = sum {
                if *s < n * range.0 || *s > n * range.1 {
                    return Err(Error::InvalidConfig(format!("sum {s} unreachable with {n} states in {range:?}")));
                }
            }
        }
        Ok(())
    }

    fn node_count(&self) -> usize {
        match (&self.graph, self.kind) {
            (Some(g), _) => g.node_count(),
            (None, ExperimentKind::Smartgrid) => NEIGHBORHOOD_DEMANDS.len(),
            (None, _) => self.n,
        }
    }

    fn trial_count(&self) -> usize {
        match self.kind {
            ExperimentKind::Sweep => self.trials,
            _ => 1,
        }
    }

    /// The simulation config of trial `t`. Graph and initial states do not
    /// depend on the protocol case, so cases compare on equal footing.
    pub fn trial_config(&self, t: usize) -> Result<SimConfig> {
        let trial_seed = derive_seed(self.seed, t as u64);
        let graph = match (&self.graph, self.kind) {
            (Some(g), _) => g.clone(),
            (None, ExperimentKind::Smartgrid) => neighborhood_graph(),
            (None, _) => generate_random_digraph(self.n, self.p, trial_seed)?,
        };
        let n = graph.node_count();
        let initial = match &self.initial {
            InitialStates::Explicit { values } => values.clone(),
            InitialStates::Uniform { range, sum } => {
                sample_states(n, *range, *sum, derive_seed(derive_seed(self.seed, STREAM_STATES), t as u64))?
            }
        };
        let mut config = SimConfig::uniform(GraphSpec::Explicit { graph }, initial, self.case, trial_seed);
        config.alg1 = self.alg1;
        config.alg2 = self.alg2;
        config.max_steps = self.max_steps;
        Ok(config)
    }
}

const STATE_DRAWS: u32 = 1_000_000;

/// Uniform states in `range`, redrawn until they sum to `sum` if given.
pub fn sample_states(n: usize, range: (i64, i64), sum: Option<i64>, seed: u64) -> Result<Vec<i64>> {
    let mut rng = rng_from(seed);
    for _ in 0..STATE_DRAWS {
        let states: Vec<i64> = (0..n).map(|_| rng.gen_range(range.0..=range.1)).collect();
        if sum.is_none_or(|s| states.iter().sum::<i64>() == s) {
            return Ok(states);
        }
    }
    Err(Error::InvalidConfig(format!("no draw of {n} states in {range:?} summed to {sum:?}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub n: usize,
    pub m: usize,
    pub steps_to_consensus: Option<u64>,
    pub theoretical_bound: u64,
    pub within_bound: bool,
    /// The estimate every node agreed on, if they did.
    pub final_value: Option<Ratio>,
    pub exact_average: Ratio,
    /// Smallest and largest initial value after offsets.
    pub masked_range: (i64, i64),
    pub l_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub spec: ExperimentSpec,
    pub trials: Vec<TrialRecord>,
    /// Mean estimate per step averaged over trials; finished trials hold
    /// their final value.
    pub mean_q: Vec<f64>,
    pub median_steps: Option<u64>,
    pub max_steps: Option<u64>,
    pub masked_range: Option<(i64, i64)>,
    pub violations: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Invariant failures of one finished run.
pub fn trial_violations(trace: &SimTrace, case: ProtocolKind) -> Vec<String> {
    let s = &trace.summary;
    let mut v = Vec::new();
    if !s.converged {
        v.push(format!("no consensus after {} steps", s.steps_executed));
    } else if !s.within_bound {
        v.push(format!("consensus at step {:?} exceeds bound {}", s.steps_to_consensus, s.theoretical_bound));
    }
    if let Some(q) = s.final_q.iter().find(|q| **q != s.exact_average) {
        v.push(format!("final estimate {q} differs from {}", s.exact_average));
    }
    for o in &trace.offsets {
        if o.injected_at_completion != Some(0) {
            v.push(format!("offset of {} nets {:?} after its last installment", o.node, o.injected_at_completion));
        }
    }
    if case == ProtocolKind::Alg2 && !preserves_sum(&trace.initial, &trace.masked_initial) {
        v.push("offsets changed the initial sum".into());
    }
    v
}

fn agreed_value(summary: &RunSummary) -> Option<Ratio> {
    let first = *summary.final_q.first()?;
    summary.final_q.iter().all(|q| *q == first).then_some(first)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<SweepReport> {
    spec.validate()?;
    let outcomes: Vec<Result<SimTrace>> = (0..spec.trial_count())
        .into_par_iter()
        .map(|t| run(&spec.trial_config(t)?))
        .collect();

    let mut trials = Vec::new();
    let mut violations = Vec::new();
    let mut series = Vec::new();
    for (t, outcome) in outcomes.into_iter().enumerate() {
        let trace = match outcome {
            Ok(trace) => trace,
            Err(e @ (Error::Audit { .. } | Error::NotTriggered(_))) => {
                violations.push(format!("trial {t}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        violations.extend(trial_violations(&trace, spec.case).into_iter().map(|v| format!("trial {t}: {v}")));
        let s = &trace.summary;
        let lo = *trace.masked_initial.iter().min().expect("nonempty graph");
        let hi = *trace.masked_initial.iter().max().expect("nonempty graph");
        trials.push(TrialRecord {
            trial: t,
            n: s.n,
            m: s.m,
            steps_to_consensus: s.steps_to_consensus,
            theoretical_bound: s.theoretical_bound,
            within_bound: s.within_bound,
            final_value: agreed_value(s),
            exact_average: s.exact_average,
            masked_range: (lo, hi),
            l_max: s.l_max,
        });
        series.push(trace.mean_q);
    }

    let len = series.iter().map(Vec::len).max().unwrap_or(0);
    let mean_q = (0..len)
        .map(|k| {
            let total: f64 = series.iter().map(|s| s.get(k).or(s.last()).copied().unwrap_or(0.0)).sum();
            total / series.len() as f64
        })
        .collect();
    let mut steps: Vec<u64> = trials.iter().filter_map(|r| r.steps_to_consensus).collect();
    steps.sort_unstable();
    let masked_range = trials
        .iter()
        .map(|r| r.masked_range)
        .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)));
    Ok(SweepReport {
        spec: spec.clone(),
        median_steps: median(&steps),
        max_steps: steps.last().copied(),
        masked_range,
        trials,
        mean_q,
        violations,
    })
}

/// Lower median of a sorted slice.
pub fn median(sorted: &[u64]) -> Option<u64> {
    if sorted.is_empty() {
        None
    } else {
        Some(sorted[(sorted.len() - 1) / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmartGridReport {
    pub demands: Vec<i64>,
    pub protocol: ProtocolKind,
    /// House whose converged estimate is read.
    pub collector: NodeId,
    pub average: Ratio,
    pub total_demand: i64,
    /// Demands as first transmitted, after offsets.
    pub masked_demands: Vec<i64>,
    pub steps_to_consensus: Option<u64>,
    pub violations: Vec<String>,
}

/// Aggregates `demands` over `graph` and reads the total off house 0.
pub fn run_smartgrid(demands: &[i64], protocol: ProtocolKind, graph: &Digraph, seed: u64) -> Result<(SmartGridReport, SimTrace)> {
    if demands.len() != graph.node_count() {
        return Err(Error::InvalidConfig(format!("{} demands for {} houses", demands.len(), graph.node_count())));
    }
    let config = SimConfig::uniform(GraphSpec::Explicit { graph: graph.clone() }, demands.to_vec(), protocol, seed);
    let trace = run(&config)?;
    let s = &trace.summary;
    if !s.converged {
        return Err(Error::NotConverged(s.steps_executed));
    }
    let collector = NodeId(0);
    let state = s.final_states[collector.0];
    let total = Ratio::new(state.y_s * demands.len() as i64, state.z_s);
    if !total.is_integer() {
        return Err(Error::NotConverged(s.steps_executed));
    }
    let report = SmartGridReport {
        demands: demands.to_vec(),
        protocol,
        collector,
        average: state.q(),
        total_demand: total.num,
        masked_demands: trace.masked_initial.clone(),
        steps_to_consensus: s.steps_to_consensus,
        violations: trial_violations(&trace, protocol),
    };
    Ok((report, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighborhood_is_strongly_connected() {
        let g = neighborhood_graph();
        assert_eq!(g.node_count(), 8);
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn conditioned_states_hit_the_sum() {
        let s = sample_states(20, (3, 19), Some(185), 7).unwrap();
        assert_eq!(s.iter().sum::<i64>(), 185);
        assert!(s.iter().all(|v| (3..=19).contains(v)));
        assert!(sample_states(2, (0, 1), Some(5), 7).is_err());
    }

    #[test]
    fn median_is_lower_middle() {
        assert_eq!(median(&[1, 2, 3, 4]), Some(2));
        assert_eq!(median(&[5]), Some(5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn equal_demands() {
        let g = neighborhood_graph();
        for case in [ProtocolKind::Alg1, ProtocolKind::Alg2] {
            let (r, _) = run_smartgrid(&[7; 8], case, &g, 3).unwrap();
            assert_eq!(r.total_demand, 56);
        }
    }

    #[test]
    fn cases_share_graphs_and_states() {
        let a = ExperimentSpec::sweep(6, 0.5, 3, 11, ProtocolKind::Plain);
        let b = ExperimentSpec { case: ProtocolKind::Alg1, ..a.clone() };
        for t in 0..3 {
            let (ca, cb) = (a.trial_config(t).unwrap(), b.trial_config(t).unwrap());
            assert_eq!(ca.graph, cb.graph);
            assert_eq!(ca.initial_states, cb.initial_states);
        }
    }

    #[test]
    fn rejects_zero_trials() {
        let spec = ExperimentSpec { trials: 0, ..ExperimentSpec::sweep(5, 0.3, 1, 0, ProtocolKind::Plain) };
        assert!(run_experiment(&spec).is_err());
    }
}
