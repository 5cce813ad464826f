use serde::{Deserialize, Serialize};

use crate::alg1::{sample_schedule_a, Alg1Config, OffsetScheduleA};
use crate::alg2::{sample_schedule_b, Alg2Config, OffsetScheduleB};
use crate::error::{Error, Result};
use crate::graph::{generate_random_digraph, Digraph, NodeId};
use crate::seed::{derive_seed, rng_from, STREAM_OFFSETS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSpec {
    Explicit { graph: Digraph },
    Random { n: usize, p: f64, seed: u64 },
}

impl GraphSpec {
    pub fn build(&self) -> Result<Digraph> {
        match self {
            GraphSpec::Explicit { graph } => Ok(graph.clone()),
            GraphSpec::Random { n, p, seed } => generate_random_digraph(*n, *p, *seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Plain,
    Alg1,
    Alg2,
}

/// Per-node protocol request; a missing schedule is sampled at resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum ProtocolSpec {
    Plain,
    Alg1 {
        #[serde(default)]
        schedule: Option<OffsetScheduleA>,
    },
    Alg2 {
        #[serde(default)]
        schedule: Option<OffsetScheduleB>,
    },
}

impl From<ProtocolKind> for ProtocolSpec {
    fn from(kind: ProtocolKind) -> Self {
        match kind {
            ProtocolKind::Plain => ProtocolSpec::Plain,
            ProtocolKind::Alg1 => ProtocolSpec::Alg1 { schedule: None },
            ProtocolKind::Alg2 => ProtocolSpec::Alg2 { schedule: None },
        }
    }
}

/// A fully determined per-node protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum Protocol {
    Plain,
    Alg1(OffsetScheduleA),
    Alg2(OffsetScheduleB),
}

impl Protocol {
    pub fn kind(&self) -> ProtocolKind {
        match self {
            Protocol::Plain => ProtocolKind::Plain,
            Protocol::Alg1(_) => ProtocolKind::Alg1,
            Protocol::Alg2(_) => ProtocolKind::Alg2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLevel {
    /// Summary, schedules and the per-step mean estimate only.
    #[default]
    Summary,
    /// Additionally every node snapshot and message of every step.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub graph: GraphSpec,
    pub initial_states: Vec<i64>,
    pub protocols: Vec<ProtocolSpec>,
    #[serde(default)]
    pub alg1: Alg1Config,
    #[serde(default)]
    pub alg2: Alg2Config,
    #[serde(default)]
    pub offset_seed: u64,
    /// Defaults to twice the theoretical bound.
    #[serde(default)]
    pub max_steps: Option<u64>,
    /// Consecutive steps consensus must hold; defaults to `m^2`.
    #[serde(default)]
    pub stability_window: Option<u64>,
    /// Stop as soon as the absorbing condition is certified.
    #[serde(default = "yes")]
    pub stop_on_certificate: bool,
    /// Run exactly this many steps, ignoring convergence.
    #[serde(default)]
    pub horizon: Option<u64>,
    #[serde(default = "yes")]
    pub audit: bool,
    #[serde(default)]
    pub trace: TraceLevel,
}

fn yes() -> bool {
    true
}

impl SimConfig {
    /// Every node runs `kind`, schedules sampled from the defaults.
    pub fn uniform(graph: GraphSpec, initial_states: Vec<i64>, kind: ProtocolKind, offset_seed: u64) -> Self {
        let n = initial_states.len();
        SimConfig {
            graph,
            initial_states,
            protocols: vec![kind.into(); n],
            alg1: Alg1Config::default(),
            alg2: Alg2Config::default(),
            offset_seed,
            max_steps: None,
            stability_window: None,
            stop_on_certificate: true,
            horizon: None,
            audit: true,
            trace: TraceLevel::Summary,
        }
    }

    pub fn with_trace(mut self, level: TraceLevel) -> Self {
        self.trace = level;
        self
    }

    /// Builds the graph and samples every missing schedule. Node `j`
    /// draws from its own stream so adding nodes never reshuffles others.
    pub fn resolve(&self) -> Result<Scenario> {
        let graph = self.graph.build()?;
        let n = graph.node_count();
        if self.initial_states.len() != n {
            return Err(Error::InvalidConfig(format!(
                "{} initial states for {n} nodes",
                self.initial_states.len()
            )));
        }
        if self.protocols.len() != n {
            return Err(Error::InvalidConfig(format!("{} protocol entries for {n} nodes", self.protocols.len())));
        }
        let base = derive_seed(self.offset_seed, STREAM_OFFSETS);
        let protocols = graph
            .nodes()
            .zip(&self.protocols)
            .map(|(j, spec)| {
                let mut rng = rng_from(derive_seed(base, j.0 as u64));
                Ok(match spec {
                    ProtocolSpec::Plain => Protocol::Plain,
                    ProtocolSpec::Alg1 { schedule: Some(s) } => Protocol::Alg1(s.clone()),
                    ProtocolSpec::Alg1 { schedule: None } => {
                        Protocol::Alg1(sample_schedule_a(graph.out_degree(j), &mut rng, &self.alg1)?)
                    }
                    ProtocolSpec::Alg2 { schedule: Some(s) } => Protocol::Alg2(s.clone()),
                    ProtocolSpec::Alg2 { schedule: None } => {
                        Protocol::Alg2(sample_schedule_b(graph.out_neighbors(j), &mut rng, &self.alg2)?)
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let scenario = Scenario { graph, initial: self.initial_states.clone(), protocols };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn options(&self) -> RunOptions {
        RunOptions {
            max_steps: self.max_steps,
            stability_window: self.stability_window,
            stop_on_certificate: self.stop_on_certificate,
            horizon: self.horizon,
            audit: self.audit,
            trace: self.trace,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub max_steps: Option<u64>,
    pub stability_window: Option<u64>,
    pub stop_on_certificate: bool,
    pub horizon: Option<u64>,
    pub audit: bool,
    pub trace: TraceLevel,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_steps: None,
            stability_window: None,
            stop_on_certificate: true,
            horizon: None,
            audit: true,
            trace: TraceLevel::Summary,
        }
    }
}

/// Graph, initial states and concrete protocols: everything a run needs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub graph: Digraph,
    pub initial: Vec<i64>,
    pub protocols: Vec<Protocol>,
}

impl Scenario {
    pub fn uniform_plain(graph: Digraph, initial: Vec<i64>) -> Self {
        let n = initial.len();
        Scenario { graph, initial, protocols: vec![Protocol::Plain; n] }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.node_count();
        if self.initial.len() != n || self.protocols.len() != n {
            return Err(Error::InvalidConfig("scenario sizes disagree with graph".into()));
        }
        if !self.graph.is_strongly_connected() {
            return Err(Error::InvalidGraph("graph is not strongly connected".into()));
        }
        for (j, p) in self.graph.nodes().zip(&self.protocols) {
            match p {
                Protocol::Plain => {}
                Protocol::Alg1(s) => s.check(self.graph.out_degree(j))?,
                Protocol::Alg2(s) => s.check(&self.graph, j)?,
            }
        }
        Ok(())
    }

    pub fn exact_sum(&self) -> i64 {
        self.initial.iter().sum()
    }

    /// Largest `L` among event-based-offset nodes, if any.
    pub fn l_max(&self) -> Option<usize> {
        self.protocols
            .iter()
            .filter_map(|p| match p {
                Protocol::Alg1(s) => Some(s.steps),
                _ => None,
            })
            .max()
    }

    /// `n m^2` without event-based offsets, `m^2 (L_max + 1 + n)` with.
    pub fn theoretical_bound(&self) -> u64 {
        theoretical_bound(self.graph.node_count(), self.graph.edge_count(), self.l_max())
    }

    pub fn node_protocol(&self, j: NodeId) -> &Protocol {
        &self.protocols[j.0]
    }
}

pub fn theoretical_bound(n: usize, m: usize, l_max: Option<usize>) -> u64 {
    let m2 = (m as u64).pow(2);
    match l_max {
        None => n as u64 * m2,
        Some(l) => m2 * (l as u64 + 1 + n as u64),
    }
}
