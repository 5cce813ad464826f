use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use quantized_consensus::alg1::Alg1Config;
use quantized_consensus::alg2::Alg2Config;
use quantized_consensus::graph::{Digraph, GraphFile, NodeId, Role, RoleMap};
use quantized_consensus::harness::{
    neighborhood_graph, run_experiment, run_smartgrid, trial_violations, ExperimentKind, ExperimentSpec,
    InitialStates, NEIGHBORHOOD_DEMANDS,
};
use quantized_consensus::privacy::{
    adversary_enumerate, event_offset_privacy, interior_protocols, observe, zero_sum_privacy, HypothesisSpace,
};
use quantized_consensus::sim::{mean_table, run, step_table, ProtocolKind, Scenario, SimConfig, TraceLevel};

#[derive(Parser)]
#[command(name = "qcons", version, about = "Privacy-preserving quantized average consensus on digraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one network and export its trace.
    Run(RunArgs),
    /// Run many random graphs and report step statistics.
    Sweep(SweepArgs),
    /// Aggregate household demands and report the total.
    Smartgrid(SmartgridArgs),
    /// Evaluate the topological privacy conditions for a node.
    CheckPrivacy(CheckArgs),
    /// Enumerate what the curious nodes can infer about a node.
    Adversary(AdversaryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Case {
    /// Event-based offsets.
    #[value(alias = "i")]
    Alg1,
    /// Initial zero-sum offsets.
    #[value(alias = "ii")]
    Alg2,
    /// No masking.
    #[value(alias = "iii")]
    Plain,
}

impl From<Case> for ProtocolKind {
    fn from(c: Case) -> Self {
        match c {
            Case::Alg1 => ProtocolKind::Alg1,
            Case::Alg2 => ProtocolKind::Alg2,
            Case::Plain => ProtocolKind::Plain,
        }
    }
}

#[derive(Args)]
struct Outputs {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the comma-separated table here.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct OffsetArgs {
    /// Range of the event-based offset adding steps, as LO,HI.
    #[arg(long, value_parser = parse_pair::<usize>, default_value = "20,40")]
    steps_range: (usize, usize),
    /// Range of the total event-based offset, as LO,HI.
    #[arg(long, value_parser = parse_pair::<i64>, default_value = "50,100")]
    magnitude_range: (i64, i64),
    /// Range of each zero-sum offset, as LO,HI.
    #[arg(long, value_parser = parse_pair::<i64>, default_value = "-20,20", allow_hyphen_values = true)]
    offset_range: (i64, i64),
}

impl OffsetArgs {
    fn configs(&self) -> (Alg1Config, Alg2Config) {
        (
            Alg1Config { steps_range: self.steps_range, magnitude_range: self.magnitude_range },
            Alg2Config { per_out_range: self.offset_range },
        )
    }
}

#[derive(Args)]
struct RunArgs {
    /// Full simulation config as JSON; overrides the other options.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Graph file; a random graph is generated otherwise.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "plain")]
    case: Case,
    /// Explicit initial states, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    states: Option<Vec<i64>>,
    /// Condition uniform states in [3,19] on this sum.
    #[arg(long)]
    sum: Option<i64>,
    #[command(flatten)]
    offsets: OffsetArgs,
    #[command(flatten)]
    out: Outputs,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment spec as JSON; overrides the other options.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "plain")]
    case: Case,
    /// Condition uniform states in [3,19] on this sum.
    #[arg(long)]
    sum: Option<i64>,
    #[command(flatten)]
    offsets: OffsetArgs,
    #[command(flatten)]
    out: Outputs,
}

#[derive(Args)]
struct SmartgridArgs {
    #[arg(long, value_enum, default_value = "alg2")]
    case: Case,
    /// Neighborhood graph file; the bundled eight-house graph otherwise.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Demands, comma separated.
    #[arg(long, value_delimiter = ',')]
    demands: Option<Vec<i64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Outputs,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    graph: PathBuf,
    /// One role per node: p (privacy-seeking), c (curious) or n (neither).
    #[arg(long)]
    roles: String,
    #[arg(long)]
    target: usize,
    #[arg(long, value_enum, default_value = "alg2")]
    case: Case,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long)]
    graph: PathBuf,
    /// One role per node: p, c or n.
    #[arg(long)]
    roles: String,
    #[arg(long)]
    target: usize,
    #[arg(long, value_enum, default_value = "alg2")]
    case: Case,
    /// True initial states, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    states: Vec<i64>,
    /// Seed for the true offsets, drawn inside the hypothesis space.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_pair::<i64>, default_value = "0,5")]
    state_range: (i64, i64),
    #[arg(long, value_parser = parse_pair::<i64>, default_value = "-2,2", allow_hyphen_values = true)]
    offset_range: (i64, i64),
    #[arg(long, default_value_t = 2)]
    installment_max: i64,
    #[arg(long, default_value_t = 1)]
    extra_steps: usize,
    #[arg(long, default_value_t = 10_000_000)]
    budget: u128,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> std::result::Result<(T, T), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected LO,HI, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<T>().map_err(|_| format!("bad number {v:?}"));
    Ok((parse(a)?, parse(b)?))
}

fn parse_roles(s: &str) -> Result<RoleMap> {
    let roles = s
        .split(',')
        .map(|r| match r.trim() {
            "p" | "private" | "privacy_seeking" => Ok(Role::PrivacySeeking),
            "c" | "curious" => Ok(Role::Curious),
            "n" | "plain" => Ok(Role::Plain),
            other => bail!("unknown role {other:?}"),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RoleMap::new(roles))
}

fn load_graph(path: &Path) -> Result<Digraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: GraphFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Digraph::try_from(file)?)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => match writeln!(std::io::stdout().lock(), "{text}") {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn initial_source(states: Option<Vec<i64>>, sum: Option<i64>) -> InitialStates {
    match states {
        Some(values) => InitialStates::Explicit { values },
        None => InitialStates::Uniform { range: (3, 19), sum },
    }
}

fn cmd_run(a: RunArgs) -> Result<bool> {
    let mut config: SimConfig = match &a.config {
        Some(path) => load_json(path)?,
        None => {
            let (alg1, alg2) = a.offsets.configs();
            let spec = ExperimentSpec {
                kind: ExperimentKind::Single,
                graph: a.graph.as_deref().map(load_graph).transpose()?,
                initial: initial_source(a.states, a.sum),
                alg1,
                alg2,
                ..ExperimentSpec::sweep(a.n, a.p, 1, a.seed, a.case.into())
            };
            spec.validate()?;
            spec.trial_config(0)?
        }
    };
    if a.out.table.is_some() {
        config.trace = TraceLevel::Full;
    }
    let trace = run(&config)?;
    let case = config
        .resolve()?
        .protocols
        .iter()
        .map(|p| p.kind())
        .find(|k| *k != ProtocolKind::Plain)
        .unwrap_or(ProtocolKind::Plain);
    let violations = trial_violations(&trace, case);
    for v in &violations {
        log::error!("{v}");
    }
    if let Some(path) = &a.out.table {
        emit(Some(path), &step_table(&trace)?)?;
    }
    emit(a.out.report.as_deref(), &serde_json::to_string_pretty(&trace)?)?;
    Ok(violations.is_empty())
}

fn cmd_sweep(a: SweepArgs) -> Result<bool> {
    let spec = match &a.spec {
        Some(path) => load_json(path)?,
        None => {
            let (alg1, alg2) = a.offsets.configs();
            ExperimentSpec {
                initial: initial_source(None, a.sum),
                alg1,
                alg2,
                ..ExperimentSpec::sweep(a.n, a.p, a.trials, a.seed, a.case.into())
            }
        }
    };
    let report = run_experiment(&spec)?;
    for v in &report.violations {
        log::error!("{v}");
    }
    if let Some(path) = &a.out.table {
        emit(Some(path), &mean_table(&report.mean_q))?;
    }
    emit(a.out.report.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(report.passed())
}

fn cmd_smartgrid(a: SmartgridArgs) -> Result<bool> {
    let graph = match &a.graph {
        Some(path) => load_graph(path)?,
        None => neighborhood_graph(),
    };
    let demands = a.demands.unwrap_or_else(|| NEIGHBORHOOD_DEMANDS.to_vec());
    let case: ProtocolKind = a.case.into();
    let (report, trace) = run_smartgrid(&demands, case, &graph, a.seed)?;
    if let Some(path) = &a.out.table {
        let config = SimConfig::uniform(
            quantized_consensus::sim::GraphSpec::Explicit { graph },
            demands,
            case,
            a.seed,
        )
        .with_trace(TraceLevel::Full);
        emit(Some(path), &step_table(&run(&config)?)?)?;
    }
    log::info!("converged after {:?} steps", trace.summary.steps_to_consensus);
    emit(a.out.report.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(report.violations.is_empty())
}

fn cmd_check(a: CheckArgs) -> Result<bool> {
    let g = load_graph(&a.graph)?;
    let roles = parse_roles(&a.roles)?;
    if roles.len() != g.node_count() || a.target >= g.node_count() {
        bail!("roles or target do not fit a {}-node graph", g.node_count());
    }
    let verdict = match a.case {
        Case::Alg1 => event_offset_privacy(&g, &roles, NodeId(a.target)),
        Case::Alg2 => zero_sum_privacy(&g, &roles, NodeId(a.target)),
        Case::Plain => bail!("the plain protocol has no privacy condition"),
    };
    emit(None, &serde_json::to_string_pretty(&verdict)?)?;
    Ok(true)
}

fn cmd_adversary(a: AdversaryArgs) -> Result<bool> {
    let g = load_graph(&a.graph)?;
    let roles = parse_roles(&a.roles)?;
    if roles.len() != g.node_count() || a.states.len() != g.node_count() {
        bail!("roles and states need one entry per node");
    }
    let space = HypothesisSpace {
        state_range: a.state_range,
        offset_range: a.offset_range,
        installment_max: a.installment_max,
        extra_steps: a.extra_steps,
        budget: a.budget,
    };
    let protocols = interior_protocols(&g, &roles, a.case.into(), &space, a.seed)?;
    let scenario = Scenario { graph: g, initial: a.states, protocols };
    let (_, view) = observe(&scenario, &roles, None)?;
    let result = adversary_enumerate(&view, NodeId(a.target), &space)?;
    emit(a.report.as_deref(), &serde_json::to_string_pretty(&result)?)?;
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Smartgrid(a) => cmd_smartgrid(a),
        Command::CheckPrivacy(a) => cmd_check(a),
        Command::Adversary(a) => cmd_adversary(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            log::error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
