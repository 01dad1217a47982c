//! Subcommands of the `pbsgraph` tool.
//!
//! Each `cmd_*` function returns the text meant for standard output and an
//! exit code, so the binary stays a thin wrapper and tests can call the
//! commands directly.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pbsgraph::analytics::{
    a_closed_form, format_sig, level_success_prob, naive_time_log10, scaling_table, to_csv,
    total_time_approx, total_time_exact, AnalyticsError, ProtocolParams,
};
use pbsgraph::fock::{fidelity, qubit_statevector_from_stabilizers, run_schedule, FockError};
use pbsgraph::graph::{GateKind, GraphError};
use pbsgraph::planner::{
    brute_force_schedule_search, execute_schedule, plan_join_sequence, plan_tree_protocol,
    JoinPlan, PlanError, Schedule, ScheduleDoc, ScheduleError, SearchOptions, SearchOutcome,
    MAX_SEARCH_QUBITS,
};
use pbsgraph::sim::{
    run_campaign_with_budget, DetectorModel, Models, RestartPolicy, SimError, SimResult,
    SourceModel,
};
use pbsgraph::Graph;
use serde::Serialize;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;
pub const EXIT_UNREACHABLE: i32 = 4;

/// Largest schedule the Fock-space cross-check is run on.
pub const ORACLE_QUBIT_LIMIT: usize = 8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_)
            | CliError::Parse { .. }
            | CliError::Analytics(_)
            | CliError::Sim(_) => EXIT_USAGE,
            CliError::Plan(
                PlanError::NotATree | PlanError::TooLarge { .. } | PlanError::NoLevels,
            ) => EXIT_USAGE,
            CliError::Plan(PlanError::OddOrder(_)) => EXIT_UNREACHABLE,
            _ => EXIT_FAILURE,
        }
    }
}

/// Text for standard output plus the process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmdOutput {
    pub stdout: String,
    pub code: i32,
}

impl CmdOutput {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            code: EXIT_OK,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pbsgraph",
    version,
    about = "Graph states from polarizing beam splitters: planning, verification and efficiency"
)]
pub struct Cli {
    /// key=value file whose entries act as flags; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate success probabilities and preparation times.
    Analyze(AnalyzeArgs),
    /// Monte Carlo of the tree protocol with lossy sources and detectors.
    Simulate(SimulateArgs),
    /// Plan a schedule that builds a target graph.
    Plan(PlanArgs),
    /// Execute a schedule and report the resulting state.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct AnalyzeArgs {
    #[arg(long, default_value_t = 0.01)]
    pub eta_s: f64,
    #[arg(long, default_value_t = 0.7)]
    pub eta_d: f64,
    /// Target size is 2^m qubits.
    #[arg(long, default_value_t = 7)]
    pub m: u32,
    #[arg(long, default_value_t = 80e6)]
    pub rep_rate_hz: f64,
    /// Report the strategy without intermediate detections instead.
    #[arg(long)]
    pub naive: bool,
    /// Qubit count for --naive.
    #[arg(long, default_value_t = 128)]
    pub n: u64,
    /// Write the per-level table for 1..=m to this CSV file.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    RebuildBoth,
    RebuildOne,
}

impl From<PolicyArg> for RestartPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::RebuildBoth => RestartPolicy::RebuildBoth,
            PolicyArg::RebuildOne => RestartPolicy::RebuildOne,
        }
    }
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct SimulateArgs {
    /// Target size is 2^m qubits.
    #[arg(long, default_value_t = 3)]
    pub m: u32,
    #[arg(long, default_value_t = 0.1)]
    pub eta_s: f64,
    #[arg(long, default_value_t = 0.7)]
    pub eta_d: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Dark-count probability per detection window.
    #[arg(long, default_value_t = 0.0)]
    pub dark: f64,
    /// Photon-number-resolving detectors: accept exactly one count.
    #[arg(long)]
    pub number_resolving: bool,
    #[arg(long, value_enum, default_value_t = PolicyArg::RebuildBoth)]
    pub policy: PolicyArg,
    #[arg(long, default_value_t = 80e6)]
    pub rep_rate_hz: f64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Omit the `generated_at` field.
    #[arg(long)]
    pub no_timestamp: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Stop after this many seconds and report what finished.
    #[arg(long)]
    pub time_budget_secs: Option<f64>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct PlanArgs {
    /// Edge-list file of the target graph.
    pub target: Option<PathBuf>,
    /// Emit the measure-early tree protocol instead of planning a target.
    #[arg(long)]
    pub protocol: bool,
    /// Connection levels for --protocol.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Exhaustive search instead of join planning; works for any graph.
    #[arg(long)]
    pub search: bool,
    #[arg(long)]
    pub allow_intra: bool,
    #[arg(long)]
    pub allow_hadamard: bool,
    /// Depth limit for --search, in gates plus Hadamards.
    #[arg(long)]
    pub max_ops: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Write the target graph in DOT format.
    #[arg(long, value_name = "PATH")]
    pub dot: Option<PathBuf>,
    /// Schedule as JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    /// Schedule file, text or JSON.
    pub schedule: PathBuf,
    /// Cross-check with the Fock-space simulation.
    #[arg(long)]
    pub oracle: bool,
    /// Edge-list file the final graph must equal.
    #[arg(long, value_name = "PATH")]
    pub target: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, e: impl ToString) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn read_graph(path: &Path) -> Result<Graph, CliError> {
    Graph::parse_edge_list(&read(path)?).map_err(|e: GraphError| parse_err(path, e))
}

fn read_schedule(path: &Path) -> Result<Schedule, CliError> {
    let text = read(path)?;
    if text.trim_start().starts_with('{') {
        let doc: ScheduleDoc = serde_json::from_str(&text).map_err(|e| parse_err(path, e))?;
        Schedule::from_json_doc(&doc).map_err(|e: ScheduleError| parse_err(path, e))
    } else {
        Schedule::parse(&text).map_err(|e| parse_err(path, e))
    }
}

fn rep_rate(hz: f64) -> Result<f64, CliError> {
    if hz > 0.0 && hz.is_finite() {
        Ok(1.0 / hz)
    } else {
        Err(CliError::Usage(format!(
            "--rep-rate-hz must be positive, got {hz}"
        )))
    }
}

fn g6(x: f64) -> String {
    format_sig(x, 6)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<CmdOutput, CliError> {
    let t0 = rep_rate(args.rep_rate_hz)?;
    if args.naive {
        let log10 = naive_time_log10(args.n, args.eta_s, args.eta_d)?;
        let seconds = log10 + t0.log10();
        return Ok(CmdOutput::ok(format!(
            "naive: n = {}, eta_s = {}, eta_d = {}\nlog10(T/t0) = {}\nlog10(T/s) = {} at {} Hz\n",
            args.n,
            args.eta_s,
            args.eta_d,
            format_sig(log10, 6),
            format_sig(seconds, 6),
            args.rep_rate_hz
        )));
    }
    let params = ProtocolParams::new(args.eta_s, args.eta_d, args.m, t0)?;
    if let Some(path) = &args.csv {
        write(path, &to_csv(&scaling_table(&params, args.m)?))?;
    }
    let exact = total_time_exact(&params)?;
    let approx = total_time_approx(&params)?;
    let mut out = format!(
        "n = {} (m = {}), eta_s = {}, eta_d = {}\n",
        g6(params.qubits()),
        params.m,
        params.eta_s,
        params.eta_d
    );
    out += &format!(
        "a_(m-1) = {}\n",
        g6(a_closed_form(params.m - 1, params.eta_d)?)
    );
    out += &format!(
        "p_(m-1) = {}\n",
        g6(level_success_prob(&params, params.m - 1)?)
    );
    for (name, t) in [("T_exact", exact), ("T_approx", approx)] {
        let over_t0 = pbsgraph::analytics::format_sig_log10(t.log10(), 6);
        let seconds = pbsgraph::analytics::format_sig_log10(t.log10() + t0.log10(), 6);
        out += &format!(
            "{name}/t0 = {over_t0}\n{name} = {seconds} s at {} Hz\n",
            args.rep_rate_hz
        );
    }
    Ok(CmdOutput::ok(out))
}

#[derive(Serialize)]
struct SimulateDoc<'a> {
    #[serde(flatten)]
    result: &'a SimResult,
    /// Unix seconds; omitted with --no-timestamp.
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_at: Option<u64>,
}

/// Runs the campaign and renders the JSON document.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<CmdOutput, CliError> {
    let params = ProtocolParams::new(args.eta_s, args.eta_d, args.m, rep_rate(args.rep_rate_hz)?)?;
    let models = Models {
        source: SourceModel { eta_s: args.eta_s },
        detector: DetectorModel {
            eta_d: args.eta_d,
            number_resolving: args.number_resolving,
            dark_count_prob: args.dark,
        },
        policy: args.policy.into(),
    };
    let budget = match args.time_budget_secs {
        Some(s) if s >= 0.0 && s.is_finite() => Some(Duration::from_secs_f64(s)),
        Some(s) => {
            return Err(CliError::Usage(format!(
                "--time-budget-secs must be >= 0, got {s}"
            )))
        }
        None => None,
    };
    let run = || run_campaign_with_budget(&params, &models, args.trials, args.seed, budget);
    let result = match args.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::ThreadPool(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let partial = result.partial;
    let doc = SimulateDoc {
        result: &result,
        generated_at: (!args.no_timestamp).then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        }),
    };
    let mut json = serde_json::to_string_pretty(&doc)?;
    json.push('\n');
    let stdout = match &args.out {
        Some(path) => {
            write(path, &json)?;
            format!(
                "wrote {} ({} of {} trials)\n",
                path.display(),
                result.completed_trials,
                result.trials
            )
        }
        None => json,
    };
    Ok(CmdOutput {
        stdout,
        code: if partial { EXIT_PARTIAL } else { EXIT_OK },
    })
}

fn emit_schedule(
    args: &PlanArgs,
    schedule: &Schedule,
    mut out: String,
) -> Result<CmdOutput, CliError> {
    let body = if args.json {
        let mut s = serde_json::to_string_pretty(&schedule.to_json_doc())?;
        s.push('\n');
        s
    } else {
        schedule.to_text()
    };
    match &args.out {
        Some(path) => {
            write(path, &body)?;
            out += &format!("wrote {}\n", path.display());
        }
        None => out += &body,
    }
    Ok(CmdOutput::ok(out))
}

pub fn cmd_plan(args: &PlanArgs) -> Result<CmdOutput, CliError> {
    if args.protocol {
        let schedule = plan_tree_protocol(args.m)?;
        if let Some(path) = &args.dot {
            let ex = execute_schedule(&schedule).map_err(PlanError::from)?;
            let graph = ex.graph.map_err(|e| CliError::Usage(e.to_string()))?;
            write(path, &graph.to_dot("protocol"))?;
        }
        let out = format!(
            "tree protocol: {} qubits, {} gates\n",
            schedule.qubit_ids().map_err(PlanError::from)?.len(),
            schedule.gate_count()
        );
        return emit_schedule(args, &schedule, out);
    }
    let Some(path) = &args.target else {
        return Err(CliError::Usage(
            "plan needs a target edge-list file or --protocol".into(),
        ));
    };
    let target = read_graph(path)?;
    if let Some(dot) = &args.dot {
        write(dot, &target.to_dot("target"))?;
    }
    if args.search {
        let n = target.vertex_count();
        let options = SearchOptions {
            max_qubits: MAX_SEARCH_QUBITS,
            allow_intra: args.allow_intra,
            allow_hadamard: args.allow_hadamard,
            max_ops: args
                .max_ops
                .unwrap_or_else(|| SearchOptions::joins_only(n).max_ops),
        };
        return match brute_force_schedule_search(&target, options)? {
            SearchOutcome::Found(s) => {
                let out = format!("reachable: {} gates\n", s.gate_count());
                emit_schedule(args, &s, out)
            }
            SearchOutcome::NotFound { explored } => Ok(CmdOutput {
                stdout: format!("unreachable within search limits ({explored} states explored)\n"),
                code: EXIT_UNREACHABLE,
            }),
        };
    }
    match plan_join_sequence(&target)? {
        JoinPlan::Reachable(s) => {
            let out = format!("reachable by joins: {} gates\n", s.gate_count());
            emit_schedule(args, &s, out)
        }
        JoinPlan::UnreachableByJoins => Ok(CmdOutput {
            stdout: "unreachable by joins\n".into(),
            code: EXIT_UNREACHABLE,
        }),
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<CmdOutput, CliError> {
    let schedule = read_schedule(&args.schedule)?;
    let ex = execute_schedule(&schedule).map_err(|e| parse_err(&args.schedule, e))?;
    let ids = &ex.qubit_ids;
    let intra = ex
        .gates
        .iter()
        .filter(|g| g.kind() == GateKind::IntraGraph)
        .count();
    let mut out = format!(
        "qubits: {}\ngates: {} ({} inter, {} intra)\nprobability: {}\n",
        ids.len(),
        ex.gates.len(),
        ex.gates.len() - intra,
        intra,
        format_sig(ex.probability, 15)
    );
    match &ex.graph {
        Ok(g) => {
            let edges: Vec<String> = g
                .edges()
                .iter()
                .map(|&(u, v)| format!("{}-{}", ids[u], ids[v]))
                .collect();
            out += &format!(
                "graph: {}\n",
                if edges.is_empty() {
                    "(no edges)".into()
                } else {
                    edges.join(" ")
                }
            );
        }
        Err(e) if ex.group.is_some() => out += &format!("graph: {e}\n"),
        Err(_) => out += "graph: none (postselection impossible)\n",
    }
    let mut code = EXIT_OK;
    if let Some(path) = &args.target {
        let target = read_graph(path)?;
        let ids_match = ids.iter().copied().eq(0..target.vertex_count());
        let matches = ids_match && ex.graph.as_ref().is_ok_and(|g| *g == target);
        out += if matches {
            "target: match\n"
        } else {
            "target: MISMATCH\n"
        };
        if !matches {
            code = EXIT_FAILURE;
        }
    }
    if args.oracle {
        if ids.len() > ORACLE_QUBIT_LIMIT {
            out += &format!("oracle: skipped, more than {ORACLE_QUBIT_LIMIT} qubits\n");
        } else {
            let (prob, state) = run_schedule(&schedule)?;
            out += &format!("oracle probability: {}\n", format_sig(prob, 15));
            match &ex.group {
                Some(group) => {
                    let f = fidelity(&state, &qubit_statevector_from_stabilizers(group)?)?;
                    out += &format!("oracle fidelity: {}\n", format_sig(f, 15));
                }
                None => out += "oracle fidelity: n/a\n",
            }
        }
    }
    Ok(CmdOutput { stdout: out, code })
}

/// Replaces `--config PATH` by the flags it lists, placed right after the
/// subcommand so that flags given on the command line override them.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            config = Some(
                it.next()
                    .ok_or_else(|| CliError::Usage("--config needs a path".into()))?,
            );
        } else if let Some(p) = arg.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(config) = config else {
        return Ok(rest);
    };
    let path = PathBuf::from(config);
    let mut flags = Vec::new();
    for (i, raw) in read(&path)?.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(&path, format!("line {}: expected key=value", i + 1)))?;
        let key = key.trim().replace('_', "-");
        match value.trim() {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            v => {
                flags.push(format!("--{key}"));
                flags.push(v.to_string());
            }
        }
    }
    let sub = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|p| p + 2)
        .unwrap_or(rest.len());
    rest.splice(sub..sub, flags);
    Ok(rest)
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run(argv: Vec<String>) -> CmdOutputOrExit {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => return CmdOutputOrExit::Error(e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => return CmdOutputOrExit::Clap(e),
    };
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Plan(a) => cmd_plan(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(o) => CmdOutputOrExit::Output(o),
        Err(e) => CmdOutputOrExit::Error(e),
    }
}

pub enum CmdOutputOrExit {
    Output(CmdOutput),
    Error(CliError),
    Clap(clap::Error),
}
