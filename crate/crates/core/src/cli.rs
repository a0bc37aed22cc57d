//! Command-line front end. Every subcommand writes CSV whose first line is a
//! `# seed = N` comment.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::distributed::{equivalence_report, log_csv, run_general_protocol, run_tree_protocol};
use crate::error::{Error, Result};
use crate::factorization::OntoDecomposition;
use crate::graph::{algebraic_connectivity, enumerate_connected_graphs, BilevelGraph, OrderedDigraph};
use crate::operators::Operator;
use crate::problems::{
    build_svm, build_transport, flow_csv, objective_svm, objective_transport, Config, QuadraticSpec,
    SvmInstance, SvmSpec, TransportInstance, TransportSpec,
};
use crate::solver::{
    trace_csv, GraphDrs, Iteration, Relaxation, SolverConfig, SolverState, TraceRecord, TreeDrs,
    WtildeDrs,
};

/// Largest grid accepted by `transport-sweep`.
pub const MAX_SWEEP_GRID: usize = 64;

#[derive(Parser, Debug)]
#[command(name = "graphdrs", version, about = "Graph-structured Douglas-Rachford splitting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Shared {
    /// Step size, must be positive.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Relaxation parameter in (0, 2).
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Stop once the fixed-point residual squared drops below this.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Overrides any `seed` in the problem config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one solver on a bilevel graph and a problem config.
    Solve(SolveArgs),
    /// List all connected ordered graphs on n nodes with their algebraic connectivity.
    Enumerate(EnumerateArgs),
    /// Variance traces of the transport problem over every 4-node base graph.
    TransportSweep(SweepArgs),
    /// Step-size sweep on the distributed kernel SVM.
    Svm(SvmArgs),
    /// Run a message-passing protocol and compare it with the centralized solver.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Arbitrary onto decomposition of the base Laplacian.
    General,
    /// Duals on base edges; the base must be a tree.
    Tree,
    /// Laplacian dual tracking.
    Wtilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Decomposition {
    Spectral,
    Incidence,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Bilevel graph file with STATE and BASE sections.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Problem config (`key = value`); defaults to random quadratic consensus.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::General)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Decomposition::Spectral)]
    pub decomposition: Decomposition,
    /// For transport problems, write the final mean flow here.
    #[arg(long)]
    pub flow_out: Option<PathBuf>,
    /// Append a cumulative wall-clock column in seconds.
    #[arg(long)]
    pub wall_clock: bool,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum SweepMode {
    /// State graph equal to the base graph.
    A,
    /// Complete state graph over each base graph.
    B,
}

impl SweepMode {
    pub fn label(self) -> &'static str {
        match self {
            SweepMode::A => "a",
            SweepMode::B => "b",
        }
    }
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Transport config; the default geometry otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Grid size, overriding the config.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SweepMode::A, SweepMode::B])]
    pub modes: Vec<SweepMode>,
    /// Also write per-run iterations to reach `--var-tol`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-6)]
    pub var_tol: f64,
}

#[derive(Args, Debug)]
pub struct SvmArgs {
    #[command(flatten)]
    pub shared: Shared,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-2)]
    pub sigma_min: f64,
    #[arg(long, default_value_t = 1e1)]
    pub sigma_max: f64,
    #[arg(long, default_value_t = 10)]
    pub sigma_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Tree,
    General,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub shared: Shared,
    /// Bilevel graph; required unless the config is an SVM problem.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Problem config; the default SVM instance otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ProtocolArg::Tree)]
    pub protocol: ProtocolArg,
    #[arg(long, default_value_t = 50)]
    pub rounds: usize,
    /// Equivalence report CSV; printed to stderr when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code: 0 on success, 2 on input errors, 1 on numerical failure.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        1
    } else {
        2
    }
}

pub fn execute(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::TransportSweep(a) => cmd_transport_sweep(a),
        Command::Svm(a) => cmd_svm(a),
        Command::Simulate(a) => cmd_simulate(a),
    }
}

// ---------------------------------------------------------------------------
// Inputs and outputs

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Problem(format!("cannot read {}: {e}", path.display())))
}

fn with_path(path: &Path, e: Error) -> Error {
    Error::Problem(format!("{}: {e}", path.display()))
}

pub fn read_graph(path: &Path) -> Result<BilevelGraph> {
    BilevelGraph::parse(&read_file(path)?).map_err(|e| with_path(path, e))
}

pub fn read_config(path: Option<&Path>) -> Result<Config> {
    match path {
        None => Ok(Config::default()),
        Some(p) => Config::parse(&read_file(p)?).map_err(|e| with_path(p, e)),
    }
}

fn write_output(out: Option<&Path>, seed: u64, body: &str) -> Result<()> {
    let text = format!("# seed = {seed}\n{body}");
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::Problem(format!("cannot write {}: {e}", p.display()))),
    }
}

fn solver_config(shared: &Shared, sigma: f64, max_iter: usize, tol: f64) -> Result<SolverConfig> {
    let cfg = SolverConfig {
        sigma: shared.sigma.unwrap_or(sigma),
        relaxation: Relaxation::Constant(shared.theta),
        max_iter: shared.max_iter.unwrap_or(max_iter),
        tol: shared.tol.unwrap_or(tol),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// A problem instance loaded from a config file.
pub enum Problem {
    Quadratic(QuadraticSpec),
    Transport(Box<TransportInstance>),
    Svm(Box<SvmInstance>),
}

pub struct Loaded {
    pub problem: Problem,
    pub ops: Vec<Operator>,
    /// Set when the problem fixes its own graph.
    pub graph: Option<BilevelGraph>,
    pub seed: u64,
}

impl Loaded {
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        match &self.problem {
            Problem::Quadratic(q) => q.objective(x),
            Problem::Transport(t) => objective_transport(t, x).map_or(f64::NAN, |o| o.value),
            Problem::Svm(s) => objective_svm(s, x).unwrap_or(f64::NAN),
        }
    }
}

/// Builds the problem named by the config's `problem` key (default
/// `quadratic`). `n_nodes` sizes random quadratic instances.
pub fn load_problem(cfg: &Config, seed: Option<u64>, n_nodes: Option<usize>) -> Result<Loaded> {
    let mut cfg = cfg.clone();
    let kind = cfg.get_str("problem").unwrap_or("quadratic").to_string();
    match kind.as_str() {
        "quadratic" => {
            let seed = seed.map_or_else(|| cfg.get_or("seed", 0u64), Ok)?;
            cfg.set("seed", &seed.to_string());
            let n = n_nodes.ok_or_else(|| Error::Problem("quadratic problems need a graph".into()))?;
            let q = QuadraticSpec::from_config(&cfg, n)?;
            let ops = q.operators()?;
            Ok(Loaded { problem: Problem::Quadratic(q), ops, graph: None, seed })
        }
        "transport" => {
            let spec = TransportSpec::from_config(&cfg)?;
            let (inst, ops) = build_transport(&spec)?;
            Ok(Loaded {
                problem: Problem::Transport(Box::new(inst)),
                ops,
                graph: None,
                seed: seed.unwrap_or(0),
            })
        }
        "svm" => {
            let mut spec = SvmSpec::from_config(&cfg)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let (inst, ops, bg) = build_svm(&spec)?;
            Ok(Loaded {
                problem: Problem::Svm(Box::new(inst)),
                ops,
                graph: Some(bg),
                seed: spec.seed,
            })
        }
        other => Err(Error::Problem(format!(
            "unknown problem `{other}` (expected quadratic, transport or svm)"
        ))),
    }
}

/// Resolves the graph either from the problem or from `--graph`, and loads
/// the problem against it.
fn load_instance(
    graph: Option<&Path>,
    config: Option<&Path>,
    seed: Option<u64>,
    default_problem: &str,
) -> Result<(BilevelGraph, Loaded)> {
    let mut cfg = read_config(config)?;
    if cfg.get_str("problem").is_none() {
        cfg.set("problem", default_problem);
    }
    let file_graph = graph.map(read_graph).transpose()?;
    let loaded = load_problem(&cfg, seed, file_graph.as_ref().map(BilevelGraph::n_nodes))
        .map_err(|e| match config {
            Some(p) if !e.is_numerical() => with_path(p, e),
            _ => e,
        })?;
    let bg = match (file_graph, &loaded.graph) {
        (Some(_), Some(_)) => {
            return Err(Error::Problem(
                "the svm problem defines its own graph; drop --graph".into(),
            ))
        }
        (Some(g), None) => g,
        (None, Some(g)) => g.clone(),
        (None, None) => return Err(Error::Problem("--graph is required for this problem".into())),
    };
    if bg.n_nodes() != loaded.ops.len() {
        return Err(Error::Problem(format!(
            "problem has {} operators but the graph has {} nodes",
            loaded.ops.len(),
            bg.n_nodes()
        )));
    }
    Ok((bg, loaded))
}

// ---------------------------------------------------------------------------
// Solving

pub fn build_engine(
    method: Method,
    decomposition: Decomposition,
    bg: BilevelGraph,
    ops: Vec<Operator>,
    cfg: SolverConfig,
) -> Result<Box<dyn Iteration + Send + Sync>> {
    Ok(match method {
        Method::General => {
            let z = match decomposition {
                Decomposition::Spectral => OntoDecomposition::spectral(bg.base())?,
                Decomposition::Incidence => OntoDecomposition::incidence(bg.base())?,
            };
            Box::new(GraphDrs::new(bg, z, ops, cfg)?)
        }
        Method::Tree => Box::new(TreeDrs::new(bg, ops, cfg)?),
        Method::Wtilde => Box::new(WtildeDrs::new(bg, ops, cfg)?),
    })
}

/// Same stopping rule as [`crate::solver::run`], also recording the
/// cumulative wall-clock time after each iteration.
pub fn run_timed(
    engine: &dyn Iteration,
    objective: Option<&(dyn Fn(&DVector<f64>) -> f64 + Sync)>,
) -> Result<(SolverState, Vec<TraceRecord>, Vec<f64>)> {
    let cfg = engine.nodes().config().clone();
    let start = Instant::now();
    let mut st = engine.init(None)?;
    let mut trace = Vec::new();
    let mut times = Vec::new();
    for _ in 0..cfg.max_iter {
        let mut rec = engine.step(&mut st)?;
        if let Some(f) = objective {
            rec.objective = Some(f(&st.mean()));
        }
        times.push(start.elapsed().as_secs_f64());
        let done = rec.residual_sq < cfg.tol;
        trace.push(rec);
        if done {
            break;
        }
    }
    Ok((st, trace, times))
}

fn with_wall_clock(csv: &str, times: &[f64]) -> String {
    let mut out = String::with_capacity(csv.len() + 24 * times.len());
    for (i, line) in csv.lines().enumerate() {
        out.push_str(line);
        if i == 0 {
            out.push_str(",wall_clock_s");
        } else {
            out.push_str(&format!(",{:.6}", times[i - 1]));
        }
        out.push('\n');
    }
    out
}

pub fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let (bg, loaded) = load_instance(
        a.graph.as_deref(),
        a.config.as_deref(),
        a.shared.seed,
        "quadratic",
    )?;
    let cfg = solver_config(&a.shared, 1.0, 1000, 1e-12)?;
    let engine = build_engine(a.method, a.decomposition, bg, loaded.ops.clone(), cfg)?;
    let obj = |x: &DVector<f64>| loaded.objective(x);
    let (st, trace, times) = run_timed(engine.as_ref(), Some(&obj))?;
    let mut csv = trace_csv(&trace);
    if a.wall_clock {
        csv = with_wall_clock(&csv, &times);
    }
    write_output(a.shared.out.as_deref(), loaded.seed, &csv)?;
    if let Some(path) = &a.flow_out {
        match &loaded.problem {
            Problem::Transport(t) => write_output(Some(path), loaded.seed, &flow_csv(t.p, &st.mean()))?,
            _ => return Err(Error::Problem("--flow-out needs a transport problem".into())),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Enumeration

pub const ENUMERATE_HEADER: &str = "graph_id,edges,lambda1";

/// Connected ordered graphs on `n` nodes, 1-based ids, with `λ₁`.
pub fn enumerate_csv(n: usize) -> Result<String> {
    let mut out = String::from(ENUMERATE_HEADER);
    out.push('\n');
    for (id, g) in enumerate_connected_graphs(n)?.iter().enumerate() {
        let l1 = if n == 1 { 0.0 } else { algebraic_connectivity(g)? };
        out.push_str(&format!("{},{},{:.16e}\n", id + 1, g.edge_string(), l1));
    }
    Ok(out)
}

pub fn cmd_enumerate(a: &EnumerateArgs) -> Result<()> {
    write_output(a.out.as_deref(), 0, &enumerate_csv(a.n)?)
}

// ---------------------------------------------------------------------------
// Transport sweep

#[derive(Debug, Clone)]
pub struct SweepRun {
    /// 1-based position of the base graph in enumeration order.
    pub graph_id: usize,
    pub mode: SweepMode,
    pub lambda1: f64,
    pub variances: Vec<f64>,
}

impl SweepRun {
    /// First iteration whose variance is below `tol`.
    pub fn iterations_to(&self, tol: f64) -> Option<usize> {
        self.variances.iter().position(|&v| v < tol).map(|k| k + 1)
    }
}

/// Runs every 4-node base graph in each mode from `w⁰ = 0`. With `var_tol`
/// set, each run stops once its variance drops below it. Runs execute in
/// parallel and come back ordered by mode, then graph.
pub fn transport_sweep(
    inst_ops: &[Operator],
    cfg: &SolverConfig,
    modes: &[SweepMode],
    var_tol: Option<f64>,
) -> Result<Vec<SweepRun>> {
    let graphs = enumerate_connected_graphs(4)?;
    let jobs: Vec<(SweepMode, usize)> = modes
        .iter()
        .flat_map(|&m| (0..graphs.len()).map(move |g| (m, g)))
        .collect();
    jobs.par_iter()
        .map(|&(mode, gi)| {
            let base = graphs[gi].clone();
            let state = match mode {
                SweepMode::A => base.clone(),
                SweepMode::B => OrderedDigraph::complete(4),
            };
            let bg = BilevelGraph::new(state, base)?;
            let lambda1 = algebraic_connectivity(bg.base())?;
            let z = OntoDecomposition::spectral(bg.base())?;
            let drs = GraphDrs::new(bg, z, inst_ops.to_vec(), cfg.clone())?;
            let mut st = drs.init(None)?;
            let mut variances = Vec::with_capacity(cfg.max_iter);
            for _ in 0..cfg.max_iter {
                let rec = drs.step(&mut st)?;
                variances.push(rec.variance);
                if rec.residual_sq < cfg.tol || var_tol.is_some_and(|t| rec.variance < t) {
                    break;
                }
            }
            Ok(SweepRun {
                graph_id: gi + 1,
                mode,
                lambda1,
                variances,
            })
        })
        .collect()
}

pub const SWEEP_HEADER: &str = "graph_id,mode,lambda1,iter,variance";
pub const SWEEP_SUMMARY_HEADER: &str = "graph_id,mode,lambda1,iterations";

pub fn sweep_csv(runs: &[SweepRun]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in runs {
        for (k, v) in r.variances.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{:.16e},{},{:.16e}\n",
                r.graph_id,
                r.mode.label(),
                r.lambda1,
                k + 1,
                v
            ));
        }
    }
    out
}

/// Iterations to reach `tol` per run; empty when never reached.
pub fn sweep_summary_csv(runs: &[SweepRun], tol: f64) -> String {
    let mut out = String::from(SWEEP_SUMMARY_HEADER);
    out.push('\n');
    for r in runs {
        let k = r.iterations_to(tol).map(|k| k.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{:.16e},{}\n", r.graph_id, r.mode.label(), r.lambda1, k));
    }
    out
}

pub fn cmd_transport_sweep(a: &SweepArgs) -> Result<()> {
    let cfg_file = read_config(a.config.as_deref())?;
    let mut spec = TransportSpec::from_config(&cfg_file).map_err(|e| match &a.config {
        Some(p) => with_path(p, e),
        None => e,
    })?;
    if let Some(p) = a.p {
        if cfg_file.get_str("water").is_some() || cfg_file.get_str("bridge").is_some() {
            spec.p = p;
        } else {
            let cap = spec.cap;
            spec = TransportSpec::default_for(p);
            spec.cap = cap;
        }
    }
    if spec.p > MAX_SWEEP_GRID {
        return Err(Error::Problem(format!(
            "grid size {} exceeds the sweep limit of {MAX_SWEEP_GRID}",
            spec.p
        )));
    }
    let (_, ops) = build_transport(&spec)?;
    let cfg = solver_config(&a.shared, 2.0, 1000, 0.0)?;
    let mut modes = a.modes.clone();
    modes.sort_unstable();
    modes.dedup();
    let runs = transport_sweep(&ops, &cfg, &modes, None)?;
    let seed = a.shared.seed.unwrap_or(0);
    write_output(a.shared.out.as_deref(), seed, &sweep_csv(&runs))?;
    if let Some(path) = &a.summary {
        write_output(Some(path), seed, &sweep_summary_csv(&runs, a.var_tol))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// SVM sweep

/// `count` points from `lo` to `hi`, evenly spaced in log scale.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvmRun {
    pub sigma: f64,
    pub trace: Vec<TraceRecord>,
}

impl SvmRun {
    pub fn best_variance(&self) -> f64 {
        self.trace.iter().map(|r| r.variance).fold(f64::INFINITY, f64::min)
    }
}

/// The tree iteration on the SVM instance for each `σ`, objective at `x̄`.
pub fn svm_sweep(
    inst: &SvmInstance,
    ops: &[Operator],
    bg: &BilevelGraph,
    sigmas: &[f64],
    base: &SolverConfig,
) -> Result<Vec<SvmRun>> {
    sigmas
        .par_iter()
        .map(|&sigma| {
            let cfg = SolverConfig { sigma, ..base.clone() };
            let drs = TreeDrs::new(bg.clone(), ops.to_vec(), cfg)?;
            let obj = |x: &DVector<f64>| objective_svm(inst, x).unwrap_or(f64::NAN);
            let (_, trace, _) = run_timed(&drs, Some(&obj))?;
            Ok(SvmRun { sigma, trace })
        })
        .collect()
}

pub const SVM_HEADER: &str = "sigma,iter,objective,variance";

pub fn svm_csv(runs: &[SvmRun]) -> String {
    let mut out = String::from(SVM_HEADER);
    out.push('\n');
    for r in runs {
        for t in &r.trace {
            out.push_str(&format!(
                "{:.16e},{},{:.16e},{:.16e}\n",
                r.sigma,
                t.k,
                t.objective.unwrap_or(f64::NAN),
                t.variance
            ));
        }
    }
    out
}

pub fn cmd_svm(a: &SvmArgs) -> Result<()> {
    let mut cfg_file = read_config(a.config.as_deref())?;
    if cfg_file.get_str("problem").is_none() {
        cfg_file.set("problem", "svm");
    }
    let mut spec = SvmSpec::from_config(&cfg_file).map_err(|e| match &a.config {
        Some(p) => with_path(p, e),
        None => e,
    })?;
    if let Some(s) = a.shared.seed {
        spec.seed = s;
    }
    if !(a.sigma_min > 0.0 && a.sigma_max >= a.sigma_min) || a.sigma_count == 0 {
        return Err(Error::InvalidConfig("need 0 < sigma-min <= sigma-max and sigma-count >= 1".into()));
    }
    let (inst, ops, bg) = build_svm(&spec)?;
    let cfg = solver_config(&a.shared, 1.0, 2000, 0.0)?;
    let sigmas = match a.shared.sigma {
        Some(s) => vec![s],
        None => logspace(a.sigma_min, a.sigma_max, a.sigma_count),
    };
    let runs = svm_sweep(&inst, &ops, &bg, &sigmas, &cfg)?;
    write_output(a.shared.out.as_deref(), spec.seed, &svm_csv(&runs))
}

// ---------------------------------------------------------------------------
// Protocol simulation

pub fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let (bg, loaded) = load_instance(a.graph.as_deref(), a.config.as_deref(), a.shared.seed, "svm")?;
    let cfg = solver_config(&a.shared, 1.0, a.rounds, 0.0)?;
    let outcome = match a.protocol {
        ProtocolArg::Tree => run_tree_protocol(&bg, &loaded.ops, &cfg, a.rounds, None)?,
        ProtocolArg::General => run_general_protocol(&bg, &loaded.ops, &cfg, a.rounds)?,
    };
    let report = equivalence_report(&outcome, &bg, &loaded.ops, &cfg)?;
    write_output(a.shared.out.as_deref(), loaded.seed, &log_csv(&outcome.log))?;
    match &a.report {
        Some(p) => write_output(Some(p), loaded.seed, &report.to_csv())?,
        None => eprint!("{}", report.to_csv()),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logspace_endpoints() {
        let s = logspace(1e-2, 1e1, 10);
        assert_eq!(s.len(), 10);
        assert!((s[0] - 1e-2).abs() < 1e-15 && (s[9] - 10.0).abs() < 1e-12);
        for w in s.windows(2) {
            assert!((w[1] / w[0] - 10f64.powf(1.0 / 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn enumerate_small() {
        let csv = enumerate_csv(2).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines, vec![ENUMERATE_HEADER, "1,1-2,2.0000000000000000e0"]);
        assert_eq!(enumerate_csv(4).unwrap().lines().count(), 39);
        assert!(matches!(enumerate_csv(7), Err(Error::TooManyNodes { .. })));
    }

    #[test]
    fn wall_clock_column() {
        let s = with_wall_clock("a,b\n1,2\n3,4\n", &[0.5, 1.25]);
        assert_eq!(s, "a,b,wall_clock_s\n1,2,0.500000\n3,4,1.250000\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::NonFinite { iter: 3 }), 1);
        assert_eq!(exit_code(&Error::Parse { line: 1, msg: String::new() }), 2);
        assert_eq!(run_cli(["graphdrs", "enumerate", "--n", "7"]), 2);
        assert_eq!(run_cli(["graphdrs", "bogus"]), 2);
    }

    #[test]
    fn theta_two_is_rejected() {
        let shared = Shared { theta: 2.0, ..Default::default() };
        assert!(solver_config(&shared, 1.0, 10, 0.0).is_err());
        let shared = Shared { theta: 1.5, sigma: Some(-1.0), ..Default::default() };
        assert!(solver_config(&shared, 1.0, 10, 0.0).is_err());
    }

    #[test]
    fn problem_dispatch() {
        let cfg = Config::parse("problem = quadratic\ncenters = 1; 2; 3").unwrap();
        let l = load_problem(&cfg, None, Some(3)).unwrap();
        assert_eq!(l.ops.len(), 3);
        assert!(l.graph.is_none());
        let l = load_problem(&Config::parse("problem = svm").unwrap(), Some(2), None).unwrap();
        assert_eq!(l.seed, 2);
        assert_eq!(l.graph.unwrap().n_nodes(), 55);
        assert!(load_problem(&Config::parse("problem = lp").unwrap(), None, None).is_err());
    }
}
