//! The `entsearch` command line: search, detection, copy-count analysis
//! and query-count benchmarks, each emitting a JSON envelope and
//! optionally CSV data.

mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use entsearch::copies::{self, CopiesRow, DistinguishabilityPoint};
use entsearch::entdetect::{CopyEstimatorConfig, DetectionVerdict, Detector};
use entsearch::formula::planted;
use entsearch::{
    classical_baseline, cost_model, parse_dimacs, parse_expr, search, DensityOp, Error, Formula, Mode, Route,
    SearchConfig, SearchOutcome, SearchStatus, SpaMap,
};

use output::{emit_json, to_csv, Clock};
pub use output::{write_atomic, Envelope};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_PARSE, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } => EXIT_CAP,
            _ => EXIT_PARSE,
        };
        Self { code, message: e.to_string() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Parser)]
#[command(name = "entsearch", version, about = "Search driven by entanglement detection, simulated")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find satisfying assignments by range pruning.
    Solve(SolveArgs),
    /// Run one separability test.
    Detect(DetectArgs),
    /// Copies needed to separate one-solution from no-solution states.
    Copies(CopiesArgs),
    /// Overlap grid over L and N, as CSV.
    Grid(GridArgs),
    /// Detector calls and classical evaluations on planted instances.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Analytic,
    Purity,
    Ppt,
    #[value(alias = "spa-exact")]
    Spa,
    #[value(name = "spa-est", alias = "spa-estimated")]
    SpaEst,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::Analytic => Route::Analytic,
            RouteArg::Purity => Route::Purity,
            RouteArg::Ppt => Route::Ppt,
            RouteArg::Spa => Route::SpaExact,
            RouteArg::SpaEst => Route::SpaEstimated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Minimal,
    Dxd,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Minimal => Mode::Minimal,
            ModeArg::Dxd => Mode::Dxd,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FormulaArgs {
    /// Inline expression such as "(x1 & x2) | x3".
    #[arg(long, conflicts_with = "cnf")]
    pub expr: Option<String>,
    /// DIMACS CNF file.
    #[arg(long)]
    pub cnf: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimatorArgs {
    /// Copies N per estimate.
    #[arg(long, default_value_t = 1 << 14)]
    pub copies: u64,
    /// Odd number of estimates per majority vote.
    #[arg(long, default_value_t = 5)]
    pub reps: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// JSON destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit wall-clock fields so identical runs give identical bytes.
    #[arg(long)]
    pub canonical: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub formula: FormulaArgs,
    #[arg(long, value_enum, default_value = "analytic")]
    pub route: RouteArg,
    #[arg(long, value_enum, default_value = "minimal")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    /// Enumerate every solution.
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub max_solutions: Option<usize>,
    /// Test the upper half instead of inferring it.
    #[arg(long)]
    pub no_infer: bool,
    /// Maximum detector calls.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Trace events as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub formula: FormulaArgs,
    /// Density operator as JSON: {"dims": [dA, dB], "matrix": [[[re, im], ...], ...]}.
    #[arg(long, conflicts_with_all = ["expr", "cnf"])]
    pub state: Option<PathBuf>,
    #[arg(long)]
    pub lo: Option<u64>,
    #[arg(long)]
    pub hi: Option<u64>,
    #[arg(long, value_enum, default_value = "ppt")]
    pub route: RouteArg,
    #[arg(long, value_enum, default_value = "minimal")]
    pub mode: ModeArg,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GridRange {
    #[arg(long, default_value_t = copies::GRID_MIN)]
    pub l_min: u64,
    #[arg(long, default_value_t = copies::GRID_MAX)]
    pub l_max: u64,
    #[arg(long, default_value_t = copies::GRID_MIN)]
    pub n_min: u64,
    #[arg(long, default_value_t = copies::GRID_MAX)]
    pub n_max: u64,
    /// Log-spaced points per axis.
    #[arg(long, default_value_t = copies::DEFAULT_GRID_POINTS)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CopiesArgs {
    /// Search-space dimension for a single N* query.
    #[arg(long = "L")]
    pub l: Option<u64>,
    /// Target overlap.
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    /// Tabulate N*/L for L = 2^1 … 2^30.
    #[arg(long)]
    pub check_ratio: bool,
    #[command(flatten)]
    pub grid: GridRange,
    /// Overlap grid as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub grid: GridRange,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 12)]
    pub n_max: usize,
    /// Copies N charged per detector call in the cost model.
    #[arg(long, default_value_t = 16)]
    pub copies: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Exit status for a completed run.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Copies(a) => cmd_copies(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum SourceEcho {
    Expr(String),
    Cnf(PathBuf),
}

fn load_formula(args: &FormulaArgs) -> Result<(Formula, SourceEcho), CliError> {
    match (&args.expr, &args.cnf) {
        (Some(e), None) => {
            let f = parse_expr(e).map_err(|err| CliError::usage(format!("--expr: {err}")))?;
            Ok((f, SourceEcho::Expr(e.clone())))
        }
        (None, Some(path)) => {
            let text = read(path)?;
            let f = parse_dimacs(&text).map_err(|err| CliError::usage(format!("{}: {err}", path.display())))?;
            Ok((f, SourceEcho::Cnf(path.clone())))
        }
        _ => Err(CliError::usage("give exactly one of --expr or --cnf")),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn estimator(route: Route, args: &EstimatorArgs) -> Result<Option<CopyEstimatorConfig>, CliError> {
    if route == Route::SpaEstimated {
        Ok(Some(CopyEstimatorConfig::new(args.copies, args.seed, args.reps)?))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Serialize)]
struct SolveEcho {
    source: SourceEcho,
    num_vars: usize,
    connectives: usize,
    search: SearchConfig,
    cost_copies: u64,
}

#[derive(Debug, Serialize)]
struct SolveResult {
    #[serde(flatten)]
    outcome: SearchOutcome,
    cost: entsearch::CostReport,
}

pub fn cmd_solve(args: SolveArgs) -> Result<i32, CliError> {
    let clock = Clock::start();
    let (formula, source) = load_formula(&args.formula)?;
    let route = Route::from(args.route);
    let mut cfg = SearchConfig::new(route)
        .with_mode(args.mode.into())
        .with_inference(!args.no_infer)
        .with_multi_solution(args.all);
    if let Some(e) = estimator(route, &args.estimator)? {
        cfg = cfg.with_estimator(e);
    }
    if let Some(m) = args.max_solutions {
        cfg = cfg.with_max_solutions(m);
    }
    if let Some(b) = args.budget {
        cfg = cfg.with_budget(b);
    }
    let outcome = search(&formula, &cfg)?;
    let cost = cost_model(&outcome.trace, formula.num_vars(), formula.connectives(), args.estimator.copies);
    if let Some(path) = &args.csv {
        write_atomic(path, &to_csv(&outcome.trace.events)?)?;
    }
    let status = outcome.status;
    let echo = SolveEcho {
        source,
        num_vars: formula.num_vars(),
        connectives: formula.connectives(),
        search: cfg,
        cost_copies: args.estimator.copies,
    };
    let env = clock.envelope("solve", echo, args.estimator.seed, args.output.canonical, SolveResult { outcome, cost });
    emit_json(&env, args.output.out.as_deref())?;
    Ok(if status == SearchStatus::BudgetExhausted { EXIT_BUDGET } else { EXIT_OK })
}

#[derive(Debug, Serialize)]
struct DetectEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<SourceEcho>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    range: Option<(u64, u64)>,
    route: Route,
    mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimator: Option<CopyEstimatorConfig>,
}

#[derive(Debug, Serialize)]
struct DetectResult {
    dims: (usize, usize),
    #[serde(flatten)]
    verdict: DetectionVerdict,
}

pub fn cmd_detect(args: DetectArgs) -> Result<i32, CliError> {
    let clock = Clock::start();
    let route = Route::from(args.route);
    let mode = Mode::from(args.mode);
    let est = estimator(route, &args.estimator)?;
    let (echo, result) = if let Some(path) = &args.state {
        let rho: DensityOp =
            serde_json::from_str(&read(path)?).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let (da, db) = rho.dims();
        let detector = match route {
            Route::Analytic => return Err(CliError::usage("the analytic route needs --expr or --cnf")),
            Route::Purity => Detector::purity(mode),
            Route::Ppt => Detector::ppt(mode),
            Route::SpaExact | Route::SpaEstimated => {
                if da != db {
                    return Err(CliError::usage(format!("the SPA routes need a d⊗d state, got {da}⊗{db}")));
                }
                let spa = SpaMap::transpose(da)?;
                match est {
                    Some(cfg) => Detector::spa_estimated(mode, spa, cfg)?,
                    None => Detector::spa_exact(mode, spa),
                }
            }
        };
        let verdict = detector.test_state(&rho, 0)?;
        let echo = DetectEcho { source: None, state: Some(path.clone()), range: None, route, mode, estimator: est };
        (echo, DetectResult { dims: (da, db), verdict })
    } else {
        let (formula, source) = load_formula(&args.formula)?;
        let lo = args.lo.unwrap_or(0);
        let hi = args.hi.unwrap_or(formula.space_size() - 1);
        let detector = Detector::for_formula(route, mode, formula.num_vars(), est)?;
        let verdict = detector.test_range(&formula, lo, hi, 0)?;
        let layout = entsearch::RegisterLayout::new(formula.num_vars(), mode)?;
        let dims = (layout.query_dim(), layout.answer_dim());
        let echo = DetectEcho { source: Some(source), state: None, range: Some((lo, hi)), route, mode, estimator: est };
        (echo, DetectResult { dims, verdict })
    };
    let env = clock.envelope("detect", echo, args.estimator.seed, args.output.canonical, result);
    emit_json(&env, args.output.out.as_deref())?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct GridEcho {
    l_range: (u64, u64),
    n_range: (u64, u64),
    points: usize,
}

impl From<&GridRange> for GridEcho {
    fn from(g: &GridRange) -> Self {
        Self { l_range: (g.l_min, g.l_max), n_range: (g.n_min, g.n_max), points: g.points }
    }
}

#[derive(Debug, Serialize)]
struct GridSummary {
    rows: usize,
    l_values: usize,
    n_values: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<PathBuf>,
}

fn grid_summary(g: &GridRange, grid: &[DistinguishabilityPoint], csv: Option<&Path>) -> Result<GridSummary, CliError> {
    let l_values = copies::log_spaced(g.l_min, g.l_max, g.points)?.len();
    if let Some(path) = csv {
        write_atomic(path, &to_csv(grid)?)?;
    }
    Ok(GridSummary {
        rows: grid.len(),
        l_values,
        n_values: grid.len() / l_values.max(1),
        csv: csv.map(Path::to_path_buf),
    })
}

#[derive(Debug, Serialize)]
struct CopiesEcho {
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    l: Option<u64>,
    c: f64,
    check_ratio: bool,
    grid: GridEcho,
}

#[derive(Debug, Serialize)]
struct CopiesResult {
    table: Vec<CopiesRow>,
    grid: GridSummary,
}

pub fn cmd_copies(args: CopiesArgs) -> Result<i32, CliError> {
    let clock = Clock::start();
    let ls: Vec<u64> = match (args.l, args.check_ratio) {
        (Some(l), false) => vec![l],
        (Some(l), true) => std::iter::once(l).chain((1..=30).map(|p| 1u64 << p)).collect(),
        (None, true) => (1..=30).map(|p| 1u64 << p).collect(),
        (None, false) => (1..=30).step_by(4).map(|p| 1u64 << p).collect(),
    };
    let table = copies::copies_table(&ls, args.c)?;
    let g = &args.grid;
    let grid = copies::overlap_grid((g.l_min, g.l_max), (g.n_min, g.n_max), g.points)?;
    let summary = grid_summary(g, &grid, args.csv.as_deref())?;
    let echo = CopiesEcho { l: args.l, c: args.c, check_ratio: args.check_ratio, grid: g.into() };
    let env = clock.envelope("copies", echo, 0, args.output.canonical, CopiesResult { table, grid: summary });
    emit_json(&env, args.output.out.as_deref())?;
    Ok(EXIT_OK)
}

pub fn cmd_grid(args: GridArgs) -> Result<i32, CliError> {
    let clock = Clock::start();
    let g = &args.grid;
    let grid = copies::overlap_grid((g.l_min, g.l_max), (g.n_min, g.n_max), g.points)?;
    let summary = grid_summary(g, &grid, args.csv.as_deref())?;
    let env = clock.envelope("grid", GridEcho::from(g), 0, args.output.canonical, summary);
    emit_json(&env, args.output.out.as_deref())?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct BenchEcho {
    n_range: (usize, usize),
    copies: u64,
}

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub solution: u64,
    pub calls_inferred: u64,
    pub calls_plain: u64,
    pub classical_evaluations: u64,
    pub modeled_cost: f64,
    pub asymptotic_search: f64,
}

pub fn cmd_bench(args: BenchArgs) -> Result<i32, CliError> {
    let clock = Clock::start();
    if args.n_min < 1 || args.n_min > args.n_max || args.n_max > entsearch::entdetect::ANALYTIC_MAX_VARS {
        return Err(CliError::usage(format!(
            "need 1 <= n-min <= n-max <= {}",
            entsearch::entdetect::ANALYTIC_MAX_VARS
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rows = Vec::new();
    for n in args.n_min..=args.n_max {
        let solution = rng.random_range(0..1u64 << n);
        let f = planted(n, solution);
        let inferred = search(&f, &SearchConfig::new(Route::Analytic))?;
        let plain = search(&f, &SearchConfig::new(Route::Analytic).with_inference(false))?;
        let classical = classical_baseline(&f)?;
        let cost = cost_model(&inferred.trace, n, f.connectives(), args.copies);
        rows.push(BenchRow {
            n,
            solution,
            calls_inferred: inferred.trace.detector_calls,
            calls_plain: plain.trace.detector_calls,
            classical_evaluations: classical.trace.classical_evaluations,
            modeled_cost: cost.detection_cost,
            asymptotic_search: cost.asymptotic_search,
        });
    }
    if let Some(path) = &args.csv {
        write_atomic(path, &to_csv(&rows)?)?;
    }
    let echo = BenchEcho { n_range: (args.n_min, args.n_max), copies: args.copies };
    let env = clock.envelope("bench", echo, args.seed, args.output.canonical, rows);
    emit_json(&env, args.output.out.as_deref())?;
    Ok(EXIT_OK)
}
