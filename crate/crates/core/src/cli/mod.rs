//! Command-line front end.

mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::determinants::NodeSet;
use crate::error::Error;
use crate::fock::{verify_gate, MAX_PHOTONS};
use crate::gate::{check_size, SearchConfig, SolutionRecord, VALIDATED_N};
use crate::identities::{self, Suite};
use crate::optimizer::{best_solution, scan_nodes, sweep, NodeStrategy, ScanReport, SweepRow};

pub use output::{csv_float, Artifact, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

/// Pass threshold for `verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "nss-gate", version, about = "Sign-shift gate parameters and success probabilities")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the gate for N ancilla terms and report the best root.
    Solve(SolveArgs),
    /// Report every transmission root of an ancilla photon-number set.
    Scan(ScanArgs),
    /// Best success probability for a range of N.
    Sweep(SweepArgs),
    /// Simulate the solved gate on random signal states.
    Verify(VerifyArgs),
    /// Run the randomized identity suites.
    Identities(IdentitiesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Grid points for the real sign-change scan.
    #[arg(long, default_value_t = 2000)]
    grid: usize,
    #[arg(long, default_value_t = 1e-13)]
    bisection_tol: f64,
    /// Relative determinant tolerance for accepting a root.
    #[arg(long, default_value_t = crate::gate::DET_TOLERANCE)]
    det_tol: f64,
    /// Also search complex transmissions.
    #[arg(long)]
    complex: bool,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig, CliError> {
        if !(self.bisection_tol > 0.0 && self.det_tol > 0.0) {
            return Err(CliError::Usage("tolerances must be positive".into()));
        }
        if self.grid < 2 {
            return Err(CliError::Usage("--grid needs at least 2 points".into()));
        }
        Ok(SearchConfig {
            grid_points: self.grid,
            bisection_tolerance: self.bisection_tol,
            det_tolerance: self.det_tol,
            complex_search: self.complex,
            ..SearchConfig::default()
        })
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    n: usize,
    /// Ancilla photon numbers; defaults to 0..N-1.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<u32>>,
    /// Recorded in the artifact; the solver itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    nodes: Vec<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    n_min: usize,
    #[arg(long)]
    n_max: usize,
    /// Use photon numbers shift..shift+N-1 instead of 0..N-1.
    #[arg(long, default_value_t = 0)]
    shift: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    A,
    B,
    C,
    All,
}

#[derive(Debug, Args)]
struct IdentitiesArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidNodes(_)
            | Error::InvalidArgument(_)
            | Error::SizeCap { .. }
            | Error::PhotonCap { .. }
            | Error::InvalidTransmission(_) => CliError::Usage(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("writing output: {e}"))
    }
}

/// Parses `args` (including the program name) and runs the command; returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_USAGE;
    }
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Identities(a) => cmd_identities(a),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

/// Sizes the global thread pool from `NSS_THREADS`.
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("NSS_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("NSS_THREADS must be a positive integer, got {raw:?}"))?;
    if threads == 0 {
        return Err("NSS_THREADS must be positive".into());
    }
    // a pool that already exists keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn warn_size(n: usize) {
    if n > VALIDATED_N {
        eprintln!("warning: N = {n} is beyond the validated range N <= {VALIDATED_N}; results are unverified");
    }
}

fn node_set(mut values: Vec<u32>) -> Result<NodeSet, CliError> {
    values.sort_unstable();
    if values.windows(2).any(|w| w[0] == w[1]) {
        return Err(CliError::Usage("ancilla photon numbers must be distinct".into()));
    }
    Ok(NodeSet::new(values)?)
}

fn search_tolerances(config: &SearchConfig) -> serde_json::Value {
    json!({
        "det_tolerance": config.det_tolerance,
        "bisection_tolerance": config.bisection_tolerance,
        "degenerate_row_ratio": crate::gate::DEGENERATE_ROW_RATIO,
    })
}

fn solution_row(e: &SolutionRecord, best: bool) -> Vec<String> {
    let nodes: Vec<String> = e.nodes.iter().map(|v| v.to_string()).collect();
    let gammas: Vec<String> = e.gammas.iter().map(|&g| csv_float(g)).collect();
    let alphas: Vec<String> = e
        .alphas
        .iter()
        .map(|a| format!("{}:{}", csv_float(a.re), csv_float(a.im)))
        .collect();
    vec![
        e.n.to_string(),
        nodes.join(";"),
        csv_float(e.t_re),
        csv_float(e.t_im),
        csv_float(e.p),
        csv_float(e.det_residual),
        e.row_used.to_string(),
        u8::from(best).to_string(),
        gammas.join(";"),
        alphas.join(";"),
    ]
}

const SOLUTION_HEADER: [&str; 10] = [
    "N", "nodes", "T_re", "T_im", "p", "det_residual", "row_used", "best", "gammas", "alphas",
];

fn scan_rows(report: &ScanReport) -> Vec<Vec<String>> {
    report
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| solution_row(e, report.best == Some(i)))
        .collect()
}

fn emit_scan(
    command: &'static str,
    seed: u64,
    config: &SearchConfig,
    report: ScanReport,
    output: &OutputArgs,
    best_only: bool,
) -> Result<i32, CliError> {
    let feasible = report.best.is_some();
    if !feasible {
        eprintln!("no gate found: no usable transmission root in the search domain");
    }
    let tolerances = search_tolerances(config);
    let cfg = json!({ "nodes": report.nodes, "search": config });
    let text = match output.format {
        Format::Json => {
            if best_only {
                let best = report.best_entry().cloned();
                let body = json!({ "solution": best, "scan": report });
                Artifact::new(command, seed, tolerances, cfg, body).to_json()
            } else {
                Artifact::new(command, seed, tolerances, cfg, &report).to_json()
            }
        }
        Format::Csv => {
            let rows = scan_rows(&report);
            Artifact::new(command, seed, tolerances, cfg, ()).to_csv(&SOLUTION_HEADER, &rows)
        }
    };
    output::emit(&text, output.out.as_deref())?;
    Ok(if feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn cmd_solve(a: SolveArgs) -> Result<i32, CliError> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    check_size(a.n)?;
    let nodes = match a.nodes {
        Some(values) => {
            let nodes = node_set(values)?;
            if nodes.len() != a.n {
                return Err(CliError::Usage(format!(
                    "--nodes has {} entries but --n is {}",
                    nodes.len(),
                    a.n
                )));
            }
            nodes
        }
        None => NodeSet::minimal(a.n),
    };
    warn_size(a.n);
    let config = a.search.config()?;
    let report = scan_nodes(&nodes, &config)?;
    emit_scan("solve", a.seed, &config, report, &a.output, true)
}

fn cmd_scan(a: ScanArgs) -> Result<i32, CliError> {
    let nodes = node_set(a.nodes)?;
    check_size(nodes.len())?;
    warn_size(nodes.len());
    let config = a.search.config()?;
    let report = scan_nodes(&nodes, &config)?;
    emit_scan("scan", a.seed, &config, report, &a.output, false)
}

fn cmd_sweep(a: SweepArgs) -> Result<i32, CliError> {
    if a.n_min == 0 || a.n_min > a.n_max {
        return Err(CliError::Usage(format!(
            "need 1 <= --n-min <= --n-max, got {}..{}",
            a.n_min, a.n_max
        )));
    }
    check_size(a.n_max)?;
    warn_size(a.n_max);
    let config = a.search.config()?;
    let strategy = if a.shift == 0 {
        NodeStrategy::Minimal
    } else {
        NodeStrategy::Shifted(a.shift)
    };
    let rows: Vec<SweepRow> = sweep(a.n_min, a.n_max, strategy, &config)?;
    let feasible = rows.iter().all(|r| r.best.is_some());
    let tolerances = search_tolerances(&config);
    let cfg = json!({
        "n_min": a.n_min,
        "n_max": a.n_max,
        "strategy": strategy,
        "search": config,
    });
    let text = match a.output.format {
        Format::Json => Artifact::new("sweep", a.seed, tolerances, cfg, &rows).to_json(),
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| match &r.best {
                    Some(b) => vec![r.n.to_string(), csv_float(b.t_re), csv_float(b.p), csv_float(b.det_residual)],
                    None => vec![r.n.to_string(), "nan".into(), "nan".into(), "nan".into()],
                })
                .collect();
            Artifact::new("sweep", a.seed, tolerances, cfg, ()).to_csv(&["N", "T", "p", "residual"], &table)
        }
    };
    output::emit(&text, a.output.out.as_deref())?;
    Ok(if feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn cmd_verify(a: VerifyArgs) -> Result<i32, CliError> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    check_size(a.n)?;
    let photons = 2 * a.n as u32 - 1;
    if photons > MAX_PHOTONS {
        return Err(Error::PhotonCap { photons, cap: MAX_PHOTONS }.into());
    }
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    warn_size(a.n);
    let config = SearchConfig::default();
    let nodes = NodeSet::minimal(a.n);
    let Some(sol) = best_solution(&nodes, &config)? else {
        eprintln!("no gate found for N = {}", a.n);
        return Ok(EXIT_INFEASIBLE);
    };
    let report = verify_gate(&sol, a.trials, a.seed)?;
    let target = 1.0 / (a.n * a.n) as f64;
    let probability_vs_target = (sol.p - target).abs();
    let passed = report.passed(VERIFY_TOLERANCE) && probability_vs_target <= VERIFY_TOLERANCE;

    let tolerances = json!({
        "fidelity": VERIFY_TOLERANCE,
        "probability": VERIFY_TOLERANCE,
        "sign_flip": 1e-8,
        "det_tolerance": config.det_tolerance,
    });
    let cfg = json!({ "N": a.n, "trials": a.trials, "nodes": nodes.values() });
    let text = match a.output.format {
        Format::Json => {
            let body = json!({
                "T_re": sol.t.re,
                "T_im": sol.t.im,
                "report": report,
                "probability_vs_inverse_square": probability_vs_target,
                "passed": passed,
            });
            Artifact::new("verify", a.seed, tolerances, cfg, body).to_json()
        }
        Format::Csv => {
            let row = vec![
                a.n.to_string(),
                a.trials.to_string(),
                csv_float(sol.t.re),
                csv_float(sol.p),
                csv_float(report.max_fidelity_error),
                csv_float(report.max_probability_error),
                csv_float(probability_vs_target),
                u8::from(passed).to_string(),
            ];
            Artifact::new("verify", a.seed, tolerances, cfg, ()).to_csv(
                &[
                    "N",
                    "trials",
                    "T",
                    "p",
                    "max_fidelity_error",
                    "max_probability_error",
                    "p_vs_inverse_square",
                    "passed",
                ],
                &[row],
            )
        }
    };
    output::emit(&text, a.output.out.as_deref())?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_identities(a: IdentitiesArgs) -> Result<i32, CliError> {
    let suites: Vec<Suite> = match a.suite {
        SuiteArg::A => vec![Suite::A],
        SuiteArg::B => vec![Suite::B],
        SuiteArg::C => vec![Suite::C],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let reports = suites
        .iter()
        .map(|&s| identities::run_suite(s, a.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let passed = reports.iter().all(|r| r.passed());
    let tolerances = json!({
        "residual": identities::TOLERANCE,
        "exact_residual": 0.0,
    });
    let labels: Vec<&str> = suites.iter().map(|s| s.label()).collect();
    let cfg = json!({ "suites": labels, "instances": identities::INSTANCES });
    let text = match a.output.format {
        Format::Json => {
            let body = json!({ "suites": reports, "passed": passed });
            Artifact::new("identities", a.seed, tolerances, cfg, body).to_json()
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = reports
                .iter()
                .flat_map(|r| {
                    r.identities.iter().map(move |id| {
                        vec![
                            r.suite.label().to_string(),
                            id.name.clone(),
                            id.instances.to_string(),
                            csv_float(id.max_residual),
                            csv_float(id.tolerance),
                            id.exact.to_string(),
                            id.passed.to_string(),
                        ]
                    })
                })
                .collect();
            Artifact::new("identities", a.seed, tolerances, cfg, ()).to_csv(
                &["suite", "identity", "instances", "max_residual", "tolerance", "exact", "passed"],
                &rows,
            )
        }
    };
    output::emit(&text, a.output.out.as_deref())?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILURE })
}
