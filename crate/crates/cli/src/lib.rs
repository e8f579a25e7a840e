//! The `qldpc` command-line tool: code inspection, Monte Carlo sweeps,
//! correction-capability verification and iteration tables.

pub mod config;

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use qldpc::codes::{builtin, resolve, save_code, BENCHMARKS};
use qldpc::sim::{
    iteration_table, run_monte_carlo, sweep_csv_row, verify_up_to_t, IterationRow, SweepPoint, VerifyPlan,
    WeightMode, DEFAULT_VERIFY_BUDGET, SWEEP_CSV_HEADER,
};
use qldpc::{CodeError, CssCode, SimError};

use config::{DecoderOptions, PriorArg, SimOptions, DEFAULT_P};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Usage(String),
    #[error("invalid config file {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("output error: {0}")]
    Output(#[from] io::Error),
}

/// Exit status of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Verification found at least one failing pattern.
    VerificationFailed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::VerificationFailed => 1,
        }
    }
}

/// Exit code for usage and runtime errors.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "qldpc", version, about = "Decoders and benchmarks for CSS quantum LDPC codes")]
pub struct Cli {
    /// Directory holding the code data files.
    #[arg(long, global = true, env = "QLDPC_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List, build or export codes.
    #[command(subcommand)]
    Codes(CodesCommand),
    /// Monte Carlo codeword error rate sweep.
    Simulate(SimulateArgs),
    /// Check that every Z error of weight at most t is corrected.
    Verify(VerifyArgs),
    /// Mean BP iterations per number of injected Z errors.
    IterTable(IterTableArgs),
}

#[derive(Debug, Subcommand)]
pub enum CodesCommand {
    /// Show the benchmark codes.
    List,
    /// Construct a code and check its parameters.
    Build { code: String },
    /// Write a code manifest.
    Export { code: String, path: PathBuf },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML file with default options; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
    #[command(flatten)]
    pub options: SimOptions,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    #[default]
    Exhaustive,
    Sampled,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub code: String,
    #[command(flatten)]
    pub decoder: DecoderOptions,
    #[arg(long, value_enum, default_value_t)]
    pub mode: VerifyMode,
    /// Total patterns in sampled mode, split evenly over the weights.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Largest weight checked; defaults to t.
    #[arg(long)]
    pub max_weight: Option<usize>,
    /// Additional sampled weight as WEIGHT:COUNT; repeatable.
    #[arg(long, value_parser = parse_weight_sample)]
    pub sample_weight: Vec<(usize, usize)>,
    #[arg(long, default_value_t = DEFAULT_VERIFY_BUDGET)]
    pub budget: u128,
    /// Physical error rate the decoder prior is built from.
    #[arg(long, default_value_t = DEFAULT_P)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t)]
    pub prior: PriorArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Also write the report to this file.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IterTableArgs {
    #[arg(long)]
    pub code: String,
    #[command(flatten)]
    pub decoder: DecoderOptions,
    /// Error weights, as a list `1,2,5` or a range `1..5`; defaults to 1..t.
    #[arg(long, value_parser = parse_weights)]
    pub ne: Option<Weights>,
    /// Patterns per weight; weights with fewer patterns are enumerated.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_P)]
    pub p: f64,
    #[arg(long, value_enum, default_value_t)]
    pub prior: PriorArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// CSV destination.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights(pub Vec<usize>);

fn parse_weights(s: &str) -> Result<Weights, String> {
    let bad = |_| format!("invalid weight list '{s}'");
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
        if a > b {
            return Err(format!("empty weight range '{s}'"));
        }
        return Ok(Weights((a..=b).collect()));
    }
    s.split(',')
        .map(|w| w.trim().parse().map_err(bad))
        .collect::<Result<_, _>>()
        .map(Weights)
}

fn parse_weight_sample(s: &str) -> Result<(usize, usize), String> {
    let (w, n) = s
        .split_once(':')
        .ok_or_else(|| format!("expected WEIGHT:COUNT, got '{s}'"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("expected WEIGHT:COUNT, got '{s}'"));
    Ok((parse(w)?, parse(n)?))
}

/// Runs a parsed command, writing results to `out` and progress or
/// summaries to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Status, CliError> {
    let data_dir = cli.data_dir.as_deref();
    match cli.command {
        Command::Codes(cmd) => cmd_codes(cmd, data_dir, out),
        Command::Simulate(args) => cmd_simulate(args, data_dir, out, err),
        Command::Verify(args) => cmd_verify(args, data_dir, out),
        Command::IterTable(args) => cmd_iter_table(args, data_dir, out),
    }
}

/// Parses `argv` and runs it; returns the process exit code.
pub fn main_with_args<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_ERROR;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match run(cli, out, err) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn code_line(code: &CssCode) -> String {
    format!("{} t={} xi={}", code.label(), code.t(), code.xi_x())
}

fn cmd_codes(cmd: CodesCommand, data_dir: Option<&Path>, out: &mut dyn Write) -> Result<Status, CliError> {
    match cmd {
        CodesCommand::List => {
            for (name, eta) in BENCHMARKS {
                let code = builtin(name, data_dir)?;
                writeln!(out, "{} eta={eta}", code_line(&code))?;
            }
            writeln!(out, "surface-d<d>: surface code of odd distance d")?;
        }
        CodesCommand::Build { code } => {
            let code = resolve(&code, data_dir)?;
            writeln!(out, "{}", code_line(&code))?;
            writeln!(
                out,
                "Hx {}x{}, Hz {}x{}, xi_z={}",
                code.hx.rows(),
                code.hx.cols(),
                code.hz.rows(),
                code.hz.cols(),
                code.xi_z()
            )?;
        }
        CodesCommand::Export { code, path } => {
            let code = resolve(&code, data_dir)?;
            save_code(&code, &path)?;
            writeln!(out, "wrote {} to {}", code.label(), path.display())?;
        }
    }
    Ok(Status::Success)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// CSV rows of a sweep, header included.
pub fn sweep_csv(code: &str, decoder: &str, seed: u64, points: &[SweepPoint]) -> String {
    let mut csv = format!("{SWEEP_CSV_HEADER}\n");
    for pt in points {
        csv += &sweep_csv_row(code, decoder, seed, pt);
        csv.push('\n');
    }
    csv
}

fn sweep_summary(points: &[SweepPoint]) -> String {
    let mut s = format!(
        "{:>10} {:>10} {:>9} {:>12} {:>27} {:>13} {:>9}\n",
        "p", "trials", "failures", "cer", "95% interval", "mean_bp_iters", "seconds"
    );
    for pt in points {
        let _ = writeln!(
            s,
            "{:>10} {:>10} {:>9} {:>12.4e} {:>27} {:>13.3} {:>9.2}",
            pt.p,
            pt.trials,
            pt.failures,
            pt.cer,
            format!("[{:.4e}, {:.4e}]", pt.ci_low, pt.ci_high),
            pt.mean_bp_iterations,
            pt.wall_seconds
        );
    }
    s
}

fn cmd_simulate(
    args: SimulateArgs,
    data_dir: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Status, CliError> {
    let file = match &args.config {
        Some(path) => SimOptions::load(path)?,
        None => SimOptions::default(),
    };
    let (config, code) = args.options.or(file).resolve(data_dir)?;
    if args.print_config {
        write!(out, "{}", config.to_toml())?;
        return Ok(Status::Success);
    }
    let decoder = config.decoder.to_spec();
    decoder
        .validate(code.n)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(&bad) = config.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CliError::Usage(format!("p must lie in [0, 1], got {bad}")));
    }
    if config.failures == 0 {
        return Err(CliError::Usage("--failures must be at least 1".into()));
    }

    let points = run_monte_carlo(&code, &decoder, &config.p, &config.monte_carlo())?;
    let csv = sweep_csv(&code.name, decoder.name(), config.seed, &points);
    let summary = format!("{} with {}\n{}", code.label(), decoder.name(), sweep_summary(&points));
    match &config.output {
        Some(path) => {
            write_file(path, &csv)?;
            write!(out, "{summary}")?;
        }
        None => {
            write!(out, "{csv}")?;
            write!(err, "{summary}")?;
        }
    }
    Ok(Status::Success)
}

fn verify_plan(args: &VerifyArgs, code: &CssCode) -> VerifyPlan {
    let max_weight = args.max_weight.unwrap_or(code.t());
    let mut plan = match args.mode {
        VerifyMode::Exhaustive => VerifyPlan::exhaustive(max_weight),
        VerifyMode::Sampled => VerifyPlan::sampled(code.n, max_weight, args.samples, args.seed),
    };
    plan.seed = args.seed;
    plan.budget = args.budget;
    plan.weights
        .extend(args.sample_weight.iter().map(|&(w, n)| (w, WeightMode::Sampled(n))));
    plan
}

fn cmd_verify(args: VerifyArgs, data_dir: Option<&Path>, out: &mut dyn Write) -> Result<Status, CliError> {
    let code = resolve(&args.code, data_dir)?;
    let decoder = args.decoder.resolve(&code)?.to_spec();
    decoder
        .validate(code.n)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let plan = verify_plan(&args, &code);
    let p = config_p(args.p, args.prior)?;
    let report = verify_up_to_t(&code, &decoder, p, &plan, args.workers)?;
    let text = report.render();
    if let Some(path) = &args.output {
        write_file(path, &text)?;
    }
    write!(out, "{text}")?;
    Ok(if report.passed() {
        Status::Success
    } else {
        Status::VerificationFailed
    })
}

fn config_p(p: f64, prior: PriorArg) -> Result<f64, CliError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CliError::Usage(format!("--p must lie in (0, 1), got {p}")));
    }
    Ok(qldpc::sim::PriorMode::from(prior).decoder_p(p))
}

/// Aligned text table of iteration statistics.
pub fn iteration_text(code: &CssCode, decoder: &str, rows: &[IterationRow]) -> String {
    let mut s = format!("{} with {decoder}\n", code.label());
    let _ = writeln!(
        s,
        "{:>5} {:>10} {:>11} {:>14} {:>13}",
        "n_e", "patterns", "mode", "mean_bp_iters", "failure_rate"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>5} {:>10} {:>11} {:>14.3} {:>13.4}",
            r.n_e,
            r.patterns,
            if r.exhaustive { "exhaustive" } else { "sampled" },
            r.mean_bp_iterations,
            r.failure_rate
        );
    }
    s
}

pub const ITER_CSV_HEADER: &str = "code,decoder,n_e,patterns,exhaustive,mean_bp_iters,failure_rate,seed";

pub fn iteration_csv(code: &str, decoder: &str, seed: u64, rows: &[IterationRow]) -> String {
    let mut csv = format!("{ITER_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            csv,
            "{code},{decoder},{},{},{},{:.6},{:.6},{seed}",
            r.n_e, r.patterns, r.exhaustive, r.mean_bp_iterations, r.failure_rate
        );
    }
    csv
}

fn cmd_iter_table(args: IterTableArgs, data_dir: Option<&Path>, out: &mut dyn Write) -> Result<Status, CliError> {
    let code = resolve(&args.code, data_dir)?;
    let decoder = args.decoder.resolve(&code)?.to_spec();
    decoder
        .validate(code.n)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let weights = args.ne.map(|w| w.0).unwrap_or_else(|| (1..=code.t()).collect());
    let p = config_p(args.p, args.prior)?;
    let rows = iteration_table(&code, &decoder, p, &weights, args.samples, args.seed, args.workers)?;
    write!(out, "{}", iteration_text(&code, decoder.name(), &rows))?;
    if let Some(path) = &args.output {
        write_file(path, &iteration_csv(&code.name, decoder.name(), args.seed, &rows))?;
    }
    Ok(Status::Success)
}
