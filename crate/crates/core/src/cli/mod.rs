//! Command-line front end. Every command writes a provenance header (tool version,
//! resolved configuration, seed) followed by one or more tables.
//!
//! Exit status: 0 on success, 2 for rejected input or usage, 1 when a numerical
//! procedure fails.

mod commands;
mod report;
mod state_file;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use report::{format_g17, Cell, Format, Report, Table};
pub use state_file::{StateFile, StateSpec, LOAD_TOLERANCE};

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "PHASEBOUND_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] crate::error::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numeric(e) if e.is_numerical() => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser, Serialize)]
#[command(name = "phasebound", version, about = "Phase-estimation MSE bounds under photon-number constraints")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Kernel entries Θ_k of the MSE quadratic form.
    Kernel(KernelArgs),
    /// Covariant MSE and photon metrics of a state.
    Mse(MseArgs),
    /// SLD Fisher information and the locally unbiased bound.
    Fisher(FisherArgs),
    /// C_max(E) or C_av(E) with the optimal state.
    Optimize(OptimizeArgs),
    /// E²·C over a list of budgets, or n²·C(noon_n) over a list of n.
    Sweep(SweepArgs),
    /// Noon local-minimax lower bound, C(noon_n), and the plateau simulation.
    Noon(NoonArgs),
    /// Continuum problems: Dirichlet ground state, uncertainty product, scaling map.
    Continuum(ContinuumArgs),
    /// Monte-Carlo outcomes of the covariant measurement.
    Simulate(SimulateArgs),
    /// Two-stage sine-state estimation against the one-shot state.
    Twostep(TwostepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kernel(_) => "kernel",
            Command::Mse(_) => "mse",
            Command::Fisher(_) => "fisher",
            Command::Optimize(_) => "optimize",
            Command::Sweep(_) => "sweep",
            Command::Noon(_) => "noon",
            Command::Continuum(_) => "continuum",
            Command::Simulate(_) => "simulate",
            Command::Twostep(_) => "twostep",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long, default_value_t = 8)]
    pub max_lag: usize,
}

#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false, id = "source")]
pub struct StateSource {
    /// Built-in state: vacuum, noon:N, sine:E, gaussian:E[:CUTOFF], coherent:ALPHA[:TAIL].
    #[arg(long, group = "source")]
    pub state: Option<StateSpec>,
    /// JSON state file {lo, hi, amplitudes: [[re, im], ...]}.
    #[arg(long, group = "source")]
    pub state_file: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MseArgs {
    #[command(flatten)]
    pub source: StateSource,
    /// Also evaluate the quadrature oracle on this many grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Write the state as JSON to this path.
    #[arg(long)]
    pub emit_state: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FisherArgs {
    #[command(flatten)]
    pub source: StateSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Max,
    Avg,
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long, value_enum)]
    pub constraint: Bound,
    /// Photon budget E (an integer for `max`).
    #[arg(long = "E")]
    pub energy: f64,
    /// Index window half-width is ceil(factor·E) for `avg`.
    #[arg(long, default_value_t = 8.0)]
    pub trunc_factor: f64,
    /// Relative slack of the active average constraint.
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
    #[arg(long)]
    pub emit_state: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum, conflicts_with = "noon", required_unless_present = "noon")]
    pub bound: Option<Bound>,
    /// Ascending list of budgets.
    #[arg(long = "E", value_delimiter = ',', requires = "bound")]
    pub energies: Vec<f64>,
    /// Sweep n²·C(noon_n) instead.
    #[arg(long)]
    pub noon: bool,
    /// Ascending list of noon photon numbers.
    #[arg(long = "n", value_delimiter = ',', requires = "noon")]
    pub n_list: Vec<u64>,
    #[arg(long, default_value_t = 8.0)]
    pub trunc_factor: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    /// Two whitespace-separated columns for plotting.
    #[arg(long)]
    pub gnuplot: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct NoonArgs {
    #[arg(long = "n", value_delimiter = ',', required = true)]
    pub n_list: Vec<u64>,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    /// Run the Monte-Carlo plateau demonstration as well.
    #[arg(long)]
    pub plateau: bool,
    /// Samples per true phase in the plateau run.
    #[arg(long, default_value_t = 20_000)]
    pub count: usize,
    #[arg(long, default_value_t = 33)]
    pub theta_points: usize,
    #[arg(long, default_value_t = 0.0)]
    pub theta0: f64,
    /// Energy of the sine contrast row (default: largest n).
    #[arg(long = "sine-E")]
    pub sine_energy: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContinuumTask {
    Dirichlet,
    Uncertainty,
    Scaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Sine,
    Gaussian,
    Dirichlet,
}

#[derive(Debug, Args, Serialize)]
pub struct ContinuumArgs {
    #[arg(long, value_enum)]
    pub task: ContinuumTask,
    /// Grid points (default 401 for the Dirichlet problem, 4001 for profiles).
    #[arg(long = "M")]
    pub grid: Option<usize>,
    /// Grid refinements reported by the Dirichlet task.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, value_enum, default_value_t = ProfileKind::Gaussian)]
    pub profile: ProfileKind,
    /// Half-width of the domain for decaying profiles.
    #[arg(long, default_value_t = crate::continuum::DEFAULT_HALF_WIDTH)]
    pub half_width: f64,
    #[arg(long = "E", value_delimiter = ',', default_values_t = [16.0, 32.0, 64.0, 128.0])]
    pub energies: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: StateSource,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 100_000)]
    pub count: usize,
    /// Include every sampled estimate as a table.
    #[arg(long)]
    pub dump: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct TwostepArgs {
    #[arg(long = "E", default_value_t = 64)]
    pub energy: u64,
    #[arg(long, default_value_t = 0.25)]
    pub split: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with_args<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("phasebound: {e}");
            e.exit_code()
        }
    }
}

/// Executes a parsed invocation, writing its report.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let report = match cli.global.threads {
        Some(0) => return Err(CliError::Usage("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?
            .install(|| commands::execute(cli))?,
        None => commands::execute(cli)?,
    };
    for n in &report.notes {
        if n.starts_with("warning") {
            eprintln!("phasebound: {n}");
        }
    }
    let format = match (cli.global.format, &cli.command) {
        (OutputFormat::Csv, Command::Sweep(s)) if s.gnuplot => Format::Gnuplot,
        (OutputFormat::Csv, _) => Format::Csv,
        (OutputFormat::Json, _) => Format::Json,
    };
    match &cli.global.output {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            report.write(format, &mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            report.write(format, &mut lock)?;
        }
    }
    Ok(())
}
