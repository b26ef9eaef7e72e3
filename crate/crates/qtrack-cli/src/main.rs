mod commands;
mod input;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::output::Format;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn validation(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, message: msg.into() }
    }

    pub fn solver(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_SOLVER, message: msg.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<qtrack::Error> for Failure {
    fn from(e: qtrack::Error) -> Self {
        match e {
            qtrack::Error::Solver(_) | qtrack::Error::Optimality(_) => Failure::solver(e.to_string()),
            _ => Failure::validation(e.to_string()),
        }
    }
}

/// Optimal quantum tracking experiments.
///
/// Results are written as JSON, or as CSV with `--format csv`. Sweep commands
/// emit fixed columns (listed with each command); other commands emit
/// `key,value` rows keyed by JSON path. Numbers in CSV use `%.10e`.
///
/// Exit codes: 0 success, 2 invalid input, 3 solver failure. The environment
/// variable QTRACK_THREADS caps the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "qtrack", version)]
pub struct Cli {
    #[arg(long, value_enum, default_value = "json", global = true)]
    pub format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distances, fidelities and bound checks for a pair of states, or a
    /// random bound scatter (columns: dim,trace_distance,one_minus_fn,rank).
    Distances(commands::DistancesArgs),
    /// Validate a channel and report its Choi, Kraus and qubit canonical forms.
    Channel(commands::ChannelArgs),
    /// Solve a tracking task with the SDP solver.
    Solve(commands::SolveArgs),
    /// Closed-form optimal channel for two qubit sources and targets.
    Analytic(commands::AnalyticArgs),
    /// Dephasing stabilization fidelities, or a grid
    /// (columns: p,theta,ddr1,ddr2,sdr,dn,qc).
    Stabilize(commands::StabilizeArgs),
    /// Two-state discrimination by tracking.
    Discriminate(commands::DiscriminateArgs),
    /// Optimal 1-to-2 cloning of two pure states.
    Clone(commands::CloneArgs),
    /// Perfect-tracking test for two qubit sources and targets.
    AuCheck(commands::AuCheckArgs),
    /// Multi-step tracking through noise, or a two-step sweep over extremal
    /// noise (columns: l1,l2,t3,class,f_multi,f_single).
    Multistep(commands::MultistepArgs),
    /// Compatibility of tracking objectives on random tasks
    /// (columns: states,dim,reference,replacement,mean_percent,std_percent).
    Compat(commands::CompatArgs),
    /// Relative timing of the state measures
    /// (columns: measure,seconds,nominal_flops).
    Bench(commands::BenchArgs),
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("QTRACK_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::validation(format!("QTRACK_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::validation(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let report = commands::run(&cli.command)?;
    let text = report.render(cli.format);
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::validation(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
