//! `gridmarg`: solve scenarios, compute emission rates, run charging
//! experiments and parameter sweeps from the command line.

mod commands;
mod error;

use clap::{Parser, Subcommand, ValueEnum};
use error::CliError;
use gridmarg::flex::FlexMode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "gridmarg", version, about = "Capacity expansion and marginal emissions for flexible EV charging")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Log filter, e.g. `info` or `gridmarg=debug`.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a scenario and write dispatch, capacity, emissions, prices and summary files.
    Solve {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = SolveMode::Expansion)]
        mode: SolveMode,
    },
    /// Compute an emission-rate metric on the cost-minimizing build.
    Metrics {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// A zone id, `all`, or `each-separately`.
        #[arg(long, default_value = "all")]
        zone: ZoneArg,
    },
    /// Schedule flexible charging against a cost or emissions signal and
    /// compare it with the cost-minimizing schedule.
    Schedule {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = Signal::Cost)]
        signal: Signal,
        /// `none`, `delay8`, `window24`, `delay<D>` or `window<A>_<D>`.
        #[arg(long, default_value = "none")]
        flex: FlexMode,
    },
    /// Run the Cartesian product of a sweep spec.
    Sweep {
        scenario: PathBuf,
        spec: PathBuf,
        #[arg(long, env = "GRIDMARG_THREADS", default_value_t = 1)]
        parallel: usize,
    },
    /// Check a scenario (and optionally a sweep spec) without solving.
    Validate {
        scenario: PathBuf,
        #[arg(long)]
        sweep: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    Expansion,
    Operational,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Aer,
    Srme1,
    Srme2,
    Lrmer,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signal {
    Cost,
    Srme1,
    Srme2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZoneArg {
    All,
    EachSeparately,
    One(String),
}

impl std::str::FromStr for ZoneArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "" => return Err("zone must not be empty".into()),
            "all" => ZoneArg::All,
            "each-separately" => ZoneArg::EachSeparately,
            z => ZoneArg::One(z.to_string()),
        })
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = cli.out.as_path();
    match cli.command {
        Command::Solve { scenario, mode } => commands::solve(&scenario, mode, out),
        Command::Metrics { scenario, method, zone } => commands::metrics(&scenario, method, &zone, out),
        Command::Schedule { scenario, signal, flex } => commands::schedule(&scenario, signal, flex, out),
        Command::Sweep { scenario, spec, parallel } => commands::sweep(&scenario, &spec, parallel, out),
        Command::Validate { scenario, sweep } => commands::validate(&scenario, sweep.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.log_level).format_timestamp(None).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}
