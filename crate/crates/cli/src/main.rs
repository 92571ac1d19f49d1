use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;
mod render;

use manifest::{RunManifest, TraceSource};

/// Offline STL robustness monitor for robot fleets.
#[derive(Debug, Parser)]
#[command(name = "stlmon", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Pre,
    Post,
}

impl Policy {
    fn name(self) -> &'static str {
        match self {
            Policy::Pre => "pre",
            Policy::Post => "post",
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate every rule on each trace. Exits 1 if any rule is violated.
    Check {
        #[arg(long)]
        spec: PathBuf,
        /// Trace files (.csv or .json).
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Also write one robustness-profile CSV per trace into this directory.
        #[arg(long)]
        profile_dir: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fleet metrics (satisfaction, TRV, LRV) per rule over trace directories.
    Report {
        #[arg(long)]
        spec: PathBuf,
        /// Directory of traces; repeat to pool several directories.
        #[arg(long, required = true)]
        traces: Vec<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare two fleets rule by rule with a two-sided Mann-Whitney U test.
    Compare {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        pre: PathBuf,
        #[arg(long)]
        post: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Generate a fleet of navigation traces.
    Simulate {
        /// Simulator config (TOML).
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Use the built-in scenario and policies.
        #[arg(long)]
        preset: bool,
        #[arg(long, value_enum)]
        policy: Policy,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Replace trace files already present in the output directory.
        #[arg(long)]
        force: bool,
    },
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Check { spec, traces, profile_dir, out } => {
            let run = RunManifest::new(spec, TraceSource::Files(traces), out.output, out.format, None)?;
            commands::check(&run, profile_dir.as_deref())
        }
        Command::Report { spec, traces, out } => {
            let run = RunManifest::new(spec, TraceSource::Dirs(traces), out.output, out.format, None)?;
            commands::report(&run)
        }
        Command::Compare { spec, pre, post, alpha, out } => {
            let run = RunManifest::new(spec, TraceSource::Pair { pre, post }, out.output, out.format, Some(alpha))?;
            commands::compare(&run)
        }
        Command::Simulate { config, preset: _, policy, n, seed, out, force } => {
            commands::simulate(config.as_deref(), policy, n as usize, seed, &out, force)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
