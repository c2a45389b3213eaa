//! `pdp`: plan, check, draw and benchmark pickup-and-delivery routes.
//!
//! Exit codes: 0 on success, 2 when a plan leaves orders unserved or a
//! checked plan has violations, 1 on any error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pdp_core::backends::Backend;
use pdp_core::orchestrator::{MobilityMode, VehiclePolicy};

#[derive(Parser)]
#[command(name = "pdp", version, about = "Pickup-and-delivery route planner")]
struct Cli {
    /// Print per-round details to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    /// Worker threads for the solver (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan routes for an instance file.
    Solve {
        instance: PathBuf,
        /// Plan file to write (includes the validation report).
        #[arg(long, default_value = "plan.json")]
        out: PathBuf,
        /// Also write the validation report on its own.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check a plan file against an instance.
    Validate {
        instance: PathBuf,
        plan: PathBuf,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw an instance, and optionally a plan, as SVG.
    Render {
        instance: PathBuf,
        plan: Option<PathBuf>,
        #[arg(long, default_value = "plan.svg")]
        out: PathBuf,
    },
    /// Write a built-in demonstration instance.
    Gen {
        name: String,
        /// Defaults to `<name>.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve fixtures with several backends and tabulate the results.
    Bench {
        /// Fixture names (default: all).
        #[arg(long, value_delimiter = ',')]
        fixtures: Vec<String>,
        #[arg(long, value_delimiter = ',', default_values = ["exact", "anneal"])]
        backends: Vec<BackendArg>,
        #[arg(long, default_value = "bench.json")]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "auto")]
    backend: BackendArg,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Seconds per route solve.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    #[arg(long, value_enum, default_value = "filter")]
    mobility_mode: ModeArg,
    #[arg(long, value_enum, default_value = "owned-first")]
    policy: PolicyArg,
    /// Plan with owned vehicles only.
    #[arg(long)]
    no_rentals: bool,
    /// Largest subproblem the exact backend accepts.
    #[arg(long, default_value_t = 10)]
    exact_cap: usize,
    #[arg(long, default_value_t = 64)]
    max_rounds: usize,
    /// Model file for the external-stub backend (or set PDP_EXTERNAL_MODEL_PATH).
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Exact,
    Anneal,
    ExternalStub,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Auto => Backend::Auto,
            BackendArg::Exact => Backend::Exact,
            BackendArg::Anneal => Backend::Anneal,
            BackendArg::ExternalStub => Backend::ExternalStub,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Filter,
    Constraint,
}

impl From<ModeArg> for MobilityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Filter => MobilityMode::Filter,
            ModeArg::Constraint => MobilityMode::Constraint,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    OwnedFirst,
    Declared,
}

impl From<PolicyArg> for VehiclePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::OwnedFirst => VehiclePolicy::OwnedFirstDescCapacity,
            PolicyArg::Declared => VehiclePolicy::DeclaredOrder,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
