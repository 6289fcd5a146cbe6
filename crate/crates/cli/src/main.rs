//! `switched-bt`: reduce, simulate and compare linear switched systems from
//! JSON model files.
//!
//! Exit codes: 0 success, 1 domain error (invalid model, failed assumption),
//! 2 I/O or parse error.

mod commands;
mod error;
mod model_file;
mod report;
mod spec;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CompareArgs, FreqArgs, ReduceArgs, SimArgs};
use error::CliError;

#[derive(Parser)]
#[command(name = "switched-bt", version, about = "Balanced truncation for linear switched systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Reduction {
    /// Reduced order per mode, e.g. `1,3,2`.
    #[arg(long, value_delimiter = ',', conflicts_with = "threshold", required_unless_present = "threshold")]
    orders: Option<Vec<usize>>,
    /// Keep states with `sigma >= threshold * sigma_max` in each mode.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct Scenario {
    /// Inline JSON `[[mode, duration], ...]`, a JSON file, or
    /// `random:seed=N,count=M[,dwell=D]`.
    #[arg(long)]
    signal: Option<String>,
    /// `reference`, `zero`, `damped:amplitude=..,frequency=..,offset=..,decay=..`,
    /// or a JSON file.
    #[arg(long, default_value = "reference")]
    input: String,
    #[arg(long, default_value_t = switched_bt::simulation::DEFAULT_DT)]
    dt: f64,
    /// Seed for random signals that do not carry their own.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Scenario {
    fn sim(&self) -> SimArgs<'_> {
        SimArgs { signal: self.signal.as_deref(), input: &self.input, dt: self.dt, seed: self.seed }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and print the violations as JSON.
    Validate {
        #[arg(long)]
        model: String,
    },
    /// Balance and truncate; prints a JSON report.
    Reduce {
        #[arg(long)]
        model: String,
        #[command(flatten)]
        reduction: Reduction,
        /// Where to write the reduced model.
        #[arg(long)]
        out: Option<String>,
    },
    /// Simulate a model (and optionally a reduced one) along a switching signal.
    Simulate {
        #[arg(long)]
        model: String,
        #[arg(long)]
        reduced: Option<String>,
        #[command(flatten)]
        scenario: Scenario,
        /// Trajectory CSV output.
        #[arg(long)]
        csv: Option<String>,
        /// Report output (stdout if absent).
        #[arg(long)]
        out: Option<String>,
    },
    /// Level-one frequency response of one mode as CSV.
    Freq {
        #[arg(long)]
        model: String,
        #[arg(long)]
        mode: usize,
        #[arg(long, default_value_t = 1e-2)]
        w_min: f64,
        #[arg(long, default_value_t = 1e2)]
        w_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        csv: Option<String>,
    },
    /// Write a bundled model file.
    Example {
        name: String,
        #[arg(long)]
        out: Option<String>,
    },
    /// Per-mode balancing against the average-Gramian baseline.
    Compare {
        #[arg(long)]
        model: String,
        #[command(flatten)]
        reduction: Reduction,
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long)]
        out: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate { model } => commands::validate(model),
        Command::Reduce { model, reduction, out } => commands::reduce(&ReduceArgs {
            model,
            orders: reduction.orders.as_deref(),
            threshold: reduction.threshold,
            out: out.as_deref(),
        }),
        Command::Simulate { model, reduced, scenario, csv, out } => {
            commands::simulate_cmd(model, reduced.as_deref(), &scenario.sim(), csv.as_deref(), out.as_deref())
        }
        Command::Freq { model, mode, w_min, w_max, points, csv } => commands::freq(&FreqArgs {
            model,
            mode: *mode,
            w_min: *w_min,
            w_max: *w_max,
            points: *points,
            csv: csv.as_deref(),
        }),
        Command::Example { name, out } => commands::example(name, out.as_deref()),
        Command::Compare { model, reduction, scenario, out } => commands::compare(&CompareArgs {
            model,
            orders: reduction.orders.as_deref(),
            threshold: reduction.threshold,
            sim: scenario.sim(),
            out: out.as_deref(),
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
