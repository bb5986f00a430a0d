//! `liepert`: exact and approximate symmetry analysis of perturbed ODEs
//! from problem files.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "liepert", version, about = "Approximate Lie symmetries of ODEs with a small parameter")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Overrides for the undetermined-coefficient ansatz.
#[derive(Args, Debug, Clone, Default)]
pub struct AnsatzFlags {
    /// Degree bound for the polynomial arguments.
    #[arg(long)]
    pub ansatz_degree: Option<i32>,
    /// Lowest exponent for Laurent arguments.
    #[arg(long, allow_hyphen_values = true)]
    pub laurent_min: Option<i32>,
    /// Highest exponent for Laurent arguments.
    #[arg(long, allow_hyphen_values = true)]
    pub laurent_max: Option<i32>,
    /// Comma-separated kernel atoms such as `sin(x),cos(x)`, or `none`.
    #[arg(long)]
    pub kernels: Option<String>,
    /// Jet order of the unknown (local symmetries, corrections, invariants).
    #[arg(long)]
    pub order: Option<u32>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutFlags {
    /// Directory for result files; without it the JSON result goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct NumericFlags {
    /// Comma-separated eps values.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Integration step.
    #[arg(long)]
    pub h: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Approx,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Circles,
    Lines,
    PerturbedCircles,
    Solution,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Point symmetries of the unperturbed equation.
    Exact {
        problem: PathBuf,
        #[command(flatten)]
        ansatz: AnsatzFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Approximate point symmetries with stability classification.
    Approx {
        problem: PathBuf,
        #[command(flatten)]
        ansatz: AnsatzFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Evolutionary (local) symmetries, exact and approximate.
    Local {
        problem: PathBuf,
        #[command(flatten)]
        ansatz: AnsatzFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// First-order correction zeta1 for an exact characteristic zeta0.
    Correct {
        problem: PathBuf,
        #[arg(long)]
        zeta0: String,
        #[command(flatten)]
        ansatz: AnsatzFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Approximate integrating factors.
    Mu {
        problem: PathBuf,
        #[command(flatten)]
        ansatz: AnsatzFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// First integral for a given integrating factor.
    Reduce {
        problem: PathBuf,
        /// Integrating factor, e.g. `y' + eps*(y' - 1)`.
        #[arg(long)]
        mu: String,
        #[command(flatten)]
        ansatz: AnsatzFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Approximate differential invariants of a generator.
    Invariant {
        problem: PathBuf,
        /// Characteristic of an evolutionary generator, with eps.
        #[arg(long)]
        zeta: Option<String>,
        #[arg(long)]
        xi: Option<String>,
        #[arg(long)]
        eta: Option<String>,
        #[command(flatten)]
        ansatz: AnsatzFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Re-check a result file symbolically and numerically.
    Verify {
        problem: PathBuf,
        #[arg(long)]
        result: PathBuf,
        #[command(flatten)]
        numeric: NumericFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Transport points along the flow of a point generator.
    Flow {
        #[arg(long)]
        xi: String,
        #[arg(long)]
        eta: String,
        /// Starting point `x,y`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Comma-separated group parameters.
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, value_enum, default_value = "both")]
        mode: Mode,
        #[command(flatten)]
        numeric: NumericFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// Compare an approximate solution with RK4 over an eps sweep.
    Compare {
        problem: PathBuf,
        /// Expression in x and eps, or a file containing one.
        #[arg(long)]
        solution: Option<String>,
        /// Comma-separated initial values in eps.
        #[arg(long)]
        ics: Option<String>,
        /// Integration interval `a..b`.
        #[arg(long, allow_hyphen_values = true)]
        xspan: Option<String>,
        #[arg(long, default_value_t = 1.9)]
        min_slope: f64,
        #[command(flatten)]
        numeric: NumericFlags,
        #[command(flatten)]
        out: OutFlags,
    },
    /// CSV samples of transported curves or solution comparisons.
    Plotdata {
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Problem file (needed for `solution`).
        problem: Option<PathBuf>,
        #[arg(long, default_value_t = 0.03, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 0.5)]
        k: f64,
        #[command(flatten)]
        numeric: NumericFlags,
        #[command(flatten)]
        out: OutFlags,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code())
        }
    }
}
