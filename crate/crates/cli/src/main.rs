//! `rmf`: command-line harness for the random multiplicative function lab.

mod commands;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use output::Format;
use rmf_core::chaos::{Model, DEFAULT_SEED};
use rmf_core::moments::DEFAULT_PAIR_BUDGET;

/// Environment variable overriding the default pair-scan budget.
pub const BUDGET_ENV: &str = "RMF_OP_BUDGET";

#[derive(Debug, Parser)]
#[command(
    name = "rmf",
    version,
    about = "Experiments on sums of random multiplicative functions"
)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Master seed for Monte Carlo runs [default: 20150223; 1 for `report`].
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 10_000, global = true)]
    pub samples: usize,

    /// Worker threads for parallel stages.
    #[arg(long, default_value_t = 1, global = true)]
    pub workers: usize,

    /// Operation cap for quadratic pair scans (overrides RMF_OP_BUDGET).
    #[arg(long, global = true)]
    pub budget: Option<u64>,

    /// Cross-run brute-force oracles when within budget.
    #[arg(long, global = true)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Steinhaus,
    Rademacher,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Steinhaus => Model::Steinhaus,
            ModelArg::Rademacher => Model::Rademacher,
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
#[command(rename_all = "kebab-case")]
pub enum Command {
    /// Prime count, Ω range and squarefree count up to N.
    Sieve {
        #[arg(long)]
        n: usize,
        /// List spf, Ω and the squarefree flag for every n ≤ N.
        #[arg(long)]
        list: bool,
    },
    /// Sizes of the level sets E_{N,m}.
    Counts {
        #[arg(long)]
        n: usize,
    },
    /// Sathe–Selberg prediction against exact level-set sizes.
    Sathe {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Prime cutoff of the Φ product.
        #[arg(long, default_value_t = rmf_core::sathe::DEFAULT_PHI_CUTOFF)]
        cutoff: usize,
    },
    /// Values of the Φ Euler product.
    Phi {
        /// Comma-separated evaluation points.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 1.0, 1.5])]
        z: Vec<f64>,
        #[arg(long, default_value_t = rmf_core::sathe::DEFAULT_PHI_CUTOFF)]
        cutoff: usize,
    },
    /// Multiplicative energy E|S_N|^4.
    Energy {
        #[arg(long)]
        n: usize,
    },
    /// Exact fourth moments of the homogeneous parts S_{N,m}.
    Moment4 {
        #[arg(long)]
        n: usize,
        /// Single level; all levels when omitted.
        #[arg(long)]
        m: Option<u32>,
    },
    /// L4/L2 ratios of S_{N,m} for every level.
    Ratio {
        #[arg(long)]
        n: usize,
    },
    /// Squared L2 norm of the projection onto levels m ≤ β log log N.
    Projection {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        beta: f64,
    },
    /// Constant c < 1 in ‖S_N‖₁ ≤ c √N.
    HelsonBound {
        #[arg(long)]
        n: u64,
    },
    /// Monte Carlo estimate of E|C_N|^q.
    Mc {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        /// Restrict to the level set Ω(n) = m.
        #[arg(long)]
        m: Option<u32>,
        #[arg(long, value_enum, default_value_t = ModelArg::Steinhaus)]
        model: ModelArg,
        /// Compare every level norm with the full norm instead.
        #[arg(long)]
        levels: bool,
    },
    /// Monte Carlo estimate of P(|C_N| ≥ threshold).
    Tail {
        #[arg(long)]
        n: usize,
        /// Absolute threshold; defaults to c √N (log N)^{-0.07672}.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, value_enum, default_value_t = ModelArg::Steinhaus)]
        model: ModelArg,
    },
    /// Time average of |Σ n^{-it}|^q over [0, T].
    Dirichlet {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 1e4)]
        t: f64,
        /// Grid spacing; defaults to π / (4 log N).
        #[arg(long)]
        step: Option<f64>,
    },
    /// Fraction of [0, T] where |Σ n^{-it}| ≥ threshold.
    LargeValues {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1e4)]
        t: f64,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Optimal level exponent and the lower-bound exponent for ‖S_N‖_q.
    Exponent {
        #[arg(long, default_value_t = 1.0)]
        q: f64,
    },
    /// Reproduce the reference constants and the acceptance table.
    Report,
}

/// Seed used by `report` when none is given.
pub const REPORT_SEED: u64 = 1;

/// Pair-scan budget: flag, then environment, then default.
pub fn resolve_budget(flag: Option<u64>) -> Result<u64, String> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("{BUDGET_ENV} must be a non-negative integer, got {v:?}")),
        Err(_) => Ok(DEFAULT_PAIR_BUDGET),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let budget = match resolve_budget(cli.common.budget) {
        Ok(b) => b,
        Err(msg) => {
            eprintln!("rmf: {msg}");
            return ExitCode::from(2);
        }
    };

    let seed = cli.common.seed.unwrap_or(match cli.command {
        Command::Report => REPORT_SEED,
        _ => DEFAULT_SEED,
    });

    let config = json!({
        "command": cli.command,
        "format": cli.common.format,
        "seed": seed,
        "samples": cli.common.samples,
        "workers": cli.common.workers,
        "budget": budget,
        "verify": cli.common.verify,
        "output": cli.common.output,
    });

    let ctx = commands::Context {
        seed,
        samples: cli.common.samples,
        workers: cli.common.workers,
        budget,
        verify: cli.common.verify,
    };

    match commands::run(&cli.command, &ctx) {
        Ok(out) => {
            let text = output::render(cli.common.format, &config, &out);
            if let Err(e) = output::emit(&text, cli.common.output.as_deref()) {
                eprintln!("rmf: cannot write output: {e}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rmf: {e}");
            ExitCode::from(1)
        }
    }
}
