//! `bge` — fit, compare, simulate and tabulate beta generalized
//! exponential models from the command line.
//!
//! Exit status: 0 success, 1 usage error, 2 input error, 3 non-convergence.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use bge::inference::ModelTag;
use bge::BgeParams;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::input::InputError;

#[derive(Debug, Parser)]
#[command(name = "bge", version, about = "Beta generalized exponential distribution toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximum-likelihood fit of one model.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "bge", value_parser = parse_model)]
        model: ModelTag,
        /// Single starting point a,b,lambda,alpha instead of the multi-start ladder.
        #[arg(long, value_parser = parse_params)]
        params: Option<BgeParams>,
        /// Confidence level of the reported Wald intervals.
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Fit BGE, BE and GE and test both nested models against BGE.
    Compare {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Draw a seeded sample, one value per line.
    Sample {
        #[arg(long, value_parser = parse_params)]
        params: BgeParams,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Tabulate pdf, cdf and hazard on a grid, or skewness and kurtosis
    /// over a range of one shape parameter.
    Curve {
        #[arg(long, value_parser = parse_params)]
        params: BgeParams,
        /// min:max:points — x values, or values of the swept parameter.
        #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
        grid: Grid,
        #[arg(long, value_enum)]
        sweep: Option<Sweep>,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Refit the embedded glass-fibre data and compare with reference values.
    Reproduce {
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct DataArgs {
    /// Observations: one positive number per line or a single-column CSV; `-` reads stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Use the embedded glass-fibre strengths.
    #[arg(long)]
    embedded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    /// Line-oriented key=value (or CSV for tables).
    Structured,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Sweep {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Grid {
    min: f64,
    max: f64,
    points: usize,
}

impl Grid {
    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(move |k| if k + 1 == self.points { self.max } else { self.min + step * k as f64 })
    }
}

fn parse_model(s: &str) -> Result<ModelTag, String> {
    s.parse().map_err(|e: bge::Error| e.to_string())
}

fn parse_params(s: &str) -> Result<BgeParams, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number")))
        .collect::<Result<_, _>>()?;
    let [a, b, l, al] = v[..] else {
        return Err(format!("expected 4 comma-separated values a,b,lambda,alpha, got {}", v.len()));
    };
    BgeParams::new(a, b, l, al).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [min, max, points] = parts[..] else {
        return Err("expected min:max:points".into());
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
    let (min, max) = (num(min)?, num(max)?);
    let points: usize = points.trim().parse().map_err(|_| format!("'{points}' is not a point count"))?;
    if points < 2 {
        return Err("a grid needs at least 2 points".into());
    }
    if !(min.is_finite() && max.is_finite() && min < max) {
        return Err(format!("grid needs finite min < max, got {min}:{max}"));
    }
    Ok(Grid { min, max, points })
}

/// Failure classes, each with a fixed exit status.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Input(#[from] InputError),
    /// Some fit or series did not converge; the report is still printed.
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::NotConverged(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err((out, e)) => {
            print!("{out}");
            eprintln!("bge: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
