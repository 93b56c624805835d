//! `biortho`: analyze, sweep and generate truncated biorthogonal pairs.
//!
//! Exit codes: 0 all checks passed, 2 some check failed, 3 regularity
//! indeterminate, 4 input error, 5 conditioning exceeded.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use biortho::families::PairFamily;
use biortho::frames::DEFAULT_GROWTH_TOL;
use biortho::io::{load_pair, save_pair};
use biortho::report::{analyze, exit_code_for_error, sweep, AnalysisConfig, EXIT_INPUT_ERROR};
use biortho::Error;

#[derive(Parser)]
#[command(
    name = "biortho",
    version,
    about = "Checks regular biorthogonal pairs at finite truncation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check on a pair file and print a JSON report.
    Analyze {
        /// Pair file (JSON).
        #[arg(long)]
        pair: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classify a family over several dimensions.
    Sweep {
        #[command(flatten)]
        family: FamilyArgs,
        /// Comma-separated ascending dimensions, at least three.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        /// Ratio tolerance of the plateau rule.
        #[arg(long, default_value_t = DEFAULT_GROWTH_TOL)]
        growth_tol: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write a family member to a pair file.
    Generate {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FamilyArgs {
    /// identity, diag-power, diag-exp, diag-mixed, bounded-perturbation,
    /// shifted-non-regular or random-regular.
    #[arg(long)]
    family: String,
    /// Family parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

impl FamilyArgs {
    fn resolve(&self) -> Result<PairFamily, Error> {
        PairFamily::from_parts(&self.family, &self.params)
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Multiplier applied to every default tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn config(&self) -> Result<AnalysisConfig, Error> {
        if !(self.tol_scale.is_finite() && self.tol_scale > 0.0) {
            return Err(Error::BadParameter(format!(
                "--tol-scale must be positive and finite, got {}",
                self.tol_scale
            )));
        }
        Ok(AnalysisConfig {
            tol_scale: self.tol_scale,
            seed: self.seed,
            ..AnalysisConfig::default()
        })
    }

    fn emit(&self, json: &str) -> Result<(), Error> {
        match &self.out {
            Some(path) => {
                fs::write(path, json).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
            }
            None => {
                print!("{json}");
                Ok(())
            }
        }
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Analyze { pair, common } => {
            let config = common.config()?;
            let p = load_pair(&pair)?;
            let report = analyze(&p, &pair.display().to_string(), &config);
            common.emit(&report.to_json())?;
            Ok(report.exit_code)
        }
        Command::Sweep {
            family,
            dims,
            growth_tol,
            common,
        } => {
            let config = common.config()?;
            let report = sweep(&family.resolve()?, &dims, growth_tol, &config)?;
            common.emit(&report.to_json())?;
            Ok(report.exit_code)
        }
        Command::Generate { family, dim, out } => {
            let pair = family.resolve()?.generate(dim)?;
            save_pair(&pair, &out)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for_error(&e) as u8)
        }
    }
}
