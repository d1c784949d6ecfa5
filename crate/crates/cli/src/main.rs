//! `mwp`: cost minimization, marginal whole products and Leontief prices
//! from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 solver failure or non-viable economy, 4 path trace with failed rows.

mod battery;
mod commands;
mod config;
mod economy;
mod error;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::commands::AnalyzeOptions;
use crate::config::ConfigFile;
use crate::economy::{parse_prices, Economy, EconomyArgs, Resolver, Smooth};
use crate::error::CliError;
use crate::report::Format;

#[derive(Debug, Parser)]
#[command(name = "mwp", version, about = "Marginal whole product analysis of production economies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Default, Args)]
struct Common {
    /// Config file of `key = value` lines with optional `[subcommand]` sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Tolerance for identity flags; for `verify` it replaces every check tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full report at one output level.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        economy: EconomyArgs,
        /// Output level.
        #[arg(long)]
        y: Option<f64>,
        /// Responsible factor: K, L, or a 1-based input index (default: last input).
        #[arg(long)]
        factor: Option<String>,
        /// Output step of the discrete marginal whole product.
        #[arg(long = "delta-y")]
        delta_y: Option<f64>,
    },
    /// Expansion-path trace over an output grid.
    Path {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        economy: EconomyArgs,
        #[arg(long = "y-min")]
        y_min: Option<f64>,
        #[arg(long = "y-max")]
        y_max: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Invariant checks; the built-in battery unless an economy is given.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        economy: EconomyArgs,
        /// Output level for checks on a given smooth economy (default 1).
        #[arg(long)]
        y: Option<f64>,
        /// Seed of the random instances.
        #[arg(long)]
        seed: Option<u64>,
        /// Also run the built-in battery when an economy is given.
        #[arg(long)]
        battery: bool,
    },
    /// Prices and marginal whole products of labor in a Leontief economy.
    Leontief {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        economy: EconomyArgs,
    },
    /// Property imputations of a two-input firm.
    Ledger {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        l: Option<f64>,
        /// Prices `p=..,r=..,w=..`.
        #[arg(long)]
        prices: Option<String>,
    },
}

const DEFAULT_SEED: u64 = 20_240_601;
const DEFAULT_TOL: f64 = 1e-8;

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Path { .. } => "path",
            Command::Verify { .. } => "verify",
            Command::Leontief { .. } => "leontief",
            Command::Ledger { .. } => "ledger",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Analyze { common, .. }
            | Command::Path { common, .. }
            | Command::Verify { common, .. }
            | Command::Leontief { common, .. }
            | Command::Ledger { common, .. } => common,
        }
    }
}

fn usage(sub: &str) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    cmd.find_subcommand_mut(sub).map(|c| c.render_usage().to_string()).unwrap_or_default()
}

fn missing(sub: &str, what: &str) -> CliError {
    CliError::Config(format!("missing {what}\n{}", usage(sub)))
}

fn smooth(economy: Option<Economy>, sub: &str) -> Result<Smooth, CliError> {
    match economy {
        Some(Economy::Smooth(s)) => Ok(s),
        Some(Economy::Leontief(_)) => Err(CliError::Config(format!("{sub} needs --cd or --fn, not a Leontief economy"))),
        None => Err(missing(sub, "economy (--cd or --fn)")),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let sub = cli.command.name();
    let common = cli.command.common().clone();
    let config = match &common.config {
        Some(path) => ConfigFile::load(path, sub)?,
        None => ConfigFile::default(),
    };
    let base = common.config.as_ref().and_then(|p| p.parent());
    let res = Resolver { config: &config, base };
    let out = res.path(common.out.clone(), "out");
    let tol = res.get(common.tol, "tol")?;
    if let Some(t) = tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Config(format!("--tol must be a non-negative number, got {t}")));
        }
    }

    match &cli.command {
        Command::Analyze { economy, y, factor, delta_y, .. } => {
            let eco = smooth(economy::resolve(economy, &res)?, sub)?;
            let y = res.get(*y, "y")?.ok_or_else(|| missing(sub, "--y"))?;
            let factor = eco.factor(res.get(factor.clone(), "factor")?.as_deref())?;
            let opts = AnalyzeOptions {
                y,
                factor,
                delta_y: res.get(*delta_y, "delta-y")?.unwrap_or(1.0),
                tol: tol.unwrap_or(DEFAULT_TOL),
            };
            let report = commands::analyze(&eco, &opts)?;
            let format = res.get(common.format, "format")?.unwrap_or(Format::Table);
            emit(&report.render(format), out.as_ref())
        }
        Command::Path { economy, y_min, y_max, steps, .. } => {
            let eco = smooth(economy::resolve(economy, &res)?, sub)?;
            let y_min = res.get(*y_min, "y-min")?.ok_or_else(|| missing(sub, "--y-min"))?;
            let y_max = res.get(*y_max, "y-max")?.ok_or_else(|| missing(sub, "--y-max"))?;
            let steps = res.get(*steps, "steps")?.ok_or_else(|| missing(sub, "--steps"))?;
            let ys = commands::grid(y_min, y_max, steps)?;
            let (frame, flagged) = commands::path(&eco, &ys);
            let format = res.get(common.format, "format")?.unwrap_or(Format::Csv);
            emit(&frame.render(format), out.as_ref())?;
            if flagged > 0 {
                return Err(CliError::PathFlagged(flagged));
            }
            Ok(())
        }
        Command::Verify { economy, y, seed, battery, .. } => {
            let economy = economy::resolve(economy, &res)?;
            let seed = res.get(*seed, "seed")?.unwrap_or(DEFAULT_SEED);
            let mut b = battery::Battery::new(seed, tol);
            match &economy {
                Some(eco) => {
                    let y = res.get(*y, "y")?.unwrap_or(1.0);
                    b.run_for(eco, y);
                    if *battery {
                        b.run_default();
                    }
                }
                None => b.run_default(),
            }
            let format = res.get(common.format, "format")?.unwrap_or(Format::Table);
            emit(&b.frame().render(format), out.as_ref())?;
            let failed = b.failures();
            eprintln!("{} checks, {} failed", b.checks.len(), failed);
            if failed > 0 {
                return Err(CliError::VerifyFailed(failed));
            }
            Ok(())
        }
        Command::Leontief { economy, .. } => {
            let setup = match economy::resolve(economy, &res)? {
                Some(Economy::Leontief(setup)) => setup,
                Some(Economy::Smooth(_)) => {
                    return Err(CliError::Config("leontief needs --matrix/--labor or --leontief".into()))
                }
                None => return Err(missing(sub, "economy (--matrix with --labor, or --leontief)")),
            };
            let report = commands::leontief(&setup, tol.unwrap_or(1e-10))?;
            let format = res.get(common.format, "format")?.unwrap_or(Format::Table);
            emit(&report.render(format), out.as_ref())
        }
        Command::Ledger { q, k, l, prices, .. } => {
            let q = res.get(*q, "q")?.ok_or_else(|| missing(sub, "--q"))?;
            let k = res.get(*k, "k")?.ok_or_else(|| missing(sub, "--k"))?;
            let l = res.get(*l, "l")?.ok_or_else(|| missing(sub, "--l"))?;
            let prices = parse_prices(res.get(prices.clone(), "prices")?, 2)?;
            let report = commands::ledger(q, k, l, &prices)?;
            let format = res.get(common.format, "format")?.unwrap_or(Format::Table);
            emit(&report.render(format), out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mwp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
