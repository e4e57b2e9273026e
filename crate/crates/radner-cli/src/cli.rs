//! Command-line surface: argument parsing, dispatch, and exit codes.
//!
//! Exit codes: 0 success, 1 verification failure or runtime error, 2 parse
//! or validation error, 3 regime mismatch or violated precondition.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use radner_core::analysis::{linear_grid, sweep_delta, sweep_lambda};
use radner_core::{check_bank_constant_equilibrium, solve, MarketParams};

use crate::config::Config;
use crate::error::CliError;
use crate::report::{bank_verdict_to_json, solution_to_json, write_paths_csv, write_sweep_csv};
use crate::sim::{simulate_equilibrium_paths, simulate_income, SimConfig};
use crate::verify::run_verification;

#[derive(Debug, Parser)]
#[command(
    name = "radner",
    version,
    about = "Two-agent annuity-market equilibrium with proportional transaction costs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the equilibrium and emit it as JSON
    Solve(CommonArgs),
    /// Simulate equilibrium paths and emit them as CSV
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Sweep the transaction-cost parameter in continuous time (CSV)
    SweepLambda {
        #[command(flatten)]
        common: CommonArgs,
        /// Sweep grid as start:stop:step
        #[arg(long)]
        grid: String,
    },
    /// Sweep the time step toward the continuous limit (CSV)
    SweepDelta {
        #[command(flatten)]
        common: CommonArgs,
        /// Sweep grid as start:stop:step
        #[arg(long)]
        grid: String,
    },
    /// Decide whether a constant-rate equilibrium survives a traded bank account
    BankCheck(CommonArgs),
    /// Run the full invariant suite against the configuration
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sim: SimArgs,
        /// Verify against this externally quoted market rate instead of the
        /// solved one
        #[arg(long)]
        override_rate: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Path to the JSON configuration
    #[arg(long)]
    config: PathBuf,
    /// Write the artifact here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Force the time setting, overriding the configuration
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Discrete,
    Continuous,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// Number of Monte Carlo paths
    #[arg(long)]
    paths: Option<usize>,
    /// Number of time steps per path
    #[arg(long)]
    steps: Option<usize>,
    /// RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Income-shock correlation
    #[arg(long)]
    rho: Option<f64>,
}

impl SimArgs {
    fn merge(&self, base: SimConfig) -> SimConfig {
        SimConfig {
            n_paths: self.paths.unwrap_or(base.n_paths),
            n_steps: self.steps.unwrap_or(base.n_steps),
            seed: self.seed.unwrap_or(base.seed),
            rho: self.rho.unwrap_or(base.rho),
        }
    }
}

/// Parses argv and runs the selected command announced by its exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn effective_market(config: &Config, mode: Option<Mode>) -> Result<MarketParams, CliError> {
    match mode {
        None => Ok(config.market()),
        Some(Mode::Continuous) => Ok(MarketParams::continuous(config.lambda)),
        Some(Mode::Discrete) => match config.delta {
            Some(delta) => Ok(MarketParams::discrete(config.lambda, delta)),
            None => Err(CliError::Validation(vec![
                "--mode discrete requires delta in the configuration".to_string(),
            ])),
        },
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Parse(format!(
            "grid must be start:stop:step (got '{text}')"
        )));
    }
    let mut values = [0.0f64; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| CliError::Parse(format!("grid component '{part}' is not a number")))?;
    }
    Ok(linear_grid(values[0], values[1], values[2])?)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve(common) => {
            let config = Config::load(&common.config)?;
            let market = effective_market(&config, common.mode)?;
            let solution = solve(&config.agent_params(), &market)?;
            emit(&common.out, &solution_to_json(&solution))?;
            Ok(0)
        }
        Command::Simulate { common, sim } => {
            let config = Config::load(&common.config)?;
            let market = effective_market(&config, common.mode)?;
            let sim_cfg = sim.merge(config.sim_config());
            let solution = solve(&config.agent_params(), &market)?;
            let incomes = simulate_income(&config.agent_params(), &market, &sim_cfg)?;
            let bundle = simulate_equilibrium_paths(&solution, &incomes)?;
            let mut buffer = Vec::new();
            write_paths_csv(&mut buffer, &bundle)?;
            emit(
                &common.out,
                std::str::from_utf8(&buffer).expect("csv is utf-8"),
            )?;
            Ok(0)
        }
        Command::SweepLambda { common, grid } => {
            let config = Config::load(&common.config)?;
            let lambdas = parse_grid(&grid)?;
            let rows = sweep_lambda(&config.agent_params(), &lambdas)?;
            let mut buffer = Vec::new();
            write_sweep_csv(&mut buffer, &rows)?;
            emit(
                &common.out,
                std::str::from_utf8(&buffer).expect("csv is utf-8"),
            )?;
            Ok(0)
        }
        Command::SweepDelta { common, grid } => {
            let config = Config::load(&common.config)?;
            let deltas = parse_grid(&grid)?;
            let sweep = sweep_delta(&config.agent_params(), config.lambda, &deltas)?;
            let mut buffer = Vec::new();
            write_sweep_csv(&mut buffer, &sweep.rows)?;
            emit(
                &common.out,
                std::str::from_utf8(&buffer).expect("csv is utf-8"),
            )?;
            eprintln!(
                "limit rate {}; empirical convergence order {}",
                sweep.limit_rate,
                sweep
                    .convergence_order
                    .map(|o| o.to_string())
                    .unwrap_or_else(|| "n/a".to_string())
            );
            Ok(0)
        }
        Command::BankCheck(common) => {
            let config = Config::load(&common.config)?;
            let delta = match effective_market(&config, common.mode)?.grid.delta() {
                Some(delta) => delta,
                None => {
                    return Err(CliError::Core(radner_core::Error::PreconditionViolated(
                        "the bank-account check is a discrete-time statement (set delta)"
                            .to_string(),
                    )))
                }
            };
            let verdict =
                check_bank_constant_equilibrium(&config.agent_params(), config.lambda, delta)?;
            emit(&common.out, &bank_verdict_to_json(&verdict))?;
            Ok(0)
        }
        Command::Verify {
            common,
            sim,
            override_rate,
        } => {
            let config = Config::load(&common.config)?;
            let mut config = config;
            if let Some(mode) = common.mode {
                match mode {
                    Mode::Continuous => config.delta = None,
                    Mode::Discrete => {
                        if config.delta.is_none() {
                            return Err(CliError::Validation(vec![
                                "--mode discrete requires delta in the configuration".to_string(),
                            ]));
                        }
                    }
                }
            }
            let sim_cfg = sim.merge(config.sim_config());
            let report = run_verification(&config, &sim_cfg, override_rate)?;
            let mut lines = String::new();
            for check in &report.checks {
                let status = if check.passed { "PASS" } else { "FAIL" };
                lines.push_str(&format!("{status} {} - {}\n", check.name, check.detail));
            }
            let summary = if report.passed() {
                format!("verification passed ({} checks)\n", report.checks.len())
            } else {
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                format!(
                    "verification FAILED ({failed} of {} checks)\n",
                    report.checks.len()
                )
            };
            lines.push_str(&summary);
            emit(&common.out, &lines)?;
            Ok(if report.passed() { 0 } else { 1 })
        }
    }
}
