//! `tvhgarch` — long-memory volatility modeling from the command line.
//!
//! Subcommands: simulate, fit, test-tva, forecast, backtest, mc, report.
//! Every option can come from a `key = value` config file (`--config`),
//! with flags taking precedence. Exit status: 0 success, 2 usage/config
//! error, 3 data error, 4 numerical failure.

mod commands;
mod config;
mod data;
mod errors;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{apply_config_file, apply_key, RunConfig};
use errors::CliResult;

#[derive(Parser)]
#[command(name = "tvhgarch", version, about = "Long-memory volatility models: fitting, amplitude score test, VaR backtesting, Monte Carlo experiments")]
struct Cli {
    /// Plain `key = value` config file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Input CSV: a `return` column, or `date,price` (returns become
    /// 100*(ln P_t - ln P_{t-1})).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Column name to read instead of auto-detection.
    #[arg(long, global = true)]
    column: Option<String>,

    /// In-sample length (observations before the forecast split).
    #[arg(long, global = true)]
    split: Option<usize>,

    /// Comma list of model variants: tv-hgarch,hgarch,figarch.
    #[arg(long, global = true)]
    variants: Option<String>,

    /// Autoregressive order p of beta(B).
    #[arg(long, global = true)]
    p: Option<usize>,

    /// Moving-average order q of delta(B).
    #[arg(long, global = true)]
    q: Option<usize>,

    /// Lag truncation K (default: min(T-1, 1000)).
    #[arg(long, global = true)]
    truncation: Option<usize>,

    /// Comma list of VaR levels in (0, 0.5).
    #[arg(long, global = true)]
    levels: Option<String>,

    /// Quantile source: gaussian or empirical.
    #[arg(long = "quantile-source", global = true)]
    quantile_source: Option<String>,

    /// Seed for simulation, multistart jitter and experiments.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,

    /// Subtract the sample mean from the returns before modeling.
    #[arg(long, global = true)]
    demean: bool,

    /// Worker threads for `mc` (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Suppress the timestamp header line in text reports.
    #[arg(long = "no-timestamp", global = true)]
    no_timestamp: bool,

    /// Optimizer starts per fit.
    #[arg(long, global = true)]
    multistart: Option<usize>,

    /// Optimizer iteration cap.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,

    /// Simulated series length (after burn-in).
    #[arg(long = "sim-n", global = true)]
    sim_n: Option<usize>,

    /// Burn-in observations discarded by the simulator.
    #[arg(long = "burn-in", global = true)]
    burn_in: Option<usize>,

    /// True parameters gamma,beta,delta,d,eta for simulation/experiments.
    #[arg(long = "true-params", global = true)]
    true_params: Option<String>,

    /// Fixed amplitude w for simulation (overrides the logistic eta).
    #[arg(long = "true-w", global = true)]
    true_w: Option<f64>,

    /// Monte Carlo experiment: estimation or size-power.
    #[arg(long, global = true)]
    experiment: Option<String>,

    /// Monte Carlo replications per cell.
    #[arg(long, global = true)]
    reps: Option<usize>,

    /// Comma list of sample sizes for `mc`.
    #[arg(long = "n-grid", global = true)]
    n_grid: Option<String>,

    /// Comma list of eta values for the size/power experiment.
    #[arg(long = "eta-grid", global = true)]
    eta_grid: Option<String>,

    /// Comma list of significance levels for the size/power experiment.
    #[arg(long = "alpha-grid", global = true)]
    alpha_grid: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a return series from the model and write simulated.csv.
    Simulate,
    /// Fit the requested variants on the in-sample segment.
    Fit,
    /// Score test of H0: constant amplitude (eta = 0).
    #[command(name = "test-tva")]
    TestTva,
    /// One-day-ahead volatility and VaR forecasts over the out-of-sample
    /// segment.
    Forecast,
    /// Forecast plus coverage/independence backtests.
    Backtest,
    /// Monte Carlo experiments (estimation quality or test size/power).
    Mc,
    /// Full workflow: stats, fits, score test, forecasts, backtests,
    /// plot data.
    Report,
}

fn build_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        apply_config_file(&mut config, path)?;
    }
    let mut set = |key: &'static str, value: Option<String>| -> CliResult<()> {
        if let Some(v) = value {
            apply_key(&mut config, key, &v).map_err(errors::CliError::Usage)?;
        }
        Ok(())
    };
    set("input", cli.input.as_ref().map(|p| p.display().to_string()))?;
    set("column", cli.column.clone())?;
    set("split", cli.split.map(|v| v.to_string()))?;
    set("variants", cli.variants.clone())?;
    set("p", cli.p.map(|v| v.to_string()))?;
    set("q", cli.q.map(|v| v.to_string()))?;
    set("truncation", cli.truncation.map(|v| v.to_string()))?;
    set("levels", cli.levels.clone())?;
    set("quantile-source", cli.quantile_source.clone())?;
    set("seed", cli.seed.map(|v| v.to_string()))?;
    set("outdir", cli.outdir.as_ref().map(|p| p.display().to_string()))?;
    set("jobs", cli.jobs.map(|v| v.to_string()))?;
    set("multistart", cli.multistart.map(|v| v.to_string()))?;
    set("max-iter", cli.max_iter.map(|v| v.to_string()))?;
    set("sim-n", cli.sim_n.map(|v| v.to_string()))?;
    set("burn-in", cli.burn_in.map(|v| v.to_string()))?;
    set("true-w", cli.true_w.map(|v| v.to_string()))?;
    set("experiment", cli.experiment.clone())?;
    set("reps", cli.reps.map(|v| v.to_string()))?;
    set("n-grid", cli.n_grid.clone())?;
    set("eta-grid", cli.eta_grid.clone())?;
    set("alpha-grid", cli.alpha_grid.clone())?;
    if let Some(tp) = &cli.true_params {
        let parts: Vec<&str> = tp.split(',').map(|s| s.trim()).collect();
        if parts.len() != 5 {
            return Err(errors::CliError::Usage(
                "--true-params expects gamma,beta,delta,d,eta".into(),
            ));
        }
        for (key, value) in ["true-gamma", "true-beta", "true-delta", "true-d", "true-eta"]
            .iter()
            .zip(parts)
        {
            apply_key(&mut config, key, value).map_err(errors::CliError::Usage)?;
        }
    }
    if cli.demean {
        config.demean = true;
    }
    if cli.no_timestamp {
        config.no_timestamp = true;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> CliResult<()> {
    let config = build_config(cli)?;
    match cli.command {
        Command::Simulate => commands::cmd_simulate(&config),
        Command::Fit => commands::cmd_fit(&config),
        Command::TestTva => commands::cmd_test_tva(&config),
        Command::Forecast => commands::cmd_forecast(&config),
        Command::Backtest => commands::cmd_backtest(&config),
        Command::Mc => commands::cmd_mc(&config),
        Command::Report => commands::cmd_report(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
