//! Run configuration: defaults, plain `key = value` config files, and flag
//! overrides (defaults < file < flags).

use std::path::PathBuf;

use tvhgarch::{AmplitudeSpec, FitConfig, ModelParams, QuantileSource, Variant};

use crate::errors::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// Explicit column to read; None = auto-detect by header name.
    pub column: Option<String>,
    /// In-sample length (observations before the split index).
    pub split: usize,
    pub variants: Vec<Variant>,
    pub p: usize,
    pub q: usize,
    /// None = min(T-1, 1000).
    pub truncation: Option<usize>,
    pub levels: Vec<f64>,
    pub quantile_source: QuantileSource,
    pub seed: u64,
    pub outdir: PathBuf,
    pub demean: bool,
    pub jobs: Option<usize>,
    pub no_timestamp: bool,
    pub multistart: usize,
    pub max_iter: usize,
    // simulation block
    pub sim_n: usize,
    pub burn_in: usize,
    pub true_gamma: f64,
    pub true_beta: f64,
    pub true_delta: f64,
    pub true_d: f64,
    pub true_eta: f64,
    /// Fixed amplitude for simulation; overrides the logistic spec if set.
    pub true_w: Option<f64>,
    // Monte Carlo experiment block
    pub experiment: Option<String>,
    pub reps: usize,
    pub n_grid: Vec<usize>,
    pub eta_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            column: None,
            split: 1000,
            variants: vec![Variant::TvHgarch, Variant::Hgarch, Variant::Figarch],
            p: 1,
            q: 1,
            truncation: None,
            levels: vec![0.05, 0.10],
            quantile_source: QuantileSource::Gaussian,
            seed: 42,
            outdir: PathBuf::from("out"),
            demean: false,
            jobs: None,
            no_timestamp: false,
            multistart: 3,
            max_iter: 300,
            sim_n: 1000,
            burn_in: 1000,
            true_gamma: 0.3,
            true_beta: 0.4,
            true_delta: 0.2,
            true_d: 0.7,
            true_eta: 1.0,
            true_w: None,
            experiment: None,
            reps: 200,
            n_grid: vec![300, 500, 1000],
            eta_grid: vec![0.0, 0.4, 1.5, 3.0],
            alpha_grid: vec![0.05, 0.10],
        }
    }
}

impl RunConfig {
    pub fn fit_config(&self) -> FitConfig {
        FitConfig {
            truncation: self.truncation,
            multistart: self.multistart,
            max_iterations: self.max_iter,
            seed: self.seed,
            ..FitConfig::default()
        }
    }

    pub fn sim_params(&self) -> ModelParams {
        ModelParams {
            gamma: self.true_gamma,
            beta: vec![self.true_beta],
            delta: vec![self.true_delta],
            d: self.true_d,
            amplitude: match self.true_w {
                Some(w) => AmplitudeSpec::Fixed(w),
                None => AmplitudeSpec::Logistic(self.true_eta),
            },
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        for &rho in &self.levels {
            if !(rho > 0.0 && rho < 0.5) {
                return Err(CliError::Usage(format!(
                    "VaR level must lie in (0, 0.5), got {rho}"
                )));
            }
        }
        if self.variants.is_empty() {
            return Err(CliError::Usage("no variants requested".into()));
        }
        Ok(())
    }
}

/// Applies `key = value` pairs from a config file. `#` starts a comment;
/// blank lines are skipped; unknown keys are errors with line numbers.
pub fn apply_config_file(config: &mut RunConfig, path: &PathBuf) -> CliResult<()> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "{}:{}: expected `key = value`, got `{raw}`",
                path.display(),
                idx + 1
            ))
        })?;
        apply_key(config, key.trim(), value.trim()).map_err(|e| {
            CliError::Usage(format!("{}:{}: {e}", path.display(), idx + 1))
        })?;
    }
    Ok(())
}

pub fn apply_key(config: &mut RunConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "input" => config.input = Some(PathBuf::from(value)),
        "column" => config.column = Some(value.to_string()),
        "split" => config.split = parse(key, value)?,
        "variants" => config.variants = parse_variants(value)?,
        "p" => config.p = parse(key, value)?,
        "q" => config.q = parse(key, value)?,
        "truncation" => config.truncation = Some(parse(key, value)?),
        "levels" => config.levels = parse_list(key, value)?,
        "quantile-source" => config.quantile_source = parse_quantile_source(value)?,
        "seed" => config.seed = parse(key, value)?,
        "outdir" => config.outdir = PathBuf::from(value),
        "demean" => config.demean = parse_bool(key, value)?,
        "jobs" => {
            let j: usize = parse(key, value)?;
            config.jobs = if j == 0 { None } else { Some(j) };
        }
        "no-timestamp" => config.no_timestamp = parse_bool(key, value)?,
        "multistart" => config.multistart = parse(key, value)?,
        "max-iter" => config.max_iter = parse(key, value)?,
        "sim-n" => config.sim_n = parse(key, value)?,
        "burn-in" => config.burn_in = parse(key, value)?,
        "true-gamma" => config.true_gamma = parse(key, value)?,
        "true-beta" => config.true_beta = parse(key, value)?,
        "true-delta" => config.true_delta = parse(key, value)?,
        "true-d" => config.true_d = parse(key, value)?,
        "true-eta" => config.true_eta = parse(key, value)?,
        "true-w" => config.true_w = Some(parse(key, value)?),
        "experiment" => config.experiment = Some(value.to_string()),
        "reps" => config.reps = parse(key, value)?,
        "n-grid" => config.n_grid = parse_list(key, value)?,
        "eta-grid" => config.eta_grid = parse_list(key, value)?,
        "alpha-grid" => config.alpha_grid = parse_list(key, value)?,
        other => return Err(format!("unknown key `{other}`")),
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, String> {
    value
        .split(',')
        .map(|s| parse(key, s.trim()))
        .collect::<Result<Vec<T>, String>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(format!("empty list for `{key}`"))
            } else {
                Ok(v)
            }
        })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(format!("invalid boolean `{other}` for `{key}`")),
    }
}

pub fn parse_variants(value: &str) -> Result<Vec<Variant>, String> {
    let mut out = Vec::new();
    for item in value.split(',') {
        let v = match item.trim().to_lowercase().as_str() {
            "figarch" => Variant::Figarch,
            "hgarch" => Variant::Hgarch,
            "tv-hgarch" | "tvhgarch" => Variant::TvHgarch,
            other => return Err(format!("unknown variant `{other}`")),
        };
        if !out.contains(&v) {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err("empty variant list".into());
    }
    Ok(out)
}

pub fn parse_quantile_source(value: &str) -> Result<QuantileSource, String> {
    match value.to_lowercase().as_str() {
        "gaussian" => Ok(QuantileSource::Gaussian),
        "empirical" => Ok(QuantileSource::Empirical),
        other => Err(format!("unknown quantile source `{other}`")),
    }
}

