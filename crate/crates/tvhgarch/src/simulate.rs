//! Path generation and the two Monte Carlo experiments: parameter recovery
//! (bias/RMSE per sample size) and score-test size/power.
//!
//! Generation iterates y_t = ε_t √h_t with standard normal ε from the
//! seeded, portable generator (ChaCha8 + Box-Muller), computing h_t from the truncated
//! ARCH(∞) filter over the already-generated history (zero presample). A
//! burn-in prefix (default 1000) is discarded.
//!
//! Replications are seeded individually (base seed + replication index) and
//! aggregated in replication order, so reports are identical regardless of
//! how many worker threads run them.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{fit, fit_fixed_amplitude, FitConfig, ParamId, Variant};
use crate::fracdiff::arch_inf_coeffs;
use crate::rng::GaussianRng;
use crate::scoretest::score_test_with_restricted;
use crate::volmodel::{AmplitudeSpec, FilterEngine, ModelParams};

/// Configuration of one simulated path.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Retained length after burn-in.
    pub n: usize,
    /// Discarded prefix length.
    pub burn_in: usize,
    pub seed: u64,
    /// Lag truncation during generation.
    pub truncation: usize,
}

impl SimConfig {
    pub fn new(params: ModelParams, n: usize, seed: u64) -> Self {
        SimConfig {
            params,
            n,
            burn_in: 1000,
            seed,
            truncation: 1000,
        }
    }
}

/// Generates a return series from the model. Deterministic given the seed.
pub fn simulate_path(config: &SimConfig) -> Result<Vec<f64>> {
    config.params.validate()?;
    if config.n < 1 {
        return Err(Error::Domain("simulated length must be >= 1".into()));
    }
    let coeffs = arch_inf_coeffs(&config.params, config.truncation)?;
    if !coeffs.all_nonnegative() {
        return Err(Error::Domain(format!(
            "parameters yield negative ARCH(\u{221e}) coefficients (min {:.3e}); \
             the generator requires an admissible point",
            coeffs.min_coeff()
        )));
    }
    // zero presample: the generator starts from empty history
    let engine = FilterEngine::new(&coeffs.phi, coeffs.phi0, 0.0);
    let mut rng = GaussianRng::seed_from(config.seed);
    let total = config.burn_in + config.n;

    let mut y = Vec::with_capacity(total);
    let mut y2 = Vec::with_capacity(total);
    for t in 1..=total {
        let ytilde = if t >= 2 { y2[t - 2] } else { 0.0 };
        let wt = config.params.amplitude.value(ytilde);
        let ht = engine.step(&y2, t, wt)?;
        let eps = rng.next_normal();
        let yt = eps * ht.sqrt();
        y.push(yt);
        y2.push(yt * yt);
    }
    Ok(y.split_off(config.burn_in))
}

/// Bias/RMSE per parameter and sample size (experiment 1).
#[derive(Debug, Clone)]
pub struct McEstimationReport {
    pub param_names: Vec<String>,
    pub true_values: Vec<f64>,
    pub n_grid: Vec<usize>,
    /// `bias[n_idx][param_idx]`
    pub bias: Vec<Vec<f64>>,
    /// `rmse[n_idx][param_idx]`
    pub rmse: Vec<Vec<f64>>,
    /// Replications whose fit errored, per sample size.
    pub failures: Vec<usize>,
    pub replications: usize,
    pub base_seed: u64,
}

impl McEstimationReport {
    /// Table-shaped CSV: one row per parameter, one (bias, rmse) column pair
    /// per sample size.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,true_value");
        for n in &self.n_grid {
            out.push_str(&format!(",bias_n{n},rmse_n{n}"));
        }
        out.push('\n');
        for (j, name) in self.param_names.iter().enumerate() {
            out.push_str(&format!("{name},{}", fmt_g(self.true_values[j])));
            for i in 0..self.n_grid.len() {
                out.push_str(&format!(
                    ",{},{}",
                    fmt_g(self.bias[i][j]),
                    fmt_g(self.rmse[i][j])
                ));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "Monte Carlo estimation experiment ({} replications, base seed {})\n",
            self.replications, self.base_seed
        ));
        out.push_str(&format!("{:<10}{:>12}", "parameter", "true"));
        for n in &self.n_grid {
            out.push_str(&format!("{:>14}{:>14}", format!("bias(n={n})"), format!("rmse(n={n})")));
        }
        out.push('\n');
        for (j, name) in self.param_names.iter().enumerate() {
            out.push_str(&format!("{:<10}{:>12.4}", name, self.true_values[j]));
            for i in 0..self.n_grid.len() {
                out.push_str(&format!("{:>14.4}{:>14.4}", self.bias[i][j], self.rmse[i][j]));
            }
            out.push('\n');
        }
        for (i, n) in self.n_grid.iter().enumerate() {
            if self.failures[i] > 0 {
                out.push_str(&format!(
                    "note: n={n}: {} of {} replications failed to fit and were excluded\n",
                    self.failures[i], self.replications
                ));
            }
        }
        out
    }
}

/// Rejection rates of the score test per (η, n, α) cell (experiment 2).
#[derive(Debug, Clone)]
pub struct McSizePowerReport {
    pub eta_grid: Vec<f64>,
    pub n_grid: Vec<usize>,
    pub alpha_grid: Vec<f64>,
    /// `rates[eta_idx][n_idx][alpha_idx]`
    pub rates: Vec<Vec<Vec<f64>>>,
    /// Degenerate-test replications per (eta_idx, n_idx).
    pub degenerate: Vec<Vec<usize>>,
    /// Failed restricted fits per (eta_idx, n_idx).
    pub failures: Vec<Vec<usize>>,
    pub replications: usize,
    pub base_seed: u64,
}

impl McSizePowerReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eta");
        for n in &self.n_grid {
            for a in &self.alpha_grid {
                out.push_str(&format!(",rate_n{n}_a{a}"));
            }
        }
        out.push('\n');
        for (e, eta) in self.eta_grid.iter().enumerate() {
            out.push_str(&fmt_g(*eta));
            for i in 0..self.n_grid.len() {
                for k in 0..self.alpha_grid.len() {
                    out.push_str(&format!(",{}", fmt_g(self.rates[e][i][k])));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "Score test rejection rates ({} replications, base seed {})\n",
            self.replications, self.base_seed
        ));
        out.push_str(&format!("{:<8}", "eta"));
        for n in &self.n_grid {
            for a in &self.alpha_grid {
                out.push_str(&format!("{:>16}", format!("n={n} a={a}")));
            }
        }
        out.push('\n');
        for (e, eta) in self.eta_grid.iter().enumerate() {
            out.push_str(&format!("{:<8}", eta));
            for i in 0..self.n_grid.len() {
                for k in 0..self.alpha_grid.len() {
                    out.push_str(&format!("{:>16.3}", self.rates[e][i][k]));
                }
            }
            out.push('\n');
        }
        for (e, eta) in self.eta_grid.iter().enumerate() {
            for (i, n) in self.n_grid.iter().enumerate() {
                let deg = self.degenerate[e][i];
                let fail = self.failures[e][i];
                if deg > 0 || fail > 0 {
                    out.push_str(&format!(
                        "note: eta={eta}, n={n}: {deg} degenerate tests, {fail} failed fits (excluded)\n"
                    ));
                }
            }
        }
        out
    }
}

fn fmt_g(v: f64) -> String {
    format!("{v:.16e}")
}

fn run_pool<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .expect("thread pool")
            .install(work),
        None => work(),
    }
}

/// Experiment 1: simulate, fit TV-HGARCH, and summarize bias and RMSE per
/// parameter for each sample size. Failed replications are excluded and
/// counted. `jobs` bounds the worker threads (None = global pool).
pub fn mc_estimation_experiment(
    true_params: &ModelParams,
    n_grid: &[usize],
    replications: usize,
    base_seed: u64,
    fit_config: &FitConfig,
    jobs: Option<usize>,
) -> Result<McEstimationReport> {
    if replications < 1 {
        return Err(Error::Domain("replications must be >= 1".into()));
    }
    true_params.validate()?;
    let eta = match true_params.amplitude {
        AmplitudeSpec::Logistic(eta) => eta,
        AmplitudeSpec::Fixed(_) => {
            return Err(Error::Domain(
                "the estimation experiment targets the TV-HGARCH model; use a logistic amplitude"
                    .into(),
            ))
        }
    };
    let p = true_params.p();
    let q = true_params.q();
    let ids = crate::estimate::free_param_ids(Variant::TvHgarch, p, q);
    let truth: Vec<f64> = ids
        .iter()
        .map(|id| match id {
            ParamId::Eta => eta,
            other => other.get(true_params),
        })
        .collect();

    let mut bias = Vec::new();
    let mut rmse = Vec::new();
    let mut failures = Vec::new();

    for &n in n_grid {
        let estimates: Vec<Option<Vec<f64>>> = run_pool(jobs, || {
            (0..replications)
                .into_par_iter()
                .map(|rep| {
                    let seed = base_seed.wrapping_add(rep as u64);
                    let sim = SimConfig {
                        params: true_params.clone(),
                        n,
                        burn_in: 1000,
                        seed,
                        truncation: fit_config.truncation.unwrap_or(1000),
                    };
                    let y = match simulate_path(&sim) {
                        Ok(y) => y,
                        Err(_) => return None,
                    };
                    let config = FitConfig {
                        seed: base_seed.wrapping_add(rep as u64),
                        ..fit_config.clone()
                    };
                    match fit(&y, Variant::TvHgarch, p, q, &config) {
                        Ok(res) => Some(res.free_values()),
                        Err(_) => None,
                    }
                })
                .collect()
        });

        let ok: Vec<&Vec<f64>> = estimates.iter().flatten().collect();
        let failed = replications - ok.len();
        if ok.is_empty() {
            return Err(Error::Numerical(format!(
                "all {replications} replications failed at n={n}"
            )));
        }
        let m = ok.len() as f64;
        let mut b = vec![0.0; truth.len()];
        let mut r = vec![0.0; truth.len()];
        for est in &ok {
            for j in 0..truth.len() {
                let dev = est[j] - truth[j];
                b[j] += dev;
                r[j] += dev * dev;
            }
        }
        for j in 0..truth.len() {
            b[j] /= m;
            r[j] = (r[j] / m).sqrt();
        }
        bias.push(b);
        rmse.push(r);
        failures.push(failed);
    }

    Ok(McEstimationReport {
        param_names: ids.iter().map(|id| id.name()).collect(),
        true_values: truth,
        n_grid: n_grid.to_vec(),
        bias,
        rmse,
        failures,
        replications,
        base_seed,
    })
}

/// Experiment 2: empirical size (η = 0) and power (η > 0) of the score
/// test across sample sizes and significance levels.
#[allow(clippy::too_many_arguments)]
pub fn mc_size_power_experiment(
    shape: &ModelParams,
    eta_grid: &[f64],
    n_grid: &[usize],
    alpha_grid: &[f64],
    replications: usize,
    base_seed: u64,
    fit_config: &FitConfig,
    jobs: Option<usize>,
) -> Result<McSizePowerReport> {
    if replications < 1 {
        return Err(Error::Domain("replications must be >= 1".into()));
    }
    if alpha_grid.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Error::Domain("significance levels must lie in (0,1)".into()));
    }
    let p = shape.p();
    let q = shape.q();

    let mut rates = Vec::new();
    let mut degenerate = Vec::new();
    let mut failures = Vec::new();

    for &eta in eta_grid {
        let params = ModelParams {
            amplitude: AmplitudeSpec::Logistic(eta),
            ..shape.clone()
        };
        params.validate()?;
        let mut eta_rates = Vec::new();
        let mut eta_deg = Vec::new();
        let mut eta_fail = Vec::new();
        for &n in n_grid {
            // Outcome per replication: Some(p_value) | degenerate | failed
            #[derive(Clone, Copy)]
            enum Outcome {
                P(f64),
                Degenerate,
                Failed,
            }
            let outcomes: Vec<Outcome> = run_pool(jobs, || {
                (0..replications)
                    .into_par_iter()
                    .map(|rep| {
                        let seed = base_seed.wrapping_add(rep as u64);
                        let sim = SimConfig {
                            params: params.clone(),
                            n,
                            burn_in: 1000,
                            seed,
                            truncation: fit_config.truncation.unwrap_or(1000),
                        };
                        let y = match simulate_path(&sim) {
                            Ok(y) => y,
                            Err(_) => return Outcome::Failed,
                        };
                        let config = FitConfig {
                            seed,
                            ..fit_config.clone()
                        };
                        let restricted = match fit_fixed_amplitude(&y, p, q, 0.5, &config) {
                            Ok(f) => f,
                            Err(_) => return Outcome::Failed,
                        };
                        match score_test_with_restricted(&y, &restricted) {
                            Ok(res) => Outcome::P(res.p_value),
                            Err(Error::DegenerateTest(_)) => Outcome::Degenerate,
                            Err(_) => Outcome::Failed,
                        }
                    })
                    .collect()
            });

            let mut deg = 0usize;
            let mut fail = 0usize;
            let mut pvals = Vec::new();
            for o in &outcomes {
                match o {
                    Outcome::P(pv) => pvals.push(*pv),
                    Outcome::Degenerate => deg += 1,
                    Outcome::Failed => fail += 1,
                }
            }
            if pvals.is_empty() {
                return Err(Error::Numerical(format!(
                    "no usable score tests at eta={eta}, n={n}"
                )));
            }
            let m = pvals.len() as f64;
            let cell: Vec<f64> = alpha_grid
                .iter()
                .map(|&a| pvals.iter().filter(|&&pv| pv < a).count() as f64 / m)
                .collect();
            eta_rates.push(cell);
            eta_deg.push(deg);
            eta_fail.push(fail);
        }
        rates.push(eta_rates);
        degenerate.push(eta_deg);
        failures.push(eta_fail);
    }

    Ok(McSizePowerReport {
        eta_grid: eta_grid.to_vec(),
        n_grid: n_grid.to_vec(),
        alpha_grid: alpha_grid.to_vec(),
        rates,
        degenerate,
        failures,
        replications,
        base_seed,
    })
}
