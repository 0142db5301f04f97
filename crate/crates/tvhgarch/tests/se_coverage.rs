//! Monte Carlo coverage of the outer-product standard errors: the
//! standardized deviations |θ̂ − θ|/SE stay below 3 in at least 90% of
//! replications, per parameter.

use rayon::prelude::*;

use tvhgarch::estimate::{fit, standard_errors, FitConfig, Variant};
use tvhgarch::simulate::{simulate_path, SimConfig};
use tvhgarch::volmodel::{AmplitudeSpec, ModelParams};

#[test]
fn standard_error_coverage() {
    let truth = ModelParams {
        gamma: 0.3,
        beta: vec![0.4],
        delta: vec![0.2],
        d: 0.7,
        amplitude: AmplitudeSpec::Logistic(1.0),
    };
    let truth_vec = [0.3, 0.4, 0.2, 0.7, 1.0];
    let config = FitConfig {
        multistart: 1,
        ..FitConfig::default()
    };
    let reps = 50u64;

    let rows: Vec<Option<Vec<f64>>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let y = simulate_path(&SimConfig {
                params: truth.clone(),
                n: 1000,
                burn_in: 1000,
                seed: 7100 + rep,
                truncation: 1000,
            })
            .ok()?;
            let fit_res = fit(&y, Variant::TvHgarch, 1, 1, &config).ok()?;
            if !fit_res.converged {
                return None;
            }
            let se = standard_errors(&fit_res, &y).ok()?;
            let est = fit_res.free_values();
            Some(
                est.iter()
                    .zip(se.iter())
                    .zip(truth_vec.iter())
                    .map(|((e, s), t)| ((e - t) / s).abs())
                    .collect(),
            )
        })
        .collect();

    let usable: Vec<&Vec<f64>> = rows.iter().flatten().collect();
    assert!(
        usable.len() as f64 >= 0.8 * reps as f64,
        "only {} of {reps} replications usable",
        usable.len()
    );
    for (j, name) in ["gamma", "beta", "delta", "d", "eta"].iter().enumerate() {
        let below = usable.iter().filter(|z| z[j] < 3.0).count();
        let frac = below as f64 / usable.len() as f64;
        assert!(
            frac >= 0.90,
            "{name}: |z| < 3 in only {frac:.2} of replications"
        );
    }
}
