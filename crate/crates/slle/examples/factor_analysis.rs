//! Factor analysis by EM: generate data from a known model, fit it, compare
//! marginal covariances, and round-trip the fitted model through JSON.
//!
//! Run with: `cargo run --example factor_analysis`

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use slle::latent::{fa_fit, fa_log_likelihood, LatentLinearModel};
use slle::neighborhood::DataMatrix;
use slle::numerics::max_abs;
use slle::stochastic::EmConfig;

fn main() -> slle::Result<()> {
    // Ground truth: 4 observed dimensions, 2 latent factors, diagonal noise.
    let loading = DMatrix::from_row_slice(4, 2, &[1.0, 0.2, -0.5, 1.0, 0.8, -0.3, 0.1, 0.9]);
    let psi: [f64; 4] = [0.3, 0.5, 0.2, 0.4];
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let n = 5000;
    let mut rows = DMatrix::zeros(n, 4);
    for i in 0..n {
        let w = DVector::from_fn(2, |_, _| rng.sample(rand_distr::StandardNormal));
        let eps = DVector::from_fn(4, |j, _| {
            rng.sample::<f64, _>(rand_distr::StandardNormal) * psi[j].sqrt()
        });
        rows.set_row(i, &(&loading * w + eps).transpose());
    }
    let data = DataMatrix::new(rows)?;

    let cfg = EmConfig {
        max_iter: 300,
        tol: 1e-9,
        ..EmConfig::default()
    };
    let (model, trace) = fa_fit(&data, 2, &cfg)?;
    println!(
        "EM converged in {} iterations, final log-likelihood {:.2}",
        trace.iterations.len(),
        trace.iterations.last().unwrap().objective
    );

    let mut truth = &loading * loading.transpose();
    for j in 0..4 {
        truth[(j, j)] += psi[j];
    }
    let gap = max_abs(&(&model.marginal_covariance() - &truth));
    println!("max entry error of fitted ΛΛᵀ+Ψ vs truth: {gap:.4}");
    println!("log-likelihood of the data under the fit: {:.2}", fa_log_likelihood(&model, &data)?);

    // Bit-exact persistence.
    let text = model.to_json();
    let restored = LatentLinearModel::from_json(&text)?;
    println!(
        "JSON round-trip exact: {}",
        restored.loading == model.loading && restored.mean == model.mean
    );
    Ok(())
}
