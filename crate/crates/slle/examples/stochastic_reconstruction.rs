//! Fit stochastic reconstruction weights on a swiss roll with EM and
//! inspect the objective trace and reconstruction quality.
//!
//! Run with: `cargo run --example stochastic_reconstruction`

use slle::data::{generate, DatasetKind, DatasetSpec};
use slle::neighborhood::knn_graph;
use slle::stochastic::{
    extract_weights, fit_stochastic_reconstruction, reconstruction_residuals, EmConfig,
    ExtractMode, PriorCovariance,
};

fn main() -> slle::Result<()> {
    let spec = DatasetSpec::new(DatasetKind::SwissRoll, 300, 0.0, 12);
    let (data, _) = generate(&spec)?;
    let nbrs = knn_graph(&data, 8)?;

    let cfg = EmConfig::default(); // spherical prior, mean extraction
    let (prior, post, trace) = fit_stochastic_reconstruction(&data, &nbrs, &cfg)?;

    println!("EM converged: {} ({} iterations)", trace.converged, trace.iterations.len());
    for e in trace.iterations.iter().take(5) {
        println!("  iter {:2}  objective {:14.4}  max change {:.3e}", e.iter, e.objective, e.max_change);
    }
    if trace.iterations.len() > 5 {
        let last = trace.iterations.last().unwrap();
        println!("  ...");
        println!("  iter {:2}  objective {:14.4}  max change {:.3e}", last.iter, last.objective, last.max_change);
    }

    if let PriorCovariance::Spherical(sigmas) = &prior {
        let mean_sigma = sigmas.iter().sum::<f64>() / sigmas.len() as f64;
        println!("fitted prior scale: mean σ = {mean_sigma:.4}");
    }

    let weights = extract_weights(&post, ExtractMode::Mean, cfg.seed)?;
    let residuals = reconstruction_residuals(&data, &nbrs, &weights)?;
    let mean_res = residuals.iter().sum::<f64>() / residuals.len() as f64;
    let max_res = residuals.iter().cloned().fold(0.0_f64, f64::max);
    println!("reconstruction residuals: mean {mean_res:.4}, max {max_res:.4}");

    // Sampling instead of taking the posterior mean is one flag away.
    let sampled = extract_weights(&post, ExtractMode::Sample, 7)?;
    println!("first sampled weight vector: {:?}", sampled[0].as_slice());
    Ok(())
}
