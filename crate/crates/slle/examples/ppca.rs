//! Probabilistic PCA two ways: the closed-form solution from the sample
//! covariance spectrum, and the EM iteration that converges to it.
//!
//! Run with: `cargo run --example ppca`

use slle::data::{generate, DatasetKind, DatasetSpec};
use slle::latent::{ppca_fit_closed_form, ppca_fit_em, NoiseModel};
use slle::numerics::max_abs;
use slle::stochastic::EmConfig;

fn main() -> slle::Result<()> {
    let mut spec = DatasetSpec::new(DatasetKind::AffinePatch, 1500, 0.2, 42);
    spec.ambient_dim = Some(5);
    spec.intrinsic_dim = Some(2);
    let (data, _) = generate(&spec)?;

    let closed = ppca_fit_closed_form(&data, 2)?;
    if let NoiseModel::Isotropic(s2) = closed.noise {
        println!("closed form: σ² = {s2:.4} (generator noise was 0.2² = 0.04)");
    }
    println!(
        "loading column norms: {:.3}, {:.3}",
        closed.loading.column(0).norm(),
        closed.loading.column(1).norm()
    );

    let cfg = EmConfig {
        max_iter: 500,
        tol: 1e-12,
        ..EmConfig::default()
    };
    let (em, trace) = ppca_fit_em(&data, 2, &cfg)?;
    let gap = max_abs(&(&em.marginal_covariance() - closed.marginal_covariance()));
    println!(
        "EM after {} iterations: max entry gap to the closed-form marginal covariance {gap:.2e}",
        trace.iterations.len()
    );

    // The low-dimensional view of the data under the model.
    let coords = em.latent_coordinates(&data)?;
    println!(
        "latent coordinates: {} rows x {} cols, first = ({:.3}, {:.3})",
        coords.nrows(),
        coords.ncols(),
        coords[(0, 0)],
        coords[(0, 1)]
    );
    Ok(())
}
