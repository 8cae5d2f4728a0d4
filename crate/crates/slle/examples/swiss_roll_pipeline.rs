//! The full comparison on one swiss roll: stochastic LLE weights fed into
//! the spectral embedding, classic LLE, and a global linear PPCA projection,
//! all scored by neighborhood preservation.
//!
//! The per-point local frames make the first two methods nonlinear; the
//! global loading matrix makes PPCA linear, and the scores show it.
//!
//! Run with: `cargo run --example swiss_roll_pipeline`

use slle::classic::{embed, embed_from_stochastic, neighborhood_preservation, reconstruction_weights};
use slle::data::{generate, DatasetKind, DatasetSpec};
use slle::latent::ppca_fit_closed_form;
use slle::neighborhood::knn_graph;
use slle::stochastic::{extract_weights, fit_stochastic_reconstruction, EmConfig, ExtractMode};

fn main() -> slle::Result<()> {
    let spec = DatasetSpec::new(DatasetKind::SwissRoll, 500, 0.0, 12);
    let (data, _) = generate(&spec)?;
    let k = 8;
    let nbrs = knn_graph(&data, k)?;

    // Stochastic reconstruction -> renormalized weights -> embedding.
    let cfg = EmConfig::default();
    let (_, post, _) = fit_stochastic_reconstruction(&data, &nbrs, &cfg)?;
    let w = extract_weights(&post, ExtractMode::Mean, cfg.seed)?;
    let stochastic = embed_from_stochastic(&w, &nbrs, 2, true)?;
    let stochastic_score = neighborhood_preservation(&nbrs, &stochastic.y, k)?;

    // Classic LLE on the same neighborhoods.
    let classic_w = reconstruction_weights(&data, &nbrs, 1e-3)?;
    let classic = embed(&classic_w, 2)?;
    let classic_score = neighborhood_preservation(&nbrs, &classic.y, k)?;

    // Global linear baseline: PPCA posterior-mean coordinates.
    let ppca = ppca_fit_closed_form(&data, 2)?;
    let coords = ppca.latent_coordinates(&data)?;
    let ppca_score = neighborhood_preservation(&nbrs, &coords, k)?;

    println!("neighborhood preservation on a 500-point swiss roll (k = {k}):");
    println!("  stochastic LLE : {stochastic_score:.3}");
    println!("  classic LLE    : {classic_score:.3}");
    println!("  PPCA (linear)  : {ppca_score:.3}");
    println!(
        "nonlinear margin over the global linear map: {:.3}",
        stochastic_score - ppca_score
    );
    Ok(())
}
