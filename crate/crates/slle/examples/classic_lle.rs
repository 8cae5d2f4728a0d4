//! Classic locally linear embedding end to end: reconstruction weights,
//! spectral embedding, and a neighborhood-preservation score.
//!
//! Run with: `cargo run --example classic_lle`

use slle::classic::{embed, neighborhood_preservation, reconstruction_weights};
use slle::data::{generate, DatasetKind, DatasetSpec};
use slle::neighborhood::knn_graph;

fn main() -> slle::Result<()> {
    let spec = DatasetSpec::new(DatasetKind::SwissRoll, 400, 0.0, 12);
    let (data, _) = generate(&spec)?;
    let nbrs = knn_graph(&data, 8)?;

    let weights = reconstruction_weights(&data, &nbrs, 1e-3)?;
    let row_sums_ok = weights
        .rows()
        .all(|(_, _, w)| (w.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    println!("every weight row sums to 1: {row_sums_ok}");

    let embedding = embed(&weights, 2)?;
    println!(
        "trailing spectrum of (I-W)ᵀ(I-W): {:?}",
        embedding
            .eigenvalues
            .iter()
            .map(|l| format!("{l:.2e}"))
            .collect::<Vec<_>>()
    );

    let score = neighborhood_preservation(&nbrs, &embedding.y, 8)?;
    println!("neighborhood preservation (k = 8): {score:.3}");
    println!(
        "first embedded point: ({:.4}, {:.4})",
        embedding.y[(0, 0)],
        embedding.y[(0, 1)]
    );
    Ok(())
}
