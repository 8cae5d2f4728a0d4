//! Dataset persistence: write a generated dataset to CSV, read it back
//! losslessly, and save an embedding result bundle.
//!
//! Run with: `cargo run --example csv_workflow`

use slle::classic::{embed, reconstruction_weights};
use slle::data::{generate, load_csv, save_csv, save_results, DatasetKind, DatasetSpec};
use slle::neighborhood::knn_graph;
use slle::stochastic::EmTrace;

fn main() -> slle::Result<()> {
    let dir = std::env::temp_dir().join("slle-csv-workflow");
    std::fs::create_dir_all(&dir).expect("temp dir");

    let spec = DatasetSpec::new(DatasetKind::SCurve, 150, 0.02, 5);
    let (data, _) = generate(&spec)?;
    let csv = dir.join("s_curve.csv");
    save_csv(&csv, &data)?;
    let restored = load_csv(&csv, false)?;
    println!(
        "round trip exact: {} ({} points, {} dims)",
        restored.rows() == data.rows(),
        restored.n(),
        restored.d()
    );

    let nbrs = knn_graph(&restored, 6)?;
    let weights = reconstruction_weights(&restored, &nbrs, 1e-3)?;
    let embedding = embed(&weights, 2)?;
    save_results(&dir, &embedding, &weights.triplets(), &EmTrace::default())?;
    println!("results written under {}", dir.display());
    for file in ["embedding.csv", "weights.csv", "trace.csv"] {
        let len = std::fs::metadata(dir.join(file)).map(|m| m.len()).unwrap_or(0);
        println!("  {file}: {len} bytes");
    }
    Ok(())
}
