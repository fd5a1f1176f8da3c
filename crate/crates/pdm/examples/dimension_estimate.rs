//! Estimate a layer's effective dimension: embed its pairwise row
//! distances in 1..10 dimensions by SMACOF and interpolate where the
//! stress curve crosses 0.1.
//!
//! ```text
//! cargo run --example dimension_estimate
//! ```

use pdm::engine::{decompose, PdmConfig};
use pdm::mds::{estimate_dimension, pairwise_distances};
use pdm::sim::{simulate, SimConfig};

fn main() -> pdm::Result<()> {
    let sim = simulate(&SimConfig {
        n_members: 40,
        n_votes: 150,
        alpha: 9.0,
        rng_seed: 6,
        ..SimConfig::default()
    })?;
    let decomp = decompose(&sim.vote_matrix, &PdmConfig::default())?;
    let layer = &decomp.layers[0];

    // Distances between the layer-1 approximation rows of the
    // clustered members.
    let mut rows = ndarray::Array2::zeros((layer.rows.len(), sim.vote_matrix.n_votes()));
    for (dst, &src) in layer.rows.iter().enumerate() {
        rows.row_mut(dst).assign(&layer.approximation.row(src));
    }
    let dist = pairwise_distances(rows.view());
    let est = estimate_dimension(dist.view(), 0)?;

    println!("stress by dimension:");
    for &(dim, stress) in &est.stress_by_dim {
        let marker = if stress <= 0.1 { " <= 0.1" } else { "" };
        println!("  {dim:>2}  {stress:.4}{marker}");
    }
    println!("estimated dimension: {}", est.estimate);
    println!(
        "2-D coordinates available for plotting ({} rows)",
        est.coords_2d.nrows()
    );
    Ok(())
}
