//! Full multiscale decomposition of a matrix with planted party and
//! regional structure: layer 1 finds the parties, layer 2 the regions,
//! and the telescoping identity reconstructs the data exactly.
//!
//! ```text
//! cargo run --example decompose_layers
//! ```

use pdm::cluster::adjusted_rand_index;
use pdm::engine::{decompose, planted_two_factor, PdmConfig};
use pdm::report::DecompositionDoc;

fn main() -> pdm::Result<()> {
    let (v, party, region) = planted_two_factor(32, 120, 6, 0.0, 7);
    let config = PdmConfig::default();
    let decomp = decompose(&v, &config)?;

    println!("layers: {}, stop reason: {:?}", decomp.layers.len(), decomp.stop_reason);
    for layer in &decomp.layers {
        let party_truth: Vec<usize> = layer.rows.iter().map(|&i| party[i]).collect();
        let region_truth: Vec<usize> = layer.rows.iter().map(|&i| region[i]).collect();
        println!(
            "  layer {}: k0={} l={} | ARI vs party {:.2}, vs region {:.2}",
            layer.layer_index,
            layer.params.k0,
            layer.params.l,
            adjusted_rand_index(&layer.clustering.labels, &party_truth),
            adjusted_rand_index(&layer.clustering.labels, &region_truth),
        );
    }

    // V = sum of layer approximations + residual, entrywise.
    decomp.verify(&v)?;
    let residual_max = decomp.residual.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    println!("telescoping identity verified; residual max |entry| = {residual_max:.2e}");

    let doc = DecompositionDoc::build(&v, &decomp, &config);
    println!(
        "serialized document: {} layers, {} bytes of JSON",
        doc.layers.len(),
        doc.to_json()?.len()
    );
    Ok(())
}
