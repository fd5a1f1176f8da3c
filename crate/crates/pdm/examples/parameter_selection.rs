//! Unsupervised selection of the cluster count k0 (AIC over Gaussian
//! mixture fits of the Fiedler vector) and the embedding dimension l
//! (Laplacian eigenvalues below the null-model threshold).
//!
//! ```text
//! cargo run --example parameter_selection
//! ```

use pdm::cluster::{select_k0, select_l, GmmSelect};
use pdm::sim::{simulate, SimConfig};
use pdm::spectral::SpectralGraph;

fn main() -> pdm::Result<()> {
    let sim = simulate(&SimConfig {
        n_members: 40,
        n_votes: 150,
        alpha: 200.0,
        rng_seed: 2,
        ..SimConfig::default()
    })?;
    let data = sim.vote_matrix.to_real();
    let graph = SpectralGraph::build(data.view(), 1.0)?;

    // The Fiedler values form two party lobes, but members who broke
    // ranks sit apart from their lobe, so the mixture scan typically
    // subdivides each party into factions rather than stopping at 2.
    let (k0, curve) = select_k0(graph.fiedler_vector(), &GmmSelect::default(), 0)?;
    println!("k0 = {k0}");
    println!("criterion curve (component count, AIC), first entries:");
    for (c, aic) in curve.iter().take(8) {
        println!("  {c:>2}  {aic:>12.2}");
    }

    let (l, threshold) = select_l(&graph.eigenvalues, data.view(), 1.0, 25, 0)?;
    println!("null-model fiedler minimum: {threshold:.4}");
    println!(
        "real eigenvalues below it: {:?}",
        graph
            .eigenvalues
            .iter()
            .filter(|&&x| x > 1e-8 && x < threshold)
            .collect::<Vec<_>>()
    );
    println!("l = {l} significant dimension(s)");
    Ok(())
}
