//! Build the correlation network of a simulated chamber and inspect
//! its Laplacian spectrum and Fiedler vector.
//!
//! ```text
//! cargo run --example spectral_graph
//! ```

use pdm::sim::{simulate, SimConfig};
use pdm::spectral::SpectralGraph;

fn main() -> pdm::Result<()> {
    let sim = simulate(&SimConfig {
        n_members: 30,
        n_votes: 120,
        alpha: 8.0,
        rng_seed: 1,
        ..SimConfig::default()
    })?;

    let data = sim.vote_matrix.to_real();
    let graph = SpectralGraph::build(data.view(), 1.0)?;

    println!("active rows: {}", graph.active_rows.len());
    println!(
        "smallest eigenvalues: {:?}",
        &graph.eigenvalues.to_vec()[..5]
    );
    println!("fiedler value (smallest nonzero): {:.4}", graph.fiedler_value());

    // The sign of the Fiedler vector separates the parties.
    let fiedler = graph.fiedler_vector();
    let mut agree = 0;
    for (row, &member) in graph.active_rows.iter().enumerate() {
        if (fiedler[row] > 0.0) == (sim.party[member] > 0) {
            agree += 1;
        }
    }
    let n = graph.active_rows.len();
    let accuracy = agree.max(n - agree) as f64 / n as f64;
    println!("sign of fiedler vector recovers party for {:.0}% of members", 100.0 * accuracy);
    println!(
        "fiedler/loyalty correlation: {:.4}",
        sim.fiedler_loyalty_corr.abs()
    );
    Ok(())
}
