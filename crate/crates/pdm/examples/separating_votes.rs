//! Find the roll calls that best distinguish the discovered clusters
//! with AdaBoost over single-vote decision stumps, and print the
//! yea-percentage table.
//!
//! ```text
//! cargo run --example separating_votes
//! ```

use pdm::boost::{explain_clusters, BoostConfig};
use pdm::engine::{decompose, planted_two_factor, PdmConfig};

fn main() -> pdm::Result<()> {
    let (v, _, _) = planted_two_factor(32, 60, 6, 0.0, 3);
    let decomp = decompose(&v, &PdmConfig::default())?;
    let layer = &decomp.layers[0];

    let members: Vec<Vec<usize>> = layer
        .clustering
        .members()
        .into_iter()
        .map(|ms| ms.into_iter().map(|i| layer.rows[i]).collect())
        .collect();
    let sep = explain_clusters(&v, &members, &BoostConfig { rounds: 20, top_k: 5 })?;

    for pair in &sep.pairs {
        println!(
            "clusters {} vs {}: {:?} after {} round(s), training error {:.3} (bound {:.3})",
            pair.cluster_a, pair.cluster_b, pair.outcome, pair.rounds_run,
            pair.training_error, pair.error_bound
        );
        for ranked in pair.ranked.iter().take(3) {
            println!(
                "  {} weight {:.3} ({} round(s))",
                ranked.vote_id, ranked.weight, ranked.rounds_selected
            );
        }
    }

    println!("\npercent yea by cluster:");
    print!("{:>8}", "vote");
    for c in 0..sep.cluster_sizes.len() {
        print!("{:>10}", format!("cluster {c}"));
    }
    println!();
    for row in &sep.yea_table {
        print!("{:>8}", row.vote_id);
        for pct in &row.pct_by_cluster {
            match pct {
                Some(p) => print!("{p:>10}"),
                None => print!("{:>10}", "-"),
            }
        }
        println!();
    }
    Ok(())
}
