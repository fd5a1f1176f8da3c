//! A compact run of the party-loyalty validation experiment: sweep the
//! Beta loyalty parameter and track how strongly the Fiedler vector
//! correlates with loyalty, and how localized it becomes.
//!
//! ```text
//! cargo run --release --example simulate_experiment
//! ```

use pdm::sim::{alpha_grid, run_experiment, spearman, SimConfig};

fn main() -> pdm::Result<()> {
    let alphas = alpha_grid(1.0, 30.0, 3.0)?;
    let base = SimConfig {
        n_members: 60,
        n_votes: 200,
        ..SimConfig::default()
    };
    let summary = run_experiment(&base, &alphas, 5, 0)?;

    println!("{:>6} {:>12} {:>18}", "alpha", "mean |corr|", "within-party var");
    for (&(alpha, corr), &(_, var)) in summary
        .per_alpha_mean
        .iter()
        .zip(summary.per_alpha_within_var.iter())
    {
        println!("{alpha:>6.1} {corr:>12.4} {var:>18.6}");
    }
    println!(
        "\noverall: mean |corr| {:.4}, variance {:.6}",
        summary.mean_abs_corr, summary.var_abs_corr
    );
    let xs: Vec<f64> = summary.per_alpha_within_var.iter().map(|&(a, _)| a).collect();
    let ys: Vec<f64> = summary.per_alpha_within_var.iter().map(|&(_, v)| v).collect();
    println!(
        "localization: spearman(alpha, within-party variance) = {:.3}",
        spearman(&xs, &ys)
    );
    Ok(())
}
