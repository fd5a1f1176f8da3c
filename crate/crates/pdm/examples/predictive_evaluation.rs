//! Score sign predictions from one- and two-layer approximations
//! against the minority and random baselines.
//!
//! ```text
//! cargo run --example predictive_evaluation
//! ```

use pdm::engine::{decompose, PdmConfig};
use pdm::eval::{minority_model, predict_signs, random_model_summary, score};
use pdm::sim::{simulate, SimConfig};

fn main() -> pdm::Result<()> {
    let sim = simulate(&SimConfig {
        n_members: 50,
        n_votes: 200,
        alpha: 7.0,
        rng_seed: 4,
        ..SimConfig::default()
    })?;
    let v = &sim.vote_matrix;
    let decomp = decompose(v, &PdmConfig::default())?;

    println!("{:<16} {:>9} {:>8}", "model", "% correct", "APRE");
    for depth in 1..=decomp.layers.len() {
        let pred = predict_signs(decomp.approximation_through(depth).view(), v);
        let name = format!("{depth}-layer");
        let report = score(pred.view(), v, &name)?;
        println!(
            "{:<16} {:>9.2} {:>8.3}",
            report.model_name,
            report.percent_correct,
            report.apre.unwrap_or(f64::NAN)
        );
    }

    let minority = score(minority_model(v).view(), v, "minority")?;
    println!(
        "{:<16} {:>9.2} {:>8.3}",
        "minority",
        minority.percent_correct,
        minority.apre.unwrap_or(f64::NAN)
    );

    let random = random_model_summary(v, 10, 0)?;
    println!(
        "{:<16} {:>9} {:>8.3}  (min {:.2}, max {:.2} over {} instances)",
        "random",
        "-",
        random.mean_apre.unwrap_or(f64::NAN),
        random.min_percent_correct,
        random.max_percent_correct,
        random.instances
    );
    Ok(())
}
