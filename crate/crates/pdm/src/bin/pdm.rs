//! Command-line front end: `analyze` runs the full decomposition
//! pipeline on roll call data, `simulate` sweeps the synthetic
//! party-loyalty experiment, `eval` re-scores a stored decomposition.
//! All outputs are deterministic for a fixed seed and input.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::Array2;

use pdm::boost::BoostConfig;
use pdm::cluster::InfoCriterion;
use pdm::engine::{decompose, PdmConfig};
use pdm::error::{PdmError, Result};
use pdm::eval::{minority_model, predict_signs, random_model_summary, score};
use pdm::mds::{estimate_dimension, pairwise_distances, DimensionEstimate};
use pdm::report::{
    write_dims_csv, write_eval_csv, write_experiment_csv, write_fiedler_plot_csv,
    write_matrix_csv, write_plot_csv, write_separating_votes_csv, DecompositionDoc, EvalRow,
};
use pdm::rollcall::{filter_minority, load_voteview, load_wide_csv, VoteMatrix};
use pdm::seed::{self, stage};
use pdm::sim::{alpha_grid, run_experiment, SimConfig};
use pdm::spectral::SpectralGraph;

#[derive(Parser)]
#[command(
    name = "pdm",
    version,
    about = "Multiscale partition decoupling of roll call voting data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter, decompose, estimate dimensions, find separating votes,
    /// and score predictions; writes all artifacts to --out
    Analyze(AnalyzeArgs),
    /// Sweep the synthetic party-loyalty experiment over an alpha grid
    Simulate(SimulateArgs),
    /// Re-score a stored decomposition against its vote matrix
    Eval(EvalArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// One row per legislator: id,name,party,region,<vote ids>
    WideCsv,
    /// Two files: members table plus one record per cast vote
    Voteview,
}

#[derive(Args)]
struct InputArgs {
    /// Wide CSV input path (format wide-csv)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Members CSV path (format voteview)
    #[arg(long)]
    members: Option<PathBuf>,
    /// Votes CSV path (format voteview)
    #[arg(long)]
    votes: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::WideCsv)]
    format: Format,
    /// Drop votes whose minority share of the full body is below this
    #[arg(long, default_value_t = 0.025)]
    threshold: f64,
}

impl InputArgs {
    fn load(&self) -> Result<VoteMatrix> {
        let v = match self.format {
            Format::WideCsv => {
                let path = self.input.as_ref().ok_or_else(|| {
                    PdmError::Parameter("--input is required for --format wide-csv".to_string())
                })?;
                load_wide_csv(path)?
            }
            Format::Voteview => {
                let members = self.members.as_ref().ok_or_else(|| {
                    PdmError::Parameter("--members is required for --format voteview".to_string())
                })?;
                let votes = self.votes.as_ref().ok_or_else(|| {
                    PdmError::Parameter("--votes is required for --format voteview".to_string())
                })?;
                load_voteview(members, votes)?
            }
        };
        filter_minority(&v, self.threshold)
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Affinity kernel scale
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Null-model replicates for dimension selection
    #[arg(long = "null-reps", default_value_t = 25)]
    null_reps: usize,
    #[arg(long = "max-layers", default_value_t = 2)]
    max_layers: usize,
    /// AdaBoost rounds per cluster pair
    #[arg(long, default_value_t = 50)]
    rounds: usize,
    /// Votes kept per cluster pair in the separating-vote tables
    #[arg(long = "top-k", default_value_t = 10)]
    top_k: usize,
    #[arg(long, env = "PDM_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory (created if missing)
    #[arg(long)]
    out: PathBuf,
    /// Score with BIC instead of AIC when selecting k0
    #[arg(long)]
    bic: bool,
    /// Row-normalize the spectral embedding before k-means
    #[arg(long = "row-normalize")]
    row_normalize: bool,
    /// Also dump correlation, affinity, Laplacian, and eigenvalue CSVs
    #[arg(long = "dump-spectral")]
    dump_spectral: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Alpha grid as lo:hi:step
    #[arg(long = "alpha-grid", default_value = "1:30:0.3")]
    alpha_grid: String,
    /// Trials per alpha
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Chamber size (half per party)
    #[arg(long, default_value_t = 100)]
    members: usize,
    /// Roll calls per chamber
    #[arg(long, default_value_t = 500)]
    votes: usize,
    #[arg(long, env = "PDM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    /// decomposition.json from a previous analyze run
    #[arg(long)]
    decomposition: PathBuf,
    #[arg(long, env = "PDM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => cmd_analyze(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Eval(args) => cmd_eval(&args),
    };
    if let Err(err) = outcome {
        let doc = serde_json::json!({
            "error": err.to_string(),
            "kind": error_kind(&err),
        });
        eprintln!("{doc}");
        std::process::exit(1);
    }
}

fn error_kind(err: &PdmError) -> &'static str {
    match err {
        PdmError::Io(_) => "io",
        PdmError::Csv(_) => "csv",
        PdmError::BadVoteValue { .. }
        | PdmError::BadCell { .. }
        | PdmError::RaggedRow { .. }
        | PdmError::DuplicateId { .. }
        | PdmError::DuplicateVote { .. }
        | PdmError::UnknownLegislator { .. }
        | PdmError::MissingColumn { .. }
        | PdmError::NoVotes => "input",
        PdmError::AllVotesFiltered { .. } => "filter",
        PdmError::Parameter(_) => "parameter",
        PdmError::Degenerate(_) => "degenerate",
        PdmError::NotSymmetric { .. }
        | PdmError::IllConditioned { .. }
        | PdmError::EigenNoConvergence { .. }
        | PdmError::Shape(_) => "numeric",
        PdmError::Other(_) => "other",
    }
}

/// Cumulative-depth model rows plus the two baselines, with the random
/// model aggregated over 10 seeded instances.
fn evaluation_rows(
    v: &VoteMatrix,
    layer_approximations: &[Array2<f64>],
    seed_value: u64,
) -> Result<Vec<EvalRow>> {
    let mut rows = Vec::new();
    let (n, m) = (v.n_legislators(), v.n_votes());
    let mut cumulative = Array2::<f64>::zeros((n, m));
    for (depth, approx) in layer_approximations.iter().enumerate() {
        cumulative += approx;
        let name = match depth + 1 {
            1 => "pdm_one_layer".to_string(),
            2 => "pdm_two_layer".to_string(),
            k => format!("pdm_{k}_layer"),
        };
        let pred = predict_signs(cumulative.view(), v);
        rows.push(EvalRow::from_report(&score(pred.view(), v, &name)?));
    }
    let minority = minority_model(v);
    rows.push(EvalRow::from_report(&score(minority.view(), v, "minority")?));
    let random = random_model_summary(v, 10, seed::derive(seed_value, stage::RANDOM_MODEL, 0))?;
    rows.push(EvalRow::from_random_summary(&random));
    Ok(rows)
}

fn create_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    create_out_dir(&args.out)?;
    let v = args.input.load()?;

    let config = PdmConfig {
        sigma: args.sigma,
        null_reps: args.null_reps,
        max_layers: args.max_layers,
        gmm: pdm::cluster::GmmSelect {
            criterion: if args.bic {
                InfoCriterion::Bic
            } else {
                InfoCriterion::Aic
            },
            ..Default::default()
        },
        row_normalize_embedding: args.row_normalize,
        seed: args.seed,
        ..PdmConfig::default()
    };
    let decomp = decompose(&v, &config)?;
    let doc = DecompositionDoc::build(&v, &decomp, &config);
    doc.save(args.out.join("decomposition.json"))?;

    if args.dump_spectral {
        let graph = SpectralGraph::build(v.to_real().view(), args.sigma)?;
        write_matrix_csv(
            std::fs::File::create(args.out.join("spectral_correlation.csv"))?,
            &graph.corr,
        )?;
        write_matrix_csv(
            std::fs::File::create(args.out.join("spectral_affinity.csv"))?,
            &graph.affinity,
        )?;
        write_matrix_csv(
            std::fs::File::create(args.out.join("spectral_laplacian.csv"))?,
            &graph.laplacian,
        )?;
        let eigvals = Array2::from_shape_vec(
            (1, graph.eigenvalues.len()),
            graph.eigenvalues.to_vec(),
        )
        .expect("row vector");
        write_matrix_csv(
            std::fs::File::create(args.out.join("spectral_eigenvalues.csv"))?,
            &eigvals,
        )?;
    }

    // Dimension estimates and plot coordinates per layer, plus the
    // combined two-layer series.
    let mut dims: Vec<(String, DimensionEstimate)> = Vec::new();
    for layer in &decomp.layers {
        let sub = take_rows(&layer.approximation, &layer.rows);
        let est = estimate_dimension(
            pairwise_distances(sub.view()).view(),
            seed::derive(args.seed, stage::MDS, layer.layer_index as u64),
        )?;
        write_plot_csv(
            std::fs::File::create(
                args.out
                    .join(format!("plot_layer{}.csv", layer.layer_index)),
            )?,
            &v,
            &layer.rows,
            &layer.clustering.labels,
            &est.coords_2d,
        )?;
        dims.push((format!("layer{}", layer.layer_index), est));
    }
    if decomp.layers.len() >= 2 {
        let combined = decomp.approximation_through(2);
        let layer1 = &decomp.layers[0];
        let sub = take_rows(&combined, &layer1.rows);
        let est = estimate_dimension(
            pairwise_distances(sub.view()).view(),
            seed::derive(args.seed, stage::MDS, 100),
        )?;
        write_plot_csv(
            std::fs::File::create(args.out.join("plot_combined.csv"))?,
            &v,
            &layer1.rows,
            &layer1.clustering.labels,
            &est.coords_2d,
        )?;
        dims.push(("combined".to_string(), est));
    }
    let series: Vec<(&str, &DimensionEstimate)> =
        dims.iter().map(|(name, est)| (name.as_str(), est)).collect();
    write_dims_csv(std::fs::File::create(args.out.join("dims.csv"))?, &series)?;

    // Separating votes per layer (layer 1 keeps the unsuffixed name).
    let boost_config = BoostConfig {
        rounds: args.rounds,
        top_k: args.top_k,
    };
    for layer in &decomp.layers {
        let members: Vec<Vec<usize>> = layer
            .clustering
            .members()
            .into_iter()
            .map(|ms| ms.into_iter().map(|i| layer.rows[i]).collect())
            .collect();
        if members.iter().filter(|m| !m.is_empty()).count() < 2 {
            continue;
        }
        let sep = pdm::boost::explain_clusters(&v, &members, &boost_config)?;
        let name = if layer.layer_index == 1 {
            "separating_votes.csv".to_string()
        } else {
            format!("separating_votes_layer{}.csv", layer.layer_index)
        };
        write_separating_votes_csv(std::fs::File::create(args.out.join(name))?, &sep)?;
        let json_name = if layer.layer_index == 1 {
            "separating_votes.json".to_string()
        } else {
            format!("separating_votes_layer{}.json", layer.layer_index)
        };
        std::fs::write(
            args.out.join(json_name),
            serde_json::to_string_pretty(&sep).map_err(|e| PdmError::Other(e.to_string()))? + "\n",
        )?;
    }

    let approximations: Vec<Array2<f64>> = decomp
        .layers
        .iter()
        .map(|layer| layer.approximation.clone())
        .collect();
    let rows = evaluation_rows(&v, &approximations, args.seed)?;
    write_eval_csv(std::fs::File::create(args.out.join("eval.csv"))?, &rows)?;

    let manifest = serde_json::json!({
        "schema": "pdm-run/1",
        "command": "analyze",
        "input": args.input.input,
        "members": args.input.members,
        "votes": args.input.votes,
        "format": match args.input.format { Format::WideCsv => "wide-csv", Format::Voteview => "voteview" },
        "threshold": args.input.threshold,
        "sigma": args.sigma,
        "null_reps": args.null_reps,
        "max_layers": args.max_layers,
        "rounds": args.rounds,
        "top_k": args.top_k,
        "seed": args.seed,
        "criterion": if args.bic { "bic" } else { "aic" },
        "n_legislators": v.n_legislators(),
        "n_votes_after_filter": v.n_votes(),
        "layers": decomp.layers.len(),
        "stop_reason": decomp.stop_reason,
    });
    std::fs::write(
        args.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).map_err(|e| PdmError::Other(e.to_string()))?
            + "\n",
    )?;
    Ok(())
}

fn take_rows(data: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), data.ncols()));
    for (dst, &src) in rows.iter().enumerate() {
        out.row_mut(dst).assign(&data.row(src));
    }
    out
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(PdmError::Parameter(format!(
            "alpha grid must be lo:hi:step, got {text:?}"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| PdmError::Parameter(format!("bad grid component {p:?}")))
        })
        .collect::<Result<_>>()?;
    alpha_grid(nums[0], nums[1], nums[2])
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    create_out_dir(&args.out)?;
    let alphas = parse_grid(&args.alpha_grid)?;
    let base = SimConfig {
        n_members: args.members,
        n_votes: args.votes,
        ..SimConfig::default()
    };
    let summary = run_experiment(&base, &alphas, args.trials, args.seed)?;
    write_experiment_csv(
        std::fs::File::create(args.out.join("experiment.csv"))?,
        &summary,
    )?;
    write_fiedler_plot_csv(
        std::fs::File::create(args.out.join("fiedler_plot.csv"))?,
        &summary,
    )?;
    let stats = serde_json::json!({
        "schema": "pdm-simulation/1",
        "alpha_grid": args.alpha_grid,
        "trials": args.trials,
        "members": args.members,
        "votes": args.votes,
        "seed": args.seed,
        "mean_abs_corr": summary.mean_abs_corr,
        "var_abs_corr": summary.var_abs_corr,
        "per_alpha_mean": summary.per_alpha_mean,
        "per_alpha_within_var": summary.per_alpha_within_var,
    });
    std::fs::write(
        args.out.join("stats.json"),
        serde_json::to_string_pretty(&stats).map_err(|e| PdmError::Other(e.to_string()))? + "\n",
    )?;
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    create_out_dir(&args.out)?;
    let v = args.input.load()?;
    let doc = DecompositionDoc::load(&args.decomposition)?;
    doc.check_matches(&v)?;
    let approximations = doc.layer_approximations();
    let rows = evaluation_rows(&v, &approximations, args.seed)?;
    write_eval_csv(std::fs::File::create(args.out.join("eval.csv"))?, &rows)?;
    Ok(())
}
