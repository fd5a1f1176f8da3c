//! Artifact serialization: the versioned decomposition document and the
//! CSV tables the command line emits.
//!
//! Everything here is deterministic for a fixed input: no timestamps,
//! no map iteration order, full float precision everywhere except
//! the yea-percentage table, which rounds to integer percents.

use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::boost::SeparatingVotes;
use crate::engine::{Decomposition, PdmConfig, StopReason};
use crate::error::{PdmError, Result};
use crate::eval::{EvalReport, RandomSummary};
use crate::mds::DimensionEstimate;
use crate::rollcall::VoteMatrix;
use crate::sim::ExperimentSummary;

pub const DECOMPOSITION_SCHEMA: &str = "pdm-decomposition/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigDoc {
    pub sigma: f64,
    pub null_reps: usize,
    pub max_layers: usize,
    pub kmeans_restarts: usize,
    pub row_normalize_embedding: bool,
    pub residual_row_percentile: f64,
    pub seed: u64,
}

impl From<&PdmConfig> for ConfigDoc {
    fn from(c: &PdmConfig) -> Self {
        Self {
            sigma: c.sigma,
            null_reps: c.null_reps,
            max_layers: c.max_layers,
            kmeans_restarts: c.kmeans_restarts,
            row_normalize_embedding: c.row_normalize_embedding,
            residual_row_percentile: c.residual_row_percentile,
            seed: c.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerDoc {
    pub layer: usize,
    pub k0: usize,
    pub l: usize,
    pub null_fiedler_min: f64,
    pub null_reps: usize,
    pub aic_curve: Vec<(usize, f64)>,
    /// Row indices (into the analyzed matrix) that were clustered.
    pub rows: Vec<usize>,
    /// Cluster label per entry of `rows`.
    pub assignments: Vec<usize>,
    /// Source cluster label per motivation.
    pub motivation_clusters: Vec<usize>,
    /// Unit motivation vectors, one per admitted cluster centroid.
    pub motivations: Vec<Vec<f64>>,
    /// n x k weight matrix (rows excluded from the layer are zero).
    pub weights: Vec<Vec<f64>>,
    pub dropped_clusters: Vec<usize>,
    pub dependent_clusters: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionDoc {
    pub schema: String,
    pub n_legislators: usize,
    pub n_votes: usize,
    pub legislator_ids: Vec<String>,
    pub vote_ids: Vec<String>,
    pub stop_reason: StopReason,
    pub config: ConfigDoc,
    pub layers: Vec<LayerDoc>,
    pub residual_frobenius_norm: f64,
    pub residual_max_abs: f64,
}

impl DecompositionDoc {
    pub fn build(v: &VoteMatrix, decomp: &Decomposition, config: &PdmConfig) -> Self {
        let layers = decomp
            .layers
            .iter()
            .map(|layer| LayerDoc {
                layer: layer.layer_index,
                k0: layer.params.k0,
                l: layer.params.l,
                null_fiedler_min: layer.params.null_fiedler_min,
                null_reps: layer.params.null_reps,
                aic_curve: layer.params.aic_curve.clone(),
                rows: layer.rows.clone(),
                assignments: layer.clustering.labels.clone(),
                motivation_clusters: layer
                    .motivations
                    .iter()
                    .map(|m| m.source_cluster)
                    .collect(),
                motivations: layer
                    .motivations
                    .iter()
                    .map(|m| m.vector.to_vec())
                    .collect(),
                weights: layer
                    .weights
                    .rows()
                    .into_iter()
                    .map(|r| r.to_vec())
                    .collect(),
                dropped_clusters: layer.dropped_clusters.clone(),
                dependent_clusters: layer.dependent_clusters.clone(),
            })
            .collect();
        let fro = decomp.residual.iter().map(|x| x * x).sum::<f64>().sqrt();
        let max_abs = decomp.residual.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Self {
            schema: DECOMPOSITION_SCHEMA.to_string(),
            n_legislators: v.n_legislators(),
            n_votes: v.n_votes(),
            legislator_ids: v.legislators().iter().map(|l| l.id.clone()).collect(),
            vote_ids: v.vote_ids().to_vec(),
            stop_reason: decomp.stop_reason,
            config: config.into(),
            layers,
            residual_frobenius_norm: fro,
            residual_max_abs: max_abs,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| PdmError::Other(e.to_string()))
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let doc: Self =
            serde_json::from_str(json).map_err(|e| PdmError::Other(format!("bad decomposition document: {e}")))?;
        if doc.schema != DECOMPOSITION_SCHEMA {
            return Err(PdmError::Other(format!(
                "unsupported schema {:?} (expected {DECOMPOSITION_SCHEMA})",
                doc.schema
            )));
        }
        Ok(doc)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        Ok(std::fs::write(path, self.to_json()? + "\n")?)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Check that a matrix matches the document's shape and ids.
    pub fn check_matches(&self, v: &VoteMatrix) -> Result<()> {
        if v.n_legislators() != self.n_legislators || v.n_votes() != self.n_votes {
            return Err(PdmError::Shape(format!(
                "matrix is {}x{} but the decomposition was built on {}x{} \
                 (was the same minority filter applied?)",
                v.n_legislators(),
                v.n_votes(),
                self.n_legislators,
                self.n_votes
            )));
        }
        if v.vote_ids() != self.vote_ids.as_slice() {
            return Err(PdmError::Shape(
                "vote ids differ from the decomposition document".to_string(),
            ));
        }
        Ok(())
    }

    /// Rebuild each layer's approximation matrix as weights x
    /// motivations.
    pub fn layer_approximations(&self) -> Vec<Array2<f64>> {
        self.layers
            .iter()
            .map(|layer| {
                let k = layer.motivations.len();
                let mut mots = Array2::zeros((k, self.n_votes));
                for (r, m) in layer.motivations.iter().enumerate() {
                    mots.row_mut(r).assign(&Array1::from_vec(m.clone()));
                }
                let mut weights = Array2::zeros((self.n_legislators, k));
                for (i, row) in layer.weights.iter().enumerate() {
                    for (j, &w) in row.iter().enumerate() {
                        weights[[i, j]] = w;
                    }
                }
                weights.dot(&mots)
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------------

fn fmt_float(x: f64) -> String {
    // Full round-trip precision, stable across runs.
    format!("{x:?}")
}

/// dims.csv: one row per series with the estimate and the stress scan.
pub fn write_dims_csv<W: Write>(
    writer: W,
    series: &[(&str, &DimensionEstimate)],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["series".to_string(), "estimated_dim".to_string()];
    for d in 1..=10 {
        header.push(format!("stress_d{d}"));
    }
    wtr.write_record(&header)?;
    for (name, est) in series {
        let mut record = vec![(*name).to_string(), est.estimate.to_string()];
        for &(_, s) in &est.stress_by_dim {
            record.push(fmt_float(s));
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Table of yea percentages: votes as rows, clusters as columns.
pub fn write_separating_votes_csv<W: Write>(writer: W, sep: &SeparatingVotes) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let k = sep.cluster_sizes.len();
    let mut header = vec!["vote_id".to_string()];
    for c in 0..k {
        header.push(format!("cluster_{c}"));
    }
    wtr.write_record(&header)?;
    for row in &sep.yea_table {
        let mut record = vec![row.vote_id.clone()];
        for pct in &row.pct_by_cluster {
            record.push(pct.map(|p| p.to_string()).unwrap_or_default());
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// One evaluation table row.
#[derive(Debug, Clone)]
pub struct EvalRow {
    pub model: String,
    pub percent_correct: f64,
    pub apre: Option<f64>,
    pub percent_correct_min: Option<f64>,
    pub percent_correct_max: Option<f64>,
}

impl EvalRow {
    pub fn from_report(report: &EvalReport) -> Self {
        Self {
            model: report.model_name.clone(),
            percent_correct: report.percent_correct,
            apre: report.apre,
            percent_correct_min: None,
            percent_correct_max: None,
        }
    }

    pub fn from_random_summary(summary: &RandomSummary) -> Self {
        Self {
            model: "random".to_string(),
            percent_correct: (summary.min_percent_correct + summary.max_percent_correct) / 2.0,
            apre: summary.mean_apre,
            percent_correct_min: Some(summary.min_percent_correct),
            percent_correct_max: Some(summary.max_percent_correct),
        }
    }
}

/// eval.csv: models by metrics.
pub fn write_eval_csv<W: Write>(writer: W, rows: &[EvalRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "model",
        "percent_correct",
        "apre",
        "percent_correct_min",
        "percent_correct_max",
    ])?;
    for row in rows {
        wtr.write_record([
            row.model.clone(),
            fmt_float(row.percent_correct),
            row.apre.map(fmt_float).unwrap_or_default(),
            row.percent_correct_min.map(fmt_float).unwrap_or_default(),
            row.percent_correct_max.map(fmt_float).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Plot-ready coordinates: one row per clustered legislator.
pub fn write_plot_csv<W: Write>(
    writer: W,
    v: &VoteMatrix,
    rows: &[usize],
    labels: &[usize],
    coords: &Array2<f64>,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["id", "party", "region", "cluster", "x", "y"])?;
    for (idx, &row) in rows.iter().enumerate() {
        let leg = &v.legislators()[row];
        wtr.write_record([
            leg.id.clone(),
            leg.party.clone(),
            leg.region.clone().unwrap_or_default(),
            labels[idx].to_string(),
            fmt_float(coords[[idx, 0]]),
            fmt_float(if coords.ncols() > 1 { coords[[idx, 1]] } else { 0.0 }),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// experiment.csv: one row per (alpha, trial).
pub fn write_experiment_csv<W: Write>(writer: W, summary: &ExperimentSummary) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["alpha", "trial", "correlation_abs", "within_party_variance"])?;
    for r in &summary.records {
        wtr.write_record([
            fmt_float(r.alpha),
            r.trial.to_string(),
            fmt_float(r.corr_abs),
            fmt_float(r.within_party_variance),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// fiedler_plot.csv: per-member Fiedler values for the kept alphas.
pub fn write_fiedler_plot_csv<W: Write>(writer: W, summary: &ExperimentSummary) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["alpha", "member", "fiedler", "party", "loyalty"])?;
    for s in &summary.fiedler_samples {
        wtr.write_record([
            fmt_float(s.alpha),
            s.member.to_string(),
            fmt_float(s.fiedler),
            s.party.to_string(),
            fmt_float(s.loyalty),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Debug dump of the spectral pipeline matrices.
pub fn write_matrix_csv<W: Write>(writer: W, matrix: &Array2<f64>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in matrix.rows() {
        let record: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{decompose, planted_two_factor, PdmConfig};

    #[test]
    fn decomposition_document_round_trip() {
        let (v, _, _) = planted_two_factor(16, 60, 4, 0.0, 2);
        let config = PdmConfig::default();
        let decomp = decompose(&v, &config).unwrap();
        let doc = DecompositionDoc::build(&v, &decomp, &config);
        let json = doc.to_json().unwrap();
        let back = DecompositionDoc::from_json(&json).unwrap();
        assert_eq!(back.layers.len(), doc.layers.len());
        assert_eq!(back.vote_ids, doc.vote_ids);
        back.check_matches(&v).unwrap();

        // Rebuilt approximations match the engine's to machine
        // precision.
        let rebuilt = back.layer_approximations();
        for (a, layer) in rebuilt.iter().zip(decomp.layers.iter()) {
            let max_err = (a - &layer.approximation)
                .iter()
                .fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(max_err < 1e-10, "max err {max_err}");
        }
    }

    #[test]
    fn schema_mismatch_rejected() {
        let json = r#"{"schema":"pdm-decomposition/999","n_legislators":2,"n_votes":1,
            "legislator_ids":["a","b"],"vote_ids":["v1"],"stop_reason":"max_layers",
            "config":{"sigma":1.0,"null_reps":25,"max_layers":2,"kmeans_restarts":20,
            "row_normalize_embedding":false,"residual_row_percentile":0.05,"seed":0},
            "layers":[],"residual_frobenius_norm":0.0,"residual_max_abs":0.0}"#;
        assert!(DecompositionDoc::from_json(json).is_err());
    }
}
