//! The layer loop: cluster, build motivations, project, subtract,
//! repeat until the residual looks like shuffled noise.
//!
//! Each layer turns a clustering of the current data matrix into a set
//! of unit "motivation" vectors (normalized cluster centroids), solves a
//! joint least-squares projection of every row onto their span, and
//! passes the residual to the next layer. The decomposition satisfies
//! `V = A(1) + ... + A(L) + R` entrywise and every layer's residual is
//! orthogonal to that layer's motivation span.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::cluster::{
    cluster_embedding, permute_columns, select_k0, select_l, ClusterParams, Clustering, GmmSelect,
};
use crate::error::{PdmError, Result};
use crate::rollcall::VoteMatrix;
use crate::seed::{self, stage};
use crate::spectral::{symmetric_eigen, SpectralGraph};
use crate::EPS_NUM;

/// Tuning knobs for [`decompose`]. Defaults: sigma 1, 25 null
/// replicates, at most two layers.
#[derive(Debug, Clone)]
pub struct PdmConfig {
    pub sigma: f64,
    pub null_reps: usize,
    pub max_layers: usize,
    pub gmm: GmmSelect,
    pub kmeans_restarts: usize,
    /// Row-normalize the spectral embedding before k-means (off by
    /// default; the embedding uses raw eigenvector coordinates).
    pub row_normalize_embedding: bool,
    /// Rows of a residual whose norm falls below this percentile of
    /// their column-shuffled null norms are excluded from the next
    /// layer's clustering.
    pub residual_row_percentile: f64,
    pub seed: u64,
}

impl Default for PdmConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0,
            null_reps: 25,
            max_layers: 2,
            gmm: GmmSelect::default(),
            kmeans_restarts: 20,
            row_normalize_embedding: false,
            residual_row_percentile: 0.05,
            seed: 0,
        }
    }
}

/// A unit vector of vote space: the normalized mean voting profile of
/// one cluster, the "ideal voter" for that cluster.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Motivation {
    pub vector: Array1<f64>,
    pub source_cluster: usize,
    pub layer: usize,
}

/// One decomposition layer.
#[derive(Debug, Clone)]
pub struct LayerModel {
    /// 1-based.
    pub layer_index: usize,
    pub params: ClusterParams,
    pub clustering: Clustering,
    /// Original row indices of the clustered legislators, aligned with
    /// `clustering.labels`.
    pub rows: Vec<usize>,
    pub motivations: Vec<Motivation>,
    /// n x k weights; rows excluded from this layer are zero.
    pub weights: Array2<f64>,
    /// n x m rank-<=k approximation added by this layer.
    pub approximation: Array2<f64>,
    /// Cluster labels whose centroid cancelled to zero and yielded no
    /// motivation.
    pub dropped_clusters: Vec<usize>,
    /// Cluster labels whose motivation was linearly dependent on earlier
    /// ones and carries no weight column of its own.
    pub dependent_clusters: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The residual's correlation structure is indistinguishable from
    /// column-shuffled noise.
    ResidualRandom,
    /// The configured layer cap was reached with structure remaining.
    MaxLayers,
    /// Parameter selection found no significant dimensions.
    NoSignificantDims,
}

/// Ordered layers plus the final residual.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub layers: Vec<LayerModel>,
    pub residual: Array2<f64>,
    pub stop_reason: StopReason,
}

impl Decomposition {
    /// Sum of the first `layer_count` layer approximations.
    pub fn approximation_through(&self, layer_count: usize) -> Array2<f64> {
        let count = layer_count.min(self.layers.len());
        let (n, m) = self.residual.dim();
        let mut sum = Array2::zeros((n, m));
        for layer in &self.layers[..count] {
            sum += &layer.approximation;
        }
        sum
    }

    /// Check the telescoping identity and per-layer residual
    /// orthogonality against the source matrix.
    pub fn verify(&self, v: &VoteMatrix) -> Result<()> {
        let data = v.to_real();
        let mut reconstructed = self.residual.clone();
        for layer in &self.layers {
            reconstructed += &layer.approximation;
        }
        let max_err = (&reconstructed - &data)
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        if max_err > EPS_NUM {
            return Err(PdmError::Other(format!(
                "telescoping identity violated: max entry error {max_err:.3e}"
            )));
        }

        // Residual after layer t is data minus approximations 1..=t;
        // the rows layer t projected must be orthogonal to its
        // motivations. Rows excluded from a layer are untouched by it
        // and carry no orthogonality claim.
        let mut residual_after = data;
        for layer in &self.layers {
            residual_after -= &layer.approximation;
            for motivation in &layer.motivations {
                let worst = layer
                    .rows
                    .iter()
                    .map(|&i| residual_after.row(i).dot(&motivation.vector).abs())
                    .fold(0.0f64, f64::max);
                if worst > EPS_NUM {
                    return Err(PdmError::Other(format!(
                        "layer {} residual not orthogonal to motivation span ({worst:.3e})",
                        layer.layer_index
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Normalized cluster centroids of the current-layer data rows.
///
/// Clusters whose members cancel to a zero centroid yield no motivation
/// and are reported in the second return value.
pub fn motivations_from_clusters(
    data: ArrayView2<'_, f64>,
    members_per_cluster: &[Vec<usize>],
    layer: usize,
) -> (Vec<Motivation>, Vec<usize>) {
    let m = data.ncols();
    let mut motivations = Vec::new();
    let mut dropped = Vec::new();
    for (label, members) in members_per_cluster.iter().enumerate() {
        if members.is_empty() {
            dropped.push(label);
            continue;
        }
        let mut centroid = Array1::<f64>::zeros(m);
        for &i in members {
            centroid += &data.row(i);
        }
        centroid.mapv_inplace(|x| x / members.len() as f64);
        let norm = centroid.dot(&centroid).sqrt();
        if norm <= 1e-12 {
            dropped.push(label);
            continue;
        }
        centroid.mapv_inplace(|x| x / norm);
        motivations.push(Motivation {
            vector: centroid,
            source_cluster: label,
            layer,
        });
    }
    (motivations, dropped)
}

/// Joint least-squares projector onto a motivation span.
///
/// The Gram matrix is factored once per layer; a condition number above
/// 1e8 (near-dependent motivations) is rejected as a poor parameter
/// choice rather than solved through.
#[derive(Debug)]
pub struct MotivationBasis {
    /// k x m, motivation vectors as rows.
    mat: Array2<f64>,
    gram: Array2<f64>,
    gram_eigvals: Array1<f64>,
    gram_eigvecs: Array2<f64>,
    pub condition: f64,
}

const GRAM_CONDITION_LIMIT: f64 = 1e8;

/// Minimum out-of-span component (for unit vectors) a motivation must
/// have to be admitted alongside the ones before it. Keeps the Gram
/// condition number inside `GRAM_CONDITION_LIMIT`.
const ADMISSION_NORM: f64 = 1e-4;

/// Greedily admit motivations that extend the span of the already
/// admitted ones; dependent vectors (e.g. the exactly antipodal
/// centroids a perfectly polarized chamber produces) are skipped and
/// their cluster labels returned. The admitted span equals the full
/// span, so projections are unchanged.
pub fn admit_independent(motivations: Vec<Motivation>) -> (Vec<Motivation>, Vec<usize>) {
    let mut admitted: Vec<Motivation> = Vec::new();
    let mut ortho: Vec<Array1<f64>> = Vec::new();
    let mut dependent = Vec::new();
    for motivation in motivations {
        let mut r = motivation.vector.clone();
        for q in &ortho {
            let c = q.dot(&r);
            r -= &q.mapv(|x| x * c);
        }
        let norm = r.dot(&r).sqrt();
        if norm >= ADMISSION_NORM {
            ortho.push(r.mapv(|x| x / norm));
            admitted.push(motivation);
        } else {
            dependent.push(motivation.source_cluster);
        }
    }
    (admitted, dependent)
}

impl MotivationBasis {
    pub fn new(motivations: &[Motivation]) -> Result<Self> {
        if motivations.is_empty() {
            return Err(PdmError::Degenerate(
                "no motivations to project onto".to_string(),
            ));
        }
        let k = motivations.len();
        let m = motivations[0].vector.len();
        let mut mat = Array2::zeros((k, m));
        for (i, motivation) in motivations.iter().enumerate() {
            mat.row_mut(i).assign(&motivation.vector);
        }
        let gram = mat.dot(&mat.t());
        let (vals, vecs) = symmetric_eigen(&gram)?;
        let min = vals[0];
        let max = vals[k - 1];
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !(condition.is_finite() && condition <= GRAM_CONDITION_LIMIT) {
            return Err(PdmError::IllConditioned { cond: condition });
        }
        Ok(Self {
            mat,
            gram,
            gram_eigvals: vals,
            gram_eigvecs: vecs,
            condition,
        })
    }

    pub fn k(&self) -> usize {
        self.mat.nrows()
    }

    fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        let mut y = self.gram_eigvecs.t().dot(b);
        for (i, v) in y.iter_mut().enumerate() {
            *v /= self.gram_eigvals[i];
        }
        self.gram_eigvecs.dot(&y)
    }

    /// Least-squares weights and the in-span approximation of one row.
    /// The returned residual component is orthogonal to every
    /// motivation within the crate tolerance.
    pub fn project(&self, row: ArrayView1<'_, f64>) -> (Array1<f64>, Array1<f64>) {
        let b = self.mat.dot(&row);
        let mut alpha = self.solve(&b);
        // One refinement step keeps orthogonality at machine level even
        // for moderately conditioned Gram matrices.
        let r = &b - &self.gram.dot(&alpha);
        alpha += &self.solve(&r);
        let approx = self.mat.t().dot(&alpha);
        (alpha, approx)
    }
}

/// True when the residual carries no structure distinguishable from
/// column-shuffled noise: its significant-dimension count is zero.
///
/// A numerically zero residual, or one with too little variation left
/// to build a graph from, counts as random.
pub fn residual_is_random(
    residual: ArrayView2<'_, f64>,
    sigma: f64,
    null_reps: usize,
    seed_value: u64,
) -> Result<bool> {
    let max_abs = residual.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max_abs <= 1e-12 {
        return Ok(true);
    }
    let graph = match SpectralGraph::build(residual, sigma) {
        Ok(graph) => graph,
        Err(PdmError::Degenerate(_)) => return Ok(true),
        Err(e) => return Err(e),
    };
    let active = take_rows(residual, &graph.active_rows);
    let (l, _) = select_l(
        &graph.eigenvalues,
        active.view(),
        sigma,
        null_reps,
        seed_value,
    )?;
    Ok(l == 0)
}

fn take_rows(data: ArrayView2<'_, f64>, rows: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), data.ncols()));
    for (dst, &src) in rows.iter().enumerate() {
        out.row_mut(dst).assign(&data.row(src));
    }
    out
}

/// Empirical quantile with linear interpolation.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Rows whose residual norm clears the per-row percentile of
/// column-shuffled null norms. Rows that fall below carry no signal
/// beyond what reshuffling produces and are excluded from the next
/// layer's clustering.
fn residual_rows_to_keep(
    residual: ArrayView2<'_, f64>,
    percentile: f64,
    null_reps: usize,
    seed_value: u64,
) -> Vec<usize> {
    let n = residual.nrows();
    let mut null_norms = vec![Vec::with_capacity(null_reps); n];
    for rep in 0..null_reps {
        let mut rng = seed::rng(seed_value, stage::ROW_FILTER, rep as u64);
        let permuted = permute_columns(residual, &mut rng);
        for (i, norms) in null_norms.iter_mut().enumerate() {
            let row = permuted.row(i);
            norms.push(row.dot(&row).sqrt());
        }
    }
    (0..n)
        .filter(|&i| {
            let mut sorted = null_norms[i].clone();
            sorted.sort_by(f64::total_cmp);
            let cutoff = quantile(&sorted, percentile);
            let row = residual.row(i);
            row.dot(&row).sqrt() >= cutoff
        })
        .collect()
}

/// Run the full multiscale decomposition of a (filtered) vote matrix.
///
/// Layer 1 is built on the raw matrix; each later layer on the running
/// residual, with statistically null rows excluded from clustering and
/// given zero weights. The loop stops when the residual is
/// indistinguishable from noise, when selection finds no significant
/// dimension, or at `max_layers`; `stop_reason` records which.
pub fn decompose(v: &VoteMatrix, config: &PdmConfig) -> Result<Decomposition> {
    if config.max_layers == 0 {
        return Err(PdmError::Parameter("max_layers must be >= 1".to_string()));
    }
    let n = v.n_legislators();
    let m = v.n_votes();
    let mut current = v.to_real();
    let mut layers: Vec<LayerModel> = Vec::new();
    let mut stop = None;

    for layer_index in 1..=config.max_layers {
        let layer_seed = seed::derive(config.seed, stage::LAYER, layer_index as u64);

        let candidates: Vec<usize> = if layer_index == 1 {
            (0..n).collect()
        } else {
            residual_rows_to_keep(
                current.view(),
                config.residual_row_percentile,
                config.null_reps,
                seed::derive(layer_seed, stage::ROW_FILTER, 0),
            )
        };
        if candidates.len() < 4 {
            if layer_index == 1 {
                return Err(PdmError::Degenerate(format!(
                    "need at least 4 legislators to decompose, got {}",
                    candidates.len()
                )));
            }
            stop = Some(StopReason::NoSignificantDims);
            break;
        }

        let candidate_data = take_rows(current.view(), &candidates);
        let graph = match SpectralGraph::build(candidate_data.view(), config.sigma) {
            Ok(graph) => graph,
            Err(PdmError::Degenerate(msg)) => {
                if layer_index == 1 {
                    return Err(PdmError::Degenerate(msg));
                }
                stop = Some(StopReason::NoSignificantDims);
                break;
            }
            Err(e) => return Err(e),
        };
        let rows: Vec<usize> = graph.active_rows.iter().map(|&i| candidates[i]).collect();
        if rows.len() < 4 {
            if layer_index == 1 {
                return Err(PdmError::Degenerate(
                    "fewer than 4 legislators with usable vote variation".to_string(),
                ));
            }
            stop = Some(StopReason::NoSignificantDims);
            break;
        }
        let active_data = take_rows(current.view(), &rows);

        let (l, null_fiedler_min) = select_l(
            &graph.eigenvalues,
            active_data.view(),
            config.sigma,
            config.null_reps,
            seed::derive(layer_seed, stage::NULL_MODEL, 0),
        )?;
        if l == 0 {
            stop = Some(StopReason::NoSignificantDims);
            break;
        }
        let embed_dim = l.min(rows.len() - 1);

        let (k0, aic_curve) = select_k0(
            graph.fiedler_vector(),
            &config.gmm,
            seed::derive(layer_seed, stage::GMM, 0),
        )?;

        let clustering = cluster_embedding(
            &graph,
            embed_dim,
            k0.min(rows.len()),
            config.kmeans_restarts,
            config.row_normalize_embedding,
            seed::derive(layer_seed, stage::KMEANS, 0),
        )?;

        // Motivations come from the current-layer data rows of each
        // cluster's members, indexed back to the full matrix.
        let members_abs: Vec<Vec<usize>> = clustering
            .members()
            .into_iter()
            .map(|members| members.into_iter().map(|i| rows[i]).collect())
            .collect();
        let (raw_motivations, dropped_clusters) =
            motivations_from_clusters(current.view(), &members_abs, layer_index);
        if raw_motivations.is_empty() {
            stop = Some(StopReason::NoSignificantDims);
            break;
        }
        let (motivations, dependent_clusters) = admit_independent(raw_motivations);

        let basis = MotivationBasis::new(&motivations)?;
        let mut weights = Array2::zeros((n, basis.k()));
        for &i in &rows {
            let (alpha, _) = basis.project(current.row(i));
            weights.row_mut(i).assign(&alpha);
        }
        // Materialize the approximation as weights x motivations: the
        // layer's defining identity, and the same product a stored
        // document reproduces bit-for-bit.
        let mut mot_mat = Array2::zeros((basis.k(), m));
        for (r, motivation) in motivations.iter().enumerate() {
            mot_mat.row_mut(r).assign(&motivation.vector);
        }
        let approximation = weights.dot(&mot_mat);
        current -= &approximation;

        layers.push(LayerModel {
            layer_index,
            params: ClusterParams {
                k0,
                l,
                aic_curve,
                null_fiedler_min,
                null_reps: config.null_reps,
            },
            clustering,
            rows,
            motivations,
            weights,
            approximation,
            dropped_clusters,
            dependent_clusters,
        });

        // The stopping test runs even at the layer cap so the recorded
        // reason is truthful.
        let random = residual_is_random(
            current.view(),
            config.sigma,
            config.null_reps,
            seed::derive(layer_seed, stage::RESIDUAL_TEST, 0),
        )?;
        if random {
            stop = Some(StopReason::ResidualRandom);
            break;
        }
        if layer_index == config.max_layers {
            stop = Some(StopReason::MaxLayers);
        }
    }

    Ok(Decomposition {
        layers,
        residual: current,
        stop_reason: stop.unwrap_or(StopReason::NoSignificantDims),
    })
}

/// Synthetic two-factor fixture: a dominant, crisp party-line block of
/// columns plus a weaker block split along planted regions that cut
/// across party. Regional votes carry flip noise (`region_flip`); the
/// smeared regional lobes make the exact party split strictly better
/// for layer-1 k-means, while the regional partition stays recoverable
/// from the residual at layer 2.
///
/// Returns the matrix, the party labels, and the region labels.
pub fn planted_two_factor(
    n_members: usize,
    party_cols: usize,
    region_cols: usize,
    region_flip: f64,
    seed_value: u64,
) -> (VoteMatrix, Vec<usize>, Vec<usize>) {
    use crate::rollcall::Legislator;
    use rand::Rng;

    assert!(n_members >= 8 && n_members.is_multiple_of(4), "need a multiple of 4");
    let quarter = n_members / 4;
    let party: Vec<usize> = (0..n_members)
        .map(|i| usize::from(i >= n_members / 2))
        .collect();
    // Regions interleave so each party contains both regions equally.
    let region: Vec<usize> = (0..n_members).map(|i| (i / quarter) % 2).collect();

    let m = party_cols + region_cols;
    let mut rng = seed::rng(seed_value, 0x7F, 0);
    let mut values = Array2::<i8>::zeros((n_members, m));
    for j in 0..m {
        let line: i8 = if rng.random::<bool>() { 1 } else { -1 };
        for i in 0..n_members {
            let (side, flip) = if j < party_cols {
                (party[i], false)
            } else {
                (region[i], rng.random::<f64>() < region_flip)
            };
            let vote = if side == 0 { line } else { -line };
            values[[i, j]] = if flip { -vote } else { vote };
        }
    }
    let legislators = (0..n_members)
        .map(|i| Legislator {
            id: format!("m{i:03}"),
            name: format!("Member {i:03}"),
            party: if party[i] == 0 { "A" } else { "B" }.to_string(),
            region: Some(if region[i] == 0 { "north" } else { "south" }.to_string()),
        })
        .collect();
    let vote_ids = (0..m).map(|j| format!("v{:03}", j + 1)).collect();
    let v = VoteMatrix::new(legislators, vote_ids, values).expect("valid fixture");
    (v, party, region)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::adjusted_rand_index;
    use ndarray::array;
    use rand::Rng;

    fn motivation(vector: Array1<f64>) -> Motivation {
        Motivation {
            vector,
            source_cluster: 0,
            layer: 1,
        }
    }

    #[test]
    fn motivations_mean_of_equal_rows() {
        let data = array![[1.0, 1.0, -1.0], [1.0, 1.0, -1.0]];
        let (mots, dropped) = motivations_from_clusters(data.view(), &[vec![0, 1]], 1);
        assert!(dropped.is_empty());
        let s3 = 3.0f64.sqrt();
        let want = array![1.0 / s3, 1.0 / s3, -1.0 / s3];
        for (a, b) in mots[0].vector.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn motivations_mixed_cluster() {
        let data = array![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let (mots, _) = motivations_from_clusters(data.view(), &[vec![0, 1]], 1);
        let s2 = 2.0f64.sqrt();
        let want = array![1.0 / s2, 1.0 / s2, 0.0];
        for (a, b) in mots[0].vector.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn motivations_cancelling_cluster_dropped() {
        let data = array![[1.0, 0.0], [-1.0, 0.0]];
        let (mots, dropped) = motivations_from_clusters(data.view(), &[vec![0, 1]], 1);
        assert!(mots.is_empty());
        assert_eq!(dropped, vec![0]);
    }

    #[test]
    fn project_in_span() {
        let m1 = motivation(array![1.0, 0.0, 0.0]);
        let basis = MotivationBasis::new(&[m1]).unwrap();
        let row = array![2.0, 0.0, 0.0];
        let (alpha, approx) = basis.project(row.view());
        assert!((alpha[0] - 2.0).abs() < 1e-12);
        for (a, b) in approx.iter().zip(row.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn project_orthogonal_row() {
        let m1 = motivation(array![1.0, 0.0, 0.0]);
        let basis = MotivationBasis::new(&[m1]).unwrap();
        let row = array![0.0, 3.0, -4.0];
        let (alpha, approx) = basis.project(row.view());
        assert!(alpha[0].abs() < 1e-12);
        assert!(approx.iter().all(|&x| x.abs() < 1e-12));
    }

    #[test]
    fn project_orthonormal_pair_hand_values() {
        let m1 = motivation(array![1.0, 0.0]);
        let m2 = motivation(array![0.0, 1.0]);
        let basis = MotivationBasis::new(&[m1, m2]).unwrap();
        let row = array![3.0, -4.0];
        let (alpha, _) = basis.project(row.view());
        assert!((alpha[0] - 3.0).abs() < 1e-12);
        assert!((alpha[1] + 4.0).abs() < 1e-12);
    }

    #[test]
    fn project_matches_normal_equations_oracle() {
        // Non-orthogonal pair; solve Gram * alpha = M b by Cramer's rule.
        let a = array![1.0, 0.0, 0.0];
        let s2 = 2.0f64.sqrt();
        let b = array![1.0 / s2, 1.0 / s2, 0.0];
        let basis = MotivationBasis::new(&[motivation(a.clone()), motivation(b.clone())]).unwrap();
        let row = array![0.7, -1.3, 0.4];
        let (alpha, approx) = basis.project(row.view());

        let g11 = a.dot(&a);
        let g12 = a.dot(&b);
        let g22 = b.dot(&b);
        let r1 = a.dot(&row);
        let r2 = b.dot(&row);
        let det = g11 * g22 - g12 * g12;
        let want0 = (r1 * g22 - g12 * r2) / det;
        let want1 = (g11 * r2 - g12 * r1) / det;
        assert!((alpha[0] - want0).abs() < 1e-10);
        assert!((alpha[1] - want1).abs() < 1e-10);

        // Residual orthogonal to both motivations.
        let resid = &row - &approx;
        assert!(resid.dot(&a).abs() < EPS_NUM);
        assert!(resid.dot(&b).abs() < EPS_NUM);
    }

    #[test]
    fn near_dependent_motivations_rejected() {
        let a = array![1.0, 0.0];
        let almost = array![1.0, 1e-9];
        let norm = (1.0f64 + 1e-18).sqrt();
        let b = almost.mapv(|x| x / norm);
        let err = MotivationBasis::new(&[motivation(a), motivation(b)]).unwrap_err();
        assert!(matches!(err, PdmError::IllConditioned { .. }));
    }

    #[test]
    fn admission_skips_antipodal_motivation() {
        let u = array![std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2];
        let mut anti = motivation(u.mapv(|x| -x));
        anti.source_cluster = 1;
        let (admitted, dependent) = admit_independent(vec![motivation(u.clone()), anti]);
        assert_eq!(admitted.len(), 1);
        assert_eq!(dependent, vec![1]);
        // The span is unchanged: projecting a row lands on the same
        // approximation the two-vector span would give.
        let basis = MotivationBasis::new(&admitted).unwrap();
        let row = array![3.0, 1.0];
        let (_, approx) = basis.project(row.view());
        let expect = u.mapv(|x| x * u.dot(&row));
        for (a, b) in approx.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_random_zero_matrix() {
        let zeros = Array2::<f64>::zeros((10, 20));
        assert!(residual_is_random(zeros.view(), 1.0, 25, 1).unwrap());
    }

    #[test]
    fn residual_random_iid_noise() {
        let mut hits = 0;
        for t in 0..5u64 {
            let mut rng = seed::rng(900 + t, 0xEE, 0);
            let noise = Array2::from_shape_fn((20, 60), |_| rng.random::<f64>() - 0.5);
            if residual_is_random(noise.view(), 1.0, 25, 30 + t).unwrap() {
                hits += 1;
            }
        }
        assert!(hits >= 4, "only {hits}/5 noise residuals declared random");
    }

    #[test]
    fn residual_planted_blocs_not_random() {
        let mut data = Array2::<f64>::zeros((20, 60));
        for j in 0..60 {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..20 {
                data[[i, j]] = if i < 10 { s } else { -s };
            }
        }
        assert!(!residual_is_random(data.view(), 1.0, 25, 2).unwrap());
    }

    fn polarized_votes(n: usize, m: usize) -> VoteMatrix {
        use crate::rollcall::Legislator;
        let mut values = Array2::<i8>::zeros((n, m));
        for j in 0..m {
            let s: i8 = if j % 2 == 0 { 1 } else { -1 };
            for i in 0..n {
                values[[i, j]] = if i < n / 2 { s } else { -s };
            }
        }
        let legislators = (0..n)
            .map(|i| Legislator {
                id: format!("L{i}"),
                name: format!("Member {i}"),
                party: if i < n / 2 { "A" } else { "B" }.to_string(),
                region: None,
            })
            .collect();
        let vote_ids = (0..m).map(|j| format!("v{j}")).collect();
        VoteMatrix::new(legislators, vote_ids, values).unwrap()
    }

    #[test]
    fn decompose_polarized_one_layer() {
        let v = polarized_votes(20, 30);
        let config = PdmConfig::default();
        let decomp = decompose(&v, &config).unwrap();
        assert_eq!(decomp.layers.len(), 1);
        assert_eq!(decomp.layers[0].params.k0, 2);
        assert_eq!(decomp.stop_reason, StopReason::ResidualRandom);
        // Blocs recovered exactly.
        let truth: Vec<usize> = (0..20).map(|i| usize::from(i < 10)).collect();
        let labels = &decomp.layers[0].clustering.labels;
        assert!((adjusted_rand_index(labels, &truth) - 1.0).abs() < 1e-12);
        // Residual is numerically zero: rows live in the bloc span.
        let max_resid = decomp.residual.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(max_resid < 1e-10);
        decomp.verify(&v).unwrap();
    }

    #[test]
    fn decompose_max_layers_cap() {
        let (v, _, _) = planted_two_factor(32, 120, 6, 0.0, 5);
        let config = PdmConfig {
            max_layers: 1,
            ..PdmConfig::default()
        };
        let decomp = decompose(&v, &config).unwrap();
        assert_eq!(decomp.layers.len(), 1);
        // Structure remains, so the cap is the truthful reason.
        assert_eq!(decomp.stop_reason, StopReason::MaxLayers);
        decomp.verify(&v).unwrap();
    }

    #[test]
    fn decompose_two_factor_recovers_regions() {
        let (v, party, region) = planted_two_factor(32, 120, 6, 0.0, 11);
        let config = PdmConfig::default();
        let decomp = decompose(&v, &config).unwrap();
        assert_eq!(decomp.layers.len(), 2, "stop: {:?}", decomp.stop_reason);
        decomp.verify(&v).unwrap();

        let layer1 = &decomp.layers[0];
        let truth1: Vec<usize> = layer1.rows.iter().map(|&i| party[i]).collect();
        assert!(
            adjusted_rand_index(&layer1.clustering.labels, &truth1) > 0.99,
            "layer 1 should split by party"
        );

        let layer2 = &decomp.layers[1];
        let truth2: Vec<usize> = layer2.rows.iter().map(|&i| region[i]).collect();
        assert!(
            adjusted_rand_index(&layer2.clustering.labels, &truth2) > 0.9,
            "layer 2 should split by region"
        );
    }

    #[test]
    fn decompose_deterministic() {
        let (v, _, _) = planted_two_factor(32, 120, 6, 0.0, 3);
        let config = PdmConfig::default();
        let a = decompose(&v, &config).unwrap();
        let b = decompose(&v, &config).unwrap();
        assert_eq!(a.layers.len(), b.layers.len());
        for (la, lb) in a.layers.iter().zip(b.layers.iter()) {
            assert_eq!(la.clustering.labels, lb.clustering.labels);
            assert_eq!(la.weights, lb.weights);
        }
        assert_eq!(a.residual, b.residual);
    }

    #[test]
    fn projection_idempotent_on_approximation() {
        let v = polarized_votes(12, 20);
        let decomp = decompose(&v, &PdmConfig::default()).unwrap();
        let layer = &decomp.layers[0];
        let basis = MotivationBasis::new(&layer.motivations).unwrap();
        for &i in &layer.rows {
            let approx_row = layer.approximation.row(i);
            let (alpha, re_approx) = basis.project(approx_row);
            for (a, b) in alpha.iter().zip(layer.weights.row(i).iter()) {
                assert!((a - b).abs() < 1e-9);
            }
            for (a, b) in re_approx.iter().zip(approx_row.iter()) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
