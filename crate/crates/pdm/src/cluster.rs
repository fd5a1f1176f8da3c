//! Unsupervised parameter selection and clustering.
//!
//! Two parameters drive each decomposition layer: `k0`, the number of
//! clusters, picked by an information-criterion scan over 1-D Gaussian
//! mixture fits of the Fiedler vector; and `l`, the embedding dimension,
//! the count of nonzero Laplacian eigenvalues falling below the smallest
//! Fiedler value seen across column-shuffled null replicates of the same
//! data. Clusters are then found by seeded k-means (k-means++ starts,
//! best of a fixed number of restarts) in the `l`-dimensional spectral
//! embedding.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PdmError, Result};
use crate::seed::{self, stage};
use crate::spectral::SpectralGraph;
use crate::EPS_NUM;

/// Model-selection criterion for the mixture scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum InfoCriterion {
    #[default]
    Aic,
    Bic,
}

/// Options for [`select_k0`].
#[derive(Debug, Clone)]
pub struct GmmSelect {
    pub min_components: usize,
    pub max_components: usize,
    /// EM restarts per component count.
    pub restarts: usize,
    /// Relative window within which component counts tie.
    pub tie_window: f64,
    pub criterion: InfoCriterion,
}

impl Default for GmmSelect {
    fn default() -> Self {
        Self {
            min_components: 2,
            max_components: 20,
            restarts: 3,
            tie_window: 0.05,
            criterion: InfoCriterion::Aic,
        }
    }
}

/// Selected layer parameters and their diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterParams {
    pub k0: usize,
    pub l: usize,
    /// (component count, criterion value) for every count that fit.
    pub aic_curve: Vec<(usize, f64)>,
    /// Minimum null-model Fiedler value; eigenvalues below it count
    /// toward `l`.
    pub null_fiedler_min: f64,
    pub null_reps: usize,
}

/// A k-means partition of the spectral embedding.
#[derive(Debug, Clone)]
pub struct Clustering {
    /// Cluster label per embedded row.
    pub labels: Vec<usize>,
    /// k0 x l.
    pub centroids: Array2<f64>,
    /// rows x l spectral coordinates.
    pub embedding: Array2<f64>,
    /// Sum of squared distances to assigned centroids.
    pub inertia: f64,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.centroids.nrows()
    }

    /// Member row indices per cluster label.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k()];
        for (i, &label) in self.labels.iter().enumerate() {
            out[label].push(i);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// k0 selection: 1-D Gaussian mixtures scored by AIC/BIC
// ---------------------------------------------------------------------------

struct GmmFit {
    log_likelihood: f64,
}

/// Fit a c-component 1-D Gaussian mixture by EM with k-means
/// initialization. Returns `None` when the fit degenerates (empty or
/// vanishing component), which the caller records as a skipped count.
fn fit_gmm_1d(data: &[f64], c: usize, reg: f64, seed_value: u64) -> Option<GmmFit> {
    let n = data.len();
    let points = Array2::from_shape_vec((n, 1), data.to_vec()).expect("shape");
    let init = kmeans_single(points.view(), c, &mut seed::rng(seed_value, stage::KMEANS, 0))?;

    let mut means = vec![0.0; c];
    let mut vars = vec![0.0; c];
    let mut weights = vec![0.0; c];
    let counts: Vec<usize> = {
        let mut counts = vec![0usize; c];
        for &label in &init.labels {
            counts[label] += 1;
        }
        counts
    };
    for k in 0..c {
        if counts[k] == 0 {
            return None;
        }
        means[k] = init.centroids[[k, 0]];
        let ss: f64 = init
            .labels
            .iter()
            .enumerate()
            .filter(|&(_, &label)| label == k)
            .map(|(i, _)| (data[i] - means[k]).powi(2))
            .sum();
        vars[k] = ss / counts[k] as f64 + reg;
        weights[k] = counts[k] as f64 / n as f64;
    }

    let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let mut resp = vec![0.0; n * c];
    let mut logp = vec![0.0f64; c];
    let mut log_likelihood = f64::NEG_INFINITY;
    for _ in 0..300 {
        // E-step with log-sum-exp.
        let mut ll = 0.0;
        for i in 0..n {
            let mut max = f64::NEG_INFINITY;
            for k in 0..c {
                let z = data[i] - means[k];
                let lp =
                    weights[k].ln() - half_log_2pi - 0.5 * vars[k].ln() - z * z / (2.0 * vars[k]);
                logp[k] = lp;
                if lp > max {
                    max = lp;
                }
            }
            let sum: f64 = (0..c).map(|k| (logp[k] - max).exp()).sum();
            let lse = max + sum.ln();
            ll += lse;
            for k in 0..c {
                resp[i * c + k] = (logp[k] - lse).exp();
            }
        }
        if !ll.is_finite() {
            return None;
        }
        let converged = (ll - log_likelihood).abs() <= 1e-10 * (1.0 + ll.abs());
        log_likelihood = ll;
        if converged {
            break;
        }

        // M-step.
        for k in 0..c {
            let nk: f64 = (0..n).map(|i| resp[i * c + k]).sum();
            if nk < 1e-12 {
                return None;
            }
            let mu: f64 = (0..n).map(|i| resp[i * c + k] * data[i]).sum::<f64>() / nk;
            let var: f64 = (0..n)
                .map(|i| resp[i * c + k] * (data[i] - mu).powi(2))
                .sum::<f64>()
                / nk
                + reg;
            means[k] = mu;
            vars[k] = var;
            weights[k] = nk / n as f64;
        }
    }
    Some(GmmFit { log_likelihood })
}

/// Decide k0 from a criterion curve.
///
/// If the minimum is at least `tie_window` smaller (relatively) than
/// every competitor, its component count wins; otherwise the median of
/// the counts inside the window is taken, with an even set rounding
/// down. Curves containing non-positive values are shifted so the
/// minimum is 1 before ratios are formed.
pub fn k0_from_curve(curve: &[(usize, f64)], tie_window: f64) -> Result<usize> {
    if curve.is_empty() {
        return Err(PdmError::Degenerate("empty criterion curve".to_string()));
    }
    let min_val = curve.iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
    let shift = if min_val > 0.0 { 0.0 } else { min_val - 1.0 };
    let shifted_min = min_val - shift;
    let cutoff = shifted_min / (1.0 - tie_window);
    let mut candidates: Vec<usize> = curve
        .iter()
        .filter(|&&(_, v)| v - shift < cutoff)
        .map(|&(c, _)| c)
        .collect();
    candidates.sort_unstable();
    let len = candidates.len();
    Ok(if len % 2 == 1 {
        candidates[len / 2]
    } else {
        (candidates[len / 2 - 1] + candidates[len / 2]) / 2
    })
}

/// Number of free parameters of a c-component 1-D mixture: means,
/// variances, and weights minus the simplex constraint.
fn mixture_params(c: usize) -> f64 {
    (3 * c - 1) as f64
}

/// Select the cluster count from the Fiedler vector's value
/// distribution.
///
/// Fits mixtures for every component count in the configured range
/// (counts whose EM degenerates are skipped), scores them with AIC (or
/// BIC), and applies the tie rule of [`k0_from_curve`].
pub fn select_k0(
    values: ArrayView1<'_, f64>,
    opts: &GmmSelect,
    seed_value: u64,
) -> Result<(usize, Vec<(usize, f64)>)> {
    let n = values.len();
    if n < 4 {
        return Err(PdmError::Degenerate(format!(
            "need at least 4 values to select k0, got {n}"
        )));
    }
    if opts.min_components < 2 || opts.max_components < opts.min_components {
        return Err(PdmError::Parameter(format!(
            "invalid component range {}..{}",
            opts.min_components, opts.max_components
        )));
    }
    let data: Vec<f64> = values.to_vec();
    let mean = data.iter().sum::<f64>() / n as f64;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return Err(PdmError::Degenerate(
            "constant value vector: mixture fit undefined".to_string(),
        ));
    }
    let reg = 1e-6 * var;

    let mut curve = Vec::new();
    for c in opts.min_components..=opts.max_components.min(n) {
        let mut best: Option<f64> = None;
        for restart in 0..opts.restarts {
            let s = seed::derive(seed_value, stage::GMM, ((c as u64) << 16) | restart as u64);
            if let Some(fit) = fit_gmm_1d(&data, c, reg, s) {
                if best.is_none_or(|b| fit.log_likelihood > b) {
                    best = Some(fit.log_likelihood);
                }
            }
        }
        if let Some(ll) = best {
            let penalty = match opts.criterion {
                InfoCriterion::Aic => 2.0 * mixture_params(c),
                InfoCriterion::Bic => (n as f64).ln() * mixture_params(c),
            };
            curve.push((c, penalty - 2.0 * ll));
        }
    }
    if curve.is_empty() {
        return Err(PdmError::Degenerate(
            "every mixture fit degenerated; cannot select k0".to_string(),
        ));
    }
    let k0 = k0_from_curve(&curve, opts.tie_window)?;
    Ok((k0, curve))
}

// ---------------------------------------------------------------------------
// l selection: permutation null models
// ---------------------------------------------------------------------------

/// Independently shuffle each column, preserving per-column margins
/// while destroying row affinity.
pub fn permute_columns(data: ArrayView2<'_, f64>, rng: &mut impl Rng) -> Array2<f64> {
    let mut out = data.to_owned();
    let mut buf: Vec<f64> = Vec::with_capacity(data.nrows());
    for mut col in out.columns_mut() {
        buf.clear();
        buf.extend(col.iter().copied());
        buf.shuffle(rng);
        for (dst, &v) in col.iter_mut().zip(buf.iter()) {
            *dst = v;
        }
    }
    out
}

/// Count the significant spectral dimensions of `data`.
///
/// Builds `null_reps` column-shuffled replicates, runs the full
/// correlation -> affinity -> Laplacian pipeline on each, and returns
/// `(l, threshold)` where `threshold` is the minimum null Fiedler value
/// and `l` counts real eigenvalues strictly between the numerical zero
/// and the threshold. `l = 0` signals no structure beyond chance.
pub fn select_l(
    eigenvalues: &Array1<f64>,
    data: ArrayView2<'_, f64>,
    sigma: f64,
    null_reps: usize,
    seed_value: u64,
) -> Result<(usize, f64)> {
    if null_reps == 0 {
        return Err(PdmError::Parameter("null_reps must be positive".to_string()));
    }
    let mut null_fiedler = Vec::with_capacity(null_reps);
    for rep in 0..null_reps {
        let mut rng = seed::rng(seed_value, stage::NULL_MODEL, rep as u64);
        let permuted = permute_columns(data, &mut rng);
        match SpectralGraph::build(permuted.view(), sigma) {
            Ok(graph) => null_fiedler.push(graph.fiedler_value()),
            // A replicate can degenerate (e.g. a shuffled column makes a
            // row constant); it simply contributes no threshold.
            Err(PdmError::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if null_fiedler.is_empty() {
        return Err(PdmError::Degenerate(
            "all null replicates degenerated".to_string(),
        ));
    }
    let threshold = null_fiedler.iter().copied().fold(f64::INFINITY, f64::min);
    let l = eigenvalues
        .iter()
        .filter(|&&lambda| lambda > EPS_NUM && lambda < threshold)
        .count();
    Ok((l, threshold))
}

// ---------------------------------------------------------------------------
// k-means
// ---------------------------------------------------------------------------

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// One k-means run: k-means++ seeding then Lloyd iterations. Returns
/// `None` if the converged partition has an empty cluster.
fn kmeans_single(points: ArrayView2<'_, f64>, k: usize, rng: &mut impl Rng) -> Option<Clustering> {
    let n = points.nrows();
    let dim = points.ncols();

    // k-means++ seeding.
    let mut centroids = Array2::zeros((k, dim));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&points.row(first));
    let mut min_d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = min_d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in min_d2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining mass sits on already-chosen positions.
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&points.row(pick));
        for (i, slot) in min_d2.iter_mut().enumerate() {
            let d = sq_dist(points.row(i), centroids.row(c));
            if d < *slot {
                *slot = d;
            }
        }
    }

    // Lloyd iterations; distance ties go to the lowest cluster index.
    let mut labels = vec![0usize; n];
    for _ in 0..300 {
        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let mut best = 0;
            let mut best_d = sq_dist(points.row(i), centroids.row(0));
            for c in 1..k {
                let d = sq_dist(points.row(i), centroids.row(c));
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if *label != best {
                *label = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Array2::<f64>::zeros((k, dim));
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            let mut row = sums.row_mut(labels[i]);
            row += &points.row(i);
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let mut row = sums.row_mut(c);
                row.mapv_inplace(|x| x / count as f64);
                centroids.row_mut(c).assign(&row);
            }
            // Empty clusters keep their centroid; they may recapture
            // points, and are rejected at convergence otherwise.
        }
    }

    let mut counts = vec![0usize; k];
    for &label in &labels {
        counts[label] += 1;
    }
    if counts.contains(&0) {
        return None;
    }
    let inertia: f64 = (0..n)
        .map(|i| sq_dist(points.row(i), centroids.row(labels[i])))
        .sum();
    Some(Clustering {
        labels,
        centroids,
        embedding: points.to_owned(),
        inertia,
    })
}

/// Seeded k-means with restarts, keeping the lowest-inertia run.
///
/// Errors if `k` exceeds the number of points or if every restart
/// converges with an empty cluster (e.g. fewer distinct points than
/// clusters).
pub fn kmeans(
    points: ArrayView2<'_, f64>,
    k: usize,
    restarts: usize,
    seed_value: u64,
) -> Result<Clustering> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(PdmError::Parameter(format!("k must be in 1..={n}, got {k}")));
    }
    let mut best: Option<Clustering> = None;
    for restart in 0..restarts.max(1) {
        let mut rng = seed::rng(seed_value, stage::KMEANS, restart as u64);
        if let Some(run) = kmeans_single(points, k, &mut rng) {
            if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
                best = Some(run);
            }
        }
    }
    best.ok_or_else(|| {
        PdmError::Degenerate(format!(
            "k-means could not produce {k} nonempty clusters in {restarts} restarts"
        ))
    })
}

/// Cluster the active rows of a spectral graph in its `l`-dimensional
/// embedding (eigenvectors 1..=l).
pub fn cluster_embedding(
    graph: &SpectralGraph,
    l: usize,
    k0: usize,
    restarts: usize,
    row_normalize: bool,
    seed_value: u64,
) -> Result<Clustering> {
    if l == 0 {
        return Err(PdmError::Parameter(
            "embedding dimension must be >= 1".to_string(),
        ));
    }
    if k0 < 2 {
        return Err(PdmError::Parameter(format!("k0 must be >= 2, got {k0}")));
    }
    let n = graph.eigenvectors.nrows();
    if l > n.saturating_sub(1) {
        return Err(PdmError::Parameter(format!(
            "embedding dimension {l} exceeds available nontrivial eigenvectors ({})",
            n.saturating_sub(1)
        )));
    }
    let embedding = graph.embedding(l, row_normalize);
    kmeans(embedding.view(), k0, restarts, seed_value)
}

/// Adjusted Rand index between two labelings of the same items.
/// 1 means identical partitions (up to label names), ~0 chance level.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must cover the same items");
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    let ka = a.iter().max().map_or(0, |&m| m + 1);
    let kb = b.iter().max().map_or(0, |&m| m + 1);
    let mut table = vec![0u64; ka * kb];
    let mut rows = vec![0u64; ka];
    let mut cols = vec![0u64; kb];
    for i in 0..n {
        table[a[i] * kb + b[i]] += 1;
        rows[a[i]] += 1;
        cols[b[i]] += 1;
    }
    fn choose2(x: u64) -> f64 {
        (x as f64) * (x as f64 - 1.0) / 2.0
    }
    let sum_table: f64 = table.iter().map(|&x| choose2(x)).sum();
    let sum_rows: f64 = rows.iter().map(|&x| choose2(x)).sum();
    let sum_cols: f64 = cols.iter().map(|&x| choose2(x)).sum();
    let total = choose2(n as u64);
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index - expected).abs() < 1e-12 {
        return 1.0;
    }
    (sum_table - expected) / (max_index - expected)
}
