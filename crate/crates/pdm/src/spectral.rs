//! Correlation network, spherical-distance affinity, and graph Laplacian.
//!
//! Legislators become nodes of a weighted complete graph: edge weights
//! are a Gaussian kernel of the spherical distance between their
//! vote-correlation angles. The symmetric normalized Laplacian of that
//! graph carries the cluster structure in its low eigenpairs; its second
//! eigenvector (the Fiedler vector) encodes the coarse bipartition.

pub mod eigen;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::Serialize;

use crate::error::{PdmError, Result};
use crate::EPS_NUM;

pub use eigen::{eigen_residual, symmetric_eigen};

/// Why a row was left out of the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExclusionReason {
    /// Constant vote vector: correlation undefined (zero variance).
    ConstantRow,
    /// Zero affinity column sum: node disconnected from the graph.
    IsolatedNode,
}

/// Correlation matrix, affinity, Laplacian, and eigenpairs for one data
/// matrix. All stored matrices are over `active_rows` only; degenerate
/// rows are excluded and reported rather than silently dropped.
#[derive(Debug, Clone)]
pub struct SpectralGraph {
    pub corr: Array2<f64>,
    pub affinity: Array2<f64>,
    pub laplacian: Array2<f64>,
    pub degrees: Array1<f64>,
    /// Ascending.
    pub eigenvalues: Array1<f64>,
    /// Columns, orthonormal, aligned with `eigenvalues`.
    pub eigenvectors: Array2<f64>,
    pub sigma: f64,
    /// Indices into the input rows, in input order.
    pub active_rows: Vec<usize>,
    pub excluded_rows: Vec<(usize, ExclusionReason)>,
}

impl SpectralGraph {
    /// Run the full pipeline on real-valued rows (vote rows or residual
    /// rows). Needs at least two rows with nonzero variance.
    pub fn build(rows: ArrayView2<'_, f64>, sigma: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(PdmError::Parameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        let (corr, mut active, mut excluded) = correlation(rows)?;
        let (_dist, affinity) = spherical_affinity(corr.view(), sigma)?;

        // Affinity entries are exp(-d^2/sigma^2) > 0, so with >= 2 active
        // rows no column sum can vanish; the guard keeps the contract
        // honest for any future affinity variant.
        let iso: Vec<usize> = (0..affinity.nrows())
            .filter(|&i| affinity.column(i).sum() <= 0.0)
            .collect();
        let (corr, affinity) = if iso.is_empty() {
            (corr, affinity)
        } else {
            for &i in iso.iter().rev() {
                excluded.push((active[i], ExclusionReason::IsolatedNode));
                active.remove(i);
            }
            excluded.sort_by_key(|&(i, _)| i);
            if active.len() < 2 {
                return Err(PdmError::Degenerate(
                    "fewer than 2 connected rows after exclusions".to_string(),
                ));
            }
            let keep: Vec<usize> = (0..affinity.nrows()).filter(|i| !iso.contains(i)).collect();
            (submatrix(corr.view(), &keep), submatrix(affinity.view(), &keep))
        };

        let (laplacian, degrees) = laplacian(affinity.view())?;
        let (eigenvalues, eigenvectors) = symmetric_eigen(&laplacian)?;
        debug_assert!(
            eigen_residual(&laplacian, &eigenvalues, &eigenvectors) <= EPS_NUM,
            "eigenpair residual above tolerance"
        );
        Ok(Self {
            corr,
            affinity,
            laplacian,
            degrees,
            eigenvalues,
            eigenvectors,
            sigma,
            active_rows: active,
            excluded_rows: excluded,
        })
    }

    /// Second-smallest eigenvalue's eigenvector, indexed by active rows.
    pub fn fiedler_vector(&self) -> ArrayView1<'_, f64> {
        self.eigenvectors.column(1)
    }

    /// Smallest eigenvalue above the numerical-zero threshold.
    pub fn fiedler_value(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .find(|&l| l > EPS_NUM)
            .unwrap_or(0.0)
    }

    /// Spectral coordinates from eigenvectors 1..=dim (the nontrivial
    /// ones), one row per active row. Optionally row-normalized.
    pub fn embedding(&self, dim: usize, row_normalize: bool) -> Array2<f64> {
        let n = self.eigenvectors.nrows();
        let mut coords = Array2::zeros((n, dim));
        for d in 0..dim {
            coords.column_mut(d).assign(&self.eigenvectors.column(d + 1));
        }
        if row_normalize {
            for mut row in coords.rows_mut() {
                let norm = row.dot(&row).sqrt();
                if norm > 0.0 {
                    row.mapv_inplace(|x| x / norm);
                }
            }
        }
        coords
    }
}

fn submatrix(m: ArrayView2<'_, f64>, keep: &[usize]) -> Array2<f64> {
    let k = keep.len();
    let mut out = Array2::zeros((k, k));
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            out[[a, b]] = m[[i, j]];
        }
    }
    out
}

/// Matrix over included rows, the included row indices, and the
/// excluded rows with reasons.
pub type CorrelationResult = (Array2<f64>, Vec<usize>, Vec<(usize, ExclusionReason)>);

/// Pearson correlation matrix over the rows with nonzero variance.
///
/// Constant rows are excluded rather than dividing by zero.
pub fn correlation(rows: ArrayView2<'_, f64>) -> Result<CorrelationResult> {
    let n = rows.nrows();
    let m = rows.ncols();
    if m == 0 {
        return Err(PdmError::Shape("correlation of zero-length rows".to_string()));
    }

    // Center and unit-normalize each usable row once.
    let mut normalized: Vec<Array1<f64>> = Vec::new();
    let mut active = Vec::new();
    let mut excluded = Vec::new();
    for i in 0..n {
        let row = rows.row(i);
        let mean = row.sum() / m as f64;
        let centered = row.mapv(|x| x - mean);
        let norm = centered.dot(&centered).sqrt();
        if norm <= 0.0 {
            excluded.push((i, ExclusionReason::ConstantRow));
        } else {
            normalized.push(centered / norm);
            active.push(i);
        }
    }
    if active.len() < 2 {
        return Err(PdmError::Degenerate(format!(
            "need at least 2 rows with nonzero variance, got {}",
            active.len()
        )));
    }

    let a = active.len();
    let mut corr = Array2::zeros((a, a));
    for i in 0..a {
        corr[[i, i]] = 1.0;
        for j in (i + 1)..a {
            let c = normalized[i].dot(&normalized[j]);
            corr[[i, j]] = c;
            corr[[j, i]] = c;
        }
    }
    Ok((corr, active, excluded))
}

/// Pearson correlation of two equal-length vectors; `None` if either is
/// constant.
pub fn pearson(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> Option<f64> {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.sum() / n;
    let my = y.sum() / n;
    let cx = x.mapv(|v| v - mx);
    let cy = y.mapv(|v| v - my);
    let nx = cx.dot(&cx).sqrt();
    let ny = cy.dot(&cy).sqrt();
    if nx <= 0.0 || ny <= 0.0 {
        return None;
    }
    Some((cx.dot(&cy) / (nx * ny)).clamp(-1.0, 1.0))
}

/// Spherical distance and Gaussian affinity from a correlation matrix.
///
/// `d = sin(arccos(S)/2)` entrywise (correlations clamped to [-1, 1]
/// first), `S1 = exp(-d^2 / sigma^2)` with the diagonal zeroed.
pub fn spherical_affinity(
    corr: ArrayView2<'_, f64>,
    sigma: f64,
) -> Result<(Array2<f64>, Array2<f64>)> {
    if sigma <= 0.0 {
        return Err(PdmError::Parameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let dist = corr.mapv(|s| (s.clamp(-1.0, 1.0).acos() / 2.0).sin());
    let inv_s2 = 1.0 / (sigma * sigma);
    let mut affinity = dist.mapv(|d| (-d * d * inv_s2).exp());
    for i in 0..affinity.nrows() {
        affinity[[i, i]] = 0.0;
    }
    Ok((dist, affinity))
}

/// Symmetric normalized Laplacian `L = I - D^{-1/2} S1 D^{-1/2}` with D
/// the diagonal of column sums. Symmetry is enforced by averaging with
/// the transpose to damp roundoff.
pub fn laplacian(affinity: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Array1<f64>)> {
    let n = affinity.nrows();
    if affinity.ncols() != n {
        return Err(PdmError::Shape(format!(
            "affinity must be square, got {}x{}",
            n,
            affinity.ncols()
        )));
    }
    let mut degrees = Array1::zeros(n);
    for j in 0..n {
        let s = affinity.column(j).sum();
        if s <= 0.0 {
            return Err(PdmError::Degenerate(format!(
                "isolated node {j}: zero affinity column sum"
            )));
        }
        degrees[j] = s;
    }
    let inv_sqrt = degrees.mapv(|d: f64| 1.0 / d.sqrt());
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let norm = inv_sqrt[i] * affinity[[i, j]] * inv_sqrt[j];
            l[[i, j]] = if i == j { 1.0 - norm } else { -norm };
        }
    }
    // Average with the transpose; the construction is symmetric up to
    // rounding and the eigensolver requires exact symmetry.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (l[[i, j]] + l[[j, i]]);
            l[[i, j]] = avg;
            l[[j, i]] = avg;
        }
    }
    Ok((l, degrees))
}
