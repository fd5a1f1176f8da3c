//! Metric multidimensional scaling and effective-dimension estimation.
//!
//! A layer approximation's pairwise row distances are embedded in 1..10
//! dimensions by SMACOF majorization; the layer's effective dimension is
//! the interpolated dimension at which the embedding stress crosses the
//! conventional 0.1 cutoff. Stress is the normalized residual
//! `sqrt(sum (d_ij - rho_ij)^2 / sum d_ij^2)` over unordered pairs,
//! where `d` are the target dissimilarities and `rho` the embedded
//! distances.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::Serialize;

use crate::error::{PdmError, Result};
use crate::seed::{self, stage};
use crate::spectral::symmetric_eigen;

/// Dimensions scanned by [`estimate_dimension`].
pub const MAX_DIM: usize = 10;
/// Stress cutoff defining the estimated dimension.
pub const STRESS_CUTOFF: f64 = 0.1;

const SMACOF_MAX_ITER: usize = 300;
const SMACOF_REL_TOL: f64 = 1e-7;
const SMACOF_RESTARTS: usize = 4;

/// Euclidean distances between matrix rows.
pub fn pairwise_distances(rows: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = rows.nrows();
    let mut dist = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let mut s = 0.0;
            for k in 0..rows.ncols() {
                let d = rows[[i, k]] - rows[[j, k]];
                s += d * d;
            }
            let d = s.sqrt();
            dist[[i, j]] = d;
            dist[[j, i]] = d;
        }
    }
    dist
}

/// One SMACOF embedding.
#[derive(Debug, Clone)]
pub struct MdsFit {
    /// n x dim coordinates.
    pub coords: Array2<f64>,
    /// Normalized stress of the embedding.
    pub stress: f64,
    pub iterations: usize,
}

/// Interpolated-dimension outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DimEstimate {
    /// Interpolated dimension in [1, 10].
    Dim(f64),
    /// Stress is still above the cutoff at 10 dimensions.
    GreaterThanTen,
}

impl std::fmt::Display for DimEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DimEstimate::Dim(d) => write!(f, "{d:.4}"),
            DimEstimate::GreaterThanTen => write!(f, ">10"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DimensionEstimate {
    /// (dimension, stress) for dimensions 1..=10, nonincreasing.
    pub stress_by_dim: Vec<(usize, f64)>,
    pub estimate: DimEstimate,
    /// The 2-D coordinates from the scan, for plotting.
    pub coords_2d: Array2<f64>,
}

fn validate_distances(dist: ArrayView2<'_, f64>) -> Result<usize> {
    let n = dist.nrows();
    if dist.ncols() != n {
        return Err(PdmError::Shape(format!(
            "distance matrix must be square, got {}x{}",
            n,
            dist.ncols()
        )));
    }
    let mut max_dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = dist[[i, j]];
            if d < 0.0 {
                return Err(PdmError::Parameter(format!(
                    "negative distance at ({i}, {j}): {d}"
                )));
            }
            if j > i {
                max_dev = max_dev.max((d - dist[[j, i]]).abs());
            }
        }
    }
    if max_dev > 1e-9 {
        return Err(PdmError::NotSymmetric { max_dev });
    }
    Ok(n)
}

/// Normalized stress of a configuration against target distances.
fn stress_of(dist: ArrayView2<'_, f64>, coords: &Array2<f64>, denom: f64) -> f64 {
    let n = dist.nrows();
    let mut num = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut s = 0.0;
            for k in 0..coords.ncols() {
                let d = coords[[i, k]] - coords[[j, k]];
                s += d * d;
            }
            let rho = s.sqrt();
            let diff = dist[[i, j]] - rho;
            num += diff * diff;
        }
    }
    (num / denom).sqrt()
}

/// Guttman transform: X <- B(X) X / n.
///
/// Pairs closer than a relative floor get weight zero (the subgradient
/// convention for coincident points); dividing by a near-zero embedded
/// distance would blow up B and destroy monotonicity numerically.
fn guttman_step(dist: ArrayView2<'_, f64>, coords: &Array2<f64>) -> Array2<f64> {
    let n = dist.nrows();
    let dim = coords.ncols();
    let floor = 1e-10 * (dist.sum() / (n * n) as f64).max(f64::MIN_POSITIVE);
    let mut b = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let mut s = 0.0;
            for k in 0..dim {
                let d = coords[[i, k]] - coords[[j, k]];
                s += d * d;
            }
            let rho = s.sqrt();
            let v = if rho > floor { -dist[[i, j]] / rho } else { 0.0 };
            b[[i, j]] = v;
            b[[j, i]] = v;
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| b[[i, j]]).sum();
        b[[i, i]] = -off;
    }
    b.dot(coords) / n as f64
}

fn smacof(dist: ArrayView2<'_, f64>, init: Array2<f64>, denom: f64) -> MdsFit {
    let mut coords = init;
    let mut stress = stress_of(dist, &coords, denom);
    let mut iterations = 0;
    for _ in 0..SMACOF_MAX_ITER {
        let next = guttman_step(dist, &coords);
        let next_stress = stress_of(dist, &next, denom);
        // Majorization never increases stress.
        debug_assert!(
            next_stress <= stress + 1e-9 * (1.0 + stress),
            "stress increased: {stress} -> {next_stress}"
        );
        iterations += 1;
        let done = stress - next_stress <= SMACOF_REL_TOL * stress.max(f64::MIN_POSITIVE);
        coords = next;
        stress = next_stress;
        if done {
            break;
        }
    }
    MdsFit {
        coords,
        stress,
        iterations,
    }
}

/// Double-centered classical-scaling eigendecomposition, shared by all
/// dimensions of a scan.
fn classical_basis(dist: ArrayView2<'_, f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = dist.nrows();
    let sq = dist.mapv(|d| d * d);
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let mut b = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            b[[i, j]] = -0.5 * (sq[[i, j]] - row_mean[i] - row_mean[j] + grand);
        }
    }
    let (vals, vecs) = symmetric_eigen(&b)?;
    Ok((vals.to_vec(), vecs))
}

/// Coordinates from the top `dim` positive classical eigenvalues,
/// zero-padded where the spectrum runs out.
fn classical_coords(vals: &[f64], vecs: &Array2<f64>, dim: usize) -> Array2<f64> {
    let n = vecs.nrows();
    let mut coords = Array2::zeros((n, dim));
    for d in 0..dim {
        if d >= n {
            break;
        }
        let idx = n - 1 - d; // eigenvalues ascend; take from the top
        let lambda = vals[idx];
        if lambda <= 0.0 {
            continue;
        }
        let scale = lambda.sqrt();
        for i in 0..n {
            coords[[i, d]] = vecs[[i, idx]] * scale;
        }
    }
    coords
}

fn random_coords(n: usize, dim: usize, scale: f64, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_fn((n, dim), |_| (rng.random::<f64>() - 0.5) * 2.0 * scale)
}

fn fit_dim(
    dist: ArrayView2<'_, f64>,
    dim: usize,
    denom: f64,
    classical: &(Vec<f64>, Array2<f64>),
    warm: Option<&Array2<f64>>,
    seed_value: u64,
) -> MdsFit {
    let n = dist.nrows();
    let mean_dist = dist.sum() / (n * n) as f64;
    let mut best: Option<MdsFit> = None;
    for restart in 0..SMACOF_RESTARTS {
        let init = match restart {
            0 => classical_coords(&classical.0, &classical.1, dim),
            1 => match warm {
                // Previous dimension's solution padded with a zero
                // column: same stress, so the scan is nonincreasing.
                Some(prev) => {
                    let mut padded = Array2::zeros((n, dim));
                    for i in 0..n {
                        for d in 0..prev.ncols().min(dim) {
                            padded[[i, d]] = prev[[i, d]];
                        }
                    }
                    padded
                }
                None => random_coords(
                    n,
                    dim,
                    mean_dist.max(1e-3),
                    &mut seed::rng(seed_value, stage::MDS, (dim * 100 + restart) as u64),
                ),
            },
            _ => random_coords(
                n,
                dim,
                mean_dist.max(1e-3),
                &mut seed::rng(seed_value, stage::MDS, (dim * 100 + restart) as u64),
            ),
        };
        let fit = smacof(dist, init, denom);
        if best.as_ref().is_none_or(|b| fit.stress < b.stress) {
            best = Some(fit);
        }
    }
    best.expect("at least one restart")
}

/// Embed a dissimilarity matrix in `dim` dimensions by SMACOF
/// (classical-scaling start plus seeded random restarts, best stress
/// kept).
pub fn mds_stress(dist: ArrayView2<'_, f64>, dim: usize, seed_value: u64) -> Result<MdsFit> {
    if dim == 0 || dim > MAX_DIM {
        return Err(PdmError::Parameter(format!(
            "dimension must be in 1..={MAX_DIM}, got {dim}"
        )));
    }
    let n = validate_distances(dist)?;
    let denom: f64 = {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += dist[[i, j]] * dist[[i, j]];
            }
        }
        s
    };
    if denom <= 0.0 {
        // All points coincide; any embedding is exact.
        return Ok(MdsFit {
            coords: Array2::zeros((n, dim)),
            stress: 0.0,
            iterations: 0,
        });
    }
    let classical = classical_basis(dist)?;
    Ok(fit_dim(dist, dim, denom, &classical, None, seed_value))
}

/// Pure interpolation rule: the dimension where a nonincreasing stress
/// curve crosses the 0.1 cutoff, linear between bracketing integers.
pub fn interpolate_dimension(stress_by_dim: &[(usize, f64)]) -> DimEstimate {
    debug_assert!(!stress_by_dim.is_empty());
    if stress_by_dim[0].1 <= STRESS_CUTOFF {
        return DimEstimate::Dim(stress_by_dim[0].0 as f64);
    }
    for pair in stress_by_dim.windows(2) {
        let (d_lo, s_lo) = pair[0];
        let (_, s_hi) = pair[1];
        if s_lo > STRESS_CUTOFF && s_hi <= STRESS_CUTOFF {
            let t = (s_lo - STRESS_CUTOFF) / (s_lo - s_hi);
            return DimEstimate::Dim(d_lo as f64 + t);
        }
    }
    DimEstimate::GreaterThanTen
}

/// Scan dimensions 1..=10 and interpolate where stress crosses 0.1.
///
/// Each dimension warm-starts from the previous solution, so the curve
/// is nonincreasing by construction.
pub fn estimate_dimension(dist: ArrayView2<'_, f64>, seed_value: u64) -> Result<DimensionEstimate> {
    let n = validate_distances(dist)?;
    let denom: f64 = {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += dist[[i, j]] * dist[[i, j]];
            }
        }
        s
    };
    if denom <= 0.0 {
        return Ok(DimensionEstimate {
            stress_by_dim: (1..=MAX_DIM).map(|d| (d, 0.0)).collect(),
            estimate: DimEstimate::Dim(1.0),
            coords_2d: Array2::zeros((n, 2)),
        });
    }
    let classical = classical_basis(dist)?;
    let mut stress_by_dim = Vec::with_capacity(MAX_DIM);
    let mut coords_2d = Array2::zeros((n, 2));
    let mut prev: Option<Array2<f64>> = None;
    for dim in 1..=MAX_DIM {
        let fit = fit_dim(dist, dim, denom, &classical, prev.as_ref(), seed_value);
        stress_by_dim.push((dim, fit.stress));
        if dim == 2 {
            coords_2d = fit.coords.clone();
        }
        prev = Some(fit.coords);
    }
    Ok(DimensionEstimate {
        estimate: interpolate_dimension(&stress_by_dim),
        stress_by_dim,
        coords_2d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn pairwise_hand_values() {
        let rows = array![[0.0, 0.0], [3.0, 4.0], [3.0, 4.0]];
        let dist = pairwise_distances(rows.view());
        assert!((dist[[0, 1]] - 5.0).abs() < 1e-12);
        assert!(dist[[1, 2]].abs() < 1e-12);
        assert_eq!(dist[[0, 0]], 0.0);
    }

    #[test]
    fn pairwise_triangle_inequality() {
        let mut rng = seed::rng(5, 0xEE, 0);
        let rows = Array2::from_shape_fn((24, 6), |_| rng.random::<f64>() * 2.0 - 1.0);
        let dist = pairwise_distances(rows.view());
        for _ in 0..1000 {
            let i = rng.random_range(0..24);
            let j = rng.random_range(0..24);
            let k = rng.random_range(0..24);
            assert!(dist[[i, k]] <= dist[[i, j]] + dist[[j, k]] + 1e-12);
        }
    }

    #[test]
    fn collinear_points_embed_exactly_in_1d() {
        let rows = array![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.5, 3.5]];
        let dist = pairwise_distances(rows.view());
        let fit = mds_stress(dist.view(), 1, 7).unwrap();
        assert!(fit.stress <= 1e-6, "stress {}", fit.stress);
        let est = estimate_dimension(dist.view(), 7).unwrap();
        assert_eq!(est.estimate, DimEstimate::Dim(1.0));
    }

    #[test]
    fn equilateral_triangle_needs_two_dims() {
        let dist = array![[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]];
        let fit2 = mds_stress(dist.view(), 2, 3).unwrap();
        assert!(fit2.stress <= 1e-6, "2-D stress {}", fit2.stress);
        let fit1 = mds_stress(dist.view(), 1, 3).unwrap();
        assert!(fit1.stress > 0.1, "1-D stress {}", fit1.stress);
    }

    #[test]
    fn interpolation_fixture_exact() {
        let curve = vec![(1, 0.4), (2, 0.15), (3, 0.05), (4, 0.01)];
        match interpolate_dimension(&curve) {
            DimEstimate::Dim(d) => assert!((d - 2.5).abs() < 1e-12),
            other => panic!("unexpected estimate {other:?}"),
        }
    }

    #[test]
    fn interpolation_flags_above_ten() {
        let curve: Vec<(usize, f64)> = (1..=10).map(|d| (d, 0.5 - 0.01 * d as f64)).collect();
        assert_eq!(interpolate_dimension(&curve), DimEstimate::GreaterThanTen);
    }

    #[test]
    fn stress_curve_nonincreasing() {
        let mut rng = seed::rng(11, 0xEE, 1);
        let rows = Array2::from_shape_fn((20, 8), |_| rng.random::<f64>());
        let dist = pairwise_distances(rows.view());
        let est = estimate_dimension(dist.view(), 13).unwrap();
        for pair in est.stress_by_dim.windows(2) {
            assert!(
                pair[1].1 <= pair[0].1 + 1e-3,
                "stress increased between dims: {:?}",
                est.stress_by_dim
            );
        }
    }

    #[test]
    fn rejects_asymmetric_and_negative() {
        let bad_sym = array![[0.0, 1.0], [2.0, 0.0]];
        assert!(mds_stress(bad_sym.view(), 1, 0).is_err());
        let bad_neg = array![[0.0, -1.0], [-1.0, 0.0]];
        assert!(mds_stress(bad_neg.view(), 1, 0).is_err());
    }

    #[test]
    fn noise_never_decreases_estimate() {
        let mut rng = seed::rng(21, 0xEE, 2);
        for trial in 0..20u64 {
            // Base: points on a noisy 2-plane; noised: add 6 more
            // independent coordinates.
            let n = 16;
            let base = Array2::from_shape_fn((n, 2), |_| rng.random::<f64>() * 2.0 - 1.0);
            let mut noised = Array2::zeros((n, 8));
            for i in 0..n {
                for d in 0..2 {
                    noised[[i, d]] = base[[i, d]];
                }
                for d in 2..8 {
                    noised[[i, d]] = 0.35 * (rng.random::<f64>() - 0.5);
                }
            }
            let est_base = estimate_dimension(pairwise_distances(base.view()).view(), trial)
                .unwrap()
                .estimate;
            let est_noised = estimate_dimension(pairwise_distances(noised.view()).view(), trial)
                .unwrap()
                .estimate;
            let value = |e: DimEstimate| match e {
                DimEstimate::Dim(d) => d,
                DimEstimate::GreaterThanTen => 11.0,
            };
            assert!(
                value(est_noised) >= value(est_base) - 1e-9,
                "trial {trial}: {est_base:?} -> {est_noised:?}"
            );
        }
    }

    #[test]
    fn identical_points_zero_stress() {
        let dist = Array2::<f64>::zeros((5, 5));
        let fit = mds_stress(dist.view(), 3, 1).unwrap();
        assert_eq!(fit.stress, 0.0);
        let est = estimate_dimension(dist.view(), 1).unwrap();
        assert_eq!(est.estimate, DimEstimate::Dim(1.0));
    }
}
