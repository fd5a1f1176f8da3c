//! Predictive evaluation: sign predictions from layer approximations,
//! percent correct, APRE, and the minority/random baselines.
//!
//! Scoring covers cast votes only (entries +1/-1); abstentions never
//! enter any count. APRE is the aggregate proportional reduction in
//! error against the minority baseline:
//! `sum_j (minority_j - errors_j) / sum_j minority_j`.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{PdmError, Result};
use crate::rollcall::VoteMatrix;
use crate::seed::{self, stage};

/// Majority (outcome) side of each vote over cast votes; an exact tie
/// counts as +1.
fn majority_sides(v: &VoteMatrix) -> Vec<i8> {
    (0..v.n_votes())
        .map(|j| {
            let (yea, nay) = v.margins(j);
            if nay > yea {
                -1
            } else {
                1
            }
        })
        .collect()
}

/// Predict every entry by the sign of the approximation; an exact zero
/// falls back to the vote's majority outcome.
pub fn predict_signs(approx: ArrayView2<'_, f64>, v: &VoteMatrix) -> Array2<i8> {
    let majority = majority_sides(v);
    Array2::from_shape_fn(approx.dim(), |(i, j)| {
        let a = approx[[i, j]];
        if a > 0.0 {
            1
        } else if a < 0.0 {
            -1
        } else {
            majority[j]
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub model_name: String,
    pub percent_correct: f64,
    /// `None` when every vote is unanimous (zero minority sum).
    pub apre: Option<f64>,
    /// Errors per vote column, aligned with the matrix's vote ids.
    pub per_vote_errors: Vec<usize>,
    /// Total cast (+1/-1) entries scored.
    pub n_cast: usize,
}

/// Scoring variations. The default excludes abstentions entirely; the
/// alternative charges every abstained entry as an error.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScoreOptions {
    pub abstentions_always_wrong: bool,
}

/// Score a complete prediction matrix against the actual votes.
pub fn score(pred: ArrayView2<'_, i8>, v: &VoteMatrix, model_name: &str) -> Result<EvalReport> {
    score_with(pred, v, model_name, ScoreOptions::default())
}

pub fn score_with(
    pred: ArrayView2<'_, i8>,
    v: &VoteMatrix,
    model_name: &str,
    options: ScoreOptions,
) -> Result<EvalReport> {
    if pred.dim() != v.values().dim() {
        return Err(PdmError::Shape(format!(
            "prediction is {:?} but votes are {:?}",
            pred.dim(),
            v.values().dim()
        )));
    }
    let values = v.values();
    let m = v.n_votes();
    let mut per_vote_errors = vec![0usize; m];
    let mut n_cast = 0usize;
    let mut correct = 0usize;
    for j in 0..m {
        for i in 0..v.n_legislators() {
            let actual = values[[i, j]];
            if actual == 0 {
                if options.abstentions_always_wrong {
                    n_cast += 1;
                    per_vote_errors[j] += 1;
                }
                continue;
            }
            n_cast += 1;
            if pred[[i, j]] == actual {
                correct += 1;
            } else {
                per_vote_errors[j] += 1;
            }
        }
    }
    if n_cast == 0 {
        return Err(PdmError::Degenerate("no cast votes to score".to_string()));
    }
    let minority_sum: usize = (0..m)
        .map(|j| {
            let (yea, nay) = v.margins(j);
            yea.min(nay)
        })
        .sum();
    let apre = if minority_sum == 0 {
        None
    } else {
        let saved: f64 = (0..m)
            .map(|j| {
                let (yea, nay) = v.margins(j);
                yea.min(nay) as f64 - per_vote_errors[j] as f64
            })
            .sum();
        Some(saved / minority_sum as f64)
    };
    Ok(EvalReport {
        model_name: model_name.to_string(),
        percent_correct: 100.0 * correct as f64 / n_cast as f64,
        apre,
        per_vote_errors,
        n_cast,
    })
}

/// Baseline: every legislator votes the roll call's outcome side.
pub fn minority_model(v: &VoteMatrix) -> Array2<i8> {
    let majority = majority_sides(v);
    Array2::from_shape_fn((v.n_legislators(), v.n_votes()), |(_, j)| majority[j])
}

/// Baseline: each vote's cast yeas and nays are dealt uniformly at
/// random among the legislators who cast a vote; abstainers (never
/// scored) draw independently from the same margin proportions.
pub fn random_model(v: &VoteMatrix, seed_value: u64) -> Array2<i8> {
    let mut rng = seed::rng(seed_value, stage::RANDOM_MODEL, 0);
    let values = v.values();
    let n = v.n_legislators();
    let mut pred = Array2::<i8>::zeros((n, v.n_votes()));
    let mut pool: Vec<i8> = Vec::with_capacity(n);
    for j in 0..v.n_votes() {
        let (yea, nay) = v.margins(j);
        pool.clear();
        pool.extend(std::iter::repeat_n(1i8, yea));
        pool.extend(std::iter::repeat_n(-1i8, nay));
        pool.shuffle(&mut rng);
        let mut next = 0usize;
        let p_yea = if yea + nay > 0 {
            yea as f64 / (yea + nay) as f64
        } else {
            1.0
        };
        for i in 0..n {
            pred[[i, j]] = if values[[i, j]] != 0 {
                let p = pool[next];
                next += 1;
                p
            } else if rng.random::<f64>() < p_yea {
                1
            } else {
                -1
            };
        }
    }
    pred
}

/// Aggregate of several seeded random-model instances.
#[derive(Debug, Clone, Serialize)]
pub struct RandomSummary {
    pub mean_apre: Option<f64>,
    pub min_percent_correct: f64,
    pub max_percent_correct: f64,
    pub instances: usize,
}

pub fn random_model_summary(
    v: &VoteMatrix,
    instances: usize,
    seed_value: u64,
) -> Result<RandomSummary> {
    if instances == 0 {
        return Err(PdmError::Parameter("instances must be >= 1".to_string()));
    }
    let mut apres = Vec::new();
    let mut min_pc = f64::INFINITY;
    let mut max_pc = f64::NEG_INFINITY;
    for k in 0..instances {
        let pred = random_model(v, seed::derive(seed_value, stage::RANDOM_MODEL, k as u64));
        let report = score(pred.view(), v, "random")?;
        min_pc = min_pc.min(report.percent_correct);
        max_pc = max_pc.max(report.percent_correct);
        if let Some(a) = report.apre {
            apres.push(a);
        }
    }
    Ok(RandomSummary {
        mean_apre: if apres.is_empty() {
            None
        } else {
            Some(apres.iter().sum::<f64>() / apres.len() as f64)
        },
        min_percent_correct: min_pc,
        max_percent_correct: max_pc,
        instances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rollcall::Legislator;
    use ndarray::array;

    fn matrix(values: Array2<i8>) -> VoteMatrix {
        let n = values.nrows();
        let m = values.ncols();
        VoteMatrix::new(
            (0..n)
                .map(|i| Legislator {
                    id: format!("L{i}"),
                    name: String::new(),
                    party: "A".to_string(),
                    region: None,
                })
                .collect(),
            (0..m).map(|j| format!("v{j}")).collect(),
            values,
        )
        .unwrap()
    }

    #[test]
    fn sign_prediction_rules() {
        // Vote 0 passes (2 yea / 1 nay), vote 1 fails.
        let v = matrix(array![[1, -1], [1, -1], [-1, 1]]);
        let approx = array![[0.3, -1e-12], [0.0, 0.0], [-2.0, 5.0]];
        let pred = predict_signs(approx.view(), &v);
        assert_eq!(pred[[0, 0]], 1); // positive entry
        assert_eq!(pred[[0, 1]], -1); // sign, not threshold
        assert_eq!(pred[[1, 0]], 1); // exact zero -> majority (passed)
        assert_eq!(pred[[1, 1]], -1); // exact zero -> majority (failed)
        assert_eq!(pred[[2, 0]], -1);
    }

    #[test]
    fn perfect_predictor_scores_100() {
        let v = matrix(array![[1, -1, 0], [1, 1, -1], [-1, -1, 1], [-1, 1, 1]]);
        let pred = v.values().clone();
        let report = score(pred.view(), &v, "perfect").unwrap();
        assert_eq!(report.percent_correct, 100.0);
        assert_eq!(report.apre, Some(1.0));
        assert_eq!(report.n_cast, 11);
    }

    #[test]
    fn minority_model_apre_exactly_zero() {
        let mut state = 777u64;
        for trial in 0..10 {
            let n = 8 + trial % 5;
            let m = 6 + trial % 7;
            let values = Array2::from_shape_fn((n, m), |_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                match state >> 62 {
                    0 => 1i8,
                    1 => -1,
                    2 => 1,
                    _ => -1,
                }
            });
            let v = matrix(values);
            let pred = minority_model(&v);
            let report = score(pred.view(), &v, "minority").unwrap();
            // APRE is None only when every vote is unanimous.
            if let Some(a) = report.apre {
                assert_eq!(a, 0.0, "trial {trial}");
            }
        }
    }

    #[test]
    fn minority_model_tie_predicts_yea() {
        let v = matrix(array![[1, 1], [-1, 1], [1, -1], [-1, -1]]);
        let pred = minority_model(&v);
        for i in 0..4 {
            assert_eq!(pred[[i, 0]], 1); // 2-2 tie -> +1
        }
    }

    #[test]
    fn random_model_preserves_cast_margins() {
        let v = matrix(array![
            [1, -1, 0],
            [1, 0, 1],
            [-1, 1, 1],
            [-1, -1, -1],
            [1, 1, 0]
        ]);
        for seed_value in [1u64, 2] {
            let pred = random_model(&v, seed_value);
            for j in 0..3 {
                let (yea, nay) = v.margins(j);
                let mut got_yea = 0;
                let mut got_nay = 0;
                for i in 0..5 {
                    if v.values()[[i, j]] != 0 {
                        match pred[[i, j]] {
                            1 => got_yea += 1,
                            -1 => got_nay += 1,
                            other => panic!("prediction must be +1/-1, got {other}"),
                        }
                    }
                }
                assert_eq!((got_yea, got_nay), (yea, nay));
            }
        }
        assert_ne!(random_model(&v, 1), random_model(&v, 2));
    }

    #[test]
    fn random_model_half_split_near_fifty_percent() {
        // One 10/10 vote; percent correct averaged over 1000 seeds.
        let values = Array2::from_shape_fn((20, 1), |(i, _)| if i < 10 { 1i8 } else { -1 });
        let v = matrix(values);
        let mut total = 0.0;
        for k in 0..1000u64 {
            let pred = random_model(&v, k);
            total += score(pred.view(), &v, "random").unwrap().percent_correct;
        }
        let mean = total / 1000.0;
        assert!((mean - 50.0).abs() < 3.0, "mean percent correct {mean}");
    }

    #[test]
    fn abstentions_never_affect_scores() {
        let v = matrix(array![[1, 0, -1], [0, 1, 1], [-1, -1, 0], [1, 1, -1]]);
        let base = minority_model(&v);
        let mut flipped = base.clone();
        for ((i, j), &actual) in v.values().indexed_iter() {
            if actual == 0 {
                flipped[[i, j]] = -flipped[[i, j]];
            }
        }
        let a = score(base.view(), &v, "m").unwrap();
        let b = score(flipped.view(), &v, "m").unwrap();
        assert_eq!(a.percent_correct, b.percent_correct);
        assert_eq!(a.apre, b.apre);
        assert_eq!(a.per_vote_errors, b.per_vote_errors);
    }

    #[test]
    fn abstention_penalty_flag() {
        let v = matrix(array![[1, 0], [0, -1], [1, -1]]);
        let pred = v.values().clone();
        let strict = score_with(
            pred.view(),
            &v,
            "m",
            ScoreOptions {
                abstentions_always_wrong: true,
            },
        )
        .unwrap();
        // 4 cast entries correct, 2 abstentions charged as errors.
        assert_eq!(strict.n_cast, 6);
        assert!((strict.percent_correct - 100.0 * 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn unanimous_votes_apre_undefined() {
        let v = matrix(array![[1, -1], [1, -1], [1, -1]]);
        let pred = minority_model(&v);
        let report = score(pred.view(), &v, "m").unwrap();
        assert_eq!(report.apre, None);
        assert_eq!(report.percent_correct, 100.0);
    }

    #[test]
    fn random_summary_bounds() {
        let values = Array2::from_shape_fn((12, 8), |(i, j)| {
            if (i + j) % 3 == 0 {
                1i8
            } else {
                -1
            }
        });
        let v = matrix(values);
        let summary = random_model_summary(&v, 10, 7).unwrap();
        assert!(summary.min_percent_correct <= summary.max_percent_correct);
        assert!(summary.mean_apre.is_some());
        assert_eq!(summary.instances, 10);
    }
}
