//! AdaBoost identification of the votes that best separate clusters.
//!
//! Weak learners are decision stumps on single vote columns: a
//! threshold over the ordered vote alphabet {-1, 0, +1} (midpoints
//! -0.5 and +0.5) with either polarity. Boosting runs one-vs-one over
//! cluster pairs; a vote's importance is the sum of the stump weights
//! `alpha_t` over the rounds that picked it. Abstention participates as
//! an ordinary feature value.

use serde::Serialize;

use crate::error::{PdmError, Result};
use crate::rollcall::VoteMatrix;

#[derive(Debug, Clone)]
pub struct BoostConfig {
    pub rounds: usize,
    /// Votes kept per cluster pair when assembling the selected set.
    pub top_k: usize,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self { rounds: 50, top_k: 10 }
    }
}

/// Cap applied to a perfect stump's weight (training error zero).
const ALPHA_CAP: f64 = 9.210340371976184; // ln(1e8) / 2

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoostOutcome {
    /// All requested rounds ran.
    CompletedRounds,
    /// A zero-error stump was found; boosting halts.
    PerfectSeparation,
    /// No stump beat chance under the current weights.
    Inseparable,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankedVote {
    pub vote_idx: usize,
    pub vote_id: String,
    /// Aggregate stump weight (sum of alpha over selecting rounds).
    pub weight: f64,
    pub rounds_selected: usize,
}

/// Result of boosting one cluster pair.
#[derive(Debug, Clone, Serialize)]
pub struct PairBoost {
    pub cluster_a: usize,
    pub cluster_b: usize,
    pub ranked: Vec<RankedVote>,
    pub rounds_run: usize,
    /// Ensemble training error (margin <= 0 counts as an error).
    pub training_error: f64,
    /// Product of 2 sqrt(eps (1 - eps)) over rounds; bounds the
    /// training error from above.
    pub error_bound: f64,
    pub outcome: BoostOutcome,
}

#[derive(Debug, Clone, Copy)]
struct Stump {
    col: usize,
    threshold: f64,
    polarity: i8,
}

impl Stump {
    fn predict(&self, value: f64) -> f64 {
        let raw = if value > self.threshold { 1.0 } else { -1.0 };
        raw * self.polarity as f64
    }
}

/// Binary AdaBoost over vote-column stumps for two disjoint member
/// sets. Labels: `members_a` +1, `members_b` -1.
pub fn adaboost_pair(
    v: &VoteMatrix,
    members_a: &[usize],
    members_b: &[usize],
    config: &BoostConfig,
) -> Result<PairBoost> {
    if members_a.is_empty() || members_b.is_empty() {
        return Err(PdmError::Parameter("both member sets must be nonempty".to_string()));
    }
    if members_a.iter().any(|i| members_b.contains(i)) {
        return Err(PdmError::Parameter("member sets must be disjoint".to_string()));
    }
    if config.rounds == 0 {
        return Err(PdmError::Parameter("rounds must be >= 1".to_string()));
    }

    let samples: Vec<usize> = members_a.iter().chain(members_b.iter()).copied().collect();
    let labels: Vec<f64> = members_a
        .iter()
        .map(|_| 1.0)
        .chain(members_b.iter().map(|_| -1.0))
        .collect();
    let n = samples.len();
    let m = v.n_votes();
    let values = v.values();

    let mut weights = vec![1.0 / n as f64; n];
    let mut score = vec![0.0f64; n];
    let mut agg_weight = vec![0.0f64; m];
    let mut agg_rounds = vec![0usize; m];
    let mut error_bound = 1.0;
    let mut rounds_run = 0;
    let mut outcome = BoostOutcome::CompletedRounds;

    'rounds: for _ in 0..config.rounds {
        // Exhaustive stump search in fixed order; strict improvement
        // keeps the first (lowest column) of any tie.
        let mut best: Option<(Stump, f64)> = None;
        for col in 0..m {
            for &threshold in &[-0.5, 0.5] {
                for &polarity in &[1i8, -1] {
                    let stump = Stump { col, threshold, polarity };
                    let mut err = 0.0;
                    for (s, &row) in samples.iter().enumerate() {
                        let pred = stump.predict(f64::from(values[[row, col]]));
                        if pred != labels[s] {
                            err += weights[s];
                        }
                    }
                    if best.is_none_or(|(_, e)| err < e) {
                        best = Some((stump, err));
                    }
                }
            }
        }
        let (stump, eps) = best.expect("at least one stump");

        if eps >= 0.5 {
            outcome = BoostOutcome::Inseparable;
            break 'rounds;
        }
        rounds_run += 1;
        error_bound *= 2.0 * (eps * (1.0 - eps)).sqrt();

        let alpha = if eps <= 0.0 {
            outcome = BoostOutcome::PerfectSeparation;
            ALPHA_CAP
        } else {
            0.5 * ((1.0 - eps) / eps).ln()
        };
        agg_weight[stump.col] += alpha;
        agg_rounds[stump.col] += 1;
        for (s, &row) in samples.iter().enumerate() {
            let pred = stump.predict(f64::from(values[[row, stump.col]]));
            score[s] += alpha * pred;
        }
        if outcome == BoostOutcome::PerfectSeparation {
            break 'rounds;
        }

        // Exponential reweighting.
        for (s, &row) in samples.iter().enumerate() {
            let pred = stump.predict(f64::from(values[[row, stump.col]]));
            weights[s] *= (-alpha * labels[s] * pred).exp();
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
    }

    let training_error = score
        .iter()
        .zip(labels.iter())
        .filter(|&(s, y)| s * y <= 0.0)
        .count() as f64
        / n as f64;
    if rounds_run == 0 {
        // No usable stump at all; the bound is vacuous.
        error_bound = 1.0;
    }

    let mut ranked: Vec<RankedVote> = (0..m)
        .filter(|&col| agg_weight[col] > 0.0)
        .map(|col| RankedVote {
            vote_idx: col,
            vote_id: v.vote_ids()[col].clone(),
            weight: agg_weight[col],
            rounds_selected: agg_rounds[col],
        })
        .collect();
    ranked.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap()
            .then(a.vote_idx.cmp(&b.vote_idx))
    });

    Ok(PairBoost {
        cluster_a: 0,
        cluster_b: 1,
        ranked,
        rounds_run,
        training_error,
        error_bound,
        outcome,
    })
}

/// One row of the yea-percentage table.
#[derive(Debug, Clone, Serialize)]
pub struct YeaRow {
    pub vote_idx: usize,
    pub vote_id: String,
    /// Percent of each cluster's cast votes that are yea, rounded to
    /// integer; `None` when the cluster cast no votes on this roll call.
    pub pct_by_cluster: Vec<Option<u32>>,
}

/// Separating votes for every cluster pair plus the yea table over the
/// union of the top selections.
#[derive(Debug, Clone, Serialize)]
pub struct SeparatingVotes {
    pub pairs: Vec<PairBoost>,
    /// Union of each pair's top-k votes, in vote order.
    pub selected: Vec<usize>,
    pub yea_table: Vec<YeaRow>,
    pub cluster_sizes: Vec<usize>,
    /// Labels of single-member clusters (results there rest on one
    /// sample).
    pub small_clusters: Vec<usize>,
}

/// Run pairwise boosting over all unordered cluster pairs and tabulate
/// yea percentages for the selected votes.
pub fn explain_clusters(
    v: &VoteMatrix,
    members_per_cluster: &[Vec<usize>],
    config: &BoostConfig,
) -> Result<SeparatingVotes> {
    let k = members_per_cluster.len();
    let nonempty = members_per_cluster.iter().filter(|m| !m.is_empty()).count();
    if nonempty < 2 {
        return Err(PdmError::Parameter(format!(
            "need at least 2 nonempty clusters, got {nonempty}"
        )));
    }

    let mut pairs = Vec::new();
    let mut selected_set = vec![false; v.n_votes()];
    for a in 0..k {
        if members_per_cluster[a].is_empty() {
            continue;
        }
        for b in (a + 1)..k {
            if members_per_cluster[b].is_empty() {
                continue;
            }
            let mut pair =
                adaboost_pair(v, &members_per_cluster[a], &members_per_cluster[b], config)?;
            pair.cluster_a = a;
            pair.cluster_b = b;
            for ranked in pair.ranked.iter().take(config.top_k) {
                selected_set[ranked.vote_idx] = true;
            }
            pairs.push(pair);
        }
    }

    let selected: Vec<usize> = (0..v.n_votes()).filter(|&j| selected_set[j]).collect();
    let values = v.values();
    let yea_table = selected
        .iter()
        .map(|&col| {
            let pct_by_cluster = members_per_cluster
                .iter()
                .map(|members| {
                    let mut yea = 0u32;
                    let mut cast = 0u32;
                    for &i in members {
                        match values[[i, col]] {
                            1 => {
                                yea += 1;
                                cast += 1;
                            }
                            -1 => cast += 1,
                            _ => {}
                        }
                    }
                    if cast == 0 {
                        None
                    } else {
                        Some((100.0 * f64::from(yea) / f64::from(cast)).round() as u32)
                    }
                })
                .collect();
            YeaRow {
                vote_idx: col,
                vote_id: v.vote_ids()[col].clone(),
                pct_by_cluster,
            }
        })
        .collect();

    Ok(SeparatingVotes {
        pairs,
        selected,
        yea_table,
        cluster_sizes: members_per_cluster.iter().map(Vec::len).collect(),
        small_clusters: (0..k).filter(|&c| members_per_cluster[c].len() == 1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rollcall::Legislator;
    use ndarray::Array2;

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
    fn single_discriminating_column() {
        // Column 1 separates perfectly; column 0 is constant.
        let mut values = Array2::<i8>::zeros((8, 3));
        for i in 0..8 {
            values[[i, 0]] = 1;
            values[[i, 1]] = if i < 4 { 1 } else { -1 };
            values[[i, 2]] = if i % 2 == 0 { 1 } else { -1 };
        }
        let v = matrix(values);
        let pair = adaboost_pair(
            &v,
            &[0, 1, 2, 3],
            &[4, 5, 6, 7],
            &BoostConfig::default(),
        )
        .unwrap();
        assert_eq!(pair.outcome, BoostOutcome::PerfectSeparation);
        assert_eq!(pair.rounds_run, 1);
        assert_eq!(pair.training_error, 0.0);
        assert_eq!(pair.ranked[0].vote_idx, 1);
    }

    #[test]
    fn identical_clusters_inseparable() {
        let mut values = Array2::<i8>::zeros((6, 4));
        for i in 0..6 {
            for j in 0..4 {
                values[[i, j]] = if j % 2 == 0 { 1 } else { -1 };
            }
        }
        let v = matrix(values);
        let pair = adaboost_pair(&v, &[0, 1, 2], &[3, 4, 5], &BoostConfig::default()).unwrap();
        assert_eq!(pair.outcome, BoostOutcome::Inseparable);
        assert_eq!(pair.rounds_run, 0);
        assert!(pair.ranked.is_empty());
    }

    #[test]
    fn tie_prefers_lower_column() {
        // Columns 0 and 1 both separate perfectly.
        let mut values = Array2::<i8>::zeros((6, 2));
        for i in 0..6 {
            let side: i8 = if i < 3 { 1 } else { -1 };
            values[[i, 0]] = side;
            values[[i, 1]] = side;
        }
        let v = matrix(values);
        let pair = adaboost_pair(&v, &[0, 1, 2], &[3, 4, 5], &BoostConfig::default()).unwrap();
        assert_eq!(pair.ranked[0].vote_idx, 0);
    }

    #[test]
    fn training_error_bound_holds() {
        // Noisy but separable-ish fixture.
        let mut values = Array2::<i8>::zeros((12, 6));
        let mut state = 12345u64;
        for i in 0..12 {
            for j in 0..6 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let noise = (state >> 60) == 0; // 1/16 flips
                let side: i8 = if i < 6 { 1 } else { -1 };
                let base = if j % 2 == 0 { side } else { -side };
                values[[i, j]] = if noise { -base } else { base };
            }
        }
        let v = matrix(values);
        let pair = adaboost_pair(
            &v,
            &(0..6).collect::<Vec<_>>(),
            &(6..12).collect::<Vec<_>>(),
            &BoostConfig { rounds: 20, top_k: 5 },
        )
        .unwrap();
        assert!(
            pair.training_error <= pair.error_bound + 1e-12,
            "error {} exceeds bound {}",
            pair.training_error,
            pair.error_bound
        );
    }

    #[test]
    fn ranking_invariant_under_within_cluster_permutation() {
        let mut values = Array2::<i8>::zeros((10, 5));
        let mut state = 99u64;
        for i in 0..10 {
            for j in 0..5 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let flip = (state >> 61) == 0;
                let side: i8 = if i < 5 { 1 } else { -1 };
                let base = if j < 3 { side } else { -side };
                values[[i, j]] = if flip { 0 } else { base };
            }
        }
        let v = matrix(values);
        let cfg = BoostConfig { rounds: 10, top_k: 5 };
        let a = adaboost_pair(&v, &[0, 1, 2, 3, 4], &[5, 6, 7, 8, 9], &cfg).unwrap();
        let b = adaboost_pair(&v, &[4, 2, 0, 3, 1], &[9, 7, 8, 5, 6], &cfg).unwrap();
        let key = |p: &PairBoost| -> Vec<(usize, u64)> {
            p.ranked
                .iter()
                .map(|r| (r.vote_idx, r.weight.to_bits()))
                .collect()
        };
        assert_eq!(key(&a), key(&b));
    }

    #[test]
    fn yea_table_unanimous_split() {
        let mut values = Array2::<i8>::zeros((6, 2));
        for i in 0..6 {
            values[[i, 0]] = if i < 3 { 1 } else { -1 };
            values[[i, 1]] = if i < 3 { 1 } else { -1 };
        }
        // Add an abstention: member 0 abstains on vote 1.
        values[[0, 1]] = 0;
        let v = matrix(values);
        let sep = explain_clusters(
            &v,
            &[vec![0, 1, 2], vec![3, 4, 5]],
            &BoostConfig::default(),
        )
        .unwrap();
        let row0 = sep.yea_table.iter().find(|r| r.vote_idx == 0).unwrap();
        assert_eq!(row0.pct_by_cluster, vec![Some(100), Some(0)]);
        if let Some(row1) = sep.yea_table.iter().find(|r| r.vote_idx == 1) {
            // Two cast votes in cluster 0, both yea.
            assert_eq!(row1.pct_by_cluster[0], Some(100));
        }
    }

    #[test]
    fn abstention_excluded_from_denominator() {
        let mut values = Array2::<i8>::zeros((4, 2));
        // Vote 0 separates the clusters so it gets selected; vote 1
        // has one yea, one nay, two abstentions in cluster 0.
        values[[0, 0]] = 1;
        values[[1, 0]] = 1;
        values[[2, 0]] = -1;
        values[[3, 0]] = -1;
        values[[0, 1]] = 1;
        values[[1, 1]] = -1;
        let v = matrix(values);
        let sep = explain_clusters(&v, &[vec![0, 1], vec![2, 3]], &BoostConfig::default()).unwrap();
        if let Some(row) = sep.yea_table.iter().find(|r| r.vote_idx == 1) {
            assert_eq!(row.pct_by_cluster[0], Some(50));
            assert_eq!(row.pct_by_cluster[1], None);
        }
    }

    #[test]
    fn single_member_cluster_allowed() {
        let mut values = Array2::<i8>::zeros((4, 2));
        values[[0, 0]] = 1;
        for i in 1..4 {
            values[[i, 0]] = -1;
        }
        values[[0, 1]] = 1;
        values[[1, 1]] = 1;
        values[[2, 1]] = -1;
        values[[3, 1]] = -1;
        let v = matrix(values);
        let sep = explain_clusters(&v, &[vec![0], vec![1, 2, 3]], &BoostConfig::default()).unwrap();
        assert_eq!(sep.small_clusters, vec![0]);
        assert!(!sep.pairs.is_empty());
    }
}
