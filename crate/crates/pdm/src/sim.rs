//! Synthetic roll call generator driven by party loyalty, and the
//! experiment correlating the Fiedler vector with loyalty.
//!
//! A chamber of `n_members` (half per party) casts `n_votes` roll
//! calls. Each member's loyalty is drawn once from Beta(alpha, beta);
//! on each vote a party-line direction is drawn, and the member follows
//! their party's line with probability equal to their loyalty, else
//! votes the opposite. The Fiedler vector of the resulting correlation
//! network is then compared against the party-signed loyalty score.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::Serialize;

use crate::error::{PdmError, Result};
use crate::rollcall::{Legislator, VoteMatrix};
use crate::seed::{self, stage};
use crate::spectral::{pearson, SpectralGraph};

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_members: usize,
    pub n_votes: usize,
    /// First Beta parameter; larger means more loyal members.
    pub alpha: f64,
    /// Second Beta parameter; the loyalty model fixes this at 1.
    pub beta: f64,
    pub n_trials: usize,
    pub rng_seed: u64,
    pub sigma: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_members: 100,
            n_votes: 500,
            alpha: 10.0,
            beta: 1.0,
            n_trials: 1,
            rng_seed: 0,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub vote_matrix: VoteMatrix,
    /// Per-member loyalty in [0, 1].
    pub loyalty: Vec<f64>,
    /// Per-member party sign (+1 first half, -1 second half).
    pub party: Vec<i8>,
    /// Fiedler vector entries, indexed by member.
    pub fiedler: Vec<f64>,
    /// Pearson correlation of the Fiedler vector with the party-signed
    /// loyalty (loyalty * party sign). Eigenvector sign is arbitrary,
    /// so consumers usually take the absolute value.
    pub fiedler_loyalty_corr: f64,
    /// Mean over the two parties of the variance of Fiedler entries
    /// within the party; shrinks as loyalty concentrates.
    pub within_party_variance: f64,
}

/// Generate one simulated chamber and its Fiedler diagnostics.
pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    if config.n_members < 4 || !config.n_members.is_multiple_of(2) {
        return Err(PdmError::Parameter(format!(
            "n_members must be even and >= 4, got {}",
            config.n_members
        )));
    }
    if config.n_votes == 0 {
        return Err(PdmError::Parameter("n_votes must be >= 1".to_string()));
    }
    if config.alpha <= 0.0 || config.beta <= 0.0 {
        return Err(PdmError::Parameter(format!(
            "beta-distribution parameters must be positive, got alpha={} beta={}",
            config.alpha, config.beta
        )));
    }
    let n = config.n_members;
    let m = config.n_votes;
    let mut rng = seed::rng(config.rng_seed, stage::SIM_TRIAL, 0);
    let beta = Beta::new(config.alpha, config.beta)
        .map_err(|e| PdmError::Parameter(format!("beta distribution: {e}")))?;

    let loyalty: Vec<f64> = (0..n).map(|_| beta.sample(&mut rng)).collect();
    let party: Vec<i8> = (0..n).map(|i| if i < n / 2 { 1 } else { -1 }).collect();

    let mut values = Array2::<i8>::zeros((n, m));
    for j in 0..m {
        // Party-line direction for the +1 party; the other party holds
        // the opposite line.
        let line: i8 = if rng.random::<bool>() { 1 } else { -1 };
        for i in 0..n {
            let party_line = line * party[i];
            let follows = rng.random::<f64>() < loyalty[i];
            values[[i, j]] = if follows { party_line } else { -party_line };
        }
    }

    let legislators = (0..n)
        .map(|i| Legislator {
            id: format!("m{i:03}"),
            name: format!("Member {i:03}"),
            party: if party[i] == 1 { "A" } else { "B" }.to_string(),
            region: None,
        })
        .collect();
    let vote_ids = (0..m).map(|j| format!("v{:03}", j + 1)).collect();
    let vote_matrix = VoteMatrix::new(legislators, vote_ids, values)?;

    let data = vote_matrix.to_real();
    let graph = SpectralGraph::build(data.view(), config.sigma)?;
    let fv = graph.fiedler_vector();
    let mut fiedler = vec![0.0; n];
    for (row, &member) in graph.active_rows.iter().enumerate() {
        fiedler[member] = fv[row];
    }

    // Correlate against party-signed loyalty over the rows actually in
    // the graph (all of them, in practice).
    let signed: Vec<f64> = graph
        .active_rows
        .iter()
        .map(|&i| loyalty[i] * f64::from(party[i]))
        .collect();
    let fiedler_active: Vec<f64> = graph.active_rows.iter().map(|&i| fiedler[i]).collect();
    let fiedler_loyalty_corr = pearson(
        ndarray::ArrayView1::from(&fiedler_active),
        ndarray::ArrayView1::from(&signed),
    )
    .unwrap_or(0.0);

    let mut within = 0.0;
    for side in [1i8, -1] {
        let vals: Vec<f64> = graph
            .active_rows
            .iter()
            .filter(|&&i| party[i] == side)
            .map(|&i| fiedler[i])
            .collect();
        if vals.len() > 1 {
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            within += vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        }
    }
    let within_party_variance = within / 2.0;

    Ok(SimResult {
        vote_matrix,
        loyalty,
        party,
        fiedler,
        fiedler_loyalty_corr,
        within_party_variance,
    })
}

/// One (alpha, trial) cell of the sweep.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub alpha: f64,
    pub trial: usize,
    pub corr_abs: f64,
    pub within_party_variance: f64,
}

/// Per-member Fiedler values kept for a few alphas, enough to plot the
/// localization effect.
#[derive(Debug, Clone, Serialize)]
pub struct FiedlerSample {
    pub alpha: f64,
    pub member: usize,
    pub fiedler: f64,
    pub party: i8,
    pub loyalty: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub records: Vec<TrialRecord>,
    /// Mean of |corr| over all (alpha, trial) cells.
    pub mean_abs_corr: f64,
    /// Population variance of the same.
    pub var_abs_corr: f64,
    /// (alpha, mean |corr| over trials).
    pub per_alpha_mean: Vec<(f64, f64)>,
    /// (alpha, mean within-party Fiedler variance over trials).
    pub per_alpha_within_var: Vec<(f64, f64)>,
    pub fiedler_samples: Vec<FiedlerSample>,
}

/// Inclusive grid lo, lo+step, ... up to hi.
pub fn alpha_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && step > 0.0) {
        return Err(PdmError::Parameter(format!(
            "invalid alpha grid {lo}:{hi}:{step}"
        )));
    }
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let v = lo + f64::from(k) * step;
        if v > hi + 1e-9 {
            break;
        }
        out.push(v);
        k += 1;
    }
    Ok(out)
}

/// Sweep alphas, `n_trials` independent chambers each, recording the
/// absolute Fiedler/loyalty correlation and the localization measure.
/// Per-trial seeds derive from the master seed, alpha index, and trial
/// index, so any subset of the sweep reproduces exactly.
pub fn run_experiment(
    base: &SimConfig,
    alphas: &[f64],
    n_trials: usize,
    rng_seed: u64,
) -> Result<ExperimentSummary> {
    if alphas.is_empty() {
        return Err(PdmError::Parameter("alpha grid is empty".to_string()));
    }
    if n_trials == 0 {
        return Err(PdmError::Parameter("n_trials must be >= 1".to_string()));
    }
    let mut records = Vec::with_capacity(alphas.len() * n_trials);
    let mut per_alpha_mean = Vec::with_capacity(alphas.len());
    let mut per_alpha_within_var = Vec::with_capacity(alphas.len());
    let mut fiedler_samples = Vec::new();
    // Keep plot data for the ends and middle of the grid.
    let keep: Vec<usize> = if alphas.len() <= 3 {
        (0..alphas.len()).collect()
    } else {
        vec![0, alphas.len() / 2, alphas.len() - 1]
    };

    for (ai, &alpha) in alphas.iter().enumerate() {
        let mut corr_sum = 0.0;
        let mut var_sum = 0.0;
        for trial in 0..n_trials {
            let config = SimConfig {
                alpha,
                n_trials: 1,
                rng_seed: seed::derive(rng_seed, stage::SIM_TRIAL, ((ai as u64) << 32) | trial as u64),
                ..base.clone()
            };
            let result = simulate(&config)?;
            let corr_abs = result.fiedler_loyalty_corr.abs();
            corr_sum += corr_abs;
            var_sum += result.within_party_variance;
            records.push(TrialRecord {
                alpha,
                trial,
                corr_abs,
                within_party_variance: result.within_party_variance,
            });
            if trial == 0 && keep.contains(&ai) {
                for member in 0..result.loyalty.len() {
                    fiedler_samples.push(FiedlerSample {
                        alpha,
                        member,
                        fiedler: result.fiedler[member],
                        party: result.party[member],
                        loyalty: result.loyalty[member],
                    });
                }
            }
        }
        per_alpha_mean.push((alpha, corr_sum / n_trials as f64));
        per_alpha_within_var.push((alpha, var_sum / n_trials as f64));
    }

    let all: Vec<f64> = records.iter().map(|r| r.corr_abs).collect();
    let mean = all.iter().sum::<f64>() / all.len() as f64;
    let var = all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / all.len() as f64;
    Ok(ExperimentSummary {
        records,
        mean_abs_corr: mean,
        var_abs_corr: var,
        per_alpha_mean,
        per_alpha_within_var,
        fiedler_samples,
    })
}

/// Spearman rank correlation (average ranks on ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                out[k] = avg;
            }
            i = j + 1;
        }
        out
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(
        ndarray::ArrayView1::from(&rx),
        ndarray::ArrayView1::from(&ry),
    )
    .unwrap_or(0.0)
}
