//! Scoring estimated profiles against the truth behind a synthetic corpus.

use serde::{Deserialize, Serialize};

use super::{StateProfiles, TruthRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryScore {
    /// Mean total-variation distance over aligned topics.
    pub phi: f64,
    /// Mean total-variation distance over aligned states.
    pub psi: f64,
    /// Mean total-variation distance over transition rows with enough
    /// observed transitions.
    pub pi: f64,
    pub pi_rows: usize,
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

// Repeatedly pairs the closest remaining (true, estimated) rows; ties by
// index. Returns est_index[true_index].
fn greedy_match(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (cost[i][j], i, j))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, i, j) in pairs {
        if out[i] == usize::MAX && !used[j] {
            out[i] = j;
            used[j] = true;
        }
    }
    out
}

/// Aligns estimated topics to true topics by phi distance, then states by
/// psi plus (aligned) theta distance, and reports mean distances. Pi rows
/// count only when the truth has at least `min_transitions` transitions out
/// of that (state, category) pair.
pub fn recovery_score(record: &TruthRecord, est: &StateProfiles, min_transitions: usize) -> RecoveryScore {
    let h = &record.hyper;
    let truth = &record.profiles;
    let topic_cost: Vec<Vec<f64>> = truth
        .phi
        .iter()
        .map(|t| est.phi.iter().map(|e| total_variation(t, e)).collect())
        .collect();
    let topic_map = greedy_match(&topic_cost);
    let state_cost: Vec<Vec<f64>> = (0..h.states)
        .map(|c| {
            (0..h.states)
                .map(|e| {
                    let theta: Vec<f64> = topic_map.iter().map(|&j| est.theta[e][j]).collect();
                    total_variation(&truth.psi[c], &est.psi[e]) + total_variation(&truth.theta[c], &theta)
                })
                .collect()
        })
        .collect();
    let state_map = greedy_match(&state_cost);

    let phi = (0..h.topics).map(|j| topic_cost[j][topic_map[j]]).sum::<f64>() / h.topics as f64;
    let psi = (0..h.states)
        .map(|c| total_variation(&truth.psi[c], &est.psi[state_map[c]]))
        .sum::<f64>()
        / h.states as f64;

    let mut observed = vec![vec![0usize; h.categories]; h.states];
    for (states, cats) in record.states.iter().zip(&record.categories) {
        for t in 0..states.len().saturating_sub(1) {
            observed[states[t]][cats[t]] += 1;
        }
    }
    let (mut total, mut rows) = (0.0, 0);
    for c in 0..h.states {
        for b in 0..h.categories {
            if observed[c][b] >= min_transitions {
                let row: Vec<f64> = state_map.iter().map(|&e| est.pi[state_map[c]][b][e]).collect();
                total += total_variation(&truth.pi[c][b], &row);
                rows += 1;
            }
        }
    }
    RecoveryScore {
        phi,
        psi,
        pi: if rows == 0 { 0.0 } else { total / rows as f64 },
        pi_rows: rows,
    }
}
