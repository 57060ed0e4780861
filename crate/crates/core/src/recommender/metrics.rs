use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapReport {
    pub map: f64,
    pub evaluated: usize,
    /// Users with held-out positives but no candidates.
    pub skipped: Vec<String>,
}

/// Average precision of `positives` in `ranked`; positives missing from
/// the ranking count as never retrieved.
pub fn average_precision(ranked: &[&str], positives: &BTreeSet<String>) -> f64 {
    if positives.is_empty() {
        return 0.0;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, d) in ranked.iter().enumerate() {
        if positives.contains(*d) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    sum / positives.len() as f64
}

/// Mean over users of the average precision of their held-out positives
/// when their candidates are ranked by descending score (ties by id).
/// Users without held-out positives are ignored; users without candidates
/// are skipped and listed in the report.
pub fn evaluate_map<F>(
    score: F,
    held_out: &BTreeMap<String, BTreeSet<String>>,
    candidates: &BTreeMap<String, Vec<String>>,
) -> MapReport
where
    F: Fn(&str, &str) -> f64,
{
    let mut total = 0.0;
    let mut evaluated = 0;
    let mut skipped = Vec::new();
    for (user, positives) in held_out {
        if positives.is_empty() {
            continue;
        }
        let cands = match candidates.get(user) {
            Some(c) if !c.is_empty() => c,
            _ => {
                skipped.push(user.clone());
                continue;
            }
        };
        let mut scored: Vec<(f64, &str)> = cands.iter().map(|d| (score(user, d), d.as_str())).collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
        let ranked: Vec<&str> = scored.into_iter().map(|(_, d)| d).collect();
        total += average_precision(&ranked, positives);
        evaluated += 1;
    }
    MapReport {
        map: if evaluated == 0 { 0.0 } else { total / evaluated as f64 },
        evaluated,
        skipped,
    }
}

/// Per-user split of participation pairs: each user's pairs are shuffled
/// and about two thirds (at least one) go to training. A user with a
/// single pair keeps it in training.
pub fn split_per_user(pairs: &[(String, String)], seed: u64) -> (Vec<(String, String)>, Vec<(String, String)>) {
    let mut by_user: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (u, d) in pairs {
        by_user.entry(u).or_default().insert(d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (u, ds) in by_user {
        let mut ds: Vec<&str> = ds.into_iter().collect();
        ds.shuffle(&mut rng);
        let n_train = ((2 * ds.len()) as f64 / 3.0).round().max(1.0) as usize;
        for (i, d) in ds.into_iter().enumerate() {
            let pair = (u.to_string(), d.to_string());
            if i < n_train {
                train.push(pair);
            } else {
                test.push(pair);
            }
        }
    }
    (train, test)
}

/// Groups pairs by user.
pub fn by_user(pairs: &[(String, String)]) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (u, d) in pairs {
        out.entry(u.clone()).or_default().insert(d.clone());
    }
    out
}
