use serde::Serialize;

use crate::sttm::StateProfiles;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryTopic {
    pub topic: usize,
    pub weight: f64,
    pub words: Vec<String>,
}

/// One row of the learned-state table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSummary {
    pub state: usize,
    pub topics: Vec<SummaryTopic>,
    /// Document-type distribution rounded to two decimals.
    pub doc_types: Vec<f64>,
}

impl StateSummary {
    /// `t3: w1 w2 w3 | t7: ...`
    pub fn topics_cell(&self) -> String {
        self.topics
            .iter()
            .map(|t| format!("t{}: {}", t.topic, t.words.join(" ")))
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

// Indices of the `k` largest entries, largest first, ties by index.
fn top_indices(row: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// For each state: its `top_topics` most probable topics, each with its
/// `top_k` most probable words, and the rounded document-type row.
pub fn state_summary(profiles: &StateProfiles, top_topics: usize, top_k: usize) -> Vec<StateSummary> {
    profiles
        .theta
        .iter()
        .enumerate()
        .map(|(state, theta)| StateSummary {
            state,
            topics: top_indices(theta, top_topics)
                .into_iter()
                .map(|topic| SummaryTopic {
                    topic,
                    weight: theta[topic],
                    words: top_indices(&profiles.phi[topic], top_k)
                        .into_iter()
                        .map(|w| profiles.vocab.word(w as u32).unwrap_or("?").to_string())
                        .collect(),
                })
                .collect(),
            doc_types: profiles.psi[state].iter().map(|&p| round2(p)).collect(),
        })
        .collect()
}
