use serde::{Deserialize, Serialize};

use super::StateProfiles;
use crate::corpus::{SeqDocument, SequenceSet, TimePoint, Vocabulary};
use crate::{Error, Result};

/// Word id for tokens absent from the profiles' vocabulary.
pub const OOV: u32 = u32::MAX;

const EM_MAX_ITERS: usize = 200;
const EM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedSequence {
    pub states: Vec<usize>,
    /// Log-probability of the decoded path together with the observations.
    pub log_score: f64,
    /// Maximum-likelihood topic mixture of each time point given its state.
    pub topic_mix: Vec<Vec<f64>>,
}

/// Maps every token of `set` onto `vocab` by its string; unknown words
/// become [`OOV`].
pub fn remap_to_vocab(set: &SequenceSet, vocab: &Vocabulary) -> Vec<Vec<TimePoint>> {
    set.sequences
        .iter()
        .map(|seq| {
            seq.steps
                .iter()
                .map(|tp| TimePoint {
                    week: tp.week,
                    category: tp.category,
                    docs: tp
                        .docs
                        .iter()
                        .map(|d| SeqDocument {
                            doc_type: d.doc_type,
                            tokens: d
                                .tokens
                                .iter()
                                .map(|&w| set.vocab.word(w).and_then(|s| vocab.get(s)).unwrap_or(OOV))
                                .collect(),
                        })
                        .collect(),
                })
                .collect()
        })
        .collect()
}

// Per-state log emission of one time point; OOV words are skipped.
fn emission_scores(p: &StateProfiles, tp: &TimePoint, word_mix: &[Vec<f64>]) -> Vec<f64> {
    let v = p.vocab.len() as u32;
    (0..p.hyper.states)
        .map(|c| {
            tp.docs
                .iter()
                .map(|doc| {
                    let words: f64 = doc
                        .tokens
                        .iter()
                        .filter(|&&w| w < v)
                        .map(|&w| word_mix[c][w as usize].ln())
                        .sum();
                    p.psi[c][doc.doc_type].ln() + words
                })
                .sum()
        })
        .collect()
}

fn check_inputs(p: &StateProfiles, steps: &[TimePoint]) -> Result<()> {
    if steps.is_empty() {
        return Err(Error::EmptySequence);
    }
    for tp in steps {
        if tp.category >= p.hyper.categories {
            return Err(Error::InvalidInput(format!("category {} out of range", tp.category)));
        }
        if let Some(d) = tp.docs.iter().find(|d| d.doc_type >= p.hyper.doc_types) {
            return Err(Error::InvalidInput(format!("document type {} out of range", d.doc_type)));
        }
    }
    Ok(())
}

/// Most probable state path of an unseen sequence under fixed profiles.
///
/// Scores are computed in log space. Among equally scored predecessors and
/// final states the lowest index wins, so ties resolve toward the path
/// that is smallest when read from the last time point backwards.
pub fn viterbi_decode(p: &StateProfiles, steps: &[TimePoint]) -> Result<DecodedSequence> {
    check_inputs(p, steps)?;
    let s = p.hyper.states;
    let v = p.vocab.len();

    // word_mix[c][w] = sum_j theta[c][j] * phi[j][w]
    let word_mix: Vec<Vec<f64>> = (0..s)
        .map(|c| {
            (0..v)
                .map(|w| p.theta[c].iter().zip(&p.phi).map(|(th, phi)| th * phi[w]).sum())
                .collect()
        })
        .collect();

    let mut score: Vec<f64> = emission_scores(p, &steps[0], &word_mix)
        .iter()
        .enumerate()
        .map(|(c, e)| p.init[steps[0].category][c].ln() + e)
        .collect();
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(steps.len());

    for t in 1..steps.len() {
        let a_prev = steps[t - 1].category;
        let emit = emission_scores(p, &steps[t], &word_mix);
        let mut next = vec![f64::NEG_INFINITY; s];
        let mut arg = vec![0; s];
        for c in 0..s {
            for prev in 0..s {
                let cand = score[prev] + p.pi[prev][a_prev][c].ln();
                if cand > next[c] {
                    next[c] = cand;
                    arg[c] = prev;
                }
            }
            next[c] += emit[c];
        }
        back.push(arg);
        score = next;
    }

    let mut last = 0;
    for c in 1..s {
        if score[c] > score[last] {
            last = c;
        }
    }
    let log_score = score[last];
    let mut states = vec![last; steps.len()];
    for t in (1..steps.len()).rev() {
        states[t - 1] = back[t - 1][states[t]];
    }

    let topic_mix = steps
        .iter()
        .zip(&states)
        .map(|(tp, &c)| topic_mle(p, tp, c))
        .collect();

    Ok(DecodedSequence {
        states,
        log_score,
        topic_mix,
    })
}

/// Maximum-likelihood topic proportions of one time point with the topics
/// held fixed (EM on the mixture weights, started from the state's topic
/// distribution). Time points without in-vocabulary words keep the state's
/// distribution.
fn topic_mle(p: &StateProfiles, tp: &TimePoint, state: usize) -> Vec<f64> {
    let v = p.vocab.len() as u32;
    let words: Vec<usize> = tp
        .docs
        .iter()
        .flat_map(|d| d.tokens.iter())
        .filter(|&&w| w < v)
        .map(|&w| w as usize)
        .collect();
    let mut mix = p.theta[state].clone();
    if words.is_empty() {
        return mix;
    }
    let z = mix.len();
    for _ in 0..EM_MAX_ITERS {
        let mut acc = vec![0.0; z];
        for &w in &words {
            let resp: Vec<f64> = (0..z).map(|j| mix[j] * p.phi[j][w]).collect();
            let total: f64 = resp.iter().sum();
            for j in 0..z {
                acc[j] += resp[j] / total;
            }
        }
        let n = words.len() as f64;
        let updated: Vec<f64> = acc.iter().map(|a| a / n).collect();
        let delta = updated
            .iter()
            .zip(&mix)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        mix = updated;
        if delta < EM_TOL {
            break;
        }
    }
    mix
}
