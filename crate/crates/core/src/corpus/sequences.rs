use serde::{Deserialize, Serialize};

use super::{Corpus, EffType, SocialCategory, Vocabulary};
use crate::{Error, Result};

/// One document as seen by the state model: its type index and word ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqDocument {
    pub doc_type: usize,
    pub tokens: Vec<u32>,
}

/// All documents of one user in one active week.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimePoint {
    pub week: u32,
    /// Social-connection category index (S1 = 0 .. S7 = 6 for real corpora).
    pub category: usize,
    pub docs: Vec<SeqDocument>,
}

impl TimePoint {
    pub fn n_tokens(&self) -> usize {
        self.docs.iter().map(|d| d.tokens.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    pub user: String,
    pub steps: Vec<TimePoint>,
}

/// Model input: per-user sequences of active weeks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceSet {
    pub vocab: Vocabulary,
    /// Number of document types (`D`).
    pub doc_types: usize,
    /// Number of social categories (`A`).
    pub categories: usize,
    pub sequences: Vec<Sequence>,
}

impl SequenceSet {
    pub fn empty(vocab: Vocabulary) -> Self {
        Self {
            vocab,
            doc_types: EffType::COUNT,
            categories: SocialCategory::COUNT,
            sequences: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn n_timepoints(&self) -> usize {
        self.sequences.iter().map(|s| s.steps.len()).sum()
    }

    pub fn n_tokens(&self) -> usize {
        self.sequences
            .iter()
            .flat_map(|s| &s.steps)
            .map(TimePoint::n_tokens)
            .sum()
    }

    /// Checks that every index is in range and no time point is empty.
    pub fn validate(&self) -> Result<()> {
        let v = self.vocab.len() as u32;
        for seq in &self.sequences {
            if seq.steps.is_empty() {
                return Err(Error::InvalidInput(format!("sequence of `{}` is empty", seq.user)));
            }
            for tp in &seq.steps {
                if tp.category >= self.categories {
                    return Err(Error::InvalidInput(format!(
                        "category {} out of range in sequence `{}`",
                        tp.category, seq.user
                    )));
                }
                if tp.docs.is_empty() {
                    return Err(Error::InvalidInput(format!(
                        "week {} of `{}` has no documents",
                        tp.week, seq.user
                    )));
                }
                for doc in &tp.docs {
                    if doc.doc_type >= self.doc_types {
                        return Err(Error::InvalidInput(format!(
                            "document type {} out of range",
                            doc.doc_type
                        )));
                    }
                    if let Some(w) = doc.tokens.iter().find(|&&w| w >= v) {
                        return Err(Error::InvalidInput(format!("word id {w} out of vocabulary")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Buckets each user's documents into active weeks.
///
/// Weeks without documents are omitted, so a user active in weeks {1, 4}
/// gets a sequence of two time points. Users without documents do not
/// appear.
pub fn build_sequences(corpus: &Corpus) -> SequenceSet {
    let mut set = SequenceSet::empty(corpus.vocab.clone());
    for (user, weeks) in corpus.documents_by_user_week() {
        let steps = weeks
            .into_iter()
            .map(|(week, docs)| TimePoint {
                week,
                category: corpus.social_category(user, week).index(),
                docs: docs
                    .into_iter()
                    .map(|d| SeqDocument {
                        doc_type: d.eff_type.index(),
                        tokens: d.tokens.clone(),
                    })
                    .collect(),
            })
            .collect();
        set.sequences.push(Sequence {
            user: user.to_owned(),
            steps,
        });
    }
    set
}
