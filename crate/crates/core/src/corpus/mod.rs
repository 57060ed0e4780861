//! Ingestion and preprocessing of multi-platform discourse data.

mod categories;
pub(crate) mod io;
mod sequences;
mod text;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use categories::{
    derive_social_category, goal_category_at, GoalCategory, GoalNote, SocialCategory,
};
pub use io::{load_corpus_files, read_documents, read_follows, read_goal_labels};
pub use sequences::{build_sequences, SeqDocument, Sequence, SequenceSet, TimePoint};
pub use text::{
    classify_tweet_relevance, is_stop_word, tokenize, Relevance, Vocabulary, DEFAULT_HASHTAGS,
    IRRELEVANT_TOKEN, STOP_WORDS,
};

pub const SECONDS_PER_WEEK: i64 = 604_800;

/// Source platform of a raw document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RawDocType {
    GoalNote,
    ProsoloPost,
    BlogPost,
    Tweet,
}

/// The six effective document types seen by the state model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EffType {
    RelGoalNote,
    IrGoalNote,
    Post,
    Blog,
    RelTweet,
    IrTweet,
}

impl EffType {
    pub const ALL: [EffType; 6] = [
        EffType::RelGoalNote,
        EffType::IrGoalNote,
        EffType::Post,
        EffType::Blog,
        EffType::RelTweet,
        EffType::IrTweet,
    ];

    pub const COUNT: usize = 6;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            EffType::RelGoalNote => "RelGoalNote",
            EffType::IrGoalNote => "IrGoalNote",
            EffType::Post => "Post",
            EffType::Blog => "Blog",
            EffType::RelTweet => "RelTweet",
            EffType::IrTweet => "IrTweet",
        }
    }

    /// Whether a raw document of type `raw` may be mapped to `self`.
    pub fn reachable_from(self, raw: RawDocType) -> bool {
        matches!(
            (raw, self),
            (RawDocType::GoalNote, EffType::RelGoalNote | EffType::IrGoalNote)
                | (RawDocType::ProsoloPost, EffType::Post)
                | (RawDocType::BlogPost, EffType::Blog)
                | (RawDocType::Tweet, EffType::RelTweet | EffType::IrTweet)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDocument {
    pub doc_id: String,
    pub user_id: String,
    pub timestamp: i64,
    pub doc_type: RawDocType,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessedDocument {
    pub doc_id: String,
    pub user_id: String,
    pub timestamp: i64,
    pub week_index: u32,
    pub raw_type: RawDocType,
    pub eff_type: EffType,
    pub tokens: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FollowEdge {
    pub follower: String,
    pub followee: String,
    pub week_index: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalLabel {
    pub doc_id: String,
    pub contains_goal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusConfig {
    /// UTC seconds of the start of week 0.
    pub course_start: i64,
    pub hashtags: Vec<String>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            course_start: 0,
            hashtags: DEFAULT_HASHTAGS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl CorpusConfig {
    /// Week index of a timestamp; activity before the course start falls
    /// into week 0.
    pub fn week_of(&self, timestamp: i64) -> u32 {
        let offset = timestamp - self.course_start;
        if offset < 0 {
            0
        } else {
            (offset / SECONDS_PER_WEEK) as u32
        }
    }
}

/// A loaded, validated and preprocessed corpus.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub config: CorpusConfig,
    pub vocab: Vocabulary,
    /// Preprocessed documents, sorted by (user, timestamp, doc id).
    pub documents: Vec<ProcessedDocument>,
    /// Raw documents whose content was entirely removed by preprocessing.
    pub dropped_empty: Vec<String>,
    pub follows: Vec<FollowEdge>,
    users: BTreeSet<String>,
    goal_notes: HashMap<String, Vec<GoalNote>>,
}

impl Corpus {
    pub fn build(
        raw: Vec<RawDocument>,
        follows: Vec<FollowEdge>,
        labels: Vec<GoalLabel>,
        config: CorpusConfig,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for doc in &raw {
            if !seen.insert(doc.doc_id.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate doc_id `{}`", doc.doc_id)));
            }
            if doc.timestamp < 0 {
                return Err(Error::InvalidInput(format!(
                    "document `{}` has a negative timestamp",
                    doc.doc_id
                )));
            }
        }

        let mut pairs = HashSet::new();
        for e in &follows {
            if e.follower == e.followee {
                return Err(Error::InvalidInput(format!("`{}` follows themselves", e.follower)));
            }
            if !pairs.insert((e.follower.as_str(), e.followee.as_str())) {
                return Err(Error::InvalidInput(format!(
                    "duplicate follow edge {} -> {}",
                    e.follower, e.followee
                )));
            }
        }

        let goal_note_ids: HashSet<&str> = raw
            .iter()
            .filter(|d| d.doc_type == RawDocType::GoalNote)
            .map(|d| d.doc_id.as_str())
            .collect();
        let mut label_of: HashMap<&str, bool> = HashMap::new();
        for l in &labels {
            if !goal_note_ids.contains(l.doc_id.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "goal label references `{}`, which is not a goal note",
                    l.doc_id
                )));
            }
            if label_of.insert(l.doc_id.as_str(), l.contains_goal).is_some() {
                return Err(Error::InvalidInput(format!("duplicate goal label for `{}`", l.doc_id)));
            }
        }
        if let Some(missing) = goal_note_ids.iter().find(|id| !label_of.contains_key(*id)) {
            return Err(Error::InvalidInput(format!("goal note `{missing}` has no label")));
        }

        let mut users: BTreeSet<String> = raw.iter().map(|d| d.user_id.clone()).collect();
        for e in &follows {
            users.insert(e.follower.clone());
            users.insert(e.followee.clone());
        }

        let mut ordered: Vec<&RawDocument> = raw.iter().collect();
        ordered.sort_by(|a, b| {
            (&a.user_id, a.timestamp, &a.doc_id).cmp(&(&b.user_id, b.timestamp, &b.doc_id))
        });

        let mut vocab = Vocabulary::new();
        let mut documents = Vec::with_capacity(raw.len());
        let mut dropped_empty = Vec::new();
        let mut goal_notes: HashMap<String, Vec<GoalNote>> = HashMap::new();
        for doc in ordered {
            let week_index = config.week_of(doc.timestamp);
            let (eff_type, words) = match doc.doc_type {
                RawDocType::GoalNote => {
                    let contains_goal = label_of[doc.doc_id.as_str()];
                    goal_notes.entry(doc.user_id.clone()).or_default().push(GoalNote {
                        week: week_index,
                        contains_goal,
                    });
                    let eff = if contains_goal {
                        EffType::RelGoalNote
                    } else {
                        EffType::IrGoalNote
                    };
                    (eff, tokenize(&doc.text, doc.doc_type))
                }
                RawDocType::ProsoloPost => (EffType::Post, tokenize(&doc.text, doc.doc_type)),
                RawDocType::BlogPost => (EffType::Blog, tokenize(&doc.text, doc.doc_type)),
                RawDocType::Tweet => match classify_tweet_relevance(&doc.text, &config.hashtags) {
                    Relevance::Relevant => (EffType::RelTweet, tokenize(&doc.text, doc.doc_type)),
                    Relevance::Irrelevant => (EffType::IrTweet, vec![IRRELEVANT_TOKEN.to_owned()]),
                },
            };
            if words.is_empty() {
                dropped_empty.push(doc.doc_id.clone());
                continue;
            }
            let tokens = words.iter().map(|w| vocab.intern(w)).collect();
            documents.push(ProcessedDocument {
                doc_id: doc.doc_id.clone(),
                user_id: doc.user_id.clone(),
                timestamp: doc.timestamp,
                week_index,
                raw_type: doc.doc_type,
                eff_type,
                tokens,
            });
        }

        let mut follows = follows;
        follows.sort_by(|a, b| {
            (&a.follower, a.week_index, &a.followee).cmp(&(&b.follower, b.week_index, &b.followee))
        });

        Ok(Self {
            config,
            vocab,
            documents,
            dropped_empty,
            follows,
            users,
            goal_notes,
        })
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.users.iter().map(String::as_str)
    }

    pub fn has_user(&self, user: &str) -> bool {
        self.users.contains(user)
    }

    pub fn goal_notes(&self, user: &str) -> &[GoalNote] {
        self.goal_notes.get(user).map_or(&[], Vec::as_slice)
    }

    pub fn goal_category(&self, user: &str, week: u32) -> Result<GoalCategory> {
        if !self.has_user(user) {
            return Err(Error::UnknownUser(user.to_owned()));
        }
        Ok(goal_category_at(self.goal_notes(user), week))
    }

    pub fn social_category(&self, user: &str, week: u32) -> SocialCategory {
        let start = self.follows.partition_point(|e| e.follower.as_str() < user);
        let end = self.follows.partition_point(|e| e.follower.as_str() <= user);
        derive_social_category(user, week, &self.follows[start..end], |v, w| {
            goal_category_at(self.goal_notes(v), w)
        })
    }

    /// Last week with any activity (documents or follow edges).
    pub fn last_week(&self) -> u32 {
        let docs = self.documents.iter().map(|d| d.week_index).max().unwrap_or(0);
        let edges = self.follows.iter().map(|e| e.week_index).max().unwrap_or(0);
        docs.max(edges)
    }

    /// Documents grouped by user and week, in corpus order.
    pub(crate) fn documents_by_user_week(&self) -> BTreeMap<&str, BTreeMap<u32, Vec<&ProcessedDocument>>> {
        let mut out: BTreeMap<&str, BTreeMap<u32, Vec<&ProcessedDocument>>> = BTreeMap::new();
        for doc in &self.documents {
            out.entry(doc.user_id.as_str())
                .or_default()
                .entry(doc.week_index)
                .or_default()
                .push(doc);
        }
        out
    }
}
