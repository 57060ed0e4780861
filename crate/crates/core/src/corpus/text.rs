use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::RawDocType;

/// Token that replaces the whole content of an off-topic tweet.
pub const IRRELEVANT_TOKEN: &str = "<irrelevant>";

/// Hashtags that mark a tweet as course-relevant unless configured otherwise.
pub const DEFAULT_HASHTAGS: [&str; 3] = ["#prosolo", "#dalmooc", "#learninganalytics"];

/// Built-in English stop-word list, extended with a few Twitter filler words
/// ("rt", "via", "check", "amp") that otherwise dominate tweet topics.
pub const STOP_WORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "amp", "an", "and", "any",
    "are", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
    "but", "by", "can", "check", "could", "did", "do", "does", "doing", "down", "during", "each",
    "few", "for", "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers",
    "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its",
    "itself", "just", "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
    "rt", "same", "she", "should", "so", "some", "such", "than", "that", "the", "their",
    "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those", "through",
    "to", "too", "under", "until", "up", "very", "via", "was", "we", "were", "what", "when",
    "where", "which", "while", "who", "whom", "why", "will", "with", "would", "you", "your",
    "yours", "yourself", "yourselves",
];

pub fn is_stop_word(token: &str) -> bool {
    STOP_WORDS.binary_search(&token).is_ok()
}

fn is_url(word: &str) -> bool {
    let lower = word.to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// Splits `text` into lowercase content tokens.
///
/// URLs and stop words are dropped for every document type. Tweets
/// additionally lose `@mentions` and the standalone retweet marker.
pub fn tokenize(text: &str, doc_type: RawDocType) -> Vec<String> {
    let is_tweet = doc_type == RawDocType::Tweet;
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        if is_url(word) {
            continue;
        }
        if is_tweet {
            if word.starts_with('@') {
                continue;
            }
            let bare = word.trim_end_matches(':');
            if bare.eq_ignore_ascii_case("rt") {
                continue;
            }
        }
        for piece in word.split(|c: char| !c.is_alphanumeric()) {
            if piece.is_empty() {
                continue;
            }
            let lower = piece.to_lowercase();
            if !is_stop_word(&lower) {
                tokens.push(lower);
            }
        }
    }
    tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relevance {
    Relevant,
    Irrelevant,
}

/// A tweet is relevant iff it carries one of `hashtags`, compared
/// case-insensitively and on whole-tag boundaries.
pub fn classify_tweet_relevance<S: AsRef<str>>(text: &str, hashtags: &[S]) -> Relevance {
    let lower = text.to_lowercase();
    for tag in hashtags {
        let tag = tag.as_ref().to_lowercase();
        if tag.is_empty() {
            continue;
        }
        let mut from = 0;
        while let Some(pos) = lower[from..].find(&tag) {
            let end = from + pos + tag.len();
            let boundary = lower[end..]
                .chars()
                .next()
                .is_none_or(|c| !(c.is_alphanumeric() || c == '_'));
            if boundary {
                return Relevance::Relevant;
            }
            from = end;
        }
    }
    Relevance::Irrelevant
}

/// Bidirectional token ↔ index map, built in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self::new();
        for w in words {
            vocab.intern(&w.into());
        }
        vocab
    }

    pub fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(word.to_owned());
        self.index.insert(word.to_owned(), id);
        id
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.words.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let words = Vec::<String>::deserialize(deserializer)?;
        let vocab = Vocabulary::from_words(words.iter().cloned());
        if vocab.len() != words.len() {
            return Err(serde::de::Error::custom("duplicate word in vocabulary"));
        }
        Ok(vocab)
    }
}
