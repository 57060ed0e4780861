use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Discussion;
use crate::corpus::io::{open_csv, record_line};
use crate::{Error, Result};

#[derive(Deserialize)]
struct ParticipationRow {
    user_id: String,
    discussion_id: String,
}

/// Reads `participation.csv` (`user_id,discussion_id`); duplicate rows are
/// collapsed and the result is sorted.
pub fn read_participation(path: &Path) -> Result<Vec<(String, String)>> {
    let mut reader = open_csv(path, &["user_id", "discussion_id"])?;
    let mut pairs = BTreeSet::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
        let line = record_line(&record, i + 2);
        let row: ParticipationRow = record
            .deserialize(None)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        if row.user_id.is_empty() || row.discussion_id.is_empty() {
            return Err(Error::parse(path, line, "empty id"));
        }
        pairs.insert((row.user_id, row.discussion_id));
    }
    Ok(pairs.into_iter().collect())
}

/// Reads `discussions.jsonl`.
pub fn read_discussions(path: &Path) -> Result<Vec<Discussion>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let d: Discussion = serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        if !seen.insert(d.discussion_id.clone()) {
            return Err(Error::parse(path, i + 1, format!("duplicate discussion `{}`", d.discussion_id)));
        }
        out.push(d);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub user_id: String,
    pub discussion_id: String,
    pub score: f64,
}

/// `user_id,discussion_id,score` CSV text.
pub fn recommendations_csv(rows: &[Recommendation]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(["user_id", "discussion_id", "score"])
            .map_err(|e| Error::Internal(e.to_string()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| Error::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
