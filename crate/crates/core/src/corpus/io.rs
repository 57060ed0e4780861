use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::{Corpus, CorpusConfig, FollowEdge, GoalLabel, RawDocument};
use crate::{Error, Result};

/// Reads `documents.jsonl`: one JSON object per non-blank line.
pub fn read_documents(path: &Path) -> Result<Vec<RawDocument>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: RawDocument =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        docs.push(doc);
    }
    Ok(docs)
}

pub(crate) fn open_csv(path: &Path, expected: &[&str]) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::parse(
            path,
            1,
            format!("expected header `{}`, found `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(reader)
}

pub(crate) fn record_line(record: &csv::StringRecord, fallback: usize) -> usize {
    record.position().map_or(fallback, |p| p.line() as usize)
}

/// Reads `follows.csv` with the header `follower,followee,week_index`.
pub fn read_follows(path: &Path) -> Result<Vec<FollowEdge>> {
    let mut reader = open_csv(path, &["follower", "followee", "week_index"])?;
    let mut edges = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
        let line = record_line(&record, i + 2);
        let edge: FollowEdge = record
            .deserialize(None)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        edges.push(edge);
    }
    Ok(edges)
}

#[derive(Deserialize)]
struct LabelRow {
    doc_id: String,
    contains_goal: String,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}

/// Reads `goal_labels.csv` with the header `doc_id,contains_goal`.
pub fn read_goal_labels(path: &Path) -> Result<Vec<GoalLabel>> {
    let mut reader = open_csv(path, &["doc_id", "contains_goal"])?;
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, i + 2, e.to_string()))?;
        let line = record_line(&record, i + 2);
        let row: LabelRow = record
            .deserialize(None)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        let contains_goal = parse_bool(&row.contains_goal).ok_or_else(|| {
            Error::parse(path, line, format!("`{}` is not a boolean", row.contains_goal))
        })?;
        labels.push(GoalLabel {
            doc_id: row.doc_id,
            contains_goal,
        });
    }
    Ok(labels)
}

/// Loads and preprocesses a corpus from its three input files. The follow
/// and label files are optional.
pub fn load_corpus_files(
    documents: &Path,
    follows: Option<&Path>,
    goal_labels: Option<&Path>,
    config: CorpusConfig,
) -> Result<Corpus> {
    let raw = read_documents(documents)?;
    let follows = follows.map(read_follows).transpose()?.unwrap_or_default();
    let labels = goal_labels.map(read_goal_labels).transpose()?.unwrap_or_default();
    Corpus::build(raw, follows, labels, config)
}
