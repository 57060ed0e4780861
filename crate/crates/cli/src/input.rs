use std::path::PathBuf;

use rolemodel::corpus::{build_sequences, load_corpus_files, Corpus, SequenceSet};

use crate::artifact::read_json_payload;
use crate::config::RunConfig;
use crate::Failure;

enum Source {
    Sequences(PathBuf),
    Corpus(PathBuf),
}

fn source(cfg: &RunConfig) -> Result<Source, Failure> {
    if let Some(p) = &cfg.paths.sequences {
        return Ok(Source::Sequences(p.clone()));
    }
    if let Some(p) = &cfg.paths.documents {
        return Ok(Source::Corpus(p.clone()));
    }
    let seqs = cfg.out_dir().join("sequences.json");
    if seqs.exists() {
        return Ok(Source::Sequences(seqs));
    }
    let docs = cfg.out_dir().join("documents.jsonl");
    if docs.exists() {
        return Ok(Source::Corpus(docs));
    }
    Err(Failure::input(format!(
        "no input corpus: set paths.documents or paths.sequences, or place documents.jsonl or sequences.json in {}",
        cfg.out_dir().display()
    )))
}

/// The raw corpus named by the configuration, if any.
pub fn load_corpus(cfg: &RunConfig) -> Result<Option<Corpus>, Failure> {
    match source(cfg) {
        Ok(Source::Corpus(docs)) => {
            let corpus = load_corpus_files(
                &docs,
                cfg.paths.follows.as_deref(),
                cfg.paths.goal_labels.as_deref(),
                cfg.corpus_config(),
            )?;
            Ok(Some(corpus))
        }
        _ => Ok(None),
    }
}

/// Weekly sequences, from a prebuilt sequence file or a raw corpus.
pub fn load_sequences(cfg: &RunConfig) -> Result<SequenceSet, Failure> {
    match source(cfg)? {
        Source::Sequences(p) => {
            let set: SequenceSet = read_json_payload(&p, "sequences")?;
            set.validate()
                .map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
            Ok(set)
        }
        Source::Corpus(docs) => {
            let corpus = load_corpus_files(
                &docs,
                cfg.paths.follows.as_deref(),
                cfg.paths.goal_labels.as_deref(),
                cfg.corpus_config(),
            )?;
            Ok(build_sequences(&corpus))
        }
    }
}
