use std::path::Path;

use rolemodel::corpus::SequenceSet;
use rolemodel::sttm::{remap_to_vocab, viterbi_decode, StateProfiles};
use serde::{Deserialize, Serialize};

use crate::artifact::{read_json_payload, write_json, Provenance};
use crate::config::RunConfig;
use crate::input::load_sequences;
use crate::Failure;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecodedUser {
    pub user: String,
    pub weeks: Vec<u32>,
    pub categories: Vec<usize>,
    pub states: Vec<usize>,
    pub log_score: f64,
}

#[derive(Serialize)]
struct DecodedBody<'a> {
    sequences: &'a [DecodedUser],
}

pub fn load_profiles(path: &Path) -> Result<StateProfiles, Failure> {
    let profiles: StateProfiles = read_json_payload(path, "profiles")?;
    profiles
        .validate()
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(profiles)
}

/// Most probable state path of every sequence. Words outside the
/// profiles' vocabulary are ignored.
pub fn decode_all(profiles: &StateProfiles, set: &SequenceSet) -> Result<Vec<DecodedUser>, Failure> {
    let remapped = remap_to_vocab(set, &profiles.vocab);
    set.sequences
        .iter()
        .zip(&remapped)
        .map(|(seq, steps)| {
            let d = viterbi_decode(profiles, steps)?;
            Ok(DecodedUser {
                user: seq.user.clone(),
                weeks: seq.steps.iter().map(|s| s.week).collect(),
                categories: seq.steps.iter().map(|s| s.category).collect(),
                states: d.states,
                log_score: d.log_score,
            })
        })
        .collect()
}

pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let profiles = load_profiles(&cfg.path_or_out(&cfg.paths.profiles, "profiles.json"))?;
    let set = load_sequences(cfg)?;
    let decoded = decode_all(&profiles, &set)?;
    let path = cfg.path_or_out(&cfg.paths.decoded, "decoded.json");
    write_json(&path, &Provenance::of(cfg), &DecodedBody { sequences: &decoded })?;
    eprintln!("decode: {} sequences -> {}", decoded.len(), path.display());
    Ok(())
}
