use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Hyperparams;
use crate::corpus::{SequenceSet, Vocabulary};
use crate::{Error, Result};

pub const MODEL_SCHEMA: u32 = 1;

/// Observed data of one time point, flattened for the sampler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedStep {
    pub week: u32,
    pub category: usize,
    /// Number of documents of each type (`D` entries).
    pub doc_type_counts: Vec<u32>,
    /// All word ids of all documents, in document order.
    pub words: Vec<u32>,
}

impl ObservedStep {
    pub fn n_docs(&self) -> u32 {
        self.doc_type_counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedSequence {
    pub user: String,
    pub steps: Vec<ObservedStep>,
}

/// Sufficient statistics of the sampler state. All matrices are dense and
/// row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTables {
    /// Per time point (global index), topic counts: `[g][j]`.
    pub mtz: Vec<Vec<u32>>,
    /// `[j * V + w]`
    pub zw: Vec<u32>,
    /// `[j]`: row sums of `zw`.
    pub z_total: Vec<u32>,
    /// `[c * D + k]`
    pub sd: Vec<u32>,
    /// `[c]`: row sums of `sd`.
    pub sd_total: Vec<u32>,
    /// `[c * Z + j]`
    pub sz: Vec<u32>,
    /// `[c]`: row sums of `sz`.
    pub sz_total: Vec<u32>,
    /// `[(c * A + a) * S + c']` for source `c` in `0..=S` (row `S` is the
    /// virtual start state).
    pub sas: Vec<u32>,
    /// `[c * A + a]`: row sums of `sas`.
    pub sas_total: Vec<u32>,
}

impl CountTables {
    pub fn zeros(h: &Hyperparams, vocab_size: usize, n_timepoints: usize) -> Self {
        let (s, a, z, d) = (h.states, h.categories, h.topics, h.doc_types);
        Self {
            mtz: vec![vec![0; z]; n_timepoints],
            zw: vec![0; z * vocab_size],
            z_total: vec![0; z],
            sd: vec![0; s * d],
            sd_total: vec![0; s],
            sz: vec![0; s * z],
            sz_total: vec![0; s],
            sas: vec![0; (s + 1) * a * s],
            sas_total: vec![0; (s + 1) * a],
        }
    }

    /// Recomputes every table from assignments.
    pub fn tally(
        h: &Hyperparams,
        vocab_size: usize,
        data: &[ObservedSequence],
        states: &[Vec<usize>],
        topics: &[Vec<Vec<usize>>],
    ) -> Self {
        let n_tp = data.iter().map(|s| s.steps.len()).sum();
        let mut counts = Self::zeros(h, vocab_size, n_tp);
        let mut g = 0;
        for (m, seq) in data.iter().enumerate() {
            let mut prev = (h.states, None::<usize>);
            for (t, step) in seq.steps.iter().enumerate() {
                let c = states[m][t];
                for (k, &n) in step.doc_type_counts.iter().enumerate() {
                    counts.sd[c * h.doc_types + k] += n;
                    counts.sd_total[c] += n;
                }
                for (i, &w) in step.words.iter().enumerate() {
                    let j = topics[m][t][i];
                    counts.mtz[g][j] += 1;
                    counts.zw[j * vocab_size + w as usize] += 1;
                    counts.z_total[j] += 1;
                    counts.sz[c * h.topics + j] += 1;
                    counts.sz_total[c] += 1;
                }
                let (src, src_cat) = prev;
                let a = src_cat.unwrap_or(step.category);
                counts.sas[(src * h.categories + a) * h.states + c] += 1;
                counts.sas_total[src * h.categories + a] += 1;
                prev = (c, Some(step.category));
                g += 1;
            }
        }
        counts
    }
}

/// Sampler state: observations, current assignments and their counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SttmModel {
    pub schema: u32,
    pub hyper: Hyperparams,
    pub vocab: Vocabulary,
    pub vocab_size: usize,
    pub seed: u64,
    pub data: Vec<ObservedSequence>,
    /// `s[m][t]`
    pub states: Vec<Vec<usize>>,
    /// `z[m][t][i]`
    pub topics: Vec<Vec<Vec<usize>>>,
    pub counts: CountTables,
    #[serde(skip)]
    offsets: Vec<usize>,
    #[serde(skip, default = "default_rng")]
    pub(crate) rng: ChaCha8Rng,
}

fn default_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

/// Builds a model with uniformly random topic and state assignments.
pub fn init_model(sequences: &SequenceSet, h: Hyperparams, seed: u64) -> Result<SttmModel> {
    h.validate()?;
    if sequences.vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    if sequences.is_empty() {
        return Err(Error::InvalidInput("no sequences to model".into()));
    }
    if sequences.doc_types > h.doc_types || sequences.categories > h.categories {
        return Err(Error::InvalidInput(format!(
            "sequences use {} document types and {} categories; hyperparameters allow {} and {}",
            sequences.doc_types, sequences.categories, h.doc_types, h.categories
        )));
    }
    sequences.validate()?;

    let data: Vec<ObservedSequence> = sequences
        .sequences
        .iter()
        .map(|seq| ObservedSequence {
            user: seq.user.clone(),
            steps: seq
                .steps
                .iter()
                .map(|tp| {
                    let mut doc_type_counts = vec![0; h.doc_types];
                    let mut words = Vec::new();
                    for doc in &tp.docs {
                        doc_type_counts[doc.doc_type] += 1;
                        words.extend_from_slice(&doc.tokens);
                    }
                    ObservedStep {
                        week: tp.week,
                        category: tp.category,
                        doc_type_counts,
                        words,
                    }
                })
                .collect(),
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(data.len());
    let mut topics = Vec::with_capacity(data.len());
    for seq in &data {
        let mut s_row = Vec::with_capacity(seq.steps.len());
        let mut z_row = Vec::with_capacity(seq.steps.len());
        for step in &seq.steps {
            s_row.push(rng.gen_range(0..h.states));
            z_row.push(
                step.words
                    .iter()
                    .map(|_| rng.gen_range(0..h.topics))
                    .collect::<Vec<_>>(),
            );
        }
        states.push(s_row);
        topics.push(z_row);
    }

    let vocab_size = sequences.vocab.len();
    let counts = CountTables::tally(&h, vocab_size, &data, &states, &topics);
    let mut model = SttmModel {
        schema: MODEL_SCHEMA,
        hyper: h,
        vocab: sequences.vocab.clone(),
        vocab_size,
        seed,
        data,
        states,
        topics,
        counts,
        offsets: Vec::new(),
        rng,
    };
    model.rebuild_offsets();
    Ok(model)
}

impl SttmModel {
    fn rebuild_offsets(&mut self) {
        let mut acc = 0;
        self.offsets = self
            .data
            .iter()
            .map(|s| {
                let o = acc;
                acc += s.steps.len();
                o
            })
            .collect();
    }

    /// Restores derived state after deserialization and checks that the
    /// stored counts match the stored assignments.
    pub fn from_json(json: &str) -> Result<Self> {
        let mut model: SttmModel = serde_json::from_str(json)
            .map_err(|e| Error::InvalidInput(format!("model file: {e}")))?;
        if model.schema != MODEL_SCHEMA {
            return Err(Error::InvalidInput(format!(
                "model schema {} is not supported (expected {MODEL_SCHEMA})",
                model.schema
            )));
        }
        model.hyper.validate()?;
        if model.vocab.len() != model.vocab_size {
            return Err(Error::InvalidInput("model vocabulary size mismatch".into()));
        }
        model.rebuild_offsets();
        model.rng = ChaCha8Rng::seed_from_u64(model.seed);
        model.audit().map_err(Error::InvalidInput)?;
        Ok(model)
    }

    /// Global index of time point `(m, t)`.
    pub fn timepoint_index(&self, m: usize, t: usize) -> usize {
        self.offsets[m] + t
    }

    pub fn sequence_lengths(&self) -> Vec<usize> {
        self.data.iter().map(|s| s.steps.len()).collect()
    }

    pub fn n_sequences(&self) -> usize {
        self.data.len()
    }

    pub fn n_timepoints(&self) -> usize {
        self.counts.mtz.len()
    }

    pub fn n_tokens(&self) -> usize {
        self.counts.z_total.iter().map(|&n| n as usize).sum()
    }

    /// Source row `(c, a)` of the transition into time point `(m, t)`.
    pub(crate) fn incoming_row(&self, m: usize, t: usize) -> (usize, usize) {
        if t == 0 {
            (self.hyper.states, self.data[m].steps[0].category)
        } else {
            (self.states[m][t - 1], self.data[m].steps[t - 1].category)
        }
    }

    pub(crate) fn sas_index(&self, src: usize, a: usize, dst: usize) -> usize {
        (src * self.hyper.categories + a) * self.hyper.states + dst
    }

    /// Compares the incrementally maintained counts with a from-scratch
    /// tally. Returns a description of the first mismatching table.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let fresh = CountTables::tally(
            &self.hyper,
            self.vocab_size,
            &self.data,
            &self.states,
            &self.topics,
        );
        let c = &self.counts;
        let tables: [(&str, bool); 9] = [
            ("mtz", fresh.mtz == c.mtz),
            ("zw", fresh.zw == c.zw),
            ("z_total", fresh.z_total == c.z_total),
            ("sd", fresh.sd == c.sd),
            ("sd_total", fresh.sd_total == c.sd_total),
            ("sz", fresh.sz == c.sz),
            ("sz_total", fresh.sz_total == c.sz_total),
            ("sas", fresh.sas == c.sas),
            ("sas_total", fresh.sas_total == c.sas_total),
        ];
        match tables.iter().find(|(_, ok)| !ok) {
            Some((name, _)) => Err(format!("count table `{name}` disagrees with assignments")),
            None => Ok(()),
        }
    }
}
