use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Hyperparams;
use crate::corpus::{SeqDocument, Sequence, SequenceSet, TimePoint, Vocabulary};
use crate::{Error, Result};

/// Ground-truth distributions for forward sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueProfiles {
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
    pub pi: Vec<Vec<Vec<f64>>>,
    pub init: Vec<Vec<f64>>,
}

fn check_rows<'a>(name: &str, rows: impl IntoIterator<Item = &'a Vec<f64>>, width: usize) -> Result<()> {
    for row in rows {
        if row.len() != width {
            return Err(Error::InvalidInput(format!("{name}: row has {} entries, expected {width}", row.len())));
        }
        if row.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidInput(format!("{name}: negative or non-finite probability")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("{name}: row sums to {sum}")));
        }
    }
    Ok(())
}

impl TrueProfiles {
    pub fn validate(&self, h: &Hyperparams) -> Result<()> {
        let v = self.phi.first().map_or(0, Vec::len);
        if v == 0 {
            return Err(Error::EmptyVocabulary);
        }
        let counts_ok = self.phi.len() == h.topics
            && self.theta.len() == h.states
            && self.psi.len() == h.states
            && self.pi.len() == h.states
            && self.pi.iter().all(|b| b.len() == h.categories)
            && self.init.len() == h.categories;
        if !counts_ok {
            return Err(Error::InvalidInput("truth shapes do not match hyperparameters".into()));
        }
        check_rows("phi", &self.phi, v)?;
        check_rows("theta", &self.theta, h.topics)?;
        check_rows("psi", &self.psi, h.doc_types)?;
        check_rows("pi", self.pi.iter().flatten(), h.states)?;
        check_rows("init", &self.init, h.states)
    }

    pub fn vocab_size(&self) -> usize {
        self.phi.first().map_or(0, Vec::len)
    }
}

/// How the social category of each generated time point is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategorySchedule {
    Constant(usize),
    /// Independent uniform draw per time point.
    Uniform,
    /// One category list per sequence; must match the sequence lengths.
    Explicit(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthShape {
    /// Number of time points of each sequence.
    pub lengths: Vec<usize>,
    /// Inclusive range of documents per time point.
    pub docs_per_step: (usize, usize),
    /// Inclusive range of words per document.
    pub words_per_doc: (usize, usize),
    pub schedule: CategorySchedule,
}

impl SynthShape {
    pub fn uniform(sequences: usize, length: usize) -> Self {
        Self {
            lengths: vec![length; sequences],
            docs_per_step: (1, 3),
            words_per_doc: (5, 15),
            schedule: CategorySchedule::Uniform,
        }
    }
}

/// Latent variables behind a generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub hyper: Hyperparams,
    pub seed: u64,
    pub profiles: TrueProfiles,
    /// `states[m][t]`
    pub states: Vec<Vec<usize>>,
    /// Social category of every time point, `categories[m][t]`.
    pub categories: Vec<Vec<usize>>,
    /// Topic of every word, per time point in document order.
    pub topics: Vec<Vec<Vec<usize>>>,
}

fn categorical<R: Rng>(rng: &mut R, p: &[f64]) -> usize {
    let mut u = rng.gen::<f64>();
    for (i, &w) in p.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    p.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

fn range<R: Rng>(rng: &mut R, (lo, hi): (usize, usize)) -> usize {
    if lo >= hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Forward-samples a corpus: per time point a state (from the start row of
/// the first category, then from the previous state's row for the previous
/// category), then per document a type, and per word a topic and a word.
pub fn generate_synthetic(
    h: &Hyperparams,
    truth: &TrueProfiles,
    shape: &SynthShape,
    seed: u64,
) -> Result<(SequenceSet, TruthRecord)> {
    h.validate()?;
    truth.validate(h)?;
    if let CategorySchedule::Explicit(cats) = &shape.schedule {
        let lens: Vec<usize> = cats.iter().map(Vec::len).collect();
        if lens != shape.lengths {
            return Err(Error::InvalidInput("category schedule does not match lengths".into()));
        }
        if cats.iter().flatten().any(|&a| a >= h.categories) {
            return Err(Error::InvalidInput("category schedule out of range".into()));
        }
    }
    if let CategorySchedule::Constant(a) = shape.schedule {
        if a >= h.categories {
            return Err(Error::InvalidInput("category schedule out of range".into()));
        }
    }
    if shape.docs_per_step.0 == 0 || shape.docs_per_step.0 > shape.docs_per_step.1 {
        return Err(Error::InvalidInput("every time point needs at least one document".into()));
    }
    if shape.words_per_doc.0 == 0 || shape.words_per_doc.0 > shape.words_per_doc.1 {
        return Err(Error::InvalidInput("every document needs at least one word".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = truth.vocab_size();
    let mut sequences = Vec::with_capacity(shape.lengths.len());
    let mut states = Vec::with_capacity(shape.lengths.len());
    let mut topics = Vec::with_capacity(shape.lengths.len());
    let mut categories = Vec::with_capacity(shape.lengths.len());

    for (m, &len) in shape.lengths.iter().enumerate() {
        let mut steps = Vec::with_capacity(len);
        let mut s_row = Vec::with_capacity(len);
        let mut z_row = Vec::with_capacity(len);
        let mut a_row = Vec::with_capacity(len);
        let mut prev: Option<(usize, usize)> = None;
        for t in 0..len {
            let a = match &shape.schedule {
                CategorySchedule::Constant(a) => *a,
                CategorySchedule::Uniform => rng.gen_range(0..h.categories),
                CategorySchedule::Explicit(cats) => cats[m][t],
            };
            let row = match prev {
                None => &truth.init[a],
                Some((c, b)) => &truth.pi[c][b],
            };
            let c = categorical(&mut rng, row);
            let n_docs = range(&mut rng, shape.docs_per_step);
            let mut docs = Vec::with_capacity(n_docs);
            let mut z_step = Vec::new();
            for _ in 0..n_docs {
                let doc_type = categorical(&mut rng, &truth.psi[c]);
                let n_words = range(&mut rng, shape.words_per_doc);
                let mut tokens = Vec::with_capacity(n_words);
                for _ in 0..n_words {
                    let z = categorical(&mut rng, &truth.theta[c]);
                    tokens.push(categorical(&mut rng, &truth.phi[z]) as u32);
                    z_step.push(z);
                }
                docs.push(SeqDocument { doc_type, tokens });
            }
            steps.push(TimePoint {
                week: t as u32,
                category: a,
                docs,
            });
            s_row.push(c);
            a_row.push(a);
            z_row.push(z_step);
            prev = Some((c, a));
        }
        sequences.push(Sequence {
            user: format!("synth{m:05}"),
            steps,
        });
        states.push(s_row);
        topics.push(z_row);
        categories.push(a_row);
    }

    let set = SequenceSet {
        vocab: Vocabulary::from_words((0..v).map(|w| format!("w{w}"))),
        doc_types: h.doc_types,
        categories: h.categories,
        sequences,
    };
    let record = TruthRecord {
        hyper: *h,
        seed,
        profiles: truth.clone(),
        states,
        categories,
        topics,
    };
    Ok((set, record))
}

fn normalized(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Ground truth whose states, topics and transition rows are far apart:
///
/// - topic `j` is supported only on its own contiguous block of words;
/// - topic `j < S` is the main topic of state `j` and unused elsewhere;
///   every topic `j >= S` is used by all states, in proportions that differ
///   from topic to topic. Topics used in identical proportions by every
///   state could not be told apart from the data;
/// - state `c` favors document type `c mod D`;
/// - from state `c` under category `b` the favored successor is
///   `(c + b) mod S`.
///
/// Weights carry a ±10% seeded jitter.
pub fn well_separated_truth(h: &Hyperparams, vocab_size: usize, seed: u64) -> Result<TrueProfiles> {
    h.validate()?;
    if vocab_size < h.topics {
        return Err(Error::InvalidInput("need at least one word per topic".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jitter = |w: f64| if w > 0.0 { w * rng.gen_range(0.9..1.1) } else { 0.0 };
    let (s, a, z, d) = (h.states, h.categories, h.topics, h.doc_types);
    let block = vocab_size / z;

    let phi = (0..z)
        .map(|j| {
            let lo = j * block;
            let hi = if j + 1 == z { vocab_size } else { lo + block };
            normalized((0..vocab_size).map(|w| jitter(if (lo..hi).contains(&w) { 1.0 } else { 0.0 })).collect())
        })
        .collect();
    let topic_weight = |c: usize, j: usize| {
        if j < s {
            if j == c {
                6.0
            } else {
                0.0
            }
        } else {
            ((c + j - s) % s + 1) as f64
        }
    };
    let theta = (0..s)
        .map(|c| {
            let w: Vec<f64> = if z <= s {
                (0..z).map(|j| if j == c % z { 1.0 } else { 0.0 }).collect()
            } else {
                (0..z).map(|j| topic_weight(c, j)).collect()
            };
            normalized(w.into_iter().map(&mut jitter).collect())
        })
        .collect();
    let psi = (0..s)
        .map(|c| normalized((0..d).map(|k| jitter(if k == c % d { 9.0 } else { 1.0 })).collect()))
        .collect();
    let pi = (0..s)
        .map(|c| {
            (0..a)
                .map(|b| {
                    normalized((0..s).map(|n| jitter(if n == (c + b) % s { 7.0 } else { 1.0 })).collect())
                })
                .collect()
        })
        .collect();
    let init = (0..a)
        .map(|b| normalized((0..s).map(|c| jitter(if c == b % s { 3.0 } else { 1.0 })).collect()))
        .collect();
    Ok(TrueProfiles {
        phi,
        theta,
        psi,
        pi,
        init,
    })
}
