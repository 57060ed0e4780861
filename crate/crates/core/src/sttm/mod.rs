//! Conditional state-transition topic model.
//!
//! Each user-week is a time point with a latent state. A state owns a
//! distribution over document types, a distribution over topics, and one
//! transition distribution per social-connection category of the source
//! time point. Topics are shared word distributions. Inference is collapsed
//! Gibbs sampling over per-token topics and per-time-point states.
//!
//! The first time point of every sequence transitions out of a virtual
//! start state (index `S` in the transition counts), using the social
//! category of that first time point.

mod joint;
mod model;
mod profiles;
mod recovery;
mod sampler;
mod synthetic;
mod viterbi;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use joint::joint_log_prob;
pub use model::{init_model, CountTables, ObservedSequence, ObservedStep, SttmModel, MODEL_SCHEMA};
pub use profiles::{estimate_profiles, StateProfiles};
pub use recovery::{recovery_score, total_variation, RecoveryScore};
pub use sampler::{run_gibbs, GibbsRun};
pub use synthetic::{
    generate_synthetic, well_separated_truth, CategorySchedule, SynthShape, TrueProfiles,
    TruthRecord,
};
pub use viterbi::{remap_to_vocab, viterbi_decode, DecodedSequence, OOV};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub states: usize,
    /// Number of social-connection categories.
    pub categories: usize,
    pub topics: usize,
    pub doc_types: usize,
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub gamma: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            states: 10,
            categories: 7,
            topics: 20,
            doc_types: 6,
            alpha: 0.1,
            beta: 0.01,
            nu: 0.1,
            gamma: 0.1,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("states", self.states),
            ("categories", self.categories),
            ("topics", self.topics),
            ("doc_types", self.doc_types),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidInput(format!("{name} must be at least 1")));
            }
        }
        let conc = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("nu", self.nu),
            ("gamma", self.gamma),
        ];
        for (name, v) in conc {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }
}

/// Which form of the sampling conditionals to use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionalForm {
    /// Exact collapsed conditionals of the generative process: topics are
    /// scored against the state's topic counts and the outgoing transition
    /// factor is normalized over the source row.
    #[default]
    Exact,
    /// Topic scored against the time point's own topic counts, and the
    /// outgoing transition factor normalized over source states. Not the
    /// conditional of any joint; kept for comparison runs.
    Timepoint,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanOrder {
    /// Sequence-major, then time, then token.
    #[default]
    Fixed,
    /// Fresh random permutation of the topic sites and of the state sites
    /// every sweep.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub sweeps: usize,
    pub burn_in: usize,
    /// Snapshot interval after burn-in.
    pub thin: usize,
    pub scan: ScanOrder,
    pub conditionals: ConditionalForm,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            sweeps: 2000,
            burn_in: 1000,
            thin: 10,
            scan: ScanOrder::Fixed,
            conditionals: ConditionalForm::Exact,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::InvalidInput("thin must be at least 1".into()));
        }
        if self.sweeps > 0 && self.burn_in >= self.sweeps {
            return Err(Error::InvalidInput(format!(
                "burn-in ({}) must be smaller than the number of sweeps ({})",
                self.burn_in, self.sweeps
            )));
        }
        if self.sweeps == 0 && self.burn_in > 0 {
            return Err(Error::InvalidInput("burn-in requires sweeps".into()));
        }
        Ok(())
    }
}
