//! Behavioral state modeling and role-model recommendation for discourse
//! data collected across several learning platforms.
//!
//! The crate is organized as a pipeline:
//!
//! - [`corpus`]: ingestion, text preprocessing, goal-quality and
//!   social-connection categories, weekly sequences.
//! - [`sttm`]: the conditional state-transition topic model (collapsed Gibbs
//!   sampler, estimators, Viterbi decoding, forward sampler).
//! - [`analysis`]: state summaries, occupancy tables with chi-square tests,
//!   transition graphs in DOT.
//! - [`recommender`]: relevance prediction, flow-based constraint filtering
//!   and their evaluation metrics.

pub mod analysis;
pub mod corpus;
mod error;
pub mod recommender;
pub mod special;
pub mod sttm;

pub use error::{Error, Result};
