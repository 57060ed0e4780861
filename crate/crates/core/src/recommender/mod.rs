//! Discussion recommendation: a feature-augmented factor model scores
//! user-discussion relevance, and a flow-based filter assigns users to
//! discussions so that every discussion gets qualified participants without
//! overloading anyone.

mod assign;
mod features;
mod flow;
mod io;
mod metrics;
mod relevance;

pub use assign::{
    baseline_filter, check_assignment, constraint_filter, evaluate_ob, objective, Assignment, AssignmentProblem,
    BaselineThresholds, Candidate, FilterMode,
};
pub use features::{
    hits_centrality, user_info_from_corpus, Centrality, Discussion, DiscussionFeatures, FeatureTable, UserFeatures,
    UserInfo,
};
pub use flow::Network;
pub use io::{read_discussions, read_participation, recommendations_csv, Recommendation};
pub use metrics::{average_precision, by_user, evaluate_map, split_per_user, MapReport};
pub use relevance::{train_relevance, Block, FeatureFlags, Params, RelevanceModel, Sample, TrainConfig};
