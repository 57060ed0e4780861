//! Tables and graphs derived from fitted profiles and decoded state paths.

mod graph;
mod occupancy;
mod summary;
mod table;

pub use graph::{export_transition_graph, export_transition_graphs, TransitionGraph, DEFAULT_PANELS};
pub use occupancy::{
    chi_square, gs_comparisons, occupancy_table, significance, ChiSquare, ConnectionGroup,
    GroupComparison, OccupancyTable,
};
pub use summary::{state_summary, StateSummary, SummaryTopic};
pub use table::{tables_csv, TableRow};
