use std::fmt::Write;

use serde::Serialize;

use crate::corpus::SocialCategory;
use crate::sttm::SttmModel;
use crate::{Error, Result};

/// Panels drawn when no category filter is given.
pub const DEFAULT_PANELS: [SocialCategory; 4] = [
    SocialCategory::S1,
    SocialCategory::S2,
    SocialCategory::S3,
    SocialCategory::S7,
];

const MIN_WIDTH: f64 = 0.3;
const MAX_WIDTH: f64 = 1.2;
const MIN_PEN: f64 = 0.5;
const MAX_PEN: f64 = 4.0;
const MIN_DARKNESS: f64 = 0.2;

/// State visits and transitions out of time points of one social category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionGraph {
    pub category: SocialCategory,
    /// Time points in each state carrying this category.
    pub visits: Vec<u64>,
    /// `edges[c][c']`: transitions from `c` (at this category) to `c'`.
    pub edges: Vec<Vec<u64>>,
    /// First states of sequences whose first time point has this category.
    pub starts: Vec<u64>,
}

impl TransitionGraph {
    pub fn from_paths(
        paths: &[Vec<usize>],
        categories: &[Vec<usize>],
        states: usize,
        category: SocialCategory,
    ) -> Result<Self> {
        if paths.len() != categories.len() {
            return Err(Error::InvalidInput("state paths and categories differ in length".into()));
        }
        let b = category.index();
        let mut graph = TransitionGraph {
            category,
            visits: vec![0; states],
            edges: vec![vec![0; states]; states],
            starts: vec![0; states],
        };
        for (path, cats) in paths.iter().zip(categories) {
            if path.len() != cats.len() {
                return Err(Error::InvalidInput("state path and categories differ in length".into()));
            }
            if let Some(&c) = path.iter().find(|&&c| c >= states) {
                return Err(Error::InvalidInput(format!("state {c} out of range")));
            }
            if cats.first() == Some(&b) {
                graph.starts[path[0]] += 1;
            }
            for t in 0..path.len() {
                if cats[t] != b {
                    continue;
                }
                graph.visits[path[t]] += 1;
                if let Some(&next) = path.get(t + 1) {
                    graph.edges[path[t]][next] += 1;
                }
            }
        }
        Ok(graph)
    }

    /// Graph of the sampler's current state assignments.
    pub fn from_model(model: &SttmModel, category: SocialCategory) -> Result<Self> {
        let categories: Vec<Vec<usize>> = model
            .data
            .iter()
            .map(|seq| seq.steps.iter().map(|s| s.category).collect())
            .collect();
        Self::from_paths(&model.states, &categories, model.hyper.states, category)
    }
}

fn gray(darkness: f64) -> String {
    let v = (255.0 * (1.0 - darkness)).round() as u8;
    format!("#{v:02x}{v:02x}{v:02x}")
}

fn edge_attrs(weight: u64, max: u64) -> String {
    let frac = weight as f64 / max as f64;
    format!(
        "penwidth={:.3}, color=\"{}\", label=\"{weight}\"",
        MIN_PEN + (MAX_PEN - MIN_PEN) * frac,
        gray(frac.max(MIN_DARKNESS))
    )
}

/// DOT digraph: node width grows with the square root of visits, edge pen
/// width and darkness grow linearly with transition counts. Start edges
/// come from a point-shaped `start` node. Zero-weight edges are omitted.
pub fn export_transition_graph(graph: &TransitionGraph) -> String {
    let max_visits = graph.visits.iter().copied().max().unwrap_or(0);
    let max_edge = graph
        .edges
        .iter()
        .flatten()
        .chain(&graph.starts)
        .copied()
        .max()
        .unwrap_or(0);

    let mut out = String::new();
    let cat = graph.category;
    writeln!(out, "digraph {} {{", cat.label()).unwrap();
    writeln!(out, "  label=\"{}. {}\";", cat.label(), cat.description()).unwrap();
    writeln!(out, "  labelloc=t;").unwrap();
    writeln!(out, "  node [shape=circle, fixedsize=true, fontsize=10];").unwrap();
    for (c, &v) in graph.visits.iter().enumerate() {
        let scale = if max_visits == 0 {
            0.0
        } else {
            (v as f64 / max_visits as f64).sqrt()
        };
        writeln!(
            out,
            "  s{c} [label=\"{c}\", width={:.3}, tooltip=\"{v} visits\"];",
            MIN_WIDTH + (MAX_WIDTH - MIN_WIDTH) * scale
        )
        .unwrap();
    }
    if graph.starts.iter().any(|&n| n > 0) {
        writeln!(out, "  start [shape=point, width=0.08, label=\"\"];").unwrap();
        for (c, &n) in graph.starts.iter().enumerate().filter(|(_, &n)| n > 0) {
            writeln!(out, "  start -> s{c} [{}, style=dashed];", edge_attrs(n, max_edge)).unwrap();
        }
    }
    for (c, row) in graph.edges.iter().enumerate() {
        for (next, &n) in row.iter().enumerate().filter(|(_, &n)| n > 0) {
            writeln!(out, "  s{c} -> s{next} [{}];", edge_attrs(n, max_edge)).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// One DOT text per requested category label (`"S1"`..`"S7"`); an empty
/// request draws [`DEFAULT_PANELS`].
pub fn export_transition_graphs(
    paths: &[Vec<usize>],
    categories: &[Vec<usize>],
    states: usize,
    labels: &[String],
) -> Result<Vec<(SocialCategory, String)>> {
    let panels: Vec<SocialCategory> = if labels.is_empty() {
        DEFAULT_PANELS.to_vec()
    } else {
        labels
            .iter()
            .map(|l| {
                SocialCategory::parse(l).ok_or_else(|| Error::InvalidInput(format!("unknown social category `{l}`")))
            })
            .collect::<Result<_>>()?
    };
    panels
        .into_iter()
        .map(|cat| {
            let g = TransitionGraph::from_paths(paths, categories, states, cat)?;
            Ok((cat, export_transition_graph(&g)))
        })
        .collect()
}
