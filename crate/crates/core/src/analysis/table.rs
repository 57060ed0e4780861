use serde::Serialize;

use super::{gs_comparisons, significance, ConnectionGroup, OccupancyTable, StateSummary};
use crate::Result;

/// One cell of the long-format analysis table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub table: &'static str,
    pub row: String,
    pub column: String,
    pub value: String,
}

fn cell(table: &'static str, row: impl Into<String>, column: impl Into<String>, value: impl Into<String>) -> TableRow {
    TableRow {
        table,
        row: row.into(),
        column: column.into(),
        value: value.into(),
    }
}

/// Renders the state summary, the occupancy table (counts and column
/// proportions) and the GS-vs-group chi-square tests as one CSV with
/// columns `table,row,column,value`.
pub fn tables_csv(summary: &[StateSummary], doc_type_labels: &[&str], occupancy: &OccupancyTable) -> Result<String> {
    let mut rows = Vec::new();
    for s in summary {
        let state = format!("state {}", s.state);
        rows.push(cell("states", state.clone(), "topics", s.topics_cell()));
        for (k, p) in s.doc_types.iter().enumerate() {
            let label = doc_type_labels.get(k).map_or_else(|| format!("type {k}"), |l| l.to_string());
            rows.push(cell("states", state.clone(), label, format!("{p:.2}")));
        }
    }
    let props = occupancy.proportions();
    for (c, counts) in occupancy.counts.iter().enumerate() {
        for g in ConnectionGroup::ALL {
            rows.push(cell("occupancy", format!("state {c}"), g.label(), counts[g.index()].to_string()));
        }
    }
    for (c, p) in props.iter().enumerate() {
        for g in ConnectionGroup::ALL {
            rows.push(cell("proportion", format!("state {c}"), g.label(), format!("{:.4}", p[g.index()])));
        }
    }
    for cmp in gs_comparisons(occupancy) {
        let row = format!("GS vs {}", cmp.other);
        match cmp.test {
            Some(t) => {
                rows.push(cell("chi_square", row.clone(), "statistic", format!("{:.6}", t.statistic)));
                rows.push(cell("chi_square", row.clone(), "df", t.df.to_string()));
                rows.push(cell("chi_square", row.clone(), "p_value", format!("{:.6e}", t.p_value)));
                rows.push(cell("chi_square", row, "significance", significance(t.p_value)));
            }
            None => rows.push(cell("chi_square", row, "statistic", "NA")),
        }
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r).map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::InvalidInput(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
