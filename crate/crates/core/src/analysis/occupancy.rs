use std::fmt;

use serde::Serialize;

use crate::corpus::SocialCategory;
use crate::special::chi_square_sf;
use crate::{Error, Result};

/// Social categories pooled over "has been following" and "started to
/// follow".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConnectionGroup {
    GS,
    GP,
    GB,
    NO,
}

impl ConnectionGroup {
    pub const ALL: [ConnectionGroup; 4] = [
        ConnectionGroup::GS,
        ConnectionGroup::GP,
        ConnectionGroup::GB,
        ConnectionGroup::NO,
    ];

    pub fn of(category: SocialCategory) -> Self {
        match category {
            SocialCategory::S1 | SocialCategory::S2 => ConnectionGroup::GS,
            SocialCategory::S3 | SocialCategory::S4 => ConnectionGroup::GP,
            SocialCategory::S5 | SocialCategory::S6 => ConnectionGroup::GB,
            SocialCategory::S7 => ConnectionGroup::NO,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            ConnectionGroup::GS => "GS",
            ConnectionGroup::GP => "GP",
            ConnectionGroup::GB => "GB",
            ConnectionGroup::NO => "NO",
        }
    }
}

impl fmt::Display for ConnectionGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// User-week counts per (state, connection group).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OccupancyTable {
    /// `counts[state][group]`
    pub counts: Vec<[u64; 4]>,
}

impl OccupancyTable {
    pub fn states(&self) -> usize {
        self.counts.len()
    }

    pub fn column(&self, group: ConnectionGroup) -> Vec<u64> {
        self.counts.iter().map(|row| row[group.index()]).collect()
    }

    pub fn column_total(&self, group: ConnectionGroup) -> u64 {
        self.counts.iter().map(|row| row[group.index()]).sum()
    }

    /// Column-normalized counts; an empty column stays all zero.
    pub fn proportions(&self) -> Vec<[f64; 4]> {
        let totals = ConnectionGroup::ALL.map(|g| self.column_total(g));
        self.counts
            .iter()
            .map(|row| {
                let mut out = [0.0; 4];
                for g in 0..4 {
                    if totals[g] > 0 {
                        out[g] = row[g] as f64 / totals[g] as f64;
                    }
                }
                out
            })
            .collect()
    }
}

/// Tallies decoded states against the social category (index into
/// [`SocialCategory::ALL`]) of the same user-week.
pub fn occupancy_table(paths: &[Vec<usize>], categories: &[Vec<usize>], states: usize) -> Result<OccupancyTable> {
    if paths.len() != categories.len() {
        return Err(Error::InvalidInput(format!(
            "{} state paths but {} category sequences",
            paths.len(),
            categories.len()
        )));
    }
    let mut counts = vec![[0u64; 4]; states];
    for (m, (path, cats)) in paths.iter().zip(categories).enumerate() {
        if path.len() != cats.len() {
            return Err(Error::InvalidInput(format!(
                "sequence {m}: {} states but {} categories",
                path.len(),
                cats.len()
            )));
        }
        for (&c, &a) in path.iter().zip(cats) {
            let cat = SocialCategory::from_index(a)
                .ok_or_else(|| Error::InvalidInput(format!("sequence {m}: unknown social category {a}")))?;
            let row = counts
                .get_mut(c)
                .ok_or_else(|| Error::InvalidInput(format!("sequence {m}: state {c} out of range")))?;
            row[ConnectionGroup::of(cat).index()] += 1;
        }
    }
    Ok(OccupancyTable { counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson's test of independence on the 2×S table formed by two count
/// vectors. States with zero counts in both vectors are dropped first; no
/// continuity correction.
pub fn chi_square(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!("count vectors differ in length ({} vs {})", a.len(), b.len())));
    }
    let (ta, tb): (u64, u64) = (a.iter().sum(), b.iter().sum());
    if ta == 0 || tb == 0 {
        return Err(Error::InvalidInput("chi-square needs two nonempty groups".into()));
    }
    let rows: Vec<(u64, u64)> = a.iter().zip(b).map(|(&x, &y)| (x, y)).filter(|&(x, y)| x + y > 0).collect();
    let df = rows.len() - 1;
    if df == 0 {
        return Ok(ChiSquare {
            statistic: 0.0,
            df,
            p_value: 1.0,
        });
    }
    let n = (ta + tb) as f64;
    let mut statistic = 0.0;
    for (x, y) in rows {
        let row = (x + y) as f64;
        for (obs, col) in [(x, ta), (y, tb)] {
            let expected = row * col as f64 / n;
            statistic += (obs as f64 - expected).powi(2) / expected;
        }
    }
    Ok(ChiSquare {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
    })
}

/// `"**"` below 0.01, `"*"` below 0.05, else empty.
pub fn significance(p_value: f64) -> &'static str {
    if p_value < 0.01 {
        "**"
    } else if p_value < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupComparison {
    pub other: ConnectionGroup,
    /// `None` when either column is empty.
    pub test: Option<ChiSquare>,
}

/// GS against each other group, one 2×S test per pair.
pub fn gs_comparisons(table: &OccupancyTable) -> Vec<GroupComparison> {
    let gs = table.column(ConnectionGroup::GS);
    ConnectionGroup::ALL[1..]
        .iter()
        .map(|&other| GroupComparison {
            other,
            test: chi_square(&gs, &table.column(other)).ok(),
        })
        .collect()
}
