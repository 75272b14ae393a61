use serde::{Deserialize, Serialize};

use crate::alignment::Translator;
use crate::Result;

/// Cell text for a query that could not be resolved.
pub const NOT_FOUND: &str = "(not found)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborColumn {
    pub query: String,
    /// `None` when the query could not be resolved in the source space.
    pub neighbors: Option<Vec<(String, f64)>>,
}

/// One column per query, rows are ranks `1..=k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NeighborTable {
    pub k: usize,
    pub columns: Vec<NeighborColumn>,
}

pub fn neighbor_table(translator: &Translator<'_>, queries: &[String], k: usize) -> Result<NeighborTable> {
    let columns = queries
        .iter()
        .map(|q| {
            Ok(NeighborColumn {
                query: q.clone(),
                neighbors: translator.translate(q, k)?.map(|r| r.neighbors),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NeighborTable { k, columns })
}

impl NeighborTable {
    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Number of data rows (the longest column).
    pub fn rows(&self) -> usize {
        self.columns
            .iter()
            .map(|c| c.neighbors.as_ref().map_or(1, Vec::len))
            .max()
            .unwrap_or(0)
    }

    fn cells(&self) -> Vec<Vec<String>> {
        let mut grid = vec![self.columns.iter().map(|c| c.query.clone()).collect::<Vec<_>>()];
        for r in 0..self.rows() {
            grid.push(
                self.columns
                    .iter()
                    .map(|c| match &c.neighbors {
                        None if r == 0 => NOT_FOUND.to_string(),
                        None => String::new(),
                        Some(n) => n.get(r).map(|(w, _)| w.clone()).unwrap_or_default(),
                    })
                    .collect(),
            );
        }
        grid
    }

    /// Header row of queries, then one row per rank. Empty for no queries.
    pub fn to_tsv(&self) -> String {
        if self.is_empty() {
            return String::new();
        }
        self.cells().iter().map(|row| row.join("\t") + "\n").collect()
    }

    /// Space-padded columns with a rule under the header.
    pub fn to_text(&self) -> String {
        if self.is_empty() {
            return String::new();
        }
        let grid = self.cells();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|c| grid.iter().map(|row| row[c].chars().count()).max().unwrap_or(0))
            .collect();
        let fmt_row = |row: &Vec<String>| {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(s, &w)| format!("{s:<w$}")).collect();
            cells.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = fmt_row(&grid[0]);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&(rule.join("  ") + "\n"));
        for row in &grid[1..] {
            out.push_str(&fmt_row(row));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_and_missing_marker() {
        let t = NeighborTable {
            k: 2,
            columns: vec![
                NeighborColumn {
                    query: "epistaxis".into(),
                    neighbors: Some(vec![("nosebleed".into(), 0.9), ("nose".into(), 0.8)]),
                },
                NeighborColumn {
                    query: "zzz".into(),
                    neighbors: None,
                },
            ],
        };
        assert_eq!(t.to_tsv(), "epistaxis\tzzz\nnosebleed\t(not found)\nnose\t\n");
        let text = t.to_text();
        assert!(text.starts_with("epistaxis  zzz\n---------  -----------\n"));
        assert_eq!(NeighborTable::default().to_tsv(), "");
    }
}
