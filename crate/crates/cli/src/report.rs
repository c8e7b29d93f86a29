use easytime::store::{column_diff, rank_results, StoreError};
use easytime::{Registry, ResultsDatabase};

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// Ranked rows for `sort`, optionally with an extra `A-B` column.
pub fn results_table(
    db: &ResultsDatabase,
    registry: &Registry,
    sort: &str,
    dnf_zero: bool,
    diff: Option<(String, String)>,
) -> Result<Table, StoreError> {
    let ranked = rank_results(db, registry, sort, dnf_zero)?;
    let diffs = match &diff {
        Some((a, b)) => Some(column_diff(db, a, b)?),
        None => None,
    };
    let mut header: Vec<String> = ["Rank", "Id", "LastName", "FirstName", sort].iter().map(|s| s.to_string()).collect();
    if let Some((a, b)) = &diff {
        header.push(format!("{a}-{b}"));
    }
    let rows = ranked
        .iter()
        .map(|r| {
            let mut row = vec![
                r.rank.map_or_else(|| "DNF".to_string(), |n| n.to_string()),
                r.id.to_string(),
                r.last_name.clone(),
                r.first_name.clone(),
                r.value.to_string(),
            ];
            if let Some(d) = &diffs {
                row.push(d[&r.id].to_string());
            }
            row
        })
        .collect();
    Ok(Table { header, rows })
}

impl Table {
    pub fn porcelain(&self) -> String {
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            out.push_str(&line.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
