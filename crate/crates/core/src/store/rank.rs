use std::collections::BTreeMap;

use serde::Serialize;

use super::db::ResultsDatabase;
use super::runner::Registry;
use super::StoreError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankedResult {
    pub id: i64,
    pub last_name: String,
    pub first_name: String,
    pub value: i64,
    /// Did not finish: the column still holds its zero initializer.
    pub dnf: bool,
    /// Competition rank; `None` for DNF rows.
    pub rank: Option<u32>,
}

/// Orders competitors by `sort_var` ascending. Equal values share the lower
/// rank and the next rank skips accordingly (1, 1, 3); ties are listed by id.
/// With `dnf_when_zero`, rows whose value is 0 are unranked and listed last.
pub fn rank_results(
    db: &ResultsDatabase,
    registry: &Registry,
    sort_var: &str,
    dnf_when_zero: bool,
) -> Result<Vec<RankedResult>, StoreError> {
    let col = db.column_index(sort_var).ok_or_else(|| StoreError::UnknownColumn(sort_var.to_string()))?;

    let mut entries: Vec<RankedResult> = db
        .rows()
        .map(|(id, cells)| {
            let runner = registry.by_id(id);
            RankedResult {
                id,
                last_name: runner.map(|r| r.last_name.clone()).unwrap_or_default(),
                first_name: runner.map(|r| r.first_name.clone()).unwrap_or_default(),
                value: cells[col],
                dnf: dnf_when_zero && cells[col] == 0,
                rank: None,
            }
        })
        .collect();
    entries.sort_by_key(|e| (e.dnf, e.value, e.id));

    let mut prev: Option<(i64, u32)> = None;
    for (pos, e) in entries.iter_mut().enumerate() {
        if e.dnf {
            continue;
        }
        let rank = match prev {
            Some((v, r)) if v == e.value => r,
            _ => pos as u32 + 1,
        };
        e.rank = Some(rank);
        prev = Some((e.value, rank));
    }
    Ok(entries)
}

/// `a - b` for every row, computed at report time (transition areas and
/// discipline times are differences of stored time stamps).
pub fn column_diff(db: &ResultsDatabase, a: &str, b: &str) -> Result<BTreeMap<i64, i64>, StoreError> {
    let ca = db.column_index(a).ok_or_else(|| StoreError::UnknownColumn(a.to_string()))?;
    let cb = db.column_index(b).ok_or_else(|| StoreError::UnknownColumn(b.to_string()))?;
    Ok(db.rows().map(|(id, cells)| (id, cells[ca] - cells[cb])).collect())
}
