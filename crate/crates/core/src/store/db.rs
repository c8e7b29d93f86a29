use std::collections::HashMap;

use super::runner::Runner;
use super::StoreError;
use crate::semantics::InitialState;
use crate::vm::{Database, VmError};

/// One row per competitor: `Id` plus one integer column per declared variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultsDatabase {
    columns: Vec<String>,
    rows: Vec<(i64, Vec<i64>)>,
    index: HashMap<i64, usize>,
}

impl ResultsDatabase {
    /// Builds a table from raw parts. Fails on a repeated id or a row whose
    /// width does not match the column list.
    pub fn from_rows(columns: Vec<String>, rows: Vec<(i64, Vec<i64>)>) -> Result<Self, StoreError> {
        let mut index = HashMap::with_capacity(rows.len());
        for (i, (id, cells)) in rows.iter().enumerate() {
            if cells.len() != columns.len() {
                return Err(StoreError::Format {
                    path: String::new(),
                    line: i + 2,
                    message: format!("row {id} has {} cells, expected {}", cells.len(), columns.len()),
                });
            }
            if index.insert(*id, i).is_some() {
                return Err(StoreError::DuplicateRunnerId(*id));
            }
        }
        Ok(ResultsDatabase { columns, rows, index })
    }

    /// Variable columns, without `Id`.
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn rows(&self) -> impl Iterator<Item = (i64, &[i64])> {
        self.rows.iter().map(|(id, cells)| (*id, cells.as_slice()))
    }

    pub fn row(&self, id: i64) -> Option<&[i64]> {
        self.index.get(&id).map(|&i| self.rows[i].1.as_slice())
    }

    pub fn get(&self, id: i64, column: &str) -> Option<i64> {
        let c = self.column_index(column)?;
        self.row(id).map(|r| r[c])
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

impl Database for ResultsDatabase {
    fn has_row(&self, id: i64) -> bool {
        self.index.contains_key(&id)
    }

    fn select(&self, id: i64, column: &str) -> Result<i64, VmError> {
        let c = self.column_index(column).ok_or_else(|| VmError::UnknownVariable(column.to_string()))?;
        let row = self.row(id).ok_or(VmError::UnknownCompetitor(id))?;
        Ok(row[c])
    }

    fn update(&mut self, id: i64, column: &str, value: i64) -> Result<(), VmError> {
        let c = self.column_index(column).ok_or_else(|| VmError::UnknownVariable(column.to_string()))?;
        let &i = self.index.get(&id).ok_or(VmError::UnknownCompetitor(id))?;
        self.rows[i].1[c] = value;
        Ok(())
    }
}

/// Creates the results table: one row per runner, every variable set to its
/// declared initial value.
pub fn create_db(state: &InitialState, runners: &[Runner]) -> Result<ResultsDatabase, StoreError> {
    let columns: Vec<String> = state.names().map(str::to_string).collect();
    let initial: Vec<i64> = state.iter().map(|(_, v)| v).collect();
    let mut seen_tags = std::collections::HashSet::new();
    for r in runners {
        if !seen_tags.insert(r.rfid.as_str()) {
            return Err(StoreError::DuplicateRfid(r.rfid.clone()));
        }
    }
    ResultsDatabase::from_rows(columns, runners.iter().map(|r| (r.id, initial.clone())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::compile_source;

    fn runners(n: i64) -> Vec<Runner> {
        (1..=n).map(|i| Runner::new(i, format!("TAG{i}"), "L", "F")).collect()
    }

    #[test]
    fn triathlon_rows_start_from_declared_values() {
        let prog = compile_source(include_str!("../../examples/triathlon.et")).unwrap();
        let db = create_db(&prog.state, &runners(3)).unwrap();
        assert_eq!(db.len(), 3);
        for (_, row) in db.rows() {
            assert_eq!(row, &[20, 0, 0, 0, 105, 0, 0, 0, 55, 0, 0]);
        }
        assert_eq!(db.get(2, "ROUND2"), Some(105));
    }

    #[test]
    fn no_runners_keeps_header() {
        let state: InitialState = [("X".to_string(), 1)].into_iter().collect();
        let db = create_db(&state, &[]).unwrap();
        assert!(db.is_empty());
        assert_eq!(db.columns(), ["X"]);
    }

    #[test]
    fn single_row() {
        let state: InitialState = [("X".to_string(), 1)].into_iter().collect();
        let db = create_db(&state, &[Runner::new(7, "tagA", "a", "b")]).unwrap();
        assert_eq!(db.rows().collect::<Vec<_>>(), vec![(7, &[1][..])]);
    }

    #[test]
    fn duplicate_runners() {
        let state = InitialState::default();
        let r = vec![Runner::new(7, "a", "", ""), Runner::new(7, "b", "", "")];
        assert!(matches!(create_db(&state, &r), Err(StoreError::DuplicateRunnerId(7))));
        let r = vec![Runner::new(7, "a", "", ""), Runner::new(8, "a", "", "")];
        assert!(matches!(create_db(&state, &r), Err(StoreError::DuplicateRfid(_))));
    }

    #[test]
    fn vm_access() {
        let state: InitialState = [("X".to_string(), 1)].into_iter().collect();
        let mut db = create_db(&state, &runners(2)).unwrap();
        db.update(2, "X", 9).unwrap();
        assert_eq!(db.select(2, "X"), Ok(9));
        assert_eq!(db.select(1, "X"), Ok(1));
        assert_eq!(db.select(3, "X"), Err(VmError::UnknownCompetitor(3)));
        assert_eq!(db.select(1, "Y"), Err(VmError::UnknownVariable("Y".into())));
    }
}
