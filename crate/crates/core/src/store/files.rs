//! Flat-file layout of a data directory:
//!
//! ```text
//! data/
//!   runners.csv   Id,RFID,LastName,FirstName
//!   results.csv   Id,<variables...>
//!   pgm.txt       canonical code text
//!   archive/      processed batch files
//! ```
//!
//! Files are UTF-8 with LF line endings and unquoted comma-separated fields.

use std::fs;
use std::path::{Path, PathBuf};

use super::db::ResultsDatabase;
use super::runner::Runner;
use super::StoreError;
use crate::vm::{parse_code, serialize_code, CompiledUnit};

const RUNNERS_HEADER: [&str; 4] = ["Id", "RFID", "LastName", "FirstName"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir { root: root.into() }
    }

    /// Creates the directory and its `archive/` subdirectory if missing.
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = DataDir::new(root);
        fs::create_dir_all(dir.archive_dir()).map_err(|e| StoreError::io(&dir.archive_dir(), e))?;
        Ok(dir)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn runners_path(&self) -> PathBuf {
        self.root.join("runners.csv")
    }

    pub fn results_path(&self) -> PathBuf {
        self.root.join("results.csv")
    }

    pub fn pgm_path(&self) -> PathBuf {
        self.root.join("pgm.txt")
    }

    pub fn archive_dir(&self) -> PathBuf {
        self.root.join("archive")
    }

    pub fn load_runners(&self) -> Result<Vec<Runner>, StoreError> {
        load_runners(&self.runners_path())
    }

    pub fn save_runners(&self, runners: &[Runner]) -> Result<(), StoreError> {
        save_runners(&self.runners_path(), runners)
    }

    pub fn load_results(&self) -> Result<ResultsDatabase, StoreError> {
        load_results(&self.results_path())
    }

    pub fn save_results(&self, db: &ResultsDatabase) -> Result<(), StoreError> {
        save_results(&self.results_path(), db)
    }

    pub fn load_pgm(&self) -> Result<CompiledUnit, StoreError> {
        let path = self.pgm_path();
        let text = fs::read_to_string(&path).map_err(|e| StoreError::io(&path, e))?;
        parse_code(&text).map_err(|e| StoreError::Format {
            path: path.display().to_string(),
            line: e.line,
            message: e.message,
        })
    }

    pub fn save_pgm(&self, unit: &CompiledUnit) -> Result<(), StoreError> {
        write_atomic(&self.pgm_path(), serialize_code(unit).as_bytes())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| StoreError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| StoreError::io(path, e))
}

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> StoreError {
    StoreError::Format { path: path.display().to_string(), line, message: message.into() }
}

fn check_field(path: &Path, line: usize, field: &str) -> Result<(), StoreError> {
    if field.contains([',', '\n', '\r']) {
        return Err(format_err(path, line, format!("field `{field}` may not contain commas or line breaks")));
    }
    Ok(())
}

/// Reads all records, returning (line number, fields) pairs.
fn read_records(path: &Path) -> Result<Vec<(usize, Vec<String>)>, StoreError> {
    let text = fs::read_to_string(path).map_err(|e| StoreError::io(path, e))?;
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).quoting(false).flexible(true).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            format_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

fn write_records(path: &Path, records: impl IntoIterator<Item = Vec<String>>) -> Result<(), StoreError> {
    let mut writer = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::Never)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for rec in records {
        writer.write_record(&rec).map_err(|e| format_err(path, 0, e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| format_err(path, 0, e.to_string()))?;
    write_atomic(path, &bytes)
}

fn parse_int(path: &Path, line: usize, field: &str) -> Result<i64, StoreError> {
    field.trim().parse().map_err(|_| format_err(path, line, format!("`{field}` is not an integer")))
}

pub fn load_runners(path: &Path) -> Result<Vec<Runner>, StoreError> {
    let mut records = read_records(path)?.into_iter();
    match records.next() {
        Some((_, header)) if header == RUNNERS_HEADER => {}
        Some((line, _)) => {
            return Err(format_err(path, line, format!("expected header `{}`", RUNNERS_HEADER.join(","))))
        }
        None => return Err(format_err(path, 1, "missing header")),
    }
    records
        .map(|(line, fields)| {
            let [id, rfid, last, first]: [String; 4] = fields
                .try_into()
                .map_err(|f: Vec<String>| format_err(path, line, format!("expected 4 fields, found {}", f.len())))?;
            if rfid.is_empty() {
                return Err(format_err(path, line, "empty RFID"));
            }
            Ok(Runner { id: parse_int(path, line, &id)?, rfid, last_name: last, first_name: first })
        })
        .collect()
}

pub fn save_runners(path: &Path, runners: &[Runner]) -> Result<(), StoreError> {
    for (i, r) in runners.iter().enumerate() {
        for f in [&r.rfid, &r.last_name, &r.first_name] {
            check_field(path, i + 2, f)?;
        }
    }
    let header = RUNNERS_HEADER.iter().map(|s| s.to_string()).collect();
    let rows =
        runners.iter().map(|r| vec![r.id.to_string(), r.rfid.clone(), r.last_name.clone(), r.first_name.clone()]);
    write_records(path, std::iter::once(header).chain(rows))
}

pub fn load_results(path: &Path) -> Result<ResultsDatabase, StoreError> {
    let mut records = read_records(path)?.into_iter();
    let columns = match records.next() {
        Some((_, header)) if header.first().map(String::as_str) == Some("Id") => header[1..].to_vec(),
        Some((line, _)) => return Err(format_err(path, line, "header must start with `Id`")),
        None => return Err(format_err(path, 1, "missing header")),
    };
    let mut rows = Vec::new();
    for (line, fields) in records {
        if fields.len() != columns.len() + 1 {
            return Err(format_err(
                path,
                line,
                format!("expected {} fields, found {}", columns.len() + 1, fields.len()),
            ));
        }
        let id = parse_int(path, line, &fields[0])?;
        let cells = fields[1..].iter().map(|f| parse_int(path, line, f)).collect::<Result<_, _>>()?;
        rows.push((id, cells));
    }
    ResultsDatabase::from_rows(columns, rows).map_err(|e| match e {
        StoreError::Format { line, message, .. } => format_err(path, line, message),
        other => other,
    })
}

pub fn save_results(path: &Path, db: &ResultsDatabase) -> Result<(), StoreError> {
    let header = std::iter::once("Id".to_string()).chain(db.columns().iter().cloned()).collect();
    let rows =
        db.rows().map(|(id, cells)| std::iter::once(id.to_string()).chain(cells.iter().map(i64::to_string)).collect());
    write_records(path, std::iter::once(header).chain(rows))
}
