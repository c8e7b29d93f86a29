use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::event::{parse_event_line, CompetitorRef, EventMode, TimingEvent};
use super::RuntimeError;
use crate::store::{DataDir, Registry, ResultsDatabase};
use crate::vm::{self, CompiledUnit, EventContext};
use crate::MpId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum SkipReason {
    Malformed(String),
    UnknownMeasuringPlace(MpId),
    UnknownRfid(String),
    UnknownCompetitor(i64),
    Fault(String),
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkipReason::Malformed(r) => write!(f, "malformed event: {r}"),
            SkipReason::UnknownMeasuringPlace(mp) => write!(f, "unknown measuring place {mp}"),
            SkipReason::UnknownRfid(tag) => write!(f, "unknown RFID `{tag}`"),
            SkipReason::UnknownCompetitor(id) => write!(f, "unknown competitor {id}"),
            SkipReason::Fault(e) => write!(f, "machine fault: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Applied,
    Skipped(SkipReason),
}

impl Outcome {
    pub fn is_applied(&self) -> bool {
        matches!(self, Outcome::Applied)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Applied => f.write_str("applied"),
            Outcome::Skipped(r) => write!(f, "skipped({r})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum LoggedEvent {
    Parsed(TimingEvent),
    Malformed { line: String },
}

/// One received event and what became of it. `seq` increases by one per
/// received event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub seq: u64,
    pub event: LoggedEvent,
    pub outcome: Outcome,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let event = match &self.event {
            LoggedEvent::Parsed(e) => e.to_string(),
            LoggedEvent::Malformed { line } => line.clone(),
        };
        write!(f, "{} {} {}", self.seq, self.outcome, event)
    }
}

impl Serialize for LogEntry {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LogEntry", 4)?;
        st.serialize_field("seq", &self.seq)?;
        st.serialize_field("event", &self.event)?;
        match &self.outcome {
            Outcome::Applied => {
                st.serialize_field("outcome", "applied")?;
                st.skip_field("reason")?;
            }
            Outcome::Skipped(r) => {
                st.serialize_field("outcome", "skipped")?;
                st.serialize_field("reason", &r.to_string())?;
            }
        }
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchSummary {
    pub applied: usize,
    pub skipped: usize,
    pub archived_to: PathBuf,
}

/// The agent: compiled program, competitor registry and results database.
///
/// Events must be applied one at a time; the live service funnels every
/// connection through a single queue that owns the runtime.
#[derive(Debug, Clone)]
pub struct AgentRuntime {
    unit: CompiledUnit,
    db: ResultsDatabase,
    registry: Registry,
    log: Vec<LogEntry>,
    data: Option<DataDir>,
    echo: bool,
}

impl AgentRuntime {
    pub fn new(unit: CompiledUnit, db: ResultsDatabase, registry: Registry) -> Self {
        AgentRuntime { unit, db, registry, log: Vec::new(), data: None, echo: false }
    }

    /// Loads `pgm.txt`, `runners.csv` and `results.csv`. The program is read
    /// here and never again for the lifetime of the runtime.
    pub fn open(data: &DataDir) -> Result<Self, RuntimeError> {
        let unit = data.load_pgm()?;
        let registry = Registry::new(data.load_runners()?)?;
        let db = data.load_results()?;
        for (id, _) in db.rows() {
            if registry.by_id(id).is_none() {
                return Err(RuntimeError::Mismatch(format!("results row {id} has no registered runner")));
            }
        }
        let mut rt = AgentRuntime::new(unit, db, registry);
        rt.data = Some(data.clone());
        Ok(rt)
    }

    /// Print one `<seq> <outcome> <event>` line per event to standard error.
    pub fn set_echo(&mut self, echo: bool) {
        self.echo = echo;
    }

    pub fn unit(&self) -> &CompiledUnit {
        &self.unit
    }

    pub fn db(&self) -> &ResultsDatabase {
        &self.db
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn applied_count(&self) -> usize {
        self.log.iter().filter(|e| e.outcome.is_applied()).count()
    }

    /// Writes `results.csv` back to the data directory, if there is one.
    pub fn save(&self) -> Result<(), RuntimeError> {
        if let Some(data) = &self.data {
            data.save_results(&self.db)?;
        }
        Ok(())
    }

    fn record(&mut self, event: LoggedEvent, outcome: Outcome) -> &LogEntry {
        let entry = LogEntry { seq: self.log.len() as u64 + 1, event, outcome };
        if self.echo {
            eprintln!("{entry}");
        }
        self.log.push(entry);
        self.log.last().unwrap()
    }

    fn resolve(&self, competitor: &CompetitorRef) -> Result<i64, SkipReason> {
        match competitor {
            CompetitorRef::StartNumber(n) => match self.registry.by_id(*n) {
                Some(r) => Ok(r.id),
                None => Err(SkipReason::UnknownCompetitor(*n)),
            },
            CompetitorRef::Rfid { tag, start_number } => {
                let runner = self.registry.by_rfid(tag).ok_or_else(|| SkipReason::UnknownRfid(tag.clone()))?;
                if let Some(n) = start_number {
                    if *n != runner.id {
                        log::warn!(
                            "RFID {tag} belongs to competitor {} but the device sent #{n}; using {}",
                            runner.id,
                            runner.id
                        );
                    }
                }
                Ok(runner.id)
            }
        }
    }

    fn apply(&mut self, event: &TimingEvent) -> Outcome {
        let id = match self.resolve(&event.competitor) {
            Ok(id) => id,
            Err(reason) => return Outcome::Skipped(reason),
        };
        let Some(block) = self.unit.block(event.mp) else {
            return Outcome::Skipped(SkipReason::UnknownMeasuringPlace(event.mp));
        };
        let ctx = EventContext { competitor: id, time: event.time, source: block.source().cloned() };
        match vm::run(&block.code, &mut self.db, &ctx) {
            Ok(_) => Outcome::Applied,
            Err(e) => Outcome::Skipped(SkipReason::Fault(e.to_string())),
        }
    }

    /// Applies one event. Failures never escape; they become skipped
    /// outcomes in the log.
    pub fn dispatch_event(&mut self, event: TimingEvent) -> Outcome {
        let outcome = self.apply(&event);
        self.record(LoggedEvent::Parsed(event), outcome).outcome.clone()
    }

    /// Parses and applies one line. Blank lines and `#` comments are ignored
    /// and return `None`.
    pub fn receive_line(&mut self, line: &str, mode: EventMode) -> Option<&LogEntry> {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            return None;
        }
        match parse_event_line(trimmed, mode) {
            Ok(event) => {
                let outcome = self.apply(&event);
                Some(self.record(LoggedEvent::Parsed(event), outcome))
            }
            Err(e) => Some(
                self.record(LoggedEvent::Malformed { line: e.line }, Outcome::Skipped(SkipReason::Malformed(e.reason))),
            ),
        }
    }

    /// Processes a file of manual-mode lines in order, then moves it to
    /// `archive_dir/<name>.<unix time>`. An unreadable file aborts before any
    /// event is applied.
    pub fn process_batch(&mut self, path: &Path, archive_dir: &Path) -> Result<BatchSummary, RuntimeError> {
        let text = fs::read_to_string(path).map_err(|e| RuntimeError::io(path, e))?;
        let before = self.log.len();
        for line in text.lines() {
            self.receive_line(line, EventMode::Manual);
        }
        let new = &self.log[before..];
        let applied = new.iter().filter(|e| e.outcome.is_applied()).count();
        let skipped = new.len() - applied;
        let archived_to = archive(path, archive_dir)?;
        Ok(BatchSummary { applied, skipped, archived_to })
    }
}

fn archive(path: &Path, archive_dir: &Path) -> Result<PathBuf, RuntimeError> {
    fs::create_dir_all(archive_dir).map_err(|e| RuntimeError::io(archive_dir, e))?;
    let name = path.file_name().map_or_else(|| "events".into(), |n| n.to_string_lossy().into_owned());
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut target = archive_dir.join(format!("{name}.{stamp}"));
    let mut n = 1;
    while target.exists() {
        target = archive_dir.join(format!("{name}.{stamp}.{n}"));
        n += 1;
    }
    if fs::rename(path, &target).is_err() {
        fs::copy(path, &target).map_err(|e| RuntimeError::io(&target, e))?;
        fs::remove_file(path).map_err(|e| RuntimeError::io(path, e))?;
    }
    Ok(target)
}
