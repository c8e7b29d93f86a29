use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::MpId;

/// How an event identifies its competitor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompetitorRef {
    StartNumber(i64),
    /// Tag read by a device. The starting number sent alongside it, if any,
    /// is only cross-checked; the tag decides.
    Rfid {
        tag: String,
        start_number: Option<i64>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimingEvent {
    pub competitor: CompetitorRef,
    pub mp: MpId,
    /// Seconds since 1970-01-01.
    pub time: i64,
}

impl TimingEvent {
    pub fn manual(number: i64, mp: u32, time: i64) -> Self {
        TimingEvent { competitor: CompetitorRef::StartNumber(number), mp: MpId(mp), time }
    }

    pub fn auto(number: Option<i64>, tag: impl Into<String>, mp: u32, time: i64) -> Self {
        TimingEvent { competitor: CompetitorRef::Rfid { tag: tag.into(), start_number: number }, mp: MpId(mp), time }
    }
}

impl fmt::Display for TimingEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_event_line(self))
    }
}

/// Line formats:
///
/// * manual: `<#>;<MP>;<TIME>`
/// * auto: `<#>;<RFID>;<MP>;<TIME>` (`#` may be empty)
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventMode {
    Manual,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed event `{line}`: {reason}")]
pub struct MalformedEvent {
    pub line: String,
    pub reason: String,
}

pub fn parse_event_line(line: &str, mode: EventMode) -> Result<TimingEvent, MalformedEvent> {
    let bad = |reason: String| MalformedEvent { line: line.to_string(), reason };
    let fields: Vec<&str> = line.trim().split(';').map(str::trim).collect();
    let expected = match mode {
        EventMode::Manual => 3,
        EventMode::Auto => 4,
    };
    if fields.len() != expected {
        return Err(bad(format!("expected {expected} `;`-separated fields, found {}", fields.len())));
    }

    let int = |name: &str, s: &str| -> Result<i64, MalformedEvent> {
        s.parse::<i64>().map_err(|_| bad(format!("{name} `{s}` is not an integer")))
    };
    let (mp_field, time_field) = (fields[expected - 2], fields[expected - 1]);
    let mp = int("measuring place", mp_field)?;
    let mp =
        u32::try_from(mp).ok().filter(|&m| m >= 1).ok_or_else(|| bad(format!("measuring place {mp} out of range")))?;
    let time = int("time", time_field)?;
    if time < 0 {
        return Err(bad(format!("negative time {time}")));
    }

    let competitor = match mode {
        EventMode::Manual => CompetitorRef::StartNumber(int("starting number", fields[0])?),
        EventMode::Auto => {
            let tag = fields[1];
            if tag.is_empty() {
                return Err(bad("empty RFID".into()));
            }
            let start_number = match fields[0] {
                "" => None,
                s => Some(int("starting number", s)?),
            };
            CompetitorRef::Rfid { tag: tag.to_string(), start_number }
        }
    };
    Ok(TimingEvent { competitor, mp: MpId(mp), time })
}

/// Inverse of [`parse_event_line`] for the event's own mode.
pub fn format_event_line(e: &TimingEvent) -> String {
    match &e.competitor {
        CompetitorRef::StartNumber(n) => format!("{n};{};{}", e.mp, e.time),
        CompetitorRef::Rfid { tag, start_number } => {
            let n = start_number.map(|n| n.to_string()).unwrap_or_default();
            format!("{n};{tag};{};{}", e.mp, e.time)
        }
    }
}
