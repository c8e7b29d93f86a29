//! Deterministic event streams for a double-ultra-triathlon style course:
//! 20 swim laps at mp 1, one crossing of the first transition at mp 2, 105
//! bike laps at mp 3 and 55 run laps at mp 4.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::runtime::{format_event_line, CompetitorRef, TimingEvent};
use crate::store::Runner;
use crate::MpId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("a scenario needs at least one competitor")]
    NoCompetitors,
    #[error("a scenario needs at least one measuring place")]
    NoLaps,
    #[error("measuring place {0} has a zero crossing count")]
    ZeroLaps(MpId),
    #[error("measuring place {0} has no lap time range")]
    MissingLapTime(MpId),
    #[error("measuring place {mp}: lap time range {min}..={max} is invalid")]
    BadLapTime { mp: MpId, min: i64, max: i64 },
    #[error("start time {0} is negative")]
    NegativeStart(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub competitors: u32,
    /// Crossings per competitor, in course order.
    pub laps: Vec<(MpId, u32)>,
    /// Seconds between consecutive crossings, drawn uniformly from
    /// `min..=max`. `min` must be at least 1 so per-competitor times strictly
    /// increase.
    pub lap_time: BTreeMap<MpId, (i64, i64)>,
    pub start_time: i64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            competitors: 1,
            laps: vec![(MpId(1), 20), (MpId(2), 1), (MpId(3), 105), (MpId(4), 55)],
            lap_time: BTreeMap::from([
                (MpId(1), (300, 600)),
                (MpId(2), (120, 420)),
                (MpId(3), (480, 900)),
                (MpId(4), (420, 900)),
            ]),
            start_time: 1_246_438_800,
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn with(competitors: u32, seed: u64) -> Self {
        Scenario { competitors, seed, ..Scenario::default() }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.competitors == 0 {
            return Err(ScenarioError::NoCompetitors);
        }
        if self.laps.is_empty() {
            return Err(ScenarioError::NoLaps);
        }
        if self.start_time < 0 {
            return Err(ScenarioError::NegativeStart(self.start_time));
        }
        for &(mp, count) in &self.laps {
            if count == 0 {
                return Err(ScenarioError::ZeroLaps(mp));
            }
            let &(min, max) = self.lap_time.get(&mp).ok_or(ScenarioError::MissingLapTime(mp))?;
            if min < 1 || min > max {
                return Err(ScenarioError::BadLapTime { mp, min, max });
            }
        }
        Ok(())
    }

    pub fn events_per_competitor(&self) -> usize {
        self.laps.iter().map(|&(_, n)| n as usize).sum()
    }
}

/// Manual-format events for every competitor (starting numbers `1..=n`),
/// merged into one stream ordered by time, then competitor, then position in
/// that competitor's course.
pub fn simulate(s: &Scenario) -> Result<Vec<TimingEvent>, ScenarioError> {
    s.validate()?;
    let per = s.events_per_competitor();
    let mut tagged = Vec::with_capacity(per * s.competitors as usize);
    for c in 1..=s.competitors {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        rng.set_stream(u64::from(c));
        let mut t = s.start_time;
        let mut idx = 0usize;
        for &(mp, count) in &s.laps {
            let (min, max) = s.lap_time[&mp];
            for _ in 0..count {
                t += rng.random_range(min..=max);
                tagged.push((t, c, idx, TimingEvent::manual(i64::from(c), mp.0, t)));
                idx += 1;
            }
        }
    }
    tagged.sort_by_key(|&(t, c, idx, _)| (t, c, idx));
    Ok(tagged.into_iter().map(|(.., e)| e).collect())
}

pub fn rfid_for(id: i64) -> String {
    format!("TAG{id}")
}

/// The auto-mode quadruple a device would send for a manual event.
pub fn as_auto(e: &TimingEvent) -> TimingEvent {
    match &e.competitor {
        CompetitorRef::StartNumber(n) => {
            TimingEvent { competitor: CompetitorRef::Rfid { tag: rfid_for(*n), start_number: Some(*n) }, ..e.clone() }
        }
        CompetitorRef::Rfid { .. } => e.clone(),
    }
}

/// Registry entries matching a simulated field: ids `1..=n`, tags `TAG<id>`.
pub fn synthetic_runners(n: u32) -> Vec<Runner> {
    (1..=i64::from(n)).map(|id| Runner::new(id, rfid_for(id), format!("Competitor{id}"), format!("C{id}"))).collect()
}

/// Writes a batch file body: a `#` header recording the seed, then one event
/// per line.
pub fn write_events<W: Write>(mut out: W, s: &Scenario, events: &[TimingEvent]) -> io::Result<()> {
    writeln!(out, "# seed={} competitors={}", s.seed, s.competitors)?;
    for e in events {
        writeln!(out, "{}", format_event_line(e))?;
    }
    out.flush()
}

/// Sends events as auto-mode lines to a live agent, sleeping the simulated
/// gap divided by `speedup` between them. A non-positive or infinite speedup
/// sends without pausing.
pub fn stream_tcp(addr: impl ToSocketAddrs, events: &[TimingEvent], speedup: f64) -> io::Result<usize> {
    let mut conn = TcpStream::connect(addr)?;
    conn.set_nodelay(true)?;
    let pace = speedup.is_finite() && speedup > 0.0;
    let mut prev: Option<i64> = None;
    for e in events {
        if let (true, Some(p)) = (pace, prev) {
            let gap = (e.time - p).max(0) as f64 / speedup;
            if gap > 0.0 {
                std::thread::sleep(Duration::from_secs_f64(gap));
            }
        }
        prev = Some(e.time);
        writeln!(conn, "{}", format_event_line(&as_auto(e)))?;
    }
    conn.flush()?;
    Ok(events.len())
}
