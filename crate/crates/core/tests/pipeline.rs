use std::fs;

use easytime::runtime::{format_event_line, AgentRuntime, CompetitorRef, EventMode, Outcome};
use easytime::semantics::compile_source;
use easytime::simulator::{simulate, synthetic_runners, Scenario};
use easytime::store::{create_db, rank_results, DataDir};
use easytime::Registry;

const TRIATHLON: &str = include_str!("../examples/triathlon.et");

fn fresh(competitors: u32) -> AgentRuntime {
    let prog = compile_source(TRIATHLON).unwrap();
    let runners = synthetic_runners(competitors);
    let db = create_db(&prog.state, &runners).unwrap();
    AgentRuntime::new(prog.unit, db, Registry::new(runners).unwrap())
}

#[test]
fn simulated_race_finishes_every_competitor() {
    let scenario = Scenario::with(12, 5);
    let events = simulate(&scenario).unwrap();
    let mut rt = fresh(12);
    for e in events.clone() {
        assert_eq!(rt.dispatch_event(e), Outcome::Applied);
    }
    let db = rt.db();
    for id in 1..=12 {
        for lap in ["ROUND1", "ROUND2", "ROUND3"] {
            assert_eq!(db.get(id, lap), Some(0), "{lap} of {id}");
        }
        let t: Vec<i64> = ["SWIM", "TRANS1", "BIKE", "TRANS2", "RUN"].iter().map(|c| db.get(id, c).unwrap()).collect();
        assert!(t.iter().all(|&v| v > 0));
        assert!(t.windows(2).all(|w| w[0] <= w[1]), "{t:?}");

        let mine: Vec<_> = events.iter().filter(|e| e.competitor == CompetitorRef::StartNumber(id)).collect();
        let last_at = |mp: u32| mine.iter().rev().find(|e| e.mp.0 == mp).unwrap().time;
        assert_eq!(db.get(id, "INTER2"), Some(last_at(3)));
        assert_eq!(db.get(id, "INTER3"), Some(last_at(4)));
        assert_eq!(db.get(id, "RUN"), Some(last_at(4)));
    }

    let ranked = rank_results(db, rt.registry(), "RUN", true).unwrap();
    assert_eq!(ranked.len(), 12);
    assert!(ranked.windows(2).all(|w| w[0].value <= w[1].value));
    assert_eq!(ranked[0].rank, Some(1));
}

#[test]
fn replaying_the_log_reproduces_the_database() {
    let events = simulate(&Scenario::with(3, 9)).unwrap();
    let mut a = fresh(3);
    for e in events {
        a.dispatch_event(e);
    }
    let mut b = fresh(3);
    for entry in a.log() {
        if let easytime::runtime::LoggedEvent::Parsed(e) = &entry.event {
            b.dispatch_event(e.clone());
        }
    }
    assert_eq!(a.db(), b.db());
}

#[test]
fn batch_file_through_data_directory() {
    let dir = tempfile::tempdir().unwrap();
    let data = DataDir::create(dir.path().join("data")).unwrap();
    let prog = compile_source(TRIATHLON).unwrap();
    let runners = synthetic_runners(2);
    data.save_pgm(&prog.unit).unwrap();
    data.save_runners(&runners).unwrap();
    data.save_results(&create_db(&prog.state, &runners).unwrap()).unwrap();

    let scenario = Scenario::with(2, 1);
    let events = simulate(&scenario).unwrap();
    let batch = dir.path().join("events.txt");
    let mut f = fs::File::create(&batch).unwrap();
    easytime::simulator::write_events(&mut f, &scenario, &events).unwrap();

    let mut rt = AgentRuntime::open(&data).unwrap();
    // the program is read once; later edits are not seen by this runtime
    fs::write(data.pgm_path(), "garbage").unwrap();
    let summary = rt.process_batch(&batch, &data.archive_dir()).unwrap();
    assert_eq!((summary.applied, summary.skipped), (362, 0));
    assert_eq!(rt.log().len(), 362);
    rt.save().unwrap();
    assert!(!batch.exists());

    let reloaded = data.load_results().unwrap();
    assert_eq!(&reloaded, rt.db());
    assert_eq!(reloaded.get(1, "ROUND2"), Some(0));
}

#[test]
fn open_rejects_rows_without_runners() {
    let dir = tempfile::tempdir().unwrap();
    let data = DataDir::create(dir.path()).unwrap();
    let prog = compile_source(TRIATHLON).unwrap();
    data.save_pgm(&prog.unit).unwrap();
    data.save_runners(&synthetic_runners(1)).unwrap();
    data.save_results(&create_db(&prog.state, &synthetic_runners(2)).unwrap()).unwrap();
    assert!(AgentRuntime::open(&data).is_err());
}

#[test]
fn auto_lines_resolve_through_rfid() {
    let mut rt = fresh(2);
    let e = easytime::simulator::as_auto(&easytime::TimingEvent::manual(2, 2, 777));
    let line = format_event_line(&e);
    assert_eq!(line, "2;TAG2;2;777");
    rt.receive_line(&line, EventMode::Auto);
    assert_eq!(rt.db().get(2, "TRANS1"), Some(777));
    rt.receive_line(";TAG1;2;778", EventMode::Auto);
    assert_eq!(rt.db().get(1, "TRANS1"), Some(778));
}
