//! Shared fixtures for the criterion benchmarks.

use easytime::semantics::compile_source;
use easytime::simulator::{simulate, synthetic_runners, Scenario};
use easytime::store::create_db;
use easytime::{AgentRuntime, CompiledProgram, Registry, TimingEvent};

pub const TRIATHLON: &str = include_str!("../../core/examples/triathlon.et");

pub fn triathlon() -> CompiledProgram {
    compile_source(TRIATHLON).expect("fixture compiles")
}

/// A runtime over a fresh results table for `competitors` synthetic runners.
pub fn runtime(competitors: u32) -> AgentRuntime {
    let prog = triathlon();
    let runners = synthetic_runners(competitors);
    let db = create_db(&prog.state, &runners).expect("fresh table");
    AgentRuntime::new(prog.unit, db, Registry::new(runners).expect("unique runners"))
}

pub fn race(competitors: u32, seed: u64) -> Vec<TimingEvent> {
    simulate(&Scenario::with(competitors, seed)).expect("valid scenario")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_consistent() {
        let mut rt = runtime(2);
        for e in race(2, 1) {
            assert!(rt.dispatch_event(e).is_applied());
        }
    }
}
