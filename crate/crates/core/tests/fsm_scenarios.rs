mod common;

use common::scenarios::{fast_scenario, long_session_runtime, mid_wander_occupancy, run, stuck_scenario, transitions};

#[test]
fn stuck_patient_gets_help() {
    for seed in [0, 7, 21] {
        let (tick, helpful, endorsed) = stuck_scenario(seed);
        assert!(tick.abs_diff(180) <= 2, "seed {seed}: transition at tick {tick}");
        assert!(helpful >= 0.9, "seed {seed}: helpful occupancy {helpful}");
        assert!(endorsed.is_some_and(|t| t <= 60.0), "seed {seed}: {endorsed:?}");
    }
}

#[test]
fn fast_patient_is_challenged() {
    for seed in [0, 7, 21] {
        let ticks = fast_scenario(seed).expect("challenging entered");
        assert!(ticks <= 180 + 2, "seed {seed}: {ticks} ticks of over-speed");
    }
}

#[test]
fn mid_patient_keeps_wandering() {
    for seed in [0, 7, 21] {
        assert_eq!(mid_wander_occupancy(seed), 1.0, "seed {seed}");
    }
}

#[test]
fn tremor_patient_stays_in_band() {
    let out = run("tremor", 120.0, 3);
    assert!(transitions(&out).is_empty(), "{:?}", transitions(&out));
}

#[test]
fn fifteen_minute_session_is_fast() {
    for p in ["stuck", "fast"] {
        let secs = long_session_runtime(p);
        assert!(secs < 5.0, "{p}: {secs} s");
    }
}
