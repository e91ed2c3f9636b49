#![allow(dead_code)]

pub mod assess;
pub mod cli;
pub mod gen;
pub mod kinematics;
pub mod scenarios;
pub mod store;

use mrr::config::GameConfig;
use mrr::game::{Engine, GameEvent};
use mrr::geometry::Vec3;
use mrr::input_capture::{CalibrationMap, RawSample};

pub const DT: f64 = 1.0 / 60.0;

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Camera-space sample that calibrates to `p` on the table.
pub fn sample_at(map: &CalibrationMap, t: f64, p: Vec3) -> RawSample {
    let (u, v) = map.inverse(p.x, p.y).expect("invertible calibration");
    RawSample::new(t, u, v)
}

/// Endorsements expected from a per-tick contact schedule: every maximal
/// run of contact lasting at least `fill` seconds counts once.
pub fn interval_scan(contact: &[bool], dt: f64, fill: f64) -> usize {
    let mut count = 0;
    let mut run = 0usize;
    for &c in contact.iter().chain(std::iter::once(&false)) {
        if c {
            run += 1;
        } else {
            if run as f64 * dt >= fill - 1e-9 {
                count += 1;
            }
            run = 0;
        }
    }
    count
}

/// Drives an engine with the hand at `path(t)` every tick.
pub fn drive(
    cfg: &GameConfig,
    seed: u64,
    ticks: u64,
    mut path: impl FnMut(f64) -> Vec3,
) -> (Engine, Vec<GameEvent>) {
    let mut eng = Engine::new(cfg.clone(), seed);
    let mut events = Vec::new();
    for k in 1..=ticks {
        let t = k as f64 / cfg.tick_rate;
        events.extend(eng.tick(&[sample_at(&cfg.calibration, t, path(t))]));
    }
    (eng, events)
}

/// Mean and population sd by two passes.
pub fn two_pass(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}
