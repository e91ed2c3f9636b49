use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mrr::game::{update_touch, TouchChange, TouchProgress};
use mrr::patient::PatientModel;
use mrr::session_store::{compute_metrics, TracePoint};
use mrr::sim::{simulate, SimOptions, SimOutcome};
use mrr::{AgentMode, DifficultyConfig, EventKind, GameConfig, Vec3};

/// The scenario configuration, stated in full.
pub fn scenario_cfg() -> GameConfig {
    let cfg = GameConfig {
        tick_rate: 60.0,
        difficulty: DifficultyConfig {
            v_min: 0.03,
            v_max: 0.25,
            t_low: 3.0,
            t_high: 3.0,
            t_return: 2.0,
        },
        ..GameConfig::default()
    };
    cfg.validate().unwrap();
    cfg
}

pub fn run(profile: &str, duration: f64, seed: u64) -> SimOutcome {
    let model = PatientModel::builtin(profile).unwrap();
    let opts = SimOptions {
        full_trace: true,
        ..SimOptions::new(duration, seed)
    };
    simulate(&scenario_cfg(), &model, &opts, None).unwrap()
}

pub fn transitions(out: &SimOutcome) -> Vec<(u64, AgentMode, AgentMode)> {
    out.events()
        .iter()
        .filter_map(|e| match e.kind {
            EventKind::AgentTransition { from, to, .. } => Some((e.tick, from, to)),
            _ => None,
        })
        .collect()
}

fn occupancy(trace: &[TracePoint], mode: AgentMode) -> f64 {
    trace.iter().filter(|p| p.mode == mode).count() as f64 / trace.len() as f64
}

/// Stuck patient: (transition tick, helpful occupancy after it, first
/// endorsement time).
pub fn stuck_scenario(seed: u64) -> (u64, f64, Option<f64>) {
    let out = run("stuck", 120.0, seed);
    let (tick, from, to) = transitions(&out)[0];
    assert_eq!((from, to), (AgentMode::Wander, AgentMode::Helpful));
    let after: Vec<_> = out.full_trace.iter().filter(|p| p.tick >= tick).cloned().collect();
    let endorsed = out
        .events()
        .iter()
        .find(|e| matches!(e.kind, EventKind::TouchEndorsed { .. }))
        .map(|e| e.t);
    (tick, occupancy(&after, AgentMode::Helpful), endorsed)
}

/// Fast patient: ticks from the start of the sustained over-speed run that
/// ends in the Challenging transition, to that transition.
pub fn fast_scenario(seed: u64) -> Option<u64> {
    let cfg = scenario_cfg();
    let out = run("fast", 60.0, seed);
    let (tick, _, _) = *transitions(&out).iter().find(|t| t.2 == AgentMode::Challenging)?;
    let trace = &out.full_trace;
    let at = trace.iter().position(|p| p.tick == tick)?;
    let mut start = at;
    while start > 0 && trace[start - 1].hand.speed > cfg.difficulty.v_max {
        start -= 1;
    }
    // The transition tick observes its own sample, so a run of n ticks
    // spans n ticks of dwell.
    Some(tick - trace[start].tick + 1)
}

pub fn mid_wander_occupancy(seed: u64) -> f64 {
    compute_metrics(&run("mid", 120.0, seed).record).unwrap().occupancy.wander
}

/// Wall-clock seconds for a 15-minute session.
pub fn long_session_runtime(profile: &str) -> f64 {
    let model = PatientModel::builtin(profile).unwrap();
    let start = Instant::now();
    simulate(&scenario_cfg(), &model, &SimOptions::new(900.0, 1), None).unwrap();
    start.elapsed().as_secs_f64()
}

/// Config for the scripted pursuit: still fish 0.4 m from a still hand.
pub fn scripted_cfg() -> GameConfig {
    let mut cfg = GameConfig::default();
    cfg.behavior.max_speed = 0.2;
    cfg.behavior.max_accel = 1.0;
    cfg.behavior.wander_jitter = 0.0;
    cfg.behavior.wander_center = Vec3::new(0.5, 0.25, 0.15);
    cfg.fish_start = Some(Vec3::new(0.5, 0.25, 0.0));
    cfg.difficulty.t_low = 3.0;
    cfg.validate().unwrap();
    cfg
}

pub const HAND: Vec3 = Vec3::planar(0.1, 0.25);

/// Time of the first endorsement in the scripted run.
pub fn scripted_endorsement_time() -> Option<f64> {
    let cfg = scripted_cfg();
    let (_, events) = super::drive(&cfg, 0, 60 * 20, |_| HAND);
    events.iter().find(|e| matches!(e.kind, EventKind::TouchEndorsed { .. })).map(|e| e.t)
}

/// Continuous closed form: accelerate from rest for `T_a`, covering
/// `v T_a / 2`, cruise until within the touch radius, then fill the bar.
pub fn closed_form(cfg: &GameConfig, d: f64) -> f64 {
    let b = &cfg.behavior;
    let ta = b.max_speed / b.max_accel;
    cfg.difficulty.t_low + ta / 2.0 + (d - cfg.touch_radius) / b.max_speed + cfg.fill_duration
}

/// The same schedule at tick resolution. Pursuit begins on the transition
/// tick, step k moves `dt * min(k a dt, v)`, and the contact tick counts as
/// the first tick of fill.
pub fn discrete_form(cfg: &GameConfig, d: f64) -> f64 {
    let b = &cfg.behavior;
    let dt = cfg.dt();
    let gap = d - cfg.touch_radius;
    let mut covered = 0.0;
    let mut n = 0u64;
    while covered < gap {
        n += 1;
        covered += dt * (n as f64 * b.max_accel * dt).min(b.max_speed);
    }
    let fill_ticks = (cfg.fill_duration / dt - 1e-9).ceil();
    cfg.difficulty.t_low + (n as f64 - 1.0) * dt + (fill_ticks - 1.0) * dt
}

/// Counts endorsements of a per-tick contact schedule through `update_touch`.
pub fn endorsements(contact: &[bool], cfg: &GameConfig) -> usize {
    let mut p = TouchProgress::default();
    let mut n = 0;
    for &c in contact {
        let d = if c { cfg.touch_radius } else { cfg.touch_radius + 0.01 };
        let (next, ch) = update_touch(&p, d, cfg, cfg.dt());
        n += ch.iter().filter(|c| **c == TouchChange::Endorsed).count();
        p = next;
    }
    n
}

/// Random schedule of contact runs and gaps, biased to lengths around the
/// fill duration.
pub fn random_schedule(rng: &mut ChaCha8Rng, fill_ticks: usize) -> Vec<bool> {
    let len = rng.random_range(1..2000);
    let mut out = Vec::with_capacity(len);
    let mut on = rng.random::<bool>();
    while out.len() < len {
        let run = match rng.random_range(0..4) {
            0 => rng.random_range(1..5),
            1 => fill_ticks - 1 + rng.random_range(0..3),
            2 => rng.random_range(1..3 * fill_ticks),
            _ => rng.random_range(fill_ticks..4 * fill_ticks),
        };
        out.extend(std::iter::repeat_n(on, run));
        on = !on;
    }
    out.truncate(len);
    out
}

/// Number of schedules (out of `n`) where the engine disagrees with the
/// interval-scan oracle.
pub fn endorsement_mismatches(n: u64) -> u64 {
    let cfg = GameConfig::default();
    let fill_ticks = (cfg.fill_duration / cfg.dt()).round() as usize;
    (0..n)
        .filter(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_schedule(&mut rng, fill_ticks);
            endorsements(&s, &cfg) != super::interval_scan(&s, cfg.dt(), cfg.fill_duration)
        })
        .count() as u64
}


/// What a simulated client saw over a 60 Hz session broadcast at 20 Hz.
pub struct BroadcastCheck {
    pub updates: usize,
    /// Update ticks strictly increase, notices arrive with consecutive
    /// sequence numbers, match the record in order, and each arrives before
    /// any update from a later tick.
    pub ordered: bool,
}

pub fn broadcast_check(secs: f64, profile: &str, seed: u64) -> BroadcastCheck {
    use mrr::protocol::ServerMessage;
    let out = run(profile, secs, seed);
    let mut updates = 0;
    let mut last_update: Option<u64> = None;
    let mut notices = Vec::new();
    let mut ordered = true;
    for m in &out.received {
        match m {
            ServerMessage::StateUpdate(u) => {
                ordered &= last_update.is_none_or(|t| u.tick > t);
                last_update = Some(u.tick);
                updates += 1;
            }
            ServerMessage::EventNotice { seq, event } => {
                ordered &= *seq == notices.len() as u64;
                ordered &= last_update.is_none_or(|t| t <= event.tick);
                notices.push(event.clone());
            }
            _ => {}
        }
    }
    ordered &= notices == out.record.events;
    BroadcastCheck { updates, ordered }
}
