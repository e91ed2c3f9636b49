mod common;

use common::scenarios::{
    closed_form, discrete_form, endorsement_mismatches, endorsements, scripted_cfg, scripted_endorsement_time, HAND,
};
use mrr::{EventKind, GameConfig, Vec3};

#[test]
fn scripted_endorsement_matches_closed_form() {
    let cfg = scripted_cfg();
    let dt = cfg.dt();
    let t = scripted_endorsement_time().expect("endorsement");
    let exact = discrete_form(&cfg, 0.4);
    assert!((t - exact).abs() <= dt + 1e-9, "{t} vs {exact}");
    // Euler lead, same-tick pursuit start and the contact tick's fill
    // account for at most two ticks against the continuous form.
    let approx = closed_form(&cfg, 0.4);
    assert!((t - approx).abs() <= 2.0 * dt + 1e-9, "{t} vs {approx}");
    let b = &cfg.behavior;
    let bound = cfg.difficulty.t_low + b.alignment_time() + 0.4 / b.max_speed + cfg.fill_duration;
    assert!(t <= bound);
}

#[test]
fn endorsement_count_matches_interval_scan() {
    assert_eq!(endorsement_mismatches(10_000), 0);
}

#[test]
fn one_tick_short_is_not_endorsed() {
    let cfg = GameConfig::default();
    let fill_ticks = (cfg.fill_duration / cfg.dt()).round() as usize;
    assert_eq!(endorsements(&vec![true; fill_ticks - 1], &cfg), 0);
    assert_eq!(endorsements(&vec![true; fill_ticks], &cfg), 1);
    assert_eq!(endorsements(&vec![true; 5 * fill_ticks], &cfg), 1);
}

/// Hand that sits in each zone in turn, still, so the helpful fish comes to
/// it and the touch completes that zone's task.
#[test]
fn four_reach_tasks_complete_in_order() {
    let cfg = scripted_cfg();
    let tank = cfg.tank_world();
    let c = tank.center();
    let spots = [
        Vec3::planar(c.x + 0.2, c.y - 0.12),
        Vec3::planar(c.x - 0.2, c.y - 0.12),
        Vec3::planar(c.x + 0.2, c.y + 0.12),
        Vec3::planar(c.x - 0.2, c.y + 0.12),
    ];
    let mut eng = mrr::Engine::new(cfg.clone(), 0);
    let mut completed = Vec::new();
    let mut spot = 0;
    for k in 1..=60 * 120 {
        let t = k as f64 / cfg.tick_rate;
        let s = common::sample_at(&cfg.calibration, t, spots[spot]);
        for e in eng.tick(&[s]) {
            if let EventKind::TaskCompleted { index, zone, duration } = e.kind {
                assert!(duration > 0.0);
                completed.push((index, zone));
                spot = (spot + 1).min(3);
            }
        }
        if completed.len() == 4 {
            break;
        }
    }
    let expected: Vec<_> = mrr::Zone::PROTOCOL.iter().copied().enumerate().collect();
    assert_eq!(completed, expected);
}

#[test]
fn still_fish_out_of_reach_is_never_touched() {
    let mut cfg = scripted_cfg();
    // Helpful mode never triggers, so the still fish stays out of reach.
    cfg.difficulty.t_low = 1e9;
    let (eng, events) = common::drive(&cfg, 0, 60 * 60, |_| HAND);
    assert_eq!(eng.state().endorsed_touch_count, 0);
    assert!(!events.iter().any(|e| matches!(e.kind, EventKind::TouchStarted { .. })));
}
