//! Feed the difficulty agent a scripted hand speed profile and print every
//! mode change.

use mrr::difficulty::observe;
use mrr::{AgentState, DifficultyConfig, HandState, Vec3};

fn main() {
    let cfg = DifficultyConfig::default();
    let dt = 1.0 / 60.0;
    // Still for 5 s, steady for 4 s, then fast for 5 s.
    let speed = |t: f64| match t {
        t if t < 5.0 => 0.0,
        t if t < 9.0 => 0.1,
        _ => 0.4,
    };
    let mut agent = AgentState::default();
    for k in 1..=(14 * 60) {
        let t = k as f64 * dt;
        let hand = HandState {
            pos: Vec3::ZERO,
            vel: Vec3::planar(speed(t), 0.0),
            speed: speed(t),
            t,
        };
        let (next, behavior, event) = observe(&agent, &hand, &cfg, dt);
        if let Some(e) = event {
            println!("t={:.2}  {:?} -> {:?}  (speed {:.2} m/s, fish {:?})", e.t, e.from, e.to, e.trigger_speed, behavior);
        }
        agent = next;
    }
}
