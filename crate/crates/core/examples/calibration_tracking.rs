//! Calibrate the camera from four tapped points, then track a hand moving
//! across the table and print its smoothed position and speed.

use mrr::input_capture::{solve_calibration, FilterConfig, HandTracker};
use mrr::RawSample;

fn main() {
    // Camera (u, v) of the table corners and where they really are, meters.
    let pairs = [
        ((0.10, 0.12), (0.0, 0.0)),
        ((0.92, 0.10), (0.8, 0.0)),
        ((0.90, 0.88), (0.8, 0.5)),
        ((0.08, 0.86), (0.0, 0.5)),
    ];
    let map = solve_calibration(&pairs).expect("corners are not collinear");
    println!("calibration {:?}", map.m);

    let mut tracker = HandTracker::new(map, FilterConfig::default());
    for k in 0..=60 {
        let t = k as f64 / 60.0;
        // Sweep left to right with a short dropout in the middle.
        let sample = if (25..30).contains(&k) {
            RawSample::lost(t)
        } else {
            RawSample::new(t, 0.2 + 0.5 * t, 0.5)
        };
        tracker.push(&sample);
        if k % 10 == 0 {
            match tracker.state(t) {
                Ok(h) => println!("t={t:.2}  pos=({:.3}, {:.3})  speed={:.3} m/s", h.pos.x, h.pos.y, h.speed),
                Err(e) => println!("t={t:.2}  {e}"),
            }
        }
    }
}
