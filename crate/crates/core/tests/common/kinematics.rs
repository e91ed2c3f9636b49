use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mrr::geometry::{Aabb, Vec3};
use mrr::input_capture::{estimate_state, CalibrationMap, FilterConfig};
use mrr::steering::{flee_step, pursue_step, wander_step, BehaviorParams, FishState};
use mrr::GameConfig;

use super::DT;

pub fn tank() -> Aabb {
    GameConfig::default().tank_world()
}

/// Straight line at 0.2 m/s with uniform ±2 mm noise, 100 seeded trials.
pub fn noisy_speed_errors() -> Vec<f64> {
    let map = CalibrationMap::default();
    let cfg = FilterConfig::default();
    (0..100u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dir = Vec3::planar(0.6, 0.8);
            let samples: Vec<_> = (0..60)
                .map(|k| {
                    let t = k as f64 / 60.0;
                    let noise = Vec3::planar(rng.random_range(-0.002..=0.002), rng.random_range(-0.002..=0.002));
                    super::sample_at(&map, t, Vec3::planar(0.2, 0.1) + dir * (0.2 * t) + noise)
                })
                .collect();
            let h = estimate_state(&samples, &map, &cfg, samples.last().unwrap().t).unwrap();
            (h.speed - 0.2).abs()
        })
        .collect()
}

/// Largest wander-sphere overshoot over `steps` steps (0 when contained).
pub fn wander_overshoot(seed: u64, steps: usize) -> f64 {
    let p = BehaviorParams {
        wander_jitter: 2.0,
        ..BehaviorParams::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = FishState::at_rest(p.wander_center);
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        s = wander_step(&s, &p, &tank(), &mut rng, DT);
        worst = worst.max(s.pos.distance(p.wander_center) - p.wander_radius);
    }
    worst
}

/// Largest speed excess over a long mixed run.
pub fn worst_speed_excess(seed: u64) -> f64 {
    let p = BehaviorParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = FishState::at_rest(p.wander_center);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..10_000 {
        let target = Vec3::new(rng.random_range(0.0..0.8), rng.random_range(0.0..0.5), 0.0);
        s = match (k / 200) % 3 {
            0 => pursue_step(&s, target, &p, &tank(), DT),
            1 => flee_step(&s, target, &p, &tank(), &mut rng, DT),
            _ => wander_step(&s, &p, &tank(), &mut rng, DT),
        };
        worst = worst.max(s.vel.norm() - p.max_speed);
    }
    worst
}


fn random_in_tank(rng: &mut ChaCha8Rng) -> Vec3 {
    let b = tank();
    Vec3::new(
        rng.random_range(b.min.x..=b.max.x),
        rng.random_range(b.min.y..=b.max.y),
        rng.random_range(b.min.z..=b.max.z),
    )
}

fn random_params(rng: &mut ChaCha8Rng) -> BehaviorParams {
    BehaviorParams {
        max_speed: rng.random_range(0.05..0.5),
        max_accel: rng.random_range(0.2..5.0),
        ..BehaviorParams::default()
    }
}

/// Pursuit cases (of `n`) where distance fails to shrink every step after
/// the alignment bound, or the fish never arrives.
pub fn pursuit_violations(n: u64) -> u64 {
    let radius = GameConfig::default().touch_radius;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut bad = 0;
    for _ in 0..n {
        let (start, target, p) = (random_in_tank(&mut rng), random_in_tank(&mut rng), random_params(&mut rng));
        if start.distance(target) <= radius {
            continue;
        }
        let align = (p.alignment_time() / DT - 1e-9).ceil() as usize;
        let mut s = FishState::at_rest(start);
        let mut prev = start.distance(target);
        let mut arrived = false;
        for k in 1..20_000 {
            s = pursue_step(&s, target, &p, &tank(), DT);
            let d = s.pos.distance(target);
            if k > align && d >= prev {
                break;
            }
            prev = d;
            if d <= radius {
                arrived = true;
                break;
            }
        }
        bad += u64::from(!arrived);
    }
    bad
}

/// Flee cases (of `n`) where distance fails to grow every step after the
/// alignment bound, before a wall stops the fish.
pub fn flee_violations(n: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let mut bad = 0;
    for _ in 0..n {
        let (start, threat, p) = (random_in_tank(&mut rng), random_in_tank(&mut rng), random_params(&mut rng));
        if start.distance(threat) <= 1e-3 {
            continue;
        }
        let align = (p.alignment_time() / DT - 1e-9).ceil() as usize;
        let mut s = FishState::at_rest(start);
        let mut prev = start.distance(threat);
        for k in 1..2000 {
            let next = flee_step(&s, threat, &p, &tank(), &mut rng, DT);
            if next.pos != s.pos + next.vel * DT {
                break;
            }
            let d = next.pos.distance(threat);
            if k > align && d <= prev {
                bad += 1;
                break;
            }
            prev = d;
            s = next;
        }
    }
    bad
}

fn through(m: &[[f64; 3]; 2], u: f64, v: f64) -> (f64, f64) {
    (m[0][0] * u + m[0][1] * v + m[0][2], m[1][0] * u + m[1][1] * v + m[1][2])
}

/// Worst coefficient error recovering `n` random invertible affine maps
/// from 3 to 12 exact correspondences.
pub fn affine_recovery_error(n: usize) -> f64 {
    use mrr::input_capture::solve_calibration;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < n {
        let c: [f64; 6] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        if (c[0] * c[4] - c[1] * c[3]).abs() < 0.05 {
            continue;
        }
        let m = [[c[0], c[1], c[2]], [c[3], c[4], c[5]]];
        // Three corners of the unit square keep the set non-degenerate.
        let mut cam = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
        for _ in 0..rng.random_range(0..10) {
            cam.push((rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)));
        }
        let pairs: Vec<_> = cam.iter().map(|&(u, v)| ((u, v), through(&m, u, v))).collect();
        let got = solve_calibration(&pairs).unwrap();
        for r in 0..2 {
            for k in 0..3 {
                worst = worst.max((got.m[r][k] - m[r][k]).abs());
            }
        }
        done += 1;
    }
    worst
}

/// Worst relative velocity error for `n` noiseless constant-velocity
/// streams with no smoothing lag (alpha = 1).
pub fn constant_velocity_error(n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let cfg = FilterConfig { alpha: 1.0, ..FilterConfig::default() };
    let map = CalibrationMap::default();
    (0..n)
        .map(|_| {
            let v = Vec3::planar(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            let p0 = Vec3::planar(rng.random_range(0.2..0.6), rng.random_range(0.1..0.4));
            let samples: Vec<_> =
                (0..rng.random_range(16..60)).map(|k| super::sample_at(&map, k as f64 * DT, p0 + v * (k as f64 * DT))).collect();
            let h = estimate_state(&samples, &map, &cfg, samples.last().unwrap().t).unwrap();
            (h.vel - v).norm() / v.norm().max(1e-3)
        })
        .fold(0.0, f64::max)
}
