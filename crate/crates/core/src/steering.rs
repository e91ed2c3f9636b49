//! Fish steering: wander, pursue and flee as fixed-step updates.
//!
//! Pursue and flee are the classic seek/flee rule: the velocity change per
//! step is `desired - vel`, clamped to `max_accel * dt`, and the resulting
//! velocity is clamped to `max_speed`. Position uses semi-implicit Euler
//! (new velocity times `dt`). After every step the fish is kept inside the
//! tank box; velocity components pushing through a wall are dropped.
//!
//! Wander applies a Gaussian random acceleration of standard deviation
//! `wander_jitter` and reflects the fish off the wander sphere.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::{Aabb, Vec3};
use crate::input_capture::HandState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BehaviorKind {
    Wander,
    Pursue,
    Flee,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BehaviorParams {
    pub max_speed: f64,
    pub max_accel: f64,
    pub wander_radius: f64,
    pub wander_center: Vec3,
    /// Standard deviation of the random wander acceleration, m/s².
    pub wander_jitter: f64,
    pub rng_seed: u64,
}

impl Default for BehaviorParams {
    fn default() -> Self {
        Self {
            max_speed: 0.2,
            max_accel: 1.0,
            wander_radius: 0.15,
            wander_center: Vec3::new(0.4, 0.25, 0.15),
            wander_jitter: 0.5,
            rng_seed: 0,
        }
    }
}

impl BehaviorParams {
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if !(self.max_speed > 0.0 && self.max_speed.is_finite()) {
            return Err(("max_speed", "must be > 0".into()));
        }
        if !(self.max_accel > 0.0 && self.max_accel.is_finite()) {
            return Err(("max_accel", "must be > 0".into()));
        }
        if !(self.wander_radius > 0.0 && self.wander_radius.is_finite()) {
            return Err(("wander_radius", "must be > 0".into()));
        }
        if !(self.wander_jitter >= 0.0 && self.wander_jitter.is_finite()) {
            return Err(("wander_jitter", "must be >= 0".into()));
        }
        if !self.wander_center.is_finite() {
            return Err(("wander_center", "must be finite".into()));
        }
        Ok(())
    }

    /// Time to reach `max_speed` from rest at full acceleration.
    pub fn alignment_time(&self) -> f64 {
        self.max_speed / self.max_accel
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FishState {
    pub pos: Vec3,
    pub vel: Vec3,
    pub behavior: BehaviorKind,
}

impl FishState {
    pub fn at_rest(pos: Vec3) -> Self {
        Self {
            pos,
            vel: Vec3::ZERO,
            behavior: BehaviorKind::Wander,
        }
    }
}

fn steer_towards(vel: Vec3, desired: Vec3, p: &BehaviorParams, dt: f64) -> Vec3 {
    let dv = (desired - vel).clamp_length(p.max_accel * dt);
    (vel + dv).clamp_length(p.max_speed)
}

fn contain(pos: Vec3, mut vel: Vec3, tank: &Aabb) -> (Vec3, Vec3) {
    let clamped = tank.clamp(pos);
    if clamped.x != pos.x {
        vel.x = 0.0;
    }
    if clamped.y != pos.y {
        vel.y = 0.0;
    }
    if clamped.z != pos.z {
        vel.z = 0.0;
    }
    (clamped, vel)
}

fn integrate(s: &FishState, vel: Vec3, tank: &Aabb, dt: f64) -> FishState {
    let (pos, vel) = contain(s.pos + vel * dt, vel, tank);
    FishState { pos, vel, ..*s }
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = gaussian3(rng);
        if let Some(u) = v.try_normalize() {
            return u;
        }
    }
}

fn gaussian3<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

/// Projects `pos` onto the closed sphere, never landing outside it.
fn onto_sphere(center: Vec3, radius: f64, pos: Vec3) -> Vec3 {
    let off = pos - center;
    let d = off.norm();
    if d <= radius {
        return pos;
    }
    let mut k = radius / d;
    loop {
        let q = center + off * k;
        if q.distance(center) <= radius {
            return q;
        }
        k *= 1.0 - 4.0 * f64::EPSILON;
    }
}

/// Random exploration inside the wander sphere.
///
/// A fish that starts outside the sphere (for example right after a pursuit)
/// seeks the sphere centre until it is back inside.
pub fn wander_step<R: Rng + ?Sized>(
    s: &FishState,
    p: &BehaviorParams,
    tank: &Aabb,
    rng: &mut R,
    dt: f64,
) -> FishState {
    let center = p.wander_center;
    let radius = p.wander_radius;
    let mut out = if s.pos.distance(center) > radius {
        let desired = (center - s.pos).try_normalize().unwrap_or(Vec3::ZERO) * p.max_speed;
        let vel = steer_towards(s.vel, desired, p, dt);
        integrate(s, vel, tank, dt)
    } else {
        let accel = (gaussian3(rng) * p.wander_jitter).clamp_length(p.max_accel);
        let mut vel = (s.vel + accel * dt).clamp_length(p.max_speed);
        let mut pos = s.pos + vel * dt;
        if let Some(n) = (pos - center).try_normalize() {
            if pos.distance(center) > radius {
                let outward = vel.dot(n);
                if outward > 0.0 {
                    vel -= n * (2.0 * outward);
                }
                pos = onto_sphere(center, radius, pos);
            }
        }
        let (pos, vel) = contain(pos, vel, tank);
        FishState { pos, vel, ..*s }
    };
    out.behavior = BehaviorKind::Wander;
    out
}

/// Seek towards `target` at full speed.
pub fn pursue_step(
    s: &FishState,
    target: Vec3,
    p: &BehaviorParams,
    tank: &Aabb,
    dt: f64,
) -> FishState {
    let desired = (target - s.pos).try_normalize().unwrap_or(Vec3::ZERO) * p.max_speed;
    let vel = steer_towards(s.vel, desired, p, dt);
    FishState {
        behavior: BehaviorKind::Pursue,
        ..integrate(s, vel, tank, dt)
    }
}

/// Move directly away from `threat`. When the fish sits exactly on the
/// threat, the escape direction is drawn from `rng`.
pub fn flee_step<R: Rng + ?Sized>(
    s: &FishState,
    threat: Vec3,
    p: &BehaviorParams,
    tank: &Aabb,
    rng: &mut R,
    dt: f64,
) -> FishState {
    let away = (s.pos - threat)
        .try_normalize()
        .unwrap_or_else(|| random_direction(rng));
    let vel = steer_towards(s.vel, away * p.max_speed, p, dt);
    FishState {
        behavior: BehaviorKind::Flee,
        ..integrate(s, vel, tank, dt)
    }
}

/// Dispatches on `s.behavior`; pursue and flee use the hand as target.
pub fn step<R: Rng + ?Sized>(
    s: &FishState,
    hand: &HandState,
    p: &BehaviorParams,
    tank: &Aabb,
    rng: &mut R,
    dt: f64,
) -> FishState {
    match s.behavior {
        BehaviorKind::Wander => wander_step(s, p, tank, rng, dt),
        BehaviorKind::Pursue => pursue_step(s, hand.pos, p, tank, dt),
        BehaviorKind::Flee => flee_step(s, hand.pos, p, tank, rng, dt),
    }
}
