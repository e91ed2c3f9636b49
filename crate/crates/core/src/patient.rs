//! Parametric simulated patient.
//!
//! The patient watches the fish through the state updates it receives (with
//! a reaction delay), moves a nominal hand towards it within its current
//! capability, and reports the hand through the inverse calibration as the
//! IR camera would see it. Tremor is a sinusoid along a seeded direction plus
//! seeded uniform noise.

use std::collections::VecDeque;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Aabb, Vec3};
use crate::input_capture::{CalibrationMap, RawSample};
use crate::protocol::StateUpdate;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("unknown patient profile `{0}` (built-in: stuck, mid, fast, tremor)")]
    Unknown(String),
    #[error("profile {path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "style", rename_all = "lowercase")]
pub enum MotionStyle {
    /// Head straight for the fish and stay on it.
    Approach,
    /// Close in on the fish, then circle it at `radius` without slowing down.
    Orbit { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatientModel {
    pub name: String,
    pub max_speed: f64,
    pub reaction_delay: f64,
    pub tremor_amplitude: f64,
    pub tremor_frequency: f64,
    /// Reachable part of the table plane.
    pub envelope: Aabb,
    /// Fraction of `max_speed` lost per minute.
    pub fatigue_rate: f64,
    pub rng_seed: u64,
    pub motion: MotionStyle,
    /// Where the hand rests at t = 0.
    pub start: Vec3,
}

pub const BUILTIN_PROFILES: [(&str, &str); 4] = [
    ("stuck", include_str!("../../../profiles/stuck.json")),
    ("mid", include_str!("../../../profiles/mid.json")),
    ("fast", include_str!("../../../profiles/fast.json")),
    ("tremor", include_str!("../../../profiles/tremor.json")),
];

impl PatientModel {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.max_speed >= 0.0 && self.max_speed.is_finite()) {
            return Err("max_speed must be >= 0".into());
        }
        if !(self.reaction_delay >= 0.0) {
            return Err("reaction_delay must be >= 0".into());
        }
        if !(self.tremor_amplitude >= 0.0 && self.tremor_frequency >= 0.0) {
            return Err("tremor parameters must be >= 0".into());
        }
        if !self.envelope.is_valid() {
            return Err("envelope must be a non-empty box".into());
        }
        if !(self.fatigue_rate >= 0.0) {
            return Err("fatigue_rate must be >= 0".into());
        }
        if let MotionStyle::Orbit { radius } = self.motion {
            if !(radius > 0.0) {
                return Err("orbit radius must be > 0".into());
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, ProfileError> {
        let m: PatientModel = serde_json::from_str(text).map_err(|e| ProfileError::Invalid {
            path: origin.to_owned(),
            message: e.to_string(),
        })?;
        m.validate().map_err(|message| ProfileError::Invalid {
            path: origin.to_owned(),
            message,
        })?;
        Ok(m)
    }

    pub fn builtin(name: &str) -> Result<Self, ProfileError> {
        BUILTIN_PROFILES
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(n, text)| Self::from_json(text, n))
            .unwrap_or_else(|| Err(ProfileError::Unknown(name.to_owned())))
    }

    /// A built-in profile name or a path to a profile JSON file.
    pub fn resolve(name_or_path: &str) -> Result<Self, ProfileError> {
        match Self::builtin(name_or_path) {
            Err(ProfileError::Unknown(_)) if std::path::Path::new(name_or_path).is_file() => {
                let text = std::fs::read_to_string(name_or_path).map_err(|e| ProfileError::Invalid {
                    path: name_or_path.to_owned(),
                    message: e.to_string(),
                })?;
                Self::from_json(&text, name_or_path)
            }
            other => other,
        }
    }

    /// Speed available at time `t` after fatigue.
    pub fn capability(&self, t: f64) -> f64 {
        self.max_speed * (1.0 - self.fatigue_rate * t / 60.0).max(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct SimulatedPatient {
    model: PatientModel,
    calibration: CalibrationMap,
    nominal: Vec3,
    views: VecDeque<(f64, Vec3)>,
    last_t: Option<f64>,
    tremor_dir: Vec3,
    tremor_phase: f64,
    rng: ChaCha8Rng,
}

impl SimulatedPatient {
    pub fn new(model: PatientModel, calibration: CalibrationMap, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(model.rng_seed.wrapping_add(seed));
        let angle = rng.random_range(0.0..TAU);
        let tremor_phase = rng.random_range(0.0..TAU);
        let nominal = model.envelope.clamp(Vec3::planar(model.start.x, model.start.y));
        Self {
            model,
            calibration,
            nominal,
            views: VecDeque::new(),
            last_t: None,
            tremor_dir: Vec3::planar(angle.cos(), angle.sin()),
            tremor_phase,
            rng,
        }
    }

    pub fn model(&self) -> &PatientModel {
        &self.model
    }

    /// Hand position before tremor.
    pub fn nominal(&self) -> Vec3 {
        self.nominal
    }

    pub fn observe(&mut self, update: &StateUpdate) {
        if self.views.back().is_some_and(|&(t, _)| update.t <= t) {
            return;
        }
        self.views.push_back((update.t, update.fish_pos));
    }

    /// Fish position as perceived at `t`, i.e. the newest view at least
    /// `reaction_delay` old, or the oldest one if none is old enough yet.
    fn perceived(&mut self, t: f64) -> Option<Vec3> {
        let cutoff = t - self.model.reaction_delay;
        while self.views.len() > 1 && self.views[1].0 <= cutoff {
            self.views.pop_front();
        }
        self.views.front().map(|&(_, p)| Vec3::planar(p.x, p.y))
    }

    fn advance(&mut self, target: Vec3, dt: f64, cap: f64) {
        let budget = cap * dt;
        if budget <= 0.0 {
            return;
        }
        let to = target - self.nominal;
        let d = to.norm();
        let step = match self.model.motion {
            MotionStyle::Approach => to.try_normalize().map_or(Vec3::ZERO, |u| u * budget.min(d)),
            MotionStyle::Orbit { radius } => {
                let radial = (-to).try_normalize().unwrap_or(Vec3::X);
                let tangent = Vec3::planar(-radial.y, radial.x);
                let dir = (tangent - radial * ((d - radius) / radius))
                    .try_normalize()
                    .unwrap_or(tangent);
                dir * budget
            }
        };
        self.nominal = self.model.envelope.clamp(self.nominal + step);
    }

    /// Hand sample for time `t`, given the latest state update received.
    pub fn simulate_step(&mut self, visible: Option<&StateUpdate>, t: f64) -> RawSample {
        if let Some(u) = visible {
            self.observe(u);
        }
        let dt = self.last_t.map_or(0.0, |last| (t - last).max(0.0));
        self.last_t = Some(t);
        if let Some(target) = self.perceived(t) {
            self.advance(target, dt, self.model.capability(t));
        }

        let a = self.model.tremor_amplitude;
        let wave = (TAU * self.model.tremor_frequency * t + self.tremor_phase).sin();
        let noise = Vec3::planar(
            self.rng.random_range(-1.0..=1.0),
            self.rng.random_range(-1.0..=1.0),
        );
        let shaken = self.nominal + self.tremor_dir * (a * wave) + noise * (0.25 * a);
        let p = self.model.envelope.clamp(shaken);
        let (u, v) = self
            .calibration
            .inverse(p.x, p.y)
            .expect("game config validation guarantees an invertible calibration");
        RawSample::new(t, u.clamp(0.0, 1.0), v.clamp(0.0, 1.0))
    }
}
