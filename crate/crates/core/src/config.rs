//! Game configuration and its JSON / TOML loaders.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::difficulty::DifficultyConfig;
use crate::geometry::{Aabb, Vec3};
use crate::input_capture::{CalibrationMap, FilterConfig};
use crate::steering::BehaviorParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("config key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("config syntax: {0}")]
    Syntax(String),
}

/// Quadrant of the table plane a reach attempt starts from.
///
/// `Bottom` is the half nearest the patient (lower y), `Right` the half
/// with larger x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Zone {
    BottomRight,
    BottomLeft,
    UpperRight,
    UpperLeft,
}

impl Zone {
    /// The four reach tasks in protocol order.
    pub const PROTOCOL: [Zone; 4] = [
        Zone::BottomRight,
        Zone::BottomLeft,
        Zone::UpperRight,
        Zone::UpperLeft,
    ];

    pub fn of(p: Vec3, tank: &Aabb) -> Zone {
        let c = tank.center();
        match (p.x >= c.x, p.y >= c.y) {
            (true, false) => Zone::BottomRight,
            (false, false) => Zone::BottomLeft,
            (true, true) => Zone::UpperRight,
            (false, true) => Zone::UpperLeft,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Zone::BottomRight => "bottom right",
            Zone::BottomLeft => "bottom left",
            Zone::UpperRight => "upper right",
            Zone::UpperLeft => "upper left",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameConfig {
    /// Tank box in tank-local coordinates; z = 0 is the table plane.
    pub tank: Aabb,
    /// Game-space offset of the tank's local origin.
    pub tank_anchor: Vec3,
    pub touch_radius: f64,
    pub fill_duration: f64,
    pub tick_rate: f64,
    /// StateUpdate rate towards clients.
    pub broadcast_rate: f64,
    /// Hand/fish trace rate in session files.
    pub trace_rate: f64,
    /// Fish start position; the wander centre when absent.
    pub fish_start: Option<Vec3>,
    /// Hand pose assumed before the first valid sample.
    pub hand_start: Option<Vec3>,
    pub behavior: BehaviorParams,
    pub difficulty: DifficultyConfig,
    pub filter: FilterConfig,
    pub calibration: CalibrationMap,
    pub tasks: Vec<Zone>,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            tank: Aabb::new(Vec3::ZERO, Vec3::new(0.8, 0.5, 0.3)),
            tank_anchor: Vec3::ZERO,
            touch_radius: 0.05,
            fill_duration: 1.5,
            tick_rate: 60.0,
            broadcast_rate: 20.0,
            trace_rate: 10.0,
            fish_start: None,
            hand_start: None,
            behavior: BehaviorParams::default(),
            difficulty: DifficultyConfig::default(),
            filter: FilterConfig::default(),
            calibration: CalibrationMap::default(),
            tasks: Zone::PROTOCOL.to_vec(),
        }
    }
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

impl GameConfig {
    /// Tank box in game space.
    pub fn tank_world(&self) -> Aabb {
        self.tank.translate(self.tank_anchor)
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.tick_rate
    }

    pub fn fish_start(&self) -> Vec3 {
        self.fish_start.unwrap_or(self.behavior.wander_center)
    }

    pub fn hand_start(&self) -> Vec3 {
        self.hand_start.unwrap_or_else(|| {
            let c = self.tank_world().center();
            Vec3::planar(c.x, c.y)
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let tank = self.tank_world();
        if !tank.is_valid() {
            return Err(invalid("tank", "min must not exceed max"));
        }
        for (key, v) in [
            ("touch_radius", self.touch_radius),
            ("fill_duration", self.fill_duration),
            ("tick_rate", self.tick_rate),
            ("broadcast_rate", self.broadcast_rate),
            ("trace_rate", self.trace_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(key, format!("must be > 0, got {v}")));
            }
        }
        if self.broadcast_rate > self.tick_rate {
            return Err(invalid("broadcast_rate", "must not exceed tick_rate"));
        }
        self.behavior
            .validate()
            .map_err(|(k, m)| invalid(format!("behavior.{k}"), m))?;
        self.difficulty
            .validate()
            .map_err(|(k, m)| invalid(format!("difficulty.{k}"), m))?;
        self.filter
            .validate()
            .map_err(|(k, m)| invalid(format!("filter.{k}"), m))?;
        if !self.calibration.is_invertible() {
            return Err(invalid("calibration", "linear part must be invertible"));
        }
        if !tank.contains_sphere(self.behavior.wander_center, self.behavior.wander_radius) {
            return Err(invalid(
                "behavior.wander_radius",
                "wander sphere must lie inside the tank",
            ));
        }
        if !tank.contains(self.fish_start()) {
            return Err(invalid("fish_start", "must lie inside the tank"));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let cfg: GameConfig = deserialize_with_path(de)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let de = toml::Deserializer::new(s);
        let cfg: GameConfig = deserialize_with_path(de)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads `.toml` files as TOML and anything else as JSON.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            _ => Self::from_json_str(&text),
        }
    }
}

/// Deserializes with key paths in error messages; unknown keys are errors
/// in files even though the wire protocol ignores them.
fn deserialize_with_path<'de, D, T>(de: D) -> Result<T, ConfigError>
where
    D: serde::Deserializer<'de>,
    D::Error: std::fmt::Display,
    T: DeserializeOwned,
{
    let mut unknown = Vec::new();
    let mut track = |path: serde_ignored::Path<'_>| unknown.push(path.to_string());
    let de = serde_ignored::Deserializer::new(de, &mut track);
    let value = serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let message = e.inner().to_string();
        if key == "." {
            ConfigError::Syntax(message)
        } else {
            invalid(key, message)
        }
    })?;
    match unknown.into_iter().next() {
        Some(key) => Err(invalid(key, "unknown key")),
        None => Ok(value),
    }
}
