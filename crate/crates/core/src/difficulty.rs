//! Difficulty-adjustment agent: a three-state machine driven by sustained
//! hand speed.
//!
//! ```text
//!            speed < v_min for t_low             speed > v_max for t_high
//!  Helpful <-------------------------- Wander --------------------------> Challenging
//!          ---------------------------^      ^---------------------------
//!            speed in band for t_return            speed in band for t_return
//! ```
//!
//! Speeds equal to `v_min` or `v_max` are inside the band. Dwell time is
//! continuous: leaving a speed band resets that band's accumulator.
//! There is no direct edge between Helpful and Challenging.

use serde::{Deserialize, Serialize};

use crate::input_capture::HandState;
use crate::steering::BehaviorKind;

// Accumulated dwell is a sum of many `dt`s; compare with a little slack so
// 180 ticks of 1/60 s count as 3 s.
const DWELL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DifficultyConfig {
    pub v_min: f64,
    pub v_max: f64,
    pub t_low: f64,
    pub t_high: f64,
    pub t_return: f64,
}

impl Default for DifficultyConfig {
    fn default() -> Self {
        Self {
            v_min: 0.03,
            v_max: 0.25,
            t_low: 3.0,
            t_high: 3.0,
            t_return: 2.0,
        }
    }
}

impl DifficultyConfig {
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if !(self.v_min > 0.0) {
            return Err(("v_min", "must be > 0".into()));
        }
        if !(self.v_max > self.v_min) || !self.v_max.is_finite() {
            return Err(("v_max", format!("must exceed v_min ({})", self.v_min)));
        }
        for (key, v) in [
            ("t_low", self.t_low),
            ("t_high", self.t_high),
            ("t_return", self.t_return),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err((key, "must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Partial update sent by a therapist; absent fields keep their value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DifficultyPatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_high: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_return: Option<f64>,
}

impl DifficultyPatch {
    pub fn apply(&self, cfg: &DifficultyConfig) -> DifficultyConfig {
        DifficultyConfig {
            v_min: self.v_min.unwrap_or(cfg.v_min),
            v_max: self.v_max.unwrap_or(cfg.v_max),
            t_low: self.t_low.unwrap_or(cfg.t_low),
            t_high: self.t_high.unwrap_or(cfg.t_high),
            t_return: self.t_return.unwrap_or(cfg.t_return),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentMode {
    Wander,
    Helpful,
    Challenging,
}

impl AgentMode {
    pub const ALL: [AgentMode; 3] = [AgentMode::Wander, AgentMode::Helpful, AgentMode::Challenging];

    /// Fish behavior commanded in this mode.
    pub fn behavior(self) -> BehaviorKind {
        match self {
            AgentMode::Wander => BehaviorKind::Wander,
            AgentMode::Helpful => BehaviorKind::Pursue,
            AgentMode::Challenging => BehaviorKind::Flee,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub mode: AgentMode,
    pub dwell_below: f64,
    pub dwell_above: f64,
    pub dwell_inside: f64,
}

impl Default for AgentState {
    fn default() -> Self {
        Self {
            mode: AgentMode::Wander,
            dwell_below: 0.0,
            dwell_above: 0.0,
            dwell_inside: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionEvent {
    pub t: f64,
    pub from: AgentMode,
    pub to: AgentMode,
    pub trigger_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Band {
    Below,
    Inside,
    Above,
}

fn band(speed: f64, cfg: &DifficultyConfig) -> Band {
    if speed < cfg.v_min {
        Band::Below
    } else if speed > cfg.v_max {
        Band::Above
    } else {
        Band::Inside
    }
}

/// One observation of the hand over `dt` seconds.
pub fn observe(
    a: &AgentState,
    hand: &HandState,
    cfg: &DifficultyConfig,
    dt: f64,
) -> (AgentState, BehaviorKind, Option<TransitionEvent>) {
    let mut next = AgentState { mode: a.mode, ..AgentState::default() };
    match band(hand.speed, cfg) {
        Band::Below => next.dwell_below = a.dwell_below + dt,
        Band::Inside => next.dwell_inside = a.dwell_inside + dt,
        Band::Above => next.dwell_above = a.dwell_above + dt,
    }

    let target = match a.mode {
        AgentMode::Wander if next.dwell_below + DWELL_EPS >= cfg.t_low => Some(AgentMode::Helpful),
        AgentMode::Wander if next.dwell_above + DWELL_EPS >= cfg.t_high => {
            Some(AgentMode::Challenging)
        }
        AgentMode::Helpful | AgentMode::Challenging
            if next.dwell_inside + DWELL_EPS >= cfg.t_return =>
        {
            Some(AgentMode::Wander)
        }
        _ => None,
    };

    let event = target.map(|to| {
        next = AgentState { mode: to, ..AgentState::default() };
        TransitionEvent {
            t: hand.t,
            from: a.mode,
            to,
            trigger_speed: hand.speed,
        }
    });
    (next, next.mode.behavior(), event)
}
