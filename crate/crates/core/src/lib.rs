//! Tabletop rehabilitation game: calibrated hand tracking, a fish character
//! steered by wander / pursue / flee, a speed-driven difficulty agent, an
//! authoritative tick loop with touch endorsement and reach tasks, a
//! JSON wire protocol, session recording with therapist metrics, a
//! simulated patient for headless runs, and questionnaire reporting.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod assessment;
pub mod config;
pub mod difficulty;
pub mod game;
pub mod geometry;
pub mod input_capture;
pub mod patient;
pub mod protocol;
pub mod server;
pub mod session;
pub mod session_store;
pub mod sim;
pub mod steering;

pub use config::{GameConfig, Zone};
pub use difficulty::{AgentMode, AgentState, DifficultyConfig};
pub use game::{Engine, EventKind, GameEvent, GameState};
pub use geometry::{Aabb, Vec3};
pub use input_capture::{CalibrationMap, FilterConfig, HandState, RawSample};
pub use steering::{BehaviorKind, BehaviorParams, FishState};
