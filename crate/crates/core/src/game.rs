//! The authoritative tick: hand estimate, difficulty agent, fish steering,
//! touch endorsement and the reach-task list, with an event for every
//! observable state change.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{GameConfig, Zone};
use crate::difficulty::{self, AgentMode, AgentState};
use crate::input_capture::{CaptureError, HandState, HandTracker, RawSample};
use crate::steering::{self, FishState};

// Same slack as the dwell timers: 90 ticks of 1/60 s fill a 1.5 s bar.
const FILL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskStatus {
    Pending,
    Active,
    Completed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExerciseTask {
    pub zone: Zone,
    pub status: TaskStatus,
    pub started_at: Option<f64>,
    pub completed_at: Option<f64>,
}

impl ExerciseTask {
    pub fn pending(zone: Zone) -> Self {
        Self {
            zone,
            status: TaskStatus::Pending,
            started_at: None,
            completed_at: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TouchProgress {
    pub fraction: f64,
    pub in_contact: bool,
    /// Seconds of the current uninterrupted fill.
    pub elapsed: f64,
    /// False after an endorsement until contact is broken once.
    pub armed: bool,
}

impl Default for TouchProgress {
    fn default() -> Self {
        Self {
            fraction: 0.0,
            in_contact: false,
            elapsed: 0.0,
            armed: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TouchChange {
    Started,
    Broken,
    Endorsed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum EventKind {
    SessionStarted { session_id: String },
    SessionEnded { reason: String },
    TouchStarted { zone: Zone },
    TouchBroken { fraction: f64 },
    TouchEndorsed { count: u64 },
    TaskActivated { index: usize, zone: Zone },
    TaskCompleted { index: usize, zone: Zone, duration: f64 },
    AgentTransition { from: AgentMode, to: AgentMode, trigger_speed: f64 },
    TrackingLost { last_seen: Option<f64> },
    TrackingRecovered {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameEvent {
    pub tick: u64,
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl GameEvent {
    pub fn name(&self) -> &'static str {
        match self.kind {
            EventKind::SessionStarted { .. } => "SessionStarted",
            EventKind::SessionEnded { .. } => "SessionEnded",
            EventKind::TouchStarted { .. } => "TouchStarted",
            EventKind::TouchBroken { .. } => "TouchBroken",
            EventKind::TouchEndorsed { .. } => "TouchEndorsed",
            EventKind::TaskActivated { .. } => "TaskActivated",
            EventKind::TaskCompleted { .. } => "TaskCompleted",
            EventKind::AgentTransition { .. } => "AgentTransition",
            EventKind::TrackingLost { .. } => "TrackingLost",
            EventKind::TrackingRecovered { .. } => "TrackingRecovered",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub tick: u64,
    pub t: f64,
    pub fish: FishState,
    pub hand: HandState,
    pub agent: AgentState,
    pub progress: TouchProgress,
    pub tasks: Vec<ExerciseTask>,
    pub endorsed_touch_count: u64,
    pub tracking_lost: bool,
    /// The hand pose comes from samples (false before the first sample and
    /// while tracking is lost).
    pub hand_tracked: bool,
    /// Zone the hand was in when the current contact began.
    pub attempt_zone: Option<Zone>,
}

impl GameState {
    pub fn initial(cfg: &GameConfig) -> Self {
        let mut tasks: Vec<_> = cfg.tasks.iter().map(|&z| ExerciseTask::pending(z)).collect();
        if let Some(first) = tasks.first_mut() {
            first.status = TaskStatus::Active;
            first.started_at = Some(0.0);
        }
        Self {
            tick: 0,
            t: 0.0,
            fish: FishState::at_rest(cfg.fish_start()),
            hand: HandState::at_rest(cfg.hand_start(), 0.0),
            agent: AgentState::default(),
            progress: TouchProgress::default(),
            tasks,
            endorsed_touch_count: 0,
            tracking_lost: false,
            hand_tracked: false,
            attempt_zone: None,
        }
    }

    pub fn active_task(&self) -> Option<(usize, &ExerciseTask)> {
        self.tasks
            .iter()
            .enumerate()
            .find(|(_, t)| t.status == TaskStatus::Active)
    }
}

/// Advances the touch progress bar by one step.
///
/// Contact fills the bar at `dt / fill_duration` per step; a break resets it.
/// After an endorsement the bar stays empty until contact is broken once.
pub fn update_touch(
    p: &TouchProgress,
    distance: f64,
    cfg: &GameConfig,
    dt: f64,
) -> (TouchProgress, Vec<TouchChange>) {
    let mut next = *p;
    let mut changes = Vec::new();
    let contact = distance <= cfg.touch_radius;
    next.in_contact = contact;
    if contact {
        if !p.in_contact {
            changes.push(TouchChange::Started);
        }
        if next.armed {
            next.elapsed += dt;
            next.fraction = (next.elapsed / cfg.fill_duration).min(1.0);
            if next.elapsed + FILL_EPS >= cfg.fill_duration {
                changes.push(TouchChange::Endorsed);
                next.elapsed = 0.0;
                next.fraction = 0.0;
                next.armed = false;
            }
        }
    } else {
        if p.in_contact {
            changes.push(TouchChange::Broken);
        }
        next.elapsed = 0.0;
        next.fraction = 0.0;
        next.armed = true;
    }
    (next, changes)
}

/// Completes the active task when an endorsed touch started in its zone and
/// activates the next pending one.
pub fn update_tasks(
    tasks: &[ExerciseTask],
    attempt_zone: Option<Zone>,
    endorsed: bool,
    t: f64,
) -> (Vec<ExerciseTask>, Vec<EventKind>) {
    let mut next = tasks.to_vec();
    let mut events = Vec::new();
    if !endorsed {
        return (next, events);
    }
    let Some(idx) = next.iter().position(|t| t.status == TaskStatus::Active) else {
        return (next, events);
    };
    if attempt_zone != Some(next[idx].zone) {
        return (next, events);
    }
    let task = &mut next[idx];
    task.status = TaskStatus::Completed;
    task.completed_at = Some(t);
    events.push(EventKind::TaskCompleted {
        index: idx,
        zone: task.zone,
        duration: t - task.started_at.unwrap_or(0.0),
    });
    if let Some((i, task)) = next
        .iter_mut()
        .enumerate()
        .skip(idx + 1)
        .find(|(_, t)| t.status == TaskStatus::Pending)
    {
        task.status = TaskStatus::Active;
        task.started_at = Some(t);
        events.push(EventKind::TaskActivated { index: i, zone: task.zone });
    }
    (next, events)
}

/// One game session's authoritative simulation.
#[derive(Debug, Clone)]
pub struct Engine {
    cfg: GameConfig,
    state: GameState,
    tracker: HandTracker,
    rng: ChaCha8Rng,
}

impl Engine {
    pub fn new(cfg: GameConfig, seed: u64) -> Self {
        let tracker = HandTracker::new(cfg.calibration, cfg.filter);
        let state = GameState::initial(&cfg);
        Self {
            cfg,
            state,
            tracker,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn config(&self) -> &GameConfig {
        &self.cfg
    }

    pub fn state(&self) -> &GameState {
        &self.state
    }

    pub fn set_difficulty(&mut self, d: difficulty::DifficultyConfig) {
        self.cfg.difficulty = d;
    }

    /// Events describing the state before the first tick.
    pub fn opening_events(&self, session_id: &str) -> Vec<GameEvent> {
        let mut kinds = vec![EventKind::SessionStarted {
            session_id: session_id.to_owned(),
        }];
        if let Some((index, task)) = self.state.active_task() {
            kinds.push(EventKind::TaskActivated { index, zone: task.zone });
        }
        kinds.into_iter().map(|kind| self.event(kind)).collect()
    }

    pub fn closing_event(&self, reason: &str) -> GameEvent {
        self.event(EventKind::SessionEnded {
            reason: reason.to_owned(),
        })
    }

    fn event(&self, kind: EventKind) -> GameEvent {
        GameEvent {
            tick: self.state.tick,
            t: self.state.t,
            kind,
        }
    }

    /// Advances one fixed step, consuming the samples received since the
    /// previous tick.
    pub fn tick(&mut self, samples: &[RawSample]) -> Vec<GameEvent> {
        let dt = self.cfg.dt();
        let tank = self.cfg.tank_world();
        let mut s = self.state.clone();
        let mut kinds = Vec::new();
        s.tick += 1;
        s.t = s.tick as f64 / self.cfg.tick_rate;

        for sample in samples {
            self.tracker.push(sample);
        }
        match self.tracker.state(s.t) {
            Ok(hand) => {
                if s.tracking_lost {
                    s.tracking_lost = false;
                    kinds.push(EventKind::TrackingRecovered {});
                }
                s.hand = hand;
                s.hand_tracked = true;
            }
            Err(CaptureError::TrackingLost { last_seen }) => {
                // No sample yet: allow one dropout timeout before declaring loss.
                let grace = last_seen.is_none() && s.t <= self.cfg.filter.dropout_timeout;
                if !grace && !s.tracking_lost {
                    s.tracking_lost = true;
                    kinds.push(EventKind::TrackingLost { last_seen });
                }
                s.hand = HandState::at_rest(s.hand.pos, s.hand.t);
                s.hand_tracked = false;
            }
            Err(e) => unreachable!("tracker state only reports tracking loss: {e}"),
        }

        if !s.tracking_lost {
            let (agent, _, transition) = difficulty::observe(&s.agent, &s.hand, &self.cfg.difficulty, dt);
            s.agent = agent;
            if let Some(tr) = transition {
                kinds.push(EventKind::AgentTransition {
                    from: tr.from,
                    to: tr.to,
                    trigger_speed: tr.trigger_speed,
                });
            }
        }

        s.fish.behavior = s.agent.mode.behavior();
        s.fish = steering::step(&s.fish, &s.hand, &self.cfg.behavior, &tank, &mut self.rng, dt);

        let distance = if s.tracking_lost {
            f64::INFINITY
        } else {
            s.hand.pos.planar_distance(s.fish.pos)
        };
        let (progress, changes) = update_touch(&s.progress, distance, &self.cfg, dt);
        s.progress = progress;
        let mut endorsed = false;
        for change in changes {
            match change {
                TouchChange::Started => {
                    let zone = Zone::of(s.hand.pos, &tank);
                    s.attempt_zone = Some(zone);
                    kinds.push(EventKind::TouchStarted { zone });
                }
                TouchChange::Broken => kinds.push(EventKind::TouchBroken {
                    fraction: self.state.progress.fraction,
                }),
                TouchChange::Endorsed => {
                    endorsed = true;
                    s.endorsed_touch_count += 1;
                    kinds.push(EventKind::TouchEndorsed {
                        count: s.endorsed_touch_count,
                    });
                }
            }
        }

        let (tasks, task_events) = update_tasks(&s.tasks, s.attempt_zone, endorsed, s.t);
        s.tasks = tasks;
        kinds.extend(task_events);

        self.state = s;
        kinds.into_iter().map(|kind| self.event(kind)).collect()
    }
}
