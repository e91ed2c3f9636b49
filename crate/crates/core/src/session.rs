//! A running session: the engine plus message handling, broadcast and
//! recording. The loopback simulator, the WebSocket server and replay all
//! drive the same type.

use crate::config::GameConfig;
use crate::difficulty::DifficultyPatch;
use crate::game::{Engine, GameEvent, GameState};
use crate::input_capture::RawSample;
use crate::protocol::{
    Broadcaster, ClientMessage, ControlAction, ErrorCode, ServerMessage, StateUpdate,
};
use crate::session_store::{
    Entry, Footer, Header, InputRecord, OverrideRecord, SessionRecord, SessionWriter, StoreError,
    TracePoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Waiting,
    Running,
    Paused,
    Ended,
}

/// True when `tick` opens a new period of a `rate` Hz schedule driven at
/// `tick_rate` Hz.
pub fn on_schedule(tick: u64, tick_rate: f64, rate: f64) -> bool {
    let slot = |k: u64| (k as f64 * rate / tick_rate + 1e-9).floor() as u64;
    tick == 0 || slot(tick) > slot(tick - 1)
}

pub struct Session {
    id: String,
    engine: Engine,
    broadcaster: Broadcaster,
    writer: SessionWriter,
    status: Status,
    pending: Vec<RawSample>,
    pending_patch: Option<DifficultyPatch>,
    last_traced: Option<u64>,
    full_trace: Option<Vec<TracePoint>>,
    /// Notices for the events recorded at open, replayed to each new client.
    opening: Vec<ServerMessage>,
}

impl Session {
    /// Opens a session and records its header and opening events.
    pub fn open(header: Header, writer: SessionWriter) -> Result<Self, StoreError> {
        let cfg = header.config.clone();
        let engine = Engine::new(cfg.clone(), header.seed ^ cfg.behavior.rng_seed);
        let mut s = Self {
            id: header.session_id.clone(),
            broadcaster: Broadcaster::new(cfg.tick_rate, cfg.broadcast_rate),
            engine,
            writer,
            status: Status::Waiting,
            pending: Vec::new(),
            pending_patch: None,
            last_traced: None,
            full_trace: None,
            opening: Vec::new(),
        };
        let opening = s.engine.opening_events(&s.id);
        s.record_events(&opening)?;
        s.opening = s.broadcaster.events(&opening);
        s.trace_point()?;
        Ok(s)
    }

    pub fn in_memory(id: &str, alias: &str, seed: u64, cfg: GameConfig) -> Result<Self, StoreError> {
        let header = Header::new(id, alias, seed, cfg);
        Self::open(header.clone(), SessionWriter::in_memory(header))
    }

    /// Keeps every tick's hand/fish state in memory (the file only stores
    /// the downsampled trace).
    pub fn keep_full_trace(&mut self) {
        self.full_trace.get_or_insert_with(Vec::new);
    }

    pub fn full_trace(&self) -> Option<&[TracePoint]> {
        self.full_trace.as_deref()
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn state(&self) -> &GameState {
        self.engine.state()
    }

    pub fn config(&self) -> &GameConfig {
        self.engine.config()
    }

    pub fn record(&self) -> &SessionRecord {
        self.writer.record()
    }

    pub fn welcome(&self) -> ServerMessage {
        ServerMessage::Welcome {
            session_id: self.id.clone(),
            config: Box::new(self.engine.config().clone()),
        }
    }

    /// Applies an already admitted client message. Returns replies meant for
    /// the sender only.
    pub fn handle(&mut self, m: ClientMessage) -> Result<Vec<ServerMessage>, StoreError> {
        let mut replies = Vec::new();
        match m {
            ClientMessage::Hello { .. } => {
                replies.push(self.welcome());
                replies.extend(self.opening.iter().cloned());
            }
            ClientMessage::InputSample { sample } => {
                if self.status == Status::Running {
                    self.pending.push(sample);
                }
            }
            ClientMessage::Control { action } => match (action, self.status) {
                (ControlAction::Start, Status::Waiting) | (ControlAction::Resume, Status::Paused) => {
                    self.status = Status::Running;
                    replies.push(ServerMessage::StateUpdate(StateUpdate::from_state(self.state())));
                }
                (ControlAction::Pause, Status::Running) => self.status = Status::Paused,
                (ControlAction::End, Status::Ended) => {}
                (ControlAction::End, _) => {
                    // The caller collects the closing notice through `finish`.
                    self.status = Status::Ended;
                }
                _ => {}
            },
            ClientMessage::TherapistOverride { patch } => {
                let next = patch.apply(&self.engine.config().difficulty);
                match next.validate() {
                    Ok(()) => {
                        let merged = match self.pending_patch.take() {
                            Some(prev) => merge_patch(prev, patch),
                            None => patch,
                        };
                        self.pending_patch = Some(merged);
                    }
                    Err((key, msg)) => replies.push(ServerMessage::Error {
                        code: ErrorCode::InvalidOverride,
                        message: format!("difficulty.{key}: {msg}"),
                    }),
                }
            }
        }
        Ok(replies)
    }

    /// Runs one tick if the session is running. Returns the broadcast
    /// messages for every subscriber.
    pub fn tick(&mut self) -> Result<Vec<ServerMessage>, StoreError> {
        if self.status != Status::Running {
            return Ok(Vec::new());
        }
        let samples = std::mem::take(&mut self.pending);
        let patch = self.pending_patch.take();
        let (events, _) = self.step(&samples, patch)?;
        Ok(self.broadcaster.publish(self.engine.state(), &events))
    }

    /// Replay entry point: one tick with explicit inputs, no status checks.
    pub fn step(
        &mut self,
        samples: &[RawSample],
        patch: Option<DifficultyPatch>,
    ) -> Result<(Vec<GameEvent>, u64), StoreError> {
        let tick = self.engine.state().tick + 1;
        if let Some(patch) = patch {
            let d = patch.apply(&self.engine.config().difficulty);
            self.engine.set_difficulty(d);
            self.writer.append(Entry::Override(OverrideRecord { tick, patch }))?;
        }
        for &sample in samples {
            self.writer.append(Entry::Input(InputRecord { tick, sample }))?;
        }
        let events = self.engine.tick(samples);
        self.record_events(&events)?;
        let cfg = self.engine.config();
        if on_schedule(tick, cfg.tick_rate, cfg.trace_rate) {
            self.trace_point()?;
        }
        if let Some(full) = self.full_trace.as_mut() {
            full.push(TracePoint::of(self.engine.state()));
        }
        Ok((events, tick))
    }

    fn record_events(&mut self, events: &[GameEvent]) -> Result<(), StoreError> {
        for e in events {
            self.writer.append(Entry::Event(e.clone()))?;
        }
        Ok(())
    }

    fn trace_point(&mut self) -> Result<(), StoreError> {
        let p = TracePoint::of(self.engine.state());
        self.last_traced = Some(p.tick);
        self.writer.append(Entry::Trace(p))
    }

    /// Ends the session: closing event, final trace point and footer.
    /// Returns the closing notices and the finished record.
    pub fn finish(mut self, reason: &str) -> Result<(Vec<ServerMessage>, SessionRecord), StoreError> {
        let closing = self.engine.closing_event(reason);
        self.record_events(std::slice::from_ref(&closing))?;
        if self.last_traced != Some(self.engine.state().tick) {
            self.trace_point()?;
        }
        let notices = self.broadcaster.events(&[closing]);
        let state = self.engine.state();
        let footer = Footer {
            ended_at: state.t,
            ticks: state.tick,
        };
        let record = self.writer.close(footer)?;
        Ok((notices, record))
    }
}

fn merge_patch(a: DifficultyPatch, b: DifficultyPatch) -> DifficultyPatch {
    DifficultyPatch {
        v_min: b.v_min.or(a.v_min),
        v_max: b.v_max.or(a.v_max),
        t_low: b.t_low.or(a.t_low),
        t_high: b.t_high.or(a.t_high),
        t_return: b.t_return.or(a.t_return),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::ClientKind;

    #[test]
    fn ticks_only_while_running() {
        let mut s = Session::in_memory("t", "a", 1, GameConfig::default()).unwrap();
        assert!(s.tick().unwrap().is_empty());
        s.handle(ClientMessage::hello(ClientKind::Simulator)).unwrap();
        let r = s.handle(ClientMessage::Control { action: ControlAction::Start }).unwrap();
        assert!(matches!(r[0], ServerMessage::StateUpdate(_)));
        s.tick().unwrap();
        assert_eq!(s.state().tick, 1);
        s.handle(ClientMessage::Control { action: ControlAction::Pause }).unwrap();
        s.tick().unwrap();
        assert_eq!(s.state().tick, 1);
        s.handle(ClientMessage::Control { action: ControlAction::Resume }).unwrap();
        s.tick().unwrap();
        assert_eq!(s.state().tick, 2);
    }

    #[test]
    fn invalid_override_is_rejected_valid_one_recorded() {
        let mut s = Session::in_memory("t", "a", 1, GameConfig::default()).unwrap();
        s.handle(ClientMessage::Control { action: ControlAction::Start }).unwrap();
        let bad = DifficultyPatch { v_max: Some(0.001), ..Default::default() };
        let r = s.handle(ClientMessage::TherapistOverride { patch: bad }).unwrap();
        assert!(matches!(r[0], ServerMessage::Error { code: ErrorCode::InvalidOverride, .. }));
        let good = DifficultyPatch { t_low: Some(5.0), ..Default::default() };
        s.handle(ClientMessage::TherapistOverride { patch: good }).unwrap();
        s.tick().unwrap();
        assert_eq!(s.config().difficulty.t_low, 5.0);
        assert_eq!(s.record().overrides.len(), 1);
        assert_eq!(s.record().overrides[0].tick, 1);
    }

    #[test]
    fn finish_writes_footer_and_final_trace() {
        let mut s = Session::in_memory("t", "a", 1, GameConfig::default()).unwrap();
        s.handle(ClientMessage::Control { action: ControlAction::Start }).unwrap();
        for _ in 0..7 {
            s.tick().unwrap();
        }
        let (notices, rec) = s.finish("test").unwrap();
        assert_eq!(notices.len(), 1);
        assert_eq!(rec.footer.unwrap().ticks, 7);
        assert_eq!(rec.trace.last().unwrap().tick, 7);
        assert_eq!(rec.events.last().unwrap().name(), "SessionEnded");
    }

    #[test]
    fn schedule_is_downsampled() {
        assert_eq!((1..=60).filter(|&k| on_schedule(k, 60.0, 10.0)).count(), 10);
    }
}
