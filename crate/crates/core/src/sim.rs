//! Headless sessions over an in-process loopback transport, and replay of
//! recorded sessions.
//!
//! The simulated patient is a protocol client: every message it sends or
//! receives is encoded to bytes and decoded on the other side, exactly as a
//! networked client would see it.

use std::path::Path;

use thiserror::Error;

use crate::config::GameConfig;
use crate::game::GameEvent;
use crate::patient::{PatientModel, SimulatedPatient};
use crate::protocol::{
    decode_client, decode_server, encode, ClientKind, ClientMessage, ConnectionGate, ControlAction,
    ProtocolError, ServerMessage, StateUpdate,
};
use crate::session::Session;
use crate::session_store::{Header, SessionRecord, SessionWriter, StoreError, TracePoint};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("server refused the simulator: {0}")]
    Refused(String),
}

/// One direction of the loopback channel: encode, then decode.
fn to_server(m: &ClientMessage) -> Result<ClientMessage, ProtocolError> {
    decode_client(&encode(m))
}

fn to_client(m: &ServerMessage) -> Result<ServerMessage, ProtocolError> {
    decode_server(&encode(m))
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub duration: f64,
    pub seed: u64,
    pub session_id: Option<String>,
    /// Keep every tick's state in the outcome (not just the stored trace).
    pub full_trace: bool,
}

impl SimOptions {
    pub fn new(duration: f64, seed: u64) -> Self {
        Self {
            duration,
            seed,
            session_id: None,
            full_trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub record: SessionRecord,
    /// Per-tick trace; empty unless requested.
    pub full_trace: Vec<TracePoint>,
    /// Everything the simulated client received, in order.
    pub received: Vec<ServerMessage>,
}

impl SimOutcome {
    pub fn events(&self) -> &[GameEvent] {
        &self.record.events
    }
}

/// Runs a headless session. Writes the session file to `out` when given.
pub fn simulate(
    cfg: &GameConfig,
    model: &PatientModel,
    opts: &SimOptions,
    out: Option<&Path>,
) -> Result<SimOutcome, SimError> {
    let id = opts
        .session_id
        .clone()
        .unwrap_or_else(|| format!("sim-{}-{}", model.name, opts.seed));
    let header = Header::new(&id, &model.name, opts.seed, cfg.clone());
    let writer = match out {
        Some(path) => SessionWriter::create(path, header.clone())?,
        None => SessionWriter::in_memory(header.clone()),
    };
    let mut session = Session::open(header, writer)?;
    if opts.full_trace {
        session.keep_full_trace();
    }

    let mut gate = ConnectionGate::default();
    let mut patient = SimulatedPatient::new(model.clone(), cfg.calibration, opts.seed);
    let mut received = Vec::new();
    let mut latest: Option<StateUpdate> = None;

    let deliver = |msgs: Vec<ServerMessage>,
                       received: &mut Vec<ServerMessage>,
                       latest: &mut Option<StateUpdate>|
     -> Result<(), SimError> {
        for m in msgs {
            let m = to_client(&m)?;
            match &m {
                ServerMessage::StateUpdate(u) => *latest = Some(u.clone()),
                ServerMessage::Error { message, .. } => return Err(SimError::Refused(message.clone())),
                _ => {}
            }
            received.push(m);
        }
        Ok(())
    };

    let mut send = |m: ClientMessage, session: &mut Session| -> Result<Vec<ServerMessage>, SimError> {
        let m = to_server(&m)?;
        gate.admit(&m)?;
        Ok(session.handle(m)?)
    };

    let replies = send(ClientMessage::hello(ClientKind::Simulator), &mut session)?;
    deliver(replies, &mut received, &mut latest)?;
    let replies = send(ClientMessage::Control { action: ControlAction::Start }, &mut session)?;
    deliver(replies, &mut received, &mut latest)?;

    let ticks = (opts.duration * cfg.tick_rate).round().max(0.0) as u64;
    let mut seen_tick = None;
    for k in 1..=ticks {
        let t = k as f64 / cfg.tick_rate;
        let fresh = latest.as_ref().filter(|u| Some(u.tick) != seen_tick);
        seen_tick = latest.as_ref().map(|u| u.tick);
        let sample = patient.simulate_step(fresh, t);
        let replies = send(ClientMessage::InputSample { sample }, &mut session)?;
        deliver(replies, &mut received, &mut latest)?;
        let msgs = session.tick()?;
        deliver(msgs, &mut received, &mut latest)?;
    }

    let full_trace = session.full_trace().map(<[_]>::to_vec).unwrap_or_default();
    let (closing, record) = session.finish("duration elapsed")?;
    deliver(closing, &mut received, &mut latest)?;
    Ok(SimOutcome {
        record,
        full_trace,
        received,
    })
}

/// Where a replay first disagrees with the recording.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub tick: u64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ReplayReport {
    pub regenerated: SessionRecord,
    pub divergence: Option<Divergence>,
}

/// Re-executes a session from its config snapshot, seed and recorded
/// inputs, and compares the regenerated events and trace with the record.
pub fn replay(record: &SessionRecord) -> Result<ReplayReport, StoreError> {
    let header = record.header.clone();
    let mut session = Session::open(header.clone(), SessionWriter::in_memory(header))?;
    let ticks = record.tick_count();
    let mut inputs = record.inputs.iter().peekable();
    let mut overrides = record.overrides.iter().peekable();
    for tick in 1..=ticks {
        let mut samples = Vec::new();
        while let Some(i) = inputs.next_if(|i| i.tick <= tick) {
            samples.push(i.sample);
        }
        let patch = overrides.next_if(|o| o.tick == tick).map(|o| o.patch);
        session.step(&samples, patch)?;
    }
    let reason = record
        .events
        .iter()
        .rev()
        .find_map(|e| match &e.kind {
            crate::game::EventKind::SessionEnded { reason } => Some(reason.clone()),
            _ => None,
        });
    let regenerated = match (reason, record.footer) {
        (Some(reason), Some(_)) => session.finish(&reason)?.1,
        _ => session.record().clone(),
    };
    let divergence = compare(record, &regenerated);
    Ok(ReplayReport {
        regenerated,
        divergence,
    })
}

fn compare(recorded: &SessionRecord, regenerated: &SessionRecord) -> Option<Divergence> {
    let mut first: Option<Divergence> = None;
    let mut note = |tick: u64, detail: String| {
        if first.as_ref().is_none_or(|d| tick < d.tick) {
            first = Some(Divergence { tick, detail });
        }
    };

    let n = recorded.events.len().max(regenerated.events.len());
    for i in 0..n {
        match (recorded.events.get(i), regenerated.events.get(i)) {
            (Some(a), Some(b)) if a == b => continue,
            (a, b) => {
                let tick = a.map(|e| e.tick).into_iter().chain(b.map(|e| e.tick)).min().unwrap_or(0);
                note(
                    tick,
                    format!(
                        "event #{i}: recorded {} vs regenerated {}",
                        a.map_or("nothing".into(), |e| format!("{} @ tick {}", e.name(), e.tick)),
                        b.map_or("nothing".into(), |e| format!("{} @ tick {}", e.name(), e.tick)),
                    ),
                );
                break;
            }
        }
    }

    let n = recorded.trace.len().max(regenerated.trace.len());
    for i in 0..n {
        match (recorded.trace.get(i), regenerated.trace.get(i)) {
            (Some(a), Some(b)) if a == b => continue,
            (a, b) => {
                let tick = a.map(|p| p.tick).into_iter().chain(b.map(|p| p.tick)).min().unwrap_or(0);
                note(tick, format!("trace point #{i} differs at tick {tick}"));
                break;
            }
        }
    }
    first
}
