//! Client/server wire protocol, version `mrr/1`.
//!
//! Every message is one UTF-8 JSON object with a `"type"` discriminator.
//! Message-oriented transports (WebSocket, the in-process loopback) carry
//! one message per frame; byte streams prefix each message with its length
//! as a big-endian `u32`. Unknown fields are ignored when decoding.

use std::collections::VecDeque;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{GameConfig, Zone};
use crate::difficulty::{AgentMode, DifficultyPatch};
use crate::game::{GameEvent, GameState, TaskStatus};
use crate::geometry::Vec3;
use crate::input_capture::RawSample;

pub const PROTOCOL_VERSION: &str = "mrr/1";
const PROTOCOL_MAJOR: u32 = 1;

/// Upper bound on a single framed message.
pub const MAX_FRAME_LEN: u32 = 1 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("unsupported protocol version `{0}` (server speaks {PROTOCOL_VERSION})")]
    UnsupportedVersion(String),
    #[error("{kind} is not allowed for {role}")]
    Unauthorized { kind: &'static str, role: String },
    #[error("outbound buffer full")]
    SlowConsumer,
}

impl ProtocolError {
    pub fn code(&self) -> ErrorCode {
        match self {
            ProtocolError::Malformed(_) => ErrorCode::MalformedMessage,
            ProtocolError::UnsupportedVersion(_) => ErrorCode::UnsupportedVersion,
            ProtocolError::Unauthorized { .. } => ErrorCode::UnauthorizedMessageKind,
            ProtocolError::SlowConsumer => ErrorCode::SlowConsumer,
        }
    }

    pub fn to_message(&self) -> ServerMessage {
        ServerMessage::Error {
            code: self.code(),
            message: self.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClientKind {
    Patient,
    Therapist,
    Simulator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlAction {
    Start,
    Pause,
    Resume,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ClientMessage {
    Hello {
        client_kind: ClientKind,
        protocol_version: String,
    },
    InputSample {
        sample: RawSample,
    },
    Control {
        action: ControlAction,
    },
    TherapistOverride {
        patch: DifficultyPatch,
    },
}

impl ClientMessage {
    pub fn hello(kind: ClientKind) -> Self {
        ClientMessage::Hello {
            client_kind: kind,
            protocol_version: PROTOCOL_VERSION.to_owned(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ClientMessage::Hello { .. } => "Hello",
            ClientMessage::InputSample { .. } => "InputSample",
            ClientMessage::Control { .. } => "Control",
            ClientMessage::TherapistOverride { .. } => "TherapistOverride",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorCode {
    MalformedMessage,
    UnsupportedVersion,
    UnauthorizedMessageKind,
    SlowConsumer,
    InvalidOverride,
    SessionClosed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskView {
    pub zone: Zone,
    pub status: TaskStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateUpdate {
    pub tick: u64,
    pub t: f64,
    pub fish_pos: Vec3,
    pub fish_vel: Vec3,
    pub hand_pos: Vec3,
    pub agent_mode: AgentMode,
    pub progress: f64,
    pub tasks: Vec<TaskView>,
}

impl StateUpdate {
    pub fn from_state(s: &GameState) -> Self {
        Self {
            tick: s.tick,
            t: s.t,
            fish_pos: s.fish.pos,
            fish_vel: s.fish.vel,
            hand_pos: s.hand.pos,
            agent_mode: s.agent.mode,
            progress: s.progress.fraction,
            tasks: s
                .tasks
                .iter()
                .map(|t| TaskView {
                    zone: t.zone,
                    status: t.status,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ServerMessage {
    Welcome {
        session_id: String,
        config: Box<GameConfig>,
    },
    StateUpdate(StateUpdate),
    EventNotice {
        seq: u64,
        event: GameEvent,
    },
    Error {
        code: ErrorCode,
        message: String,
    },
}

pub fn encode<M: Serialize>(m: &M) -> Vec<u8> {
    serde_json::to_vec(m).expect("protocol messages always serialize")
}

fn decode<'a, M: Deserialize<'a>>(bytes: &'a [u8]) -> Result<M, ProtocolError> {
    serde_json::from_slice(bytes).map_err(|e| ProtocolError::Malformed(e.to_string()))
}

pub fn decode_client(bytes: &[u8]) -> Result<ClientMessage, ProtocolError> {
    decode(bytes)
}

pub fn decode_server(bytes: &[u8]) -> Result<ServerMessage, ProtocolError> {
    decode(bytes)
}

/// Writes one length-prefixed message.
pub fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> std::io::Result<()> {
    let len = u32::try_from(payload.len())
        .ok()
        .filter(|&n| n <= MAX_FRAME_LEN)
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "frame too large"))?;
    w.write_all(&len.to_be_bytes())?;
    w.write_all(payload)
}

/// Reads one length-prefixed message; `Ok(None)` on a clean end of stream.
pub fn read_frame<R: Read>(r: &mut R) -> std::io::Result<Option<Vec<u8>>> {
    let mut len = [0u8; 4];
    match r.read_exact(&mut len) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let len = u32::from_be_bytes(len);
    if len > MAX_FRAME_LEN {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "frame too large",
        ));
    }
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf)?;
    Ok(Some(buf))
}

pub fn check_version(v: &str) -> Result<(), ProtocolError> {
    let major = v
        .strip_prefix("mrr/")
        .and_then(|m| m.split('.').next())
        .and_then(|m| m.parse::<u32>().ok());
    match major {
        Some(PROTOCOL_MAJOR) => Ok(()),
        _ => Err(ProtocolError::UnsupportedVersion(v.to_owned())),
    }
}

/// Per-connection handshake and role checks.
#[derive(Debug, Clone, Default)]
pub struct ConnectionGate {
    role: Option<ClientKind>,
}

impl ConnectionGate {
    pub fn role(&self) -> Option<ClientKind> {
        self.role
    }

    /// Validates `m` against the connection's state. A successful `Hello`
    /// fixes the role for the rest of the connection.
    pub fn admit(&mut self, m: &ClientMessage) -> Result<(), ProtocolError> {
        let deny = |role: Option<ClientKind>| ProtocolError::Unauthorized {
            kind: m.kind_name(),
            role: role.map_or("unidentified client".into(), |r| format!("{r:?}").to_lowercase()),
        };
        match (m, self.role) {
            (ClientMessage::Hello { client_kind, protocol_version }, None) => {
                check_version(protocol_version)?;
                self.role = Some(*client_kind);
                Ok(())
            }
            (_, None) | (ClientMessage::Hello { .. }, Some(_)) => Err(deny(self.role)),
            (ClientMessage::InputSample { .. }, Some(ClientKind::Patient | ClientKind::Simulator)) => Ok(()),
            (ClientMessage::TherapistOverride { .. }, Some(ClientKind::Therapist)) => Ok(()),
            (ClientMessage::Control { .. }, Some(_)) => Ok(()),
            (_, role) => Err(deny(role)),
        }
    }
}

/// Turns the per-tick state/event stream into outbound messages.
///
/// Every event becomes an `EventNotice` with a session-wide sequence number;
/// `StateUpdate`s are downsampled to `rate`. Within a tick the notices come
/// before that tick's update, so an event from tick `k` always precedes any
/// update with a tick greater than `k`.
#[derive(Debug, Clone)]
pub struct Broadcaster {
    tick_rate: f64,
    rate: f64,
    next_seq: u64,
}

impl Broadcaster {
    pub fn new(tick_rate: f64, rate: f64) -> Self {
        assert!(rate > 0.0 && rate <= tick_rate, "broadcast rate must be in (0, tick_rate]");
        Self {
            tick_rate,
            rate,
            next_seq: 0,
        }
    }

    fn slot(&self, tick: u64) -> u64 {
        (tick as f64 * self.rate / self.tick_rate + 1e-9).floor() as u64
    }

    pub fn wants_update(&self, tick: u64) -> bool {
        tick == 0 || self.slot(tick) > self.slot(tick - 1)
    }

    pub fn events(&mut self, events: &[GameEvent]) -> Vec<ServerMessage> {
        events
            .iter()
            .map(|e| {
                let seq = self.next_seq;
                self.next_seq += 1;
                ServerMessage::EventNotice {
                    seq,
                    event: e.clone(),
                }
            })
            .collect()
    }

    pub fn publish(&mut self, state: &GameState, events: &[GameEvent]) -> Vec<ServerMessage> {
        let mut out = self.events(events);
        if self.wants_update(state.tick) {
            out.push(ServerMessage::StateUpdate(StateUpdate::from_state(state)));
        }
        out
    }
}

/// Bounded outbound queue for one subscriber.
#[derive(Debug)]
pub struct Outbox {
    queue: VecDeque<ServerMessage>,
    capacity: usize,
}

impl Outbox {
    pub fn new(capacity: usize) -> Self {
        Self {
            queue: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, m: ServerMessage) -> Result<(), ProtocolError> {
        if self.queue.len() >= self.capacity {
            return Err(ProtocolError::SlowConsumer);
        }
        self.queue.push_back(m);
        Ok(())
    }

    pub fn pop(&mut self) -> Option<ServerMessage> {
        self.queue.pop_front()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}
