//! WebSocket session service.
//!
//! Each live session runs its own tick loop task. Connections speak the
//! JSON protocol over text frames on `/session/{id}`: a connection joins the
//! session on `Hello`, after which its admitted messages go to the session
//! task and the session's broadcasts come back through a bounded queue. A
//! subscriber whose queue is full gets a `SlowConsumer` error and is
//! dropped; the session keeps running.

use std::collections::HashMap;
use std::future::Future;
use std::net::SocketAddr;
use std::path::{Path as FsPath, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::extract::ws::{CloseFrame, Message, Utf8Bytes, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use futures::{SinkExt, StreamExt};
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::{mpsc, oneshot, watch};
use tokio::task::JoinHandle;
use tokio::time::MissedTickBehavior;

use crate::config::GameConfig;
use crate::protocol::{
    decode_client, encode, ClientMessage, ConnectionGate, ControlAction, ErrorCode, ProtocolError,
    ServerMessage,
};
use crate::session::{Session, Status};
use crate::session_store::{Header, SessionRecord, SessionWriter, StoreError};

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("data directory {path}: {source}")]
    DataDir {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub game: GameConfig,
    pub data_dir: PathBuf,
    /// Messages buffered per subscriber before it is dropped as slow.
    pub outbox_capacity: usize,
    /// Seed recorded in every session header.
    pub seed: u64,
}

impl ServerConfig {
    pub fn new(game: GameConfig, data_dir: impl Into<PathBuf>) -> Self {
        Self {
            game,
            data_dir: data_dir.into(),
            outbox_capacity: 256,
            seed: 0,
        }
    }
}

type ConnId = u64;

enum Command {
    Join {
        conn: ConnId,
        hello: ClientMessage,
        reply: oneshot::Sender<Subscription>,
    },
    Message {
        conn: ConnId,
        msg: ClientMessage,
    },
    Leave {
        conn: ConnId,
    },
}

/// What a connection holds after joining a session.
struct Subscription {
    rx: mpsc::Receiver<ServerMessage>,
    kicked: oneshot::Receiver<ServerMessage>,
}

struct Subscriber {
    tx: mpsc::Sender<ServerMessage>,
    kick: oneshot::Sender<ServerMessage>,
}

/// Fan-out of session messages to bounded per-connection queues.
#[derive(Default)]
struct Fanout {
    subs: HashMap<ConnId, Subscriber>,
    order: Vec<ConnId>,
}

impl Fanout {
    fn add(&mut self, conn: ConnId, capacity: usize) -> Subscription {
        let (tx, rx) = mpsc::channel(capacity.max(1));
        let (kick, kicked) = oneshot::channel();
        self.subs.insert(conn, Subscriber { tx, kick });
        self.order.push(conn);
        Subscription { rx, kicked }
    }

    fn remove(&mut self, conn: ConnId) {
        self.subs.remove(&conn);
        self.order.retain(|&c| c != conn);
    }

    fn send_to(&mut self, conn: ConnId, msgs: &[ServerMessage]) {
        for m in msgs {
            let Some(sub) = self.subs.get(&conn) else { return };
            match sub.tx.try_send(m.clone()) {
                Ok(()) => {}
                Err(mpsc::error::TrySendError::Full(_)) => {
                    self.kick(conn, ProtocolError::SlowConsumer.to_message());
                    return;
                }
                Err(mpsc::error::TrySendError::Closed(_)) => {
                    self.remove(conn);
                    return;
                }
            }
        }
    }

    fn broadcast(&mut self, msgs: &[ServerMessage]) {
        if msgs.is_empty() {
            return;
        }
        for conn in self.order.clone() {
            self.send_to(conn, msgs);
        }
    }

    fn kick(&mut self, conn: ConnId, why: ServerMessage) {
        if let Some(sub) = self.subs.remove(&conn) {
            tracing::warn!(conn, "dropping subscriber: {why:?}");
            let _ = sub.kick.send(why);
        }
        self.order.retain(|&c| c != conn);
    }

    fn len(&self) -> usize {
        self.subs.len()
    }
}

struct Registry {
    cfg: ServerConfig,
    sessions: Mutex<HashMap<String, mpsc::Sender<Command>>>,
    tasks: Mutex<Vec<JoinHandle<Option<SessionRecord>>>>,
    shutdown: watch::Receiver<bool>,
    next_conn: AtomicU64,
}

type AppState = Arc<Registry>;

pub fn valid_session_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl Registry {
    fn session_path(&self, id: &str) -> PathBuf {
        self.cfg.data_dir.join(format!("{id}.jsonl"))
    }

    /// The live session's command queue, creating the session if needed.
    fn session(self: &Arc<Self>, id: &str) -> Result<mpsc::Sender<Command>, ServerMessage> {
        let mut sessions = self.sessions.lock().expect("registry lock");
        if let Some(tx) = sessions.get(id).filter(|tx| !tx.is_closed()) {
            return Ok(tx.clone());
        }
        let closed = || ServerMessage::Error {
            code: ErrorCode::SessionClosed,
            message: format!("session {id} is over"),
        };
        if *self.shutdown.borrow() {
            return Err(closed());
        }
        let path = self.session_path(id);
        if path.exists() {
            return Err(closed());
        }
        let mut header = Header::new(id, id, self.cfg.seed, self.cfg.game.clone());
        header.wall_clock_start = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        let session = SessionWriter::create(&path, header.clone())
            .and_then(|w| Session::open(header, w))
            .map_err(|e| ServerMessage::Error {
                code: ErrorCode::SessionClosed,
                message: format!("cannot open session {id}: {e}"),
            })?;
        tracing::info!(session = id, path = %path.display(), "session opened");
        let (tx, rx) = mpsc::channel(1024);
        sessions.insert(id.to_owned(), tx.clone());
        let task = tokio::spawn(run_session(
            session,
            rx,
            self.cfg.outbox_capacity,
            self.shutdown.clone(),
        ));
        self.tasks.lock().expect("registry lock").push(task);
        Ok(tx)
    }
}

async fn run_session(
    mut session: Session,
    mut commands: mpsc::Receiver<Command>,
    capacity: usize,
    mut shutdown: watch::Receiver<bool>,
) -> Option<SessionRecord> {
    let id = session.id().to_owned();
    let mut fanout = Fanout::default();
    let period = Duration::from_secs_f64(1.0 / session.config().tick_rate);
    let mut ticker = tokio::time::interval(period);
    ticker.set_missed_tick_behavior(MissedTickBehavior::Delay);

    let reason = loop {
        tokio::select! {
            _ = shutdown.wait_for(|&s| s) => break "server shutdown",
            cmd = commands.recv() => match cmd {
                None => break "server shutdown",
                Some(Command::Join { conn, hello, reply }) => {
                    let sub = fanout.add(conn, capacity);
                    if reply.send(sub).is_err() {
                        fanout.remove(conn);
                        continue;
                    }
                    match session.handle(hello) {
                        Ok(replies) => fanout.send_to(conn, &replies),
                        Err(e) => break storage_failure(&id, e),
                    }
                }
                Some(Command::Message { conn, msg }) => {
                    let end = matches!(msg, ClientMessage::Control { action: ControlAction::End });
                    match session.handle(msg) {
                        Ok(replies) => fanout.send_to(conn, &replies),
                        Err(e) => break storage_failure(&id, e),
                    }
                    if end && session.status() == Status::Ended {
                        break "ended by client";
                    }
                }
                Some(Command::Leave { conn }) => fanout.remove(conn),
            },
            _ = ticker.tick(), if session.status() == Status::Running => {
                match session.tick() {
                    Ok(msgs) => fanout.broadcast(&msgs),
                    Err(e) => break storage_failure(&id, e),
                }
            }
        }
    };

    commands.close();
    match session.finish(reason) {
        Ok((notices, record)) => {
            fanout.broadcast(&notices);
            tracing::info!(session = %id, reason, ticks = record.tick_count(), subscribers = fanout.len(), "session closed");
            Some(record)
        }
        Err(e) => {
            tracing::error!(session = %id, "cannot finalize session: {e}");
            None
        }
    }
}

fn storage_failure(id: &str, e: StoreError) -> &'static str {
    tracing::error!(session = %id, "session storage failed: {e}");
    "storage failure"
}

async fn ws_handler(
    ws: WebSocketUpgrade,
    Path(id): Path<String>,
    State(reg): State<AppState>,
) -> Response {
    if !valid_session_id(&id) {
        return (StatusCode::BAD_REQUEST, "session id must be 1-64 of [A-Za-z0-9_-]").into_response();
    }
    ws.on_upgrade(move |socket| connection(socket, id, reg))
}

fn text(m: &ServerMessage) -> Message {
    let bytes = encode(m);
    Message::Text(Utf8Bytes::from(String::from_utf8(bytes).expect("JSON is UTF-8")))
}

async fn close_with(socket: &mut WebSocket, m: &ServerMessage) {
    let _ = socket.send(text(m)).await;
    let _ = socket
        .send(Message::Close(Some(CloseFrame {
            code: axum::extract::ws::close_code::POLICY,
            reason: Utf8Bytes::from_static("protocol error"),
        })))
        .await;
}

async fn connection(mut socket: WebSocket, id: String, reg: AppState) {
    let conn = reg.next_conn.fetch_add(1, Ordering::Relaxed);
    let mut gate = ConnectionGate::default();

    // Handshake: the first admitted message must be Hello.
    let (session, sub) = loop {
        let Some(Ok(frame)) = socket.recv().await else { return };
        let bytes = match frame {
            Message::Text(t) => t.as_bytes().to_vec(),
            Message::Binary(b) => b.to_vec(),
            Message::Close(_) => return,
            _ => continue,
        };
        let msg = match decode_client(&bytes).and_then(|m| gate.admit(&m).map(|()| m)) {
            Ok(m) => m,
            Err(e @ ProtocolError::Unauthorized { .. }) => {
                let _ = socket.send(text(&e.to_message())).await;
                continue;
            }
            Err(e) => return close_with(&mut socket, &e.to_message()).await,
        };
        let tx = match reg.session(&id) {
            Ok(tx) => tx,
            Err(m) => return close_with(&mut socket, &m).await,
        };
        let (reply, joined) = oneshot::channel();
        if tx.send(Command::Join { conn, hello: msg, reply }).await.is_err() {
            return;
        }
        match joined.await {
            Ok(sub) => break (tx, sub),
            Err(_) => return,
        }
    };

    let Subscription { mut rx, mut kicked } = sub;
    let (mut sink, mut stream) = socket.split();
    // The kick sender is dropped with the session; the queue still drains.
    let mut kick_armed = true;
    loop {
        tokio::select! {
            biased;
            why = &mut kicked, if kick_armed => match why {
                Ok(m) => {
                    let _ = sink.send(text(&m)).await;
                    break;
                }
                Err(_) => kick_armed = false,
            },
            out = rx.recv() => match out {
                Some(m) => {
                    if sink.send(text(&m)).await.is_err() {
                        break;
                    }
                }
                // Session over: everything queued has been delivered.
                None => break,
            },
            frame = stream.next() => {
                let bytes = match frame {
                    Some(Ok(Message::Text(t))) => t.as_bytes().to_vec(),
                    Some(Ok(Message::Binary(b))) => b.to_vec(),
                    Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                    Some(Ok(_)) => continue,
                };
                match decode_client(&bytes).and_then(|m| gate.admit(&m).map(|()| m)) {
                    Ok(msg) => {
                        if session.send(Command::Message { conn, msg }).await.is_err() {
                            break;
                        }
                    }
                    Err(e @ ProtocolError::Unauthorized { .. }) => {
                        if sink.send(text(&e.to_message())).await.is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        tracing::warn!(conn, session = %id, "closing connection: {e}");
                        let _ = sink.send(text(&e.to_message())).await;
                        break;
                    }
                }
            }
        }
    }
    let _ = session.send(Command::Leave { conn }).await;
    let _ = sink.close().await;
}

fn router(reg: AppState) -> Router {
    Router::new()
        .route("/session/{id}", get(ws_handler))
        .with_state(reg)
}

pub struct Server {
    listener: TcpListener,
    cfg: ServerConfig,
}

impl Server {
    /// Binds the listener and prepares the data directory.
    pub async fn bind(addr: &str, cfg: ServerConfig) -> Result<Self, ServerError> {
        ensure_dir(&cfg.data_dir)?;
        let listener = TcpListener::bind(addr).await.map_err(|source| ServerError::Bind {
            addr: addr.to_owned(),
            source,
        })?;
        Ok(Self { listener, cfg })
    }

    pub fn local_addr(&self) -> std::io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until `shutdown` resolves, then finalizes every open session
    /// and returns their records.
    pub async fn run<F>(self, shutdown: F) -> Result<Vec<SessionRecord>, ServerError>
    where
        F: Future<Output = ()> + Send + 'static,
    {
        let (stop_tx, stop_rx) = watch::channel(false);
        let reg = Arc::new(Registry {
            cfg: self.cfg,
            sessions: Mutex::new(HashMap::new()),
            tasks: Mutex::new(Vec::new()),
            shutdown: stop_rx.clone(),
            next_conn: AtomicU64::new(0),
        });
        let mut graceful = stop_rx.clone();
        tokio::spawn(async move {
            shutdown.await;
            let _ = stop_tx.send(true);
        });
        axum::serve(self.listener, router(reg.clone()))
            .with_graceful_shutdown(async move {
                let _ = graceful.wait_for(|&s| s).await;
            })
            .await?;

        let tasks = std::mem::take(&mut *reg.tasks.lock().expect("registry lock"));
        let mut records = Vec::new();
        for t in tasks {
            if let Ok(Some(r)) = t.await {
                records.push(r);
            }
        }
        Ok(records)
    }
}

fn ensure_dir(path: &FsPath) -> Result<(), ServerError> {
    std::fs::create_dir_all(path).map_err(|source| ServerError::DataDir {
        path: path.to_owned(),
        source,
    })
}
