//! Append-only JSONL session files and the therapist metrics derived from
//! them.
//!
//! Line 1 is the header (config snapshot, seed). Every following line is
//! one of `input`, `override`, `event`, `trace` or `footer`, written as the
//! session runs. A line only counts once its terminating newline is on
//! disk, so a crash loses at most the line being written.

use std::fs::File;
use std::io::{LineWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{GameConfig, Zone};
use crate::difficulty::{AgentMode, DifficultyPatch};
use crate::game::{EventKind, GameEvent, GameState};
use crate::input_capture::{HandState, RawSample};
use crate::steering::FishState;

pub const SESSION_FORMAT: &str = "mrr-session/1";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("session is closed")]
    SessionClosed,
    #[error("storage failure: {0}")]
    Storage(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("session file has no complete header line")]
    MissingHeader,
    #[error("not enough trace samples to compute metrics ({0} < 2)")]
    InsufficientData(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub session_id: String,
    pub patient_alias: String,
    pub seed: u64,
    /// Session clock at start; always 0 for sessions recorded by this crate.
    pub started_at: f64,
    /// Wall clock at start, seconds since the Unix epoch. Absent for
    /// simulated sessions so their files stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_start: Option<u64>,
    pub config: GameConfig,
}

impl Header {
    pub fn new(session_id: &str, patient_alias: &str, seed: u64, config: GameConfig) -> Self {
        Self {
            format: SESSION_FORMAT.to_owned(),
            session_id: session_id.to_owned(),
            patient_alias: patient_alias.to_owned(),
            seed,
            started_at: 0.0,
            wall_clock_start: None,
            config,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    /// Tick that consumed the sample.
    pub tick: u64,
    pub sample: RawSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverrideRecord {
    pub tick: u64,
    pub patch: DifficultyPatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub tick: u64,
    pub t: f64,
    pub hand: HandState,
    pub fish: FishState,
    pub mode: AgentMode,
    /// False while the hand pose is a placeholder (no sample yet, or
    /// tracking lost).
    pub tracked: bool,
}

impl TracePoint {
    pub fn of(s: &GameState) -> Self {
        Self {
            tick: s.tick,
            t: s.t,
            hand: s.hand,
            fish: s.fish,
            mode: s.agent.mode,
            tracked: s.hand_tracked,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footer {
    pub ended_at: f64,
    pub ticks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Entry {
    Header(Box<Header>),
    Input(InputRecord),
    Override(OverrideRecord),
    Event(GameEvent),
    Trace(TracePoint),
    Footer(Footer),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub header: Header,
    pub inputs: Vec<InputRecord>,
    pub overrides: Vec<OverrideRecord>,
    pub events: Vec<GameEvent>,
    pub trace: Vec<TracePoint>,
    pub footer: Option<Footer>,
}

impl SessionRecord {
    pub fn new(header: Header) -> Self {
        Self {
            header,
            inputs: Vec::new(),
            overrides: Vec::new(),
            events: Vec::new(),
            trace: Vec::new(),
            footer: None,
        }
    }

    fn push(&mut self, e: Entry) {
        match e {
            Entry::Header(h) => self.header = *h,
            Entry::Input(i) => self.inputs.push(i),
            Entry::Override(o) => self.overrides.push(o),
            Entry::Event(ev) => self.events.push(ev),
            Entry::Trace(tp) => self.trace.push(tp),
            Entry::Footer(f) => self.footer = Some(f),
        }
    }

    /// Orders events by session time. Ties keep write order.
    fn sort_events(&mut self) {
        self.events.sort_by(|a, b| a.t.total_cmp(&b.t));
    }

    pub fn transitions(&self) -> impl Iterator<Item = &GameEvent> {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::AgentTransition { .. }))
    }

    /// Last tick the record knows about.
    pub fn tick_count(&self) -> u64 {
        if let Some(f) = self.footer {
            return f.ticks;
        }
        let inputs = self.inputs.iter().map(|i| i.tick);
        let events = self.events.iter().map(|e| e.tick);
        let trace = self.trace.iter().map(|p| p.tick);
        inputs.chain(events).chain(trace).max().unwrap_or(0)
    }

    pub fn end_time(&self) -> f64 {
        match self.footer {
            Some(f) => f.ended_at,
            None => {
                let tr = self.trace.last().map_or(0.0, |p| p.t);
                let ev = self.events.last().map_or(0.0, |e| e.t);
                tr.max(ev)
            }
        }
    }
}

/// Write-through session log. Each append is one line, flushed when the
/// newline is written. The in-memory record mirrors the file.
#[derive(Debug)]
pub struct SessionWriter {
    file: Option<LineWriter<File>>,
    path: Option<PathBuf>,
    record: SessionRecord,
    closed: bool,
}

impl SessionWriter {
    pub fn create(path: &Path, header: Header) -> Result<Self, StoreError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = LineWriter::new(File::create(path)?);
        let mut w = Self {
            file: Some(file),
            path: Some(path.to_owned()),
            record: SessionRecord::new(header.clone()),
            closed: false,
        };
        w.write_line(&Entry::Header(Box::new(header)))?;
        Ok(w)
    }

    /// Writer that keeps the record in memory only.
    pub fn in_memory(header: Header) -> Self {
        Self {
            file: None,
            path: None,
            record: SessionRecord::new(header),
            closed: false,
        }
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn record(&self) -> &SessionRecord {
        &self.record
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    fn write_line(&mut self, e: &Entry) -> Result<(), StoreError> {
        if let Some(f) = self.file.as_mut() {
            let mut line = serde_json::to_vec(e).map_err(std::io::Error::other)?;
            line.push(b'\n');
            f.write_all(&line)?;
        }
        Ok(())
    }

    pub fn append(&mut self, e: Entry) -> Result<(), StoreError> {
        if self.closed {
            return Err(StoreError::SessionClosed);
        }
        if matches!(e, Entry::Header(_)) {
            return Err(StoreError::Corrupt {
                line: 0,
                message: "header can only be written once".into(),
            });
        }
        self.write_line(&e)?;
        let is_footer = matches!(e, Entry::Footer(_));
        self.record.push(e);
        if is_footer {
            self.closed = true;
            if let Some(f) = self.file.as_mut() {
                f.flush()?;
                f.get_ref().sync_all()?;
            }
        }
        Ok(())
    }

    /// Writes the footer and returns the final record.
    pub fn close(mut self, footer: Footer) -> Result<SessionRecord, StoreError> {
        self.append(Entry::Footer(footer))?;
        Ok(self.record)
    }

    pub fn into_record(self) -> SessionRecord {
        self.record
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSession {
    pub record: SessionRecord,
    /// The file ended in a partial line, which was dropped.
    pub truncated: bool,
    pub complete_lines: usize,
}

pub fn parse_session(bytes: &[u8]) -> Result<LoadedSession, StoreError> {
    let mut parts: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    // The piece after the last newline is either empty or a partial line.
    let tail = parts.pop().unwrap_or_default();
    let truncated = !tail.is_empty();
    let mut lines = parts.into_iter().enumerate();

    let Some((_, first)) = lines.next() else {
        return Err(StoreError::MissingHeader);
    };
    let header = match serde_json::from_slice::<Entry>(first) {
        Ok(Entry::Header(h)) => *h,
        Ok(_) => {
            return Err(StoreError::Corrupt {
                line: 1,
                message: "first line is not a header".into(),
            })
        }
        Err(e) => {
            return Err(StoreError::Corrupt {
                line: 1,
                message: e.to_string(),
            })
        }
    };
    let mut record = SessionRecord::new(header);
    let mut complete = 1;
    for (i, line) in lines {
        if line.iter().all(u8::is_ascii_whitespace) {
            complete += 1;
            continue;
        }
        let entry: Entry = serde_json::from_slice(line).map_err(|e| StoreError::Corrupt {
            line: i + 1,
            message: e.to_string(),
        })?;
        if matches!(entry, Entry::Header(_)) {
            return Err(StoreError::Corrupt {
                line: i + 1,
                message: "duplicate header".into(),
            });
        }
        record.push(entry);
        complete += 1;
    }
    record.sort_events();
    Ok(LoadedSession {
        record,
        truncated,
        complete_lines: complete,
    })
}

pub fn load_session(path: &Path) -> Result<LoadedSession, StoreError> {
    parse_session(&std::fs::read(path)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    pub wander: f64,
    pub helpful: f64,
    pub challenging: f64,
}

impl Occupancy {
    pub fn get(&self, mode: AgentMode) -> f64 {
        match mode {
            AgentMode::Wander => self.wander,
            AgentMode::Helpful => self.helpful,
            AgentMode::Challenging => self.challenging,
        }
    }

    pub fn sum(&self) -> f64 {
        self.wander + self.helpful + self.challenging
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskTime {
    pub index: usize,
    pub zone: Zone,
    /// Activation to completion; `None` if the task never completed.
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMetrics {
    pub session_id: String,
    pub duration: f64,
    /// Hand path length over the tracked part of the stored trace, meters.
    pub movement_volume: f64,
    /// Path length over tracked time.
    pub mean_speed: f64,
    pub peak_speed: f64,
    pub task_times: Vec<TaskTime>,
    pub endorsed_touches: u64,
    pub occupancy: Occupancy,
    pub tracking_loss_duration: f64,
}

pub fn compute_metrics(record: &SessionRecord) -> Result<SessionMetrics, StoreError> {
    let trace = &record.trace;
    if trace.len() < 2 {
        return Err(StoreError::InsufficientData(trace.len()));
    }
    // Only segments with a tracked hand at both ends count as movement.
    let (movement_volume, span) = trace
        .windows(2)
        .filter(|w| w[0].tracked && w[1].tracked)
        .fold((0.0, 0.0), |(len, dt), w| {
            (len + w[1].hand.pos.distance(w[0].hand.pos), dt + (w[1].t - w[0].t))
        });
    let mean_speed = if span > 0.0 { movement_volume / span } else { 0.0 };
    let peak_speed = trace.iter().filter(|p| p.tracked).map(|p| p.hand.speed).fold(0.0, f64::max);

    let start = record.header.started_at;
    let end = record.end_time().max(start);

    let mut spent = [0.0f64; 3];
    let slot = |m: AgentMode| AgentMode::ALL.iter().position(|&x| x == m).unwrap();
    let (mut mode, mut since) = (AgentMode::Wander, start);
    let mut lost_since: Option<f64> = None;
    let mut tracking_loss = 0.0;
    let mut activated: Vec<(usize, Zone, f64)> = Vec::new();
    let mut task_times: Vec<TaskTime> = Vec::new();
    let mut endorsed = 0;
    for e in &record.events {
        match &e.kind {
            EventKind::AgentTransition { to, .. } => {
                spent[slot(mode)] += e.t - since;
                mode = *to;
                since = e.t;
            }
            EventKind::TrackingLost { .. } => {
                lost_since.get_or_insert(e.t);
            }
            EventKind::TrackingRecovered {} => {
                if let Some(s) = lost_since.take() {
                    tracking_loss += e.t - s;
                }
            }
            EventKind::TouchEndorsed { .. } => endorsed += 1,
            EventKind::TaskActivated { index, zone } => activated.push((*index, *zone, e.t)),
            EventKind::TaskCompleted { index, .. } => {
                if let Some(&(_, zone, t0)) = activated.iter().find(|a| a.0 == *index) {
                    task_times.push(TaskTime {
                        index: *index,
                        zone,
                        seconds: Some(e.t - t0),
                    });
                }
            }
            _ => {}
        }
    }
    spent[slot(mode)] += end - since;
    if let Some(s) = lost_since {
        tracking_loss += end - s;
    }
    for (index, zone, _) in activated {
        if !task_times.iter().any(|t| t.index == index) {
            task_times.push(TaskTime {
                index,
                zone,
                seconds: None,
            });
        }
    }
    task_times.sort_by_key(|t| t.index);

    let total: f64 = spent.iter().sum();
    let occupancy = if total > 0.0 {
        Occupancy {
            wander: spent[0] / total,
            helpful: spent[1] / total,
            challenging: spent[2] / total,
        }
    } else {
        Occupancy {
            wander: 1.0,
            helpful: 0.0,
            challenging: 0.0,
        }
    };

    Ok(SessionMetrics {
        session_id: record.header.session_id.clone(),
        duration: end - start,
        movement_volume,
        mean_speed,
        peak_speed,
        task_times,
        endorsed_touches: endorsed,
        occupancy,
        tracking_loss_duration: tracking_loss,
    })
}

/// Human-readable metrics block, one value per line.
pub fn metrics_summary(m: &SessionMetrics) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k:<22}{v}\n"));
    line("session", m.session_id.clone());
    line("duration_s", format!("{:.3}", m.duration));
    line("movement_volume_m", format!("{:.4}", m.movement_volume));
    line("mean_speed_mps", format!("{:.4}", m.mean_speed));
    line("peak_speed_mps", format!("{:.4}", m.peak_speed));
    line("endorsed_touches", m.endorsed_touches.to_string());
    line("occupancy_wander", format!("{:.4}", m.occupancy.wander));
    line("occupancy_helpful", format!("{:.4}", m.occupancy.helpful));
    line("occupancy_challenging", format!("{:.4}", m.occupancy.challenging));
    line("tracking_loss_s", format!("{:.3}", m.tracking_loss_duration));
    for t in &m.task_times {
        let secs = t.seconds.map_or_else(|| "not completed".to_owned(), |s| format!("{s:.3}"));
        line(&format!("task_{}_s", t.index), format!("{secs} ({})", t.zone.label()));
    }
    out
}

/// CSV export: one row per task, then a summary row.
pub fn metrics_csv(m: &SessionMetrics) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "row",
        "task_index",
        "zone",
        "completion_s",
        "duration_s",
        "movement_volume_m",
        "mean_speed_mps",
        "peak_speed_mps",
        "endorsed_touches",
        "wander",
        "helpful",
        "challenging",
        "tracking_loss_s",
    ];
    w.write_record(header).expect("in-memory csv");
    for t in &m.task_times {
        let secs = t.seconds.map(|s| format!("{s:.3}")).unwrap_or_default();
        let mut row = vec![
            "task".to_owned(),
            t.index.to_string(),
            t.zone.label().to_owned(),
            secs,
        ];
        row.resize(header.len(), String::new());
        w.write_record(&row).expect("in-memory csv");
    }
    let o = &m.occupancy;
    w.write_record([
        "summary".to_owned(),
        String::new(),
        String::new(),
        String::new(),
        format!("{:.3}", m.duration),
        format!("{:.6}", m.movement_volume),
        format!("{:.6}", m.mean_speed),
        format!("{:.6}", m.peak_speed),
        m.endorsed_touches.to_string(),
        format!("{:.6}", o.wander),
        format!("{:.6}", o.helpful),
        format!("{:.6}", o.challenging),
        format!("{:.3}", m.tracking_loss_duration),
    ])
    .expect("in-memory csv");
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}
