use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

use mrr::difficulty::DifficultyPatch;
use mrr::game::TaskStatus;
use mrr::protocol::{
    decode_client, decode_server, encode, ClientKind, ClientMessage, ControlAction, ErrorCode, ServerMessage,
    StateUpdate, TaskView,
};
use mrr::{AgentMode, EventKind, GameConfig, GameEvent, RawSample, Vec3, Zone};

pub fn num() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e3..1e3f64,
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
    ]
}

pub fn vec3() -> impl Strategy<Value = Vec3> {
    (num(), num(), num()).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

pub fn zone() -> impl Strategy<Value = Zone> {
    prop::sample::select(Zone::PROTOCOL.to_vec())
}

pub fn mode() -> impl Strategy<Value = AgentMode> {
    prop::sample::select(AgentMode::ALL.to_vec())
}

pub fn sample() -> impl Strategy<Value = RawSample> {
    prop_oneof![
        (num(), 0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(t, u, v)| RawSample::new(t, u, v)),
        num().prop_map(RawSample::lost),
    ]
}

pub fn patch() -> impl Strategy<Value = DifficultyPatch> {
    (
        prop::option::of(num()),
        prop::option::of(num()),
        prop::option::of(num()),
        prop::option::of(num()),
        prop::option::of(num()),
    )
        .prop_map(|(v_min, v_max, t_low, t_high, t_return)| DifficultyPatch {
            v_min,
            v_max,
            t_low,
            t_high,
            t_return,
        })
}

pub fn client_message() -> impl Strategy<Value = ClientMessage> {
    prop_oneof![
        (
            prop::sample::select(vec![ClientKind::Patient, ClientKind::Therapist, ClientKind::Simulator]),
            "\\PC{0,12}",
        )
            .prop_map(|(client_kind, protocol_version)| ClientMessage::Hello {
                client_kind,
                protocol_version,
            }),
        sample().prop_map(|sample| ClientMessage::InputSample { sample }),
        prop::sample::select(vec![
            ControlAction::Start,
            ControlAction::Pause,
            ControlAction::Resume,
            ControlAction::End,
        ])
        .prop_map(|action| ClientMessage::Control { action }),
        patch().prop_map(|patch| ClientMessage::TherapistOverride { patch }),
    ]
}

pub fn event_kind() -> impl Strategy<Value = EventKind> {
    prop_oneof![
        "\\PC{0,16}".prop_map(|session_id| EventKind::SessionStarted { session_id }),
        "\\PC{0,16}".prop_map(|reason| EventKind::SessionEnded { reason }),
        zone().prop_map(|zone| EventKind::TouchStarted { zone }),
        num().prop_map(|fraction| EventKind::TouchBroken { fraction }),
        any::<u64>().prop_map(|count| EventKind::TouchEndorsed { count }),
        (0..4usize, zone()).prop_map(|(index, zone)| EventKind::TaskActivated { index, zone }),
        (0..4usize, zone(), num()).prop_map(|(index, zone, duration)| EventKind::TaskCompleted {
            index,
            zone,
            duration
        }),
        (mode(), mode(), num()).prop_map(|(from, to, trigger_speed)| EventKind::AgentTransition {
            from,
            to,
            trigger_speed
        }),
        prop::option::of(num()).prop_map(|last_seen| EventKind::TrackingLost { last_seen }),
        Just(EventKind::TrackingRecovered {}),
    ]
}

pub fn event() -> impl Strategy<Value = GameEvent> {
    (any::<u64>(), num(), event_kind()).prop_map(|(tick, t, kind)| GameEvent { tick, t, kind })
}

fn task_view() -> impl Strategy<Value = TaskView> {
    (
        zone(),
        prop::sample::select(vec![TaskStatus::Pending, TaskStatus::Active, TaskStatus::Completed]),
    )
        .prop_map(|(zone, status)| TaskView { zone, status })
}

pub fn server_message() -> impl Strategy<Value = ServerMessage> {
    let update = (
        any::<u64>(),
        num(),
        (vec3(), vec3(), vec3()),
        mode(),
        num(),
        prop::collection::vec(task_view(), 0..5),
    )
        .prop_map(|(tick, t, (fish_pos, fish_vel, hand_pos), agent_mode, progress, tasks)| {
            ServerMessage::StateUpdate(StateUpdate {
                tick,
                t,
                fish_pos,
                fish_vel,
                hand_pos,
                agent_mode,
                progress,
                tasks,
            })
        });
    let welcome = ("[a-z0-9-]{1,16}", num(), num()).prop_map(|(session_id, r, f)| {
        let mut cfg = GameConfig::default();
        cfg.touch_radius = r;
        cfg.fill_duration = f;
        ServerMessage::Welcome {
            session_id,
            config: Box::new(cfg),
        }
    });
    let code = prop::sample::select(vec![
        ErrorCode::MalformedMessage,
        ErrorCode::UnsupportedVersion,
        ErrorCode::UnauthorizedMessageKind,
        ErrorCode::SlowConsumer,
        ErrorCode::InvalidOverride,
        ErrorCode::SessionClosed,
    ]);
    prop_oneof![
        update,
        welcome,
        (any::<u64>(), event()).prop_map(|(seq, event)| ServerMessage::EventNotice { seq, event }),
        (code, "\\PC{0,24}").prop_map(|(code, message)| ServerMessage::Error { code, message }),
    ]
}

#[derive(Debug, Clone)]
pub enum AnyMessage {
    Client(ClientMessage),
    Server(ServerMessage),
}

pub fn any_message() -> impl Strategy<Value = AnyMessage> {
    prop_oneof![
        client_message().prop_map(AnyMessage::Client),
        server_message().prop_map(AnyMessage::Server),
    ]
}

pub fn round_trips(m: &AnyMessage) -> bool {
    match m {
        AnyMessage::Client(c) => decode_client(&encode(c)).is_ok_and(|d| d == *c),
        AnyMessage::Server(s) => decode_server(&encode(s)).is_ok_and(|d| d == *s),
    }
}

/// Draws `n` messages from a fixed-seed runner.
pub fn sample_messages(n: usize) -> Vec<AnyMessage> {
    let mut runner = TestRunner::deterministic();
    let strat = any_message();
    (0..n).map(|_| strat.new_tree(&mut runner).unwrap().current()).collect()
}
