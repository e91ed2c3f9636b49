//! Drive a session by hand through the wire format: every message is
//! encoded to JSON and decoded again, as a networked client would see it.

use mrr::protocol::{decode_client, decode_server, encode, ClientKind, ClientMessage, ConnectionGate, ControlAction};
use mrr::session::Session;
use mrr::{GameConfig, RawSample};

fn main() {
    let mut session = Session::in_memory("demo", "walkthrough", 1, GameConfig::default()).unwrap();
    let mut gate = ConnectionGate::default();
    let mut send = |m: ClientMessage, session: &mut Session| {
        let bytes = encode(&m);
        println!(">> {}", String::from_utf8_lossy(&bytes));
        let m = decode_client(&bytes).unwrap();
        match gate.admit(&m) {
            Ok(()) => session.handle(m).unwrap(),
            Err(e) => vec![e.to_message()],
        }
    };
    let show = |msgs: Vec<mrr::protocol::ServerMessage>| {
        for m in msgs {
            let text = String::from_utf8(encode(&m)).unwrap();
            let back = decode_server(text.as_bytes()).unwrap();
            assert_eq!(back, m);
            let short: String = text.chars().take(140).collect();
            println!("<< {short}{}", if text.len() > 140 { " ..." } else { "" });
        }
    };

    show(send(ClientMessage::hello(ClientKind::Patient), &mut session));
    show(send(ClientMessage::TherapistOverride { patch: Default::default() }, &mut session));
    show(send(ClientMessage::Control { action: ControlAction::Start }, &mut session));
    for k in 1..=6 {
        let t = k as f64 / 60.0;
        send(ClientMessage::InputSample { sample: RawSample::new(t, 0.5, 0.5) }, &mut session);
        show(session.tick().unwrap());
    }
}
