//! Start the WebSocket service on a random port, connect one simulated
//! client, play a few seconds and shut down.
//!
//! Connect your own client to `ws://ADDR/session/{id}` and speak `mrr/1`.

use std::time::Duration;

use futures::{SinkExt, StreamExt};
use tokio_tungstenite::tungstenite::Message;

use mrr::protocol::{decode_server, encode, ClientKind, ClientMessage, ControlAction, ServerMessage};
use mrr::server::{Server, ServerConfig};
use mrr::{GameConfig, RawSample};

#[tokio::main]
async fn main() {
    let dir = std::env::temp_dir().join("mrr-serve-example");
    let _ = std::fs::remove_dir_all(&dir);
    let server = Server::bind("127.0.0.1:0", ServerConfig::new(GameConfig::default(), dir.clone())).await.unwrap();
    let addr = server.local_addr().unwrap();
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let running = tokio::spawn(server.run(async {
        let _ = stopped.await;
    }));
    println!("serving on ws://{addr}/session/{{id}}");

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/session/demo")).await.unwrap();
    let send = |m: ClientMessage| Message::text(String::from_utf8(encode(&m)).unwrap());
    ws.send(send(ClientMessage::hello(ClientKind::Simulator))).await.unwrap();
    ws.send(send(ClientMessage::Control { action: ControlAction::Start })).await.unwrap();

    let t0 = tokio::time::Instant::now();
    let mut updates = 0;
    while t0.elapsed() < Duration::from_secs(2) {
        let t = t0.elapsed().as_secs_f64();
        ws.send(send(ClientMessage::InputSample { sample: RawSample::new(t, 0.5, 0.5) })).await.unwrap();
        if let Ok(Some(Ok(Message::Text(text)))) = tokio::time::timeout(Duration::from_millis(20), ws.next()).await {
            match decode_server(text.as_bytes()).unwrap() {
                ServerMessage::StateUpdate(_) => updates += 1,
                ServerMessage::Welcome { session_id, .. } => println!("joined {session_id}"),
                ServerMessage::EventNotice { seq, event } => println!("#{seq} {} at {:.2} s", event.name(), event.t),
                ServerMessage::Error { code, message } => println!("{code:?}: {message}"),
            }
        }
    }
    println!("{updates} state updates received");

    stop.send(()).unwrap();
    for record in running.await.unwrap().unwrap() {
        println!("{} closed after {} ticks", record.header.session_id, record.tick_count());
    }
    println!("session files in {}", dir.display());
}
