//! Scores steps against a remote reward model over HTTP.
//!
//! For a self-contained run, the example starts a tiny in-process mock that
//! speaks the wire protocol: `POST /score` with `{"prompt", "steps"}`,
//! answered with `{"logits": [[safe, vulnerable], ...]}`, one pair per step.
//! Point `RemoteScorer` at a real model server to use it for real.
//!
//! Run with: `cargo run --example remote_scoring`

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::time::Duration;

use stepsec::corpus::Trajectory;
use stepsec::scorer::{self, RemoteScorer, ScoreRequest};

fn spawn_mock() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind mock server");
    let endpoint = format!("http://{}/score", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            let mut stream = stream;
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let mut content_length = 0usize;
            loop {
                let mut header = String::new();
                reader.read_line(&mut header).unwrap();
                let header = header.trim().to_ascii_lowercase();
                if header.is_empty() {
                    break;
                }
                if let Some(v) = header.strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0u8; content_length];
            reader.read_exact(&mut body).unwrap();
            let request: ScoreRequest = serde_json::from_slice(&body).unwrap();
            // The mock's whole security policy: strcpy is bad.
            let logits: Vec<[f64; 2]> = request
                .steps
                .iter()
                .map(|s| {
                    if s.contains("strcpy") {
                        [-4.0, 4.0]
                    } else {
                        [4.0, -4.0]
                    }
                })
                .collect();
            let payload = serde_json::to_vec(&serde_json::json!({ "logits": logits })).unwrap();
            let header = format!(
                "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\n\
                 content-length: {}\r\n\r\n",
                payload.len()
            );
            stream.write_all(header.as_bytes()).unwrap();
            stream.write_all(&payload).unwrap();
        }
    });
    endpoint
}

fn main() {
    let endpoint = spawn_mock();
    println!("mock reward model at {endpoint}\n");

    let remote = RemoteScorer::new(endpoint, Duration::from_secs(5), 4, 1).expect("client builds");
    let trajectory = Trajectory::from_texts(["char buf[64];", "strcpy(buf, input);", "return 0;"]);
    let scored =
        scorer::score_trajectory(&trajectory, &remote, "copy the input").expect("mock reachable");
    for (step, reward) in trajectory.steps.iter().zip(&scored.rewards) {
        println!("{:+.4}  {}", reward.value(), step.text);
    }
}
