//! Remote scorer tests against a minimal in-process HTTP server.
//!
//! The mock echoes the wire protocol: `POST /score` with a JSON body of
//! prompt and steps, answered with one `[safe, vulnerable]` logit pair per
//! step. Steps containing `"bad"` get vulnerable-leaning logits.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::time::Duration;

use stepsec::corpus::Trajectory;
use stepsec::scorer::{score_batch, RemoteScorer, ScoreRequest, Scorer, ScorerError};

fn handle(mut stream: TcpStream, fail_first: &std::sync::atomic::AtomicBool) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut request_line = String::new();
    reader.read_line(&mut request_line).unwrap();
    let mut content_length = 0usize;
    loop {
        let mut header = String::new();
        reader.read_line(&mut header).unwrap();
        let header = header.trim();
        if header.is_empty() {
            break;
        }
        if let Some(value) = header
            .to_ascii_lowercase()
            .strip_prefix("content-length:")
            .map(str::trim)
            .map(String::from)
        {
            content_length = value.parse().unwrap();
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body).unwrap();

    if fail_first.swap(false, std::sync::atomic::Ordering::SeqCst) {
        stream
            .write_all(b"HTTP/1.1 500 Internal Server Error\r\ncontent-length: 0\r\n\r\n")
            .unwrap();
        return;
    }
    if !request_line.starts_with("POST /score") {
        stream
            .write_all(b"HTTP/1.1 404 Not Found\r\ncontent-length: 0\r\n\r\n")
            .unwrap();
        return;
    }
    let request: ScoreRequest = serde_json::from_slice(&body).unwrap();
    let logits: Vec<[f64; 2]> = request
        .steps
        .iter()
        .map(|step| {
            if step.contains("bad") {
                [-3.0, 3.0]
            } else {
                [3.0, -3.0]
            }
        })
        .collect();
    let payload = serde_json::to_vec(&serde_json::json!({ "logits": logits })).unwrap();
    let header = format!(
        "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n",
        payload.len()
    );
    stream.write_all(header.as_bytes()).unwrap();
    stream.write_all(&payload).unwrap();
}

/// Starts the mock server and returns its endpoint URL. The server thread
/// exits when the listener is dropped at process end.
fn spawn_server(fail_first: bool) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}/score", listener.local_addr().unwrap());
    std::thread::spawn(move || {
        let flag = std::sync::atomic::AtomicBool::new(fail_first);
        for stream in listener.incoming() {
            match stream {
                Ok(stream) => handle(stream, &flag),
                Err(_) => break,
            }
        }
    });
    endpoint
}

fn scorer_for(endpoint: &str, retries: u32) -> RemoteScorer {
    RemoteScorer::new(endpoint.to_string(), Duration::from_secs(5), 2, retries).unwrap()
}

#[test]
fn remote_scorer_maps_logits_per_step() {
    let endpoint = spawn_server(false);
    let scorer = scorer_for(&endpoint, 0);
    let trajectory = Trajectory::from_texts(["good_step();", "bad_step();"]);
    let logits = scorer.score_steps("p", &trajectory).unwrap();
    assert_eq!(logits.len(), 2);
    assert!(stepsec::scorer::margin(logits[0]).unwrap().value() > 0.9);
    assert!(stepsec::scorer::margin(logits[1]).unwrap().value() < -0.9);
}

#[test]
fn remote_scorer_batch_preserves_input_order() {
    let endpoint = spawn_server(false);
    let scorer = scorer_for(&endpoint, 0);
    let trajectories: Vec<Trajectory> = (0..8)
        .map(|i| {
            Trajectory::from_texts([if i % 2 == 0 {
                format!("good_{i}();")
            } else {
                format!("bad_{i}();")
            }])
        })
        .collect();
    let items: Vec<(&str, &Trajectory)> = trajectories.iter().map(|t| ("p", t)).collect();
    let scored = score_batch(&items, &scorer).unwrap();
    assert_eq!(scored.len(), 8);
    for (i, s) in scored.iter().enumerate() {
        let reward = s.rewards[0].value();
        if i % 2 == 0 {
            assert!(reward > 0.9, "slot {i}: {reward}");
        } else {
            assert!(reward < -0.9, "slot {i}: {reward}");
        }
    }
}

#[test]
fn retry_recovers_from_transient_failure() {
    let endpoint = spawn_server(true);
    let trajectory = Trajectory::from_texts(["good();"]);
    // Without retries the first 500 is fatal.
    let strict = scorer_for(&endpoint, 0);
    assert!(matches!(
        strict.score_steps("p", &trajectory),
        Err(ScorerError::Transport(_))
    ));
    // One retry rides over it.
    let endpoint = spawn_server(true);
    let retrying = scorer_for(&endpoint, 1);
    assert!(retrying.score_steps("p", &trajectory).is_ok());
}

#[test]
fn cli_score_via_remote_endpoint() {
    let endpoint = spawn_server(false);
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.jsonl");
    std::fs::write(
        &input,
        "{\"prompt\": \"p\", \"completions\": [\"ok();\", \"bad();\"], \"labels\": [1, 0]}\n",
    )
    .unwrap();
    let output = dir.path().join("scored.jsonl");
    let run = std::process::Command::new(env!("CARGO_BIN_EXE_stepsec"))
        .args([
            "score",
            "--input",
            input.to_str().unwrap(),
            "--output",
            output.to_str().unwrap(),
            "--scorer",
            &format!("remote:{endpoint}"),
        ])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{run:?}");
    let line: serde_json::Value = serde_json::from_str(
        std::fs::read_to_string(&output)
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    let rewards = line["rewards"].as_array().unwrap();
    assert!(rewards[0].as_f64().unwrap() > 0.9);
    assert!(rewards[1].as_f64().unwrap() < -0.9);
}
