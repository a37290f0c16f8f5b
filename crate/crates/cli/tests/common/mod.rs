//! Shared helpers: running the CLI in-process and a tiny embedding service.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use serde_json::{json, Value};

pub struct Output {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

pub fn cli(args: &[&str]) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("reward-zero").chain(args.iter().copied());
    let code = reward_zero_cli::run(argv, &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn core_data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name)
}

pub const STUB_TAG: &str = "stub-encoder-4";

/// Deterministic 4-dimensional embeddings derived from the input bytes.
fn embed(bytes: &[u8]) -> Vec<f64> {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut v = Vec::with_capacity(4);
    for i in 0..4u8 {
        for &b in bytes.iter().chain([i].iter()) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        v.push((h >> 11) as f64 / (1u64 << 53) as f64 - 0.5);
    }
    v
}

/// Embedding service stand-in that counts embed calls. `healthy = false`
/// makes `/healthz` answer 503.
pub struct StubService {
    pub endpoint: String,
    embed_calls: Arc<AtomicUsize>,
}

impl StubService {
    pub fn start(healthy: bool) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let endpoint = format!("http://{}", listener.local_addr().unwrap());
        let calls = Arc::new(AtomicUsize::new(0));
        let counter = calls.clone();
        thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let counter = counter.clone();
                thread::spawn(move || handle(stream, healthy, &counter));
            }
        });
        Self {
            endpoint,
            embed_calls: calls,
        }
    }

    pub fn embed_calls(&self) -> usize {
        self.embed_calls.load(Ordering::SeqCst)
    }
}

fn handle(stream: TcpStream, healthy: bool, calls: &AtomicUsize) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    if reader.read_line(&mut line).unwrap_or(0) == 0 {
        return;
    }
    let path = line.split_whitespace().nth(1).unwrap_or_default().to_string();
    let mut len = 0;
    loop {
        let mut h = String::new();
        reader.read_line(&mut h).unwrap();
        if h.trim_end().is_empty() {
            break;
        }
        if let Some((k, v)) = h.split_once(':') {
            if k.trim().eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap();
            }
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();
    let (status, payload) = match path.as_str() {
        "/healthz" if healthy => (200, json!({"status": "ok", "model": STUB_TAG, "dim": 4})),
        "/healthz" => (503, json!({"error": "model not loaded"})),
        "/v1/embed/text" | "/v1/embed/image" => {
            calls.fetch_add(1, Ordering::SeqCst);
            let req: Value = serde_json::from_slice(&body).unwrap();
            let field = if path.ends_with("text") { "texts" } else { "images_b64" };
            let items = req[field].as_array().unwrap();
            let embeddings: Vec<Vec<f64>> = items.iter().map(|s| embed(s.as_str().unwrap().as_bytes())).collect();
            (200, json!({"dim": 4, "embeddings": embeddings}))
        }
        _ => (404, json!({"error": "not found"})),
    };
    let payload = payload.to_string();
    let mut out = stream;
    let _ = write!(
        out,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    );
}
