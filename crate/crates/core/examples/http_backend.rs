//! Generation through the HTTP backend against a tiny local server that
//! echoes the findings back, the way a hosted model endpoint would be used.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use divsample::synthgen::{GenerationBackend, HttpBackend};

/// Answers `requests` POSTs with `{"text": ...}` built from the prompt's bullets.
fn serve(listener: TcpListener, requests: usize) {
    for stream in listener.incoming().take(requests) {
        let Ok(mut stream) = stream else { continue };
        let mut reader = BufReader::new(stream.try_clone().expect("clone stream"));
        let mut length = 0;
        loop {
            let mut line = String::new();
            if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                break;
            }
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                length = v.trim().parse().unwrap_or(0);
            }
        }
        let mut body = vec![0; length];
        let _ = reader.read_exact(&mut body);
        let request: serde_json::Value = serde_json::from_slice(&body).unwrap_or_default();
        let prompt = request["prompt"].as_str().unwrap_or_default();
        let text: Vec<&str> = prompt.lines().filter_map(|l| l.strip_prefix("- ")).collect();
        let reply = serde_json::json!({ "text": text.join(" ") }).to_string();
        let _ = write!(
            stream,
            "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
            reply.len()
        );
    }
}

pub fn run_example() -> divsample::Result<()> {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind local port");
    let addr = listener.local_addr().expect("local address");
    let server = thread::spawn(move || serve(listener, 1));

    let backend = HttpBackend::new(format!("http://{addr}/generate"), Duration::from_secs(10))?;
    let text = backend.generate("Findings:\n- Taxus brevifolia produces paclitaxel.\n", 0.7, 64)?;
    println!("endpoint answered: {text}");
    server.join().expect("server thread");
    Ok(())
}

fn main() -> divsample::Result<()> {
    run_example()
}
