//! Client for external scorers speaking line-delimited JSON over a child
//! process's stdin/stdout or a TCP socket.
//!
//! Both sides first send `{"proto": 1}`. Requests are
//! `{"id": n, "dir": "fwd"|"bwd", "text": "..."}` and responses
//! `{"id": n, "logp": x}` with x in nats; responses may arrive in any order.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{Shutdown, TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Direction, ScoringError, SequenceScorer};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
const PROTOCOL_VERSION: u64 = 1;

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    dir: &'static str,
    text: &'a str,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Response {
    id: u64,
    logp: f64,
}

#[derive(Serialize, Deserialize)]
struct Handshake {
    proto: u64,
}

struct Connection {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    /// Set once the stream can no longer be trusted.
    broken: Option<String>,
    child: Option<Child>,
    socket: Option<TcpStream>,
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(child) = self.child.as_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
        if let Some(sock) = &self.socket {
            let _ = sock.shutdown(Shutdown::Both);
        }
    }
}

/// One connection to an external scorer. Requests on a connection are
/// processed serially; share it across threads through an `Arc`.
pub struct ExternalScorer {
    conn: Mutex<Connection>,
    timeout: Duration,
}

fn down(msg: impl Into<String>) -> ScoringError {
    ScoringError::ExternalScorerDown(msg.into())
}

fn spawn_reader<R: Read + Send + 'static>(source: R) -> Receiver<std::io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(source).lines() {
            let stop = line.is_err();
            if tx.send(line).is_err() || stop {
                break;
            }
        }
    });
    rx
}

impl ExternalScorer {
    /// Starts `program` and talks to it over its standard streams.
    pub fn spawn(program: &str, args: &[String], timeout: Duration) -> Result<Self, ScoringError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| down(format!("cannot start {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let conn = Connection {
            writer: Box::new(stdin),
            lines: spawn_reader(stdout),
            next_id: 0,
            broken: None,
            child: Some(child),
            socket: None,
        };
        Self::handshake(conn, timeout)
    }

    pub fn connect(addr: impl ToSocketAddrs, timeout: Duration) -> Result<Self, ScoringError> {
        let addrs: Vec<_> = addr
            .to_socket_addrs()
            .map_err(|e| down(format!("cannot resolve address: {e}")))?
            .collect();
        let mut last = None;
        for a in addrs {
            match TcpStream::connect_timeout(&a, timeout) {
                Ok(stream) => {
                    let _ = stream.set_nodelay(true);
                    let read = stream.try_clone().map_err(|e| down(e.to_string()))?;
                    let write = stream.try_clone().map_err(|e| down(e.to_string()))?;
                    let conn = Connection {
                        writer: Box::new(write),
                        lines: spawn_reader(read),
                        next_id: 0,
                        broken: None,
                        child: None,
                        socket: Some(stream),
                    };
                    return Self::handshake(conn, timeout);
                }
                Err(e) => last = Some(e),
            }
        }
        Err(down(match last {
            Some(e) => format!("cannot connect: {e}"),
            None => "address resolved to nothing".into(),
        }))
    }

    fn handshake(mut conn: Connection, timeout: Duration) -> Result<Self, ScoringError> {
        let hello = serde_json::to_string(&Handshake {
            proto: PROTOCOL_VERSION,
        })
        .expect("serializable");
        writeln!(conn.writer, "{hello}")
            .and_then(|_| conn.writer.flush())
            .map_err(|e| down(format!("handshake write failed: {e}")))?;
        let line = recv_line(&conn.lines, timeout)?;
        match serde_json::from_str::<Handshake>(&line) {
            Ok(Handshake {
                proto: PROTOCOL_VERSION,
            }) => Ok(ExternalScorer {
                conn: Mutex::new(conn),
                timeout,
            }),
            Ok(h) => Err(ScoringError::ProtocolError(format!(
                "unsupported protocol version {}",
                h.proto
            ))),
            Err(_) => Err(ScoringError::ProtocolError(format!("bad handshake line {line:?}"))),
        }
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// One log-probability per text, in request order.
    pub fn score(&self, direction: Direction, texts: &[String]) -> Result<Vec<f64>, ScoringError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let mut conn = self.conn.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(reason) = &conn.broken {
            return Err(down(reason.clone()));
        }
        let result = Self::exchange(&mut conn, direction, texts, self.timeout);
        if let Err(e) = &result {
            conn.broken = Some(e.to_string());
        }
        result
    }

    fn exchange(
        conn: &mut Connection,
        direction: Direction,
        texts: &[String],
        timeout: Duration,
    ) -> Result<Vec<f64>, ScoringError> {
        let dir = match direction {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        };
        let mut pending = HashMap::with_capacity(texts.len());
        let mut batch = String::new();
        for (pos, text) in texts.iter().enumerate() {
            let id = conn.next_id;
            conn.next_id += 1;
            pending.insert(id, pos);
            batch.push_str(&serde_json::to_string(&Request { id, dir, text }).expect("serializable"));
            batch.push('\n');
        }
        conn.writer
            .write_all(batch.as_bytes())
            .and_then(|_| conn.writer.flush())
            .map_err(|e| down(format!("write failed: {e}")))?;

        let mut out = vec![f64::NAN; texts.len()];
        while !pending.is_empty() {
            let line = recv_line(&conn.lines, timeout)?;
            let resp: Response = serde_json::from_str(&line)
                .map_err(|_| ScoringError::ProtocolError(format!("malformed response {line:?}")))?;
            let pos = pending
                .remove(&resp.id)
                .ok_or_else(|| ScoringError::ProtocolError(format!("unexpected response id {}", resp.id)))?;
            if !resp.logp.is_finite() {
                return Err(ScoringError::ProtocolError(format!("non-finite logp for id {}", resp.id)));
            }
            out[pos] = resp.logp;
        }
        Ok(out)
    }
}

fn recv_line(lines: &Receiver<std::io::Result<String>>, timeout: Duration) -> Result<String, ScoringError> {
    match lines.recv_timeout(timeout) {
        Ok(Ok(line)) => Ok(line),
        Ok(Err(e)) => Err(down(format!("read failed: {e}"))),
        Err(RecvTimeoutError::Timeout) => Err(down(format!("no response within {timeout:?}"))),
        Err(RecvTimeoutError::Disconnected) => Err(down("connection closed")),
    }
}

/// One direction of an external scorer, usable as a [`SequenceScorer`].
pub struct ExternalDirection {
    client: Arc<ExternalScorer>,
    direction: Direction,
}

impl ExternalDirection {
    pub fn new(client: Arc<ExternalScorer>, direction: Direction) -> Self {
        ExternalDirection { client, direction }
    }
}

impl SequenceScorer for ExternalDirection {
    fn direction(&self) -> Direction {
        self.direction
    }

    fn logprob_batch(&self, texts: &[String]) -> Result<Vec<f64>, ScoringError> {
        self.client.score(self.direction, texts)
    }
}
