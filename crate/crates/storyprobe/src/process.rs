//! External metric adapters: newline-delimited JSON over a child's stdio.
//!
//! The driver sends `{"hello":"storyprobe","version":1}` and expects
//! `{"ok":true,"metric_id":..}` (or `{"ok":false,"error":..}`). Each request
//! is then one line `{"request_id","input","story","references"}` answered
//! by `{"request_id","score"[,"diagnostics"]}` or `{"request_id","error"}`,
//! in any order.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use storyprobe_core::adapter::{
    ExternalSpec, ScoreOutcome, ScoreRequest, ScoreResponse, Scorer, PROTOCOL_VERSION,
};
use storyprobe_core::Error as CoreError;

use crate::error::{Error, Result};

#[derive(Serialize)]
struct Hello<'a> {
    hello: &'a str,
    version: u32,
}

#[derive(Deserialize)]
struct HelloReply {
    ok: bool,
    #[serde(default)]
    metric_id: Option<String>,
    #[serde(default)]
    error: Option<String>,
}

#[derive(Deserialize)]
struct Reply {
    request_id: String,
    #[serde(default)]
    score: Option<f64>,
    #[serde(default)]
    diagnostics: Option<String>,
    #[serde(default)]
    error: Option<String>,
}

enum Incoming {
    Line(String),
    Closed,
}

pub struct ProcessScorer {
    metric_id: String,
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    rx: Receiver<Incoming>,
    timeout: Duration,
    max_in_flight: usize,
    dead: bool,
}

fn crashed(unserved: Vec<String>) -> CoreError {
    CoreError::AdapterCrashed { unserved }
}

impl ProcessScorer {
    /// Starts the adapter and completes the handshake within the spec's
    /// timeout.
    pub fn spawn(spec: &ExternalSpec) -> Result<ProcessScorer> {
        let (program, args) = spec
            .command
            .split_first()
            .ok_or_else(|| Error::Data("empty adapter command".to_string()))?;
        let mut child = Command::new(program)
            .args(args)
            .envs(spec.env.iter().map(|(k, v)| (k, v)))
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Data(format!("cannot start adapter `{program}`: {e}")))?;
        let stdout = child.stdout.take().expect("piped stdout");
        let stdin = child.stdin.take().expect("piped stdin");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                match line {
                    Ok(l) => {
                        if tx.send(Incoming::Line(l)).is_err() {
                            return;
                        }
                    }
                    Err(_) => break,
                }
            }
            let _ = tx.send(Incoming::Closed);
        });
        let mut scorer = ProcessScorer {
            metric_id: String::new(),
            child,
            stdin: Some(BufWriter::new(stdin)),
            rx,
            timeout: Duration::from_millis(spec.timeout_ms.max(1)),
            max_in_flight: spec.max_in_flight.max(1),
            dead: false,
        };
        scorer.handshake()?;
        Ok(scorer)
    }

    fn handshake(&mut self) -> Result<()> {
        let hello = serde_json::to_string(&Hello {
            hello: "storyprobe",
            version: PROTOCOL_VERSION,
        })
        .expect("hello");
        self.send_line(&hello)
            .map_err(|_| adapter("adapter closed its input before the handshake"))?;
        let deadline = Instant::now() + self.timeout;
        loop {
            let wait = deadline.saturating_duration_since(Instant::now());
            match self.rx.recv_timeout(wait) {
                Ok(Incoming::Line(line)) if line.trim().is_empty() => continue,
                Ok(Incoming::Line(line)) => {
                    let reply: HelloReply = serde_json::from_str(&line).map_err(|e| {
                        adapter(&format!("malformed handshake reply `{line}`: {e}"))
                    })?;
                    if !reply.ok {
                        return Err(adapter(&format!(
                            "adapter refused the handshake: {}",
                            reply.error.unwrap_or_else(|| "no reason given".to_string())
                        )));
                    }
                    self.metric_id = reply
                        .metric_id
                        .ok_or_else(|| adapter("handshake reply lacks `metric_id`"))?;
                    return Ok(());
                }
                Ok(Incoming::Closed) | Err(RecvTimeoutError::Disconnected) => {
                    self.dead = true;
                    return Err(adapter("adapter exited during the handshake"));
                }
                Err(RecvTimeoutError::Timeout) => return Err(adapter("handshake timed out")),
            }
        }
    }

    fn send_line(&mut self, line: &str) -> std::io::Result<()> {
        let w = self.stdin.as_mut().ok_or(std::io::ErrorKind::BrokenPipe)?;
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
        w.flush()
    }

    /// Closes the adapter's input and waits briefly for it to exit before
    /// killing it.
    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        self.stdin = None;
        let deadline = Instant::now() + Duration::from_millis(500);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(5));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn unresolved(results: &[Option<ScoreOutcome>], requests: &[ScoreRequest]) -> Vec<String> {
    results
        .iter()
        .zip(requests)
        .filter(|(r, _)| r.is_none())
        .map(|(_, q)| q.request_id.clone())
        .collect()
}

fn adapter(msg: &str) -> Error {
    Error::Core(CoreError::Adapter(msg.to_string()))
}

impl Drop for ProcessScorer {
    fn drop(&mut self) {
        self.stop();
    }
}

impl Scorer for ProcessScorer {
    fn metric_id(&self) -> &str {
        &self.metric_id
    }

    fn score_batch(
        &mut self,
        requests: &[ScoreRequest],
    ) -> storyprobe_core::Result<Vec<ScoreOutcome>> {
        let mut slot: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, r) in requests.iter().enumerate() {
            if slot.insert(&r.request_id, i).is_some() {
                return Err(CoreError::Adapter(format!(
                    "duplicate request id `{}` in batch",
                    r.request_id
                )));
            }
        }
        if self.dead {
            return Err(crashed(
                requests.iter().map(|r| r.request_id.clone()).collect(),
            ));
        }
        let mut results: Vec<Option<ScoreOutcome>> = vec![None; requests.len()];
        let mut in_flight: BTreeMap<usize, Instant> = BTreeMap::new();
        let mut expired: BTreeSet<usize> = BTreeSet::new();
        let mut next = 0;
        let mut broken = false;
        loop {
            while !broken && next < requests.len() && in_flight.len() < self.max_in_flight {
                let line = serde_json::to_string(&requests[next]).expect("request serializes");
                if self.send_line(&line).is_err() {
                    // The pipe broke; whatever is still readable is drained below.
                    broken = true;
                    break;
                }
                in_flight.insert(next, Instant::now() + self.timeout);
                next += 1;
            }
            if in_flight.is_empty() && next == requests.len() {
                break;
            }
            let earliest = in_flight
                .values()
                .min()
                .copied()
                .unwrap_or_else(|| Instant::now() + self.timeout);
            match self
                .rx
                .recv_timeout(earliest.saturating_duration_since(Instant::now()))
            {
                Ok(Incoming::Line(line)) => {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let reply: Reply = match serde_json::from_str(&line) {
                        Ok(r) => r,
                        Err(e) => {
                            log::warn!(
                                "{}: ignoring malformed response `{line}`: {e}",
                                self.metric_id
                            );
                            continue;
                        }
                    };
                    let Some(&i) = slot.get(reply.request_id.as_str()) else {
                        log::debug!(
                            "{}: ignoring response for unknown id `{}`",
                            self.metric_id,
                            reply.request_id
                        );
                        continue;
                    };
                    if in_flight.remove(&i).is_none() {
                        if expired.contains(&i) {
                            log::debug!(
                                "{}: late response for `{}` ignored",
                                self.metric_id,
                                reply.request_id
                            );
                        }
                        continue;
                    }
                    let request_id = reply.request_id;
                    results[i] = Some(match (reply.score, reply.error) {
                        (_, Some(reason)) => ScoreOutcome::Failed { request_id, reason },
                        (Some(score), None) => ScoreOutcome::Scored(ScoreResponse {
                            request_id,
                            score,
                            diagnostics: reply.diagnostics,
                        }),
                        (None, None) => ScoreOutcome::Failed {
                            request_id,
                            reason: "response has neither score nor error".into(),
                        },
                    });
                }
                Err(RecvTimeoutError::Timeout) if in_flight.is_empty() => {
                    // Input closed but the process lingers without answering.
                    self.dead = true;
                    return Err(crashed(unresolved(&results, requests)));
                }
                Err(RecvTimeoutError::Timeout) => {
                    let now = Instant::now();
                    let due: Vec<usize> = in_flight
                        .iter()
                        .filter(|(_, d)| **d <= now)
                        .map(|(i, _)| *i)
                        .collect();
                    for i in due {
                        in_flight.remove(&i);
                        expired.insert(i);
                        log::warn!(
                            "{}: request `{}` timed out",
                            self.metric_id,
                            requests[i].request_id
                        );
                        results[i] = Some(ScoreOutcome::Failed {
                            request_id: requests[i].request_id.clone(),
                            reason: "timeout".to_string(),
                        });
                    }
                }
                Ok(Incoming::Closed) | Err(RecvTimeoutError::Disconnected) => {
                    self.dead = true;
                    return Err(crashed(unresolved(&results, requests)));
                }
            }
        }
        Ok(results
            .into_iter()
            .map(|r| r.expect("every slot resolved"))
            .collect())
    }
}
