//! Client for comparators running in a separate process.
//!
//! Records are single JSON lines on the child's stdin/stdout. The engine
//! opens with `{"proto":1,"regime":"<name>"}` and expects `{"ok":true}`;
//! after that every request `{"left":..,"right":..,"page":[w,h]}` gets
//! exactly one reply `{"p":<0..1>}`. Anything else is a protocol violation.

use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{LeftOfComparator, PairScore, PairwiseComparator};
use crate::error::{Error, Result};
use crate::model::{BoundingBox, Document};

pub const PROTOCOL_VERSION: u32 = 1;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
/// Environment variable holding the default external comparator command.
pub const COMMAND_ENV: &str = "READORDER_COMPARATOR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Handshake {
    pub proto: u32,
    pub regime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Ack {
    ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireBox {
    pub id: String,
    pub text: String,
    pub bbox: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
}

impl WireBox {
    pub fn new(b: &BoundingBox, image_ref: Option<&str>) -> Self {
        Self {
            id: b.id.clone(),
            text: b.text.clone(),
            bbox: b.bbox(),
            image_ref: image_ref.map(str::to_owned),
        }
    }

    fn to_box(&self) -> BoundingBox {
        BoundingBox::new(self.id.clone(), self.bbox, self.text.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub left: WireBox,
    pub right: WireBox,
    pub page: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireReply {
    pub p: f64,
}

/// Parses one reply line into a score, rejecting anything that is not a
/// lone `p` within `[0, 1]`.
pub fn parse_reply(line: &str) -> Result<PairScore> {
    let reply: WireReply =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Protocol(format!("malformed reply {line:?}: {e}")))?;
    PairScore::new(reply.p).map_err(|_| Error::Protocol(format!("reply p = {} is outside [0, 1]", reply.p)))
}

/// A running external comparator. Requests are serialized; the child is
/// killed on drop.
pub struct ExternalComparator {
    command: String,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<io::Result<String>>,
    timeout: Duration,
    broken: Option<String>,
    calls: usize,
}

impl ExternalComparator {
    /// Spawns a whitespace-separated command line and performs the handshake.
    pub fn spawn(command_line: &str, regime: &str, timeout: Duration) -> Result<Self> {
        let mut parts = command_line.split_whitespace();
        let program = parts.next().ok_or(Error::EmptyInput("external comparator command"))?;
        let mut cmd = Command::new(program);
        cmd.args(parts);
        Self::spawn_command(cmd, command_line, regime, timeout)
    }

    pub fn spawn_command(mut cmd: Command, label: &str, regime: &str, timeout: Duration) -> Result<Self> {
        let mut child = cmd
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| Error::Spawn {
                command: label.to_owned(),
                source,
            })?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut me = Self {
            command: label.to_owned(),
            child,
            stdin,
            lines: rx,
            timeout,
            broken: None,
            calls: 0,
        };
        me.handshake(regime)?;
        Ok(me)
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// Number of scored requests so far.
    pub fn calls(&self) -> usize {
        self.calls
    }

    fn handshake(&mut self, regime: &str) -> Result<()> {
        let hello = Handshake {
            proto: PROTOCOL_VERSION,
            regime: regime.to_owned(),
        };
        let line = self.round_trip(&serde_json::to_string(&hello)?)?;
        match serde_json::from_str::<Ack>(line.trim_end()) {
            Ok(Ack { ok: true }) => Ok(()),
            _ => self.fail(Error::Protocol(format!("bad handshake reply {line:?}"))),
        }
    }

    fn fail<T>(&mut self, err: Error) -> Result<T> {
        self.broken = Some(err.to_string());
        Err(err)
    }

    fn round_trip(&mut self, request: &str) -> Result<String> {
        if let Some(reason) = &self.broken {
            return Err(Error::Protocol(format!("comparator is unusable after an earlier failure: {reason}")));
        }
        let written = match self.stdin.as_mut() {
            Some(stdin) => writeln!(stdin, "{request}").and_then(|_| stdin.flush()),
            None => Err(io::Error::new(io::ErrorKind::BrokenPipe, "stdin closed")),
        };
        if let Err(e) = written {
            return self.fail(Error::Protocol(format!("cannot write request: {e}")));
        }
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => self.fail(Error::Protocol(format!("cannot read reply: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                // a late reply would desynchronize every later request
                let timeout = self.timeout;
                self.fail(Error::Timeout(timeout))
            }
            Err(RecvTimeoutError::Disconnected) => self.fail(Error::Protocol("comparator closed its output".into())),
        }
    }

    pub fn score(&mut self, left: &BoundingBox, right: &BoundingBox, page: (f64, f64), image_ref: Option<&str>) -> Result<PairScore> {
        let request = WireRequest {
            left: WireBox::new(left, image_ref),
            right: WireBox::new(right, image_ref),
            page: [page.0, page.1],
        };
        let line = self.round_trip(&serde_json::to_string(&request)?)?;
        match parse_reply(&line) {
            Ok(score) => {
                self.calls += 1;
                Ok(score)
            }
            Err(e) => self.fail(e),
        }
    }
}

impl PairwiseComparator for ExternalComparator {
    fn compare(&mut self, doc: &Document, left: &BoundingBox, right: &BoundingBox) -> Result<PairScore> {
        self.score(left, right, (doc.page_width, doc.page_height), doc.image.as_deref())
    }
}

impl Drop for ExternalComparator {
    fn drop(&mut self) {
        self.stdin.take();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Behaviour of the reference stub comparator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StubMode {
    /// Replies with the same `p` to every request, in range or not.
    Constant(f64),
    /// Left-of-means-before by centroid x.
    LeftOf,
}

/// Serves the wire protocol on `input`/`output` until end of input.
pub fn run_stub(mode: StubMode, input: impl BufRead, mut output: impl Write) -> Result<()> {
    let io_err = |source| Error::Io {
        path: "<stdio>".into(),
        source,
    };
    let mut lines = input.lines();
    let Some(first) = lines.next() else {
        return Ok(());
    };
    let hello: Handshake = serde_json::from_str(&first.map_err(io_err)?)
        .map_err(|e| Error::Protocol(format!("bad handshake: {e}")))?;
    if hello.proto != PROTOCOL_VERSION {
        return Err(Error::Protocol(format!("unsupported protocol version {}", hello.proto)));
    }
    writeln!(output, "{}", serde_json::to_string(&Ack { ok: true })?).map_err(io_err)?;
    output.flush().map_err(io_err)?;
    for line in lines {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let req: WireRequest =
            serde_json::from_str(&line).map_err(|e| Error::Protocol(format!("bad request: {e}")))?;
        let p = match mode {
            StubMode::Constant(p) => p,
            StubMode::LeftOf => LeftOfComparator::probability(&req.left.to_box(), &req.right.to_box()),
        };
        writeln!(output, "{}", serde_json::json!({ "p": p })).map_err(io_err)?;
        output.flush().map_err(io_err)?;
    }
    Ok(())
}
