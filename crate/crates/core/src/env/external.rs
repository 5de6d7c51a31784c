//! Adapter that drives an external interactive-fiction interpreter as a
//! child process over stdin/stdout.
//!
//! Commands are newline-delimited; responses are delimited by a prompt
//! pattern (default ">"). Reads are bounded by a timeout, after which the
//! observation carries whatever text arrived. The game score is scraped
//! from the text with a configurable pattern and carried forward when no
//! match appears.

use std::io::{Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use regex::Regex;

use super::{EnvError, EnvObservation, Environment};

#[derive(Debug, Clone)]
pub struct ExternalEnvConfig {
    /// Interpreter executable.
    pub command: String,
    pub args: Vec<String>,
    /// Text that marks the end of a response block.
    pub prompt: String,
    /// Pattern whose last match's first capture group is the score.
    pub score_pattern: String,
    pub read_timeout: Duration,
    /// Declared maximum score, for peak-performance reporting.
    pub max_score: Option<i64>,
}

impl ExternalEnvConfig {
    pub fn new(command: String, args: Vec<String>) -> Self {
        ExternalEnvConfig {
            command,
            args,
            prompt: ">".to_string(),
            score_pattern: r"Score:\s*(-?\d+)".to_string(),
            read_timeout: Duration::from_secs(2),
            max_score: None,
        }
    }
}

/// Extract the score from interpreter output: the last match of `pattern`
/// wins; no match carries `previous` forward.
pub fn parse_score(text: &str, pattern: &Regex, previous: i64) -> i64 {
    pattern
        .captures_iter(text)
        .last()
        .and_then(|c| c.get(1))
        .and_then(|m| m.as_str().parse().ok())
        .unwrap_or(previous)
}

pub struct ExternalEnv {
    config: ExternalEnvConfig,
    score_re: Regex,
    child: Option<Child>,
    stdout_rx: Option<Receiver<Vec<u8>>>,
    stderr_buf: Arc<Mutex<String>>,
    pending: String,
    score: i64,
    alive: bool,
}

impl ExternalEnv {
    pub fn new(config: ExternalEnvConfig) -> Result<Self, EnvError> {
        let score_re = Regex::new(&config.score_pattern).map_err(|e| EnvError::Config {
            message: format!("bad score pattern: {e}"),
        })?;
        Ok(ExternalEnv {
            config,
            score_re,
            child: None,
            stdout_rx: None,
            stderr_buf: Arc::new(Mutex::new(String::new())),
            pending: String::new(),
            score: 0,
            alive: false,
        })
    }

    fn kill_child(&mut self) {
        if let Some(mut child) = self.child.take() {
            let _ = child.kill();
            let _ = child.wait();
        }
        self.stdout_rx = None;
        self.alive = false;
    }

    fn spawn(&mut self) -> Result<(), EnvError> {
        self.kill_child();
        let mut child = Command::new(&self.config.command)
            .args(&self.config.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| EnvError::Spawn {
                message: format!("{}: {e}", self.config.command),
            })?;

        let stdout = child.stdout.take().expect("stdout piped");
        let (tx, rx): (Sender<Vec<u8>>, Receiver<Vec<u8>>) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let mut stdout = stdout;
            let mut buf = [0u8; 4096];
            loop {
                match stdout.read(&mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => {
                        if tx.send(buf[..n].to_vec()).is_err() {
                            break;
                        }
                    }
                }
            }
        });

        let stderr = child.stderr.take().expect("stderr piped");
        let stderr_buf = Arc::clone(&self.stderr_buf);
        std::thread::spawn(move || {
            let mut stderr = stderr;
            let mut text = String::new();
            let _ = stderr.read_to_string(&mut text);
            stderr_buf.lock().unwrap().push_str(&text);
        });

        self.child = Some(child);
        self.stdout_rx = Some(rx);
        self.pending.clear();
        self.alive = true;
        Ok(())
    }

    /// Accumulate output until the prompt appears at the end of the buffer
    /// or the timeout elapses. Returns the text with the trailing prompt
    /// removed, plus whether the stream ended.
    fn read_response(&mut self) -> (String, bool) {
        let deadline = Instant::now() + self.config.read_timeout;
        let mut eof = false;
        let rx = match &self.stdout_rx {
            Some(rx) => rx,
            None => return (String::new(), true),
        };
        loop {
            if let Some(stripped) = strip_trailing_prompt(&self.pending, &self.config.prompt) {
                let text = stripped;
                self.pending.clear();
                return (text, eof);
            }
            let remaining = deadline.saturating_duration_since(Instant::now());
            if remaining.is_zero() {
                break;
            }
            match rx.recv_timeout(remaining) {
                Ok(chunk) => self.pending.push_str(&String::from_utf8_lossy(&chunk)),
                Err(RecvTimeoutError::Timeout) => break,
                Err(RecvTimeoutError::Disconnected) => {
                    eof = true;
                    break;
                }
            }
        }
        let text = std::mem::take(&mut self.pending);
        (text, eof)
    }

    /// Captured stderr from the current or last child, for diagnostics.
    pub fn diagnostics(&self) -> String {
        self.stderr_buf.lock().unwrap().clone()
    }
}

/// If the buffer ends with the prompt (ignoring trailing whitespace),
/// return the text before that final prompt occurrence.
fn strip_trailing_prompt(buffer: &str, prompt: &str) -> Option<String> {
    let trimmed = buffer.trim_end();
    if prompt.is_empty() || !trimmed.ends_with(prompt) {
        return None;
    }
    Some(trimmed[..trimmed.len() - prompt.len()].to_string())
}

impl Environment for ExternalEnv {
    fn reset(&mut self) -> Result<EnvObservation, EnvError> {
        self.stderr_buf.lock().unwrap().clear();
        self.spawn().map_err(|e| match e {
            EnvError::Spawn { message } => EnvError::Spawn {
                message: format!("{message}; stderr: {}", self.diagnostics()),
            },
            other => other,
        })?;
        let (text, eof) = self.read_response();
        self.score = parse_score(&text, &self.score_re, 0);
        if eof {
            self.alive = false;
        }
        Ok(EnvObservation {
            text,
            score: self.score,
            terminal: !self.alive,
        })
    }

    fn step(&mut self, command: &str) -> Result<EnvObservation, EnvError> {
        if !self.alive {
            return Ok(EnvObservation {
                text: String::new(),
                score: self.score,
                terminal: true,
            });
        }
        let stdin = self.child.as_mut().and_then(|c| c.stdin.as_mut());
        let write_ok = match stdin {
            Some(stdin) => writeln!(stdin, "{command}")
                .and_then(|()| stdin.flush())
                .is_ok(),
            None => false,
        };
        if !write_ok {
            self.alive = false;
            return Ok(EnvObservation {
                text: String::new(),
                score: self.score,
                terminal: true,
            });
        }
        let (text, eof) = self.read_response();
        if eof {
            self.alive = false;
        }
        self.score = parse_score(&text, &self.score_re, self.score);
        Ok(EnvObservation {
            text,
            score: self.score,
            terminal: !self.alive,
        })
    }

    fn max_score(&self) -> Option<i64> {
        self.config.max_score
    }
}

impl Drop for ExternalEnv {
    fn drop(&mut self) {
        self.kill_child();
    }
}
