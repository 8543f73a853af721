use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::protocol::Message;
use super::{EvalError, EvaluationRequest, EvaluationResult, Evaluator};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerCommand {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
}

/// One external worker process with a single request in flight at a time.
pub struct WorkerProcess {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
}

impl WorkerProcess {
    /// Starts the process and sends `init`.
    pub fn spawn(cmd: &WorkerCommand, init: &Message) -> Result<Self, EvalError> {
        let mut child = Command::new(&cmd.command)
            .args(&cmd.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| EvalError::Spawn(format!("{}: {e}", cmd.command)))?;
        let stdout = child.stdout.take().expect("stdout is piped");
        let stdin = child.stdin.take();
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                match line {
                    Ok(l) => {
                        if tx.send(l).is_err() {
                            break;
                        }
                    }
                    Err(_) => break,
                }
            }
        });
        let mut worker = WorkerProcess { child, stdin, lines: rx };
        worker.send(init)?;
        Ok(worker)
    }

    fn send(&mut self, message: &Message) -> Result<(), EvalError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| EvalError::WorkerExited("stdin closed".into()))?;
        let mut line = message.to_line();
        line.push('\n');
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| EvalError::WorkerExited(format!("write failed: {e}")))
    }

    fn exit_description(&mut self) -> String {
        // Give a closing process a moment to be reaped.
        for _ in 0..20 {
            if let Ok(Some(status)) = self.child.try_wait() {
                return format!("process ended with {status}");
            }
            thread::sleep(Duration::from_millis(10));
        }
        "output stream closed".into()
    }

    /// Sends `evaluate` and waits for the matching `result`.
    pub fn evaluate(
        &mut self,
        request: &EvaluationRequest,
        timeout: Duration,
    ) -> Result<EvaluationResult, EvalError> {
        self.send(&Message::evaluate(request))?;
        let deadline = Instant::now() + timeout;
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            let line = match self.lines.recv_timeout(remaining) {
                Ok(line) => line,
                Err(RecvTimeoutError::Timeout) => {
                    return Err(EvalError::Timeout {
                        id: request.id.clone(),
                        seconds: timeout.as_secs_f64(),
                    })
                }
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(EvalError::WorkerExited(self.exit_description()))
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let message = Message::parse(&line).map_err(|e| {
                EvalError::ProtocolViolation(format!("unparseable message `{line}`: {e}"))
            })?;
            return match message {
                Message::Result { id, reward, expert_handle, metrics, wall_seconds } => {
                    if id != request.id {
                        return Err(EvalError::ProtocolViolation(format!(
                            "id mismatch: expected `{}`, got `{id}`",
                            request.id
                        )));
                    }
                    if !reward.is_finite() {
                        return Err(EvalError::NonFiniteReward(id));
                    }
                    Ok(EvaluationResult { id, reward, expert_handle, metrics, wall_seconds })
                }
                Message::Error { id, message } => {
                    if id != request.id {
                        return Err(EvalError::ProtocolViolation(format!(
                            "id mismatch: expected `{}`, got `{id}`",
                            request.id
                        )));
                    }
                    Err(EvalError::WorkerError { id, message })
                }
                other => Err(EvalError::ProtocolViolation(format!(
                    "unexpected `{}` message from worker",
                    other.type_name()
                ))),
            };
        }
    }

    /// Sends `shutdown` and waits briefly for a clean exit before killing.
    pub fn shutdown(mut self) {
        self.close();
    }

    fn close(&mut self) {
        if self.stdin.is_some() {
            let _ = self.send(&Message::Shutdown);
            self.stdin = None;
        }
        let deadline = Instant::now() + Duration::from_secs(2);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(10));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    fn kill(&mut self) {
        self.stdin = None;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for WorkerProcess {
    fn drop(&mut self) {
        self.close();
    }
}

/// A fixed number of worker processes shared by concurrent callers.
///
/// Workers are started lazily; a worker that times out, exits or breaks the
/// protocol is killed and replaced on next use.
pub struct WorkerPool {
    command: WorkerCommand,
    init: Message,
    timeout: Duration,
    idle: Mutex<Vec<Option<WorkerProcess>>>,
    returned: Condvar,
}

impl WorkerPool {
    pub fn new(command: WorkerCommand, init: Message, size: usize, timeout: Duration) -> Self {
        let idle = (0..size.max(1)).map(|_| None).collect();
        Self { command, init, timeout, idle: Mutex::new(idle), returned: Condvar::new() }
    }

    fn acquire(&self) -> Option<WorkerProcess> {
        let mut idle = self.idle.lock().expect("pool lock");
        loop {
            if let Some(slot) = idle.pop() {
                return slot;
            }
            idle = self.returned.wait(idle).expect("pool lock");
        }
    }

    fn release(&self, worker: Option<WorkerProcess>) {
        self.idle.lock().expect("pool lock").push(worker);
        self.returned.notify_one();
    }
}

impl Evaluator for WorkerPool {
    fn evaluate(&self, request: &EvaluationRequest) -> Result<EvaluationResult, EvalError> {
        let mut worker = match self.acquire() {
            Some(w) => w,
            None => match WorkerProcess::spawn(&self.command, &self.init) {
                Ok(w) => w,
                Err(e) => {
                    self.release(None);
                    return Err(e);
                }
            },
        };
        debug!("dispatching {} to worker", request.id);
        let outcome = worker.evaluate(request, self.timeout);
        match &outcome {
            Ok(_) | Err(EvalError::WorkerError { .. }) | Err(EvalError::NonFiniteReward(_)) => {
                self.release(Some(worker))
            }
            Err(e) => {
                warn!("discarding worker after {} on `{}`: {e}", e.category(), request.id);
                worker.kill();
                self.release(None);
            }
        }
        outcome
    }
}

impl Drop for WorkerPool {
    fn drop(&mut self) {
        if let Ok(idle) = self.idle.get_mut() {
            for worker in idle.drain(..).flatten() {
                worker.shutdown();
            }
        }
    }
}
