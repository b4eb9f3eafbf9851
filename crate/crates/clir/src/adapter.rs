//! MT adapters backed by an external process, plus a delay wrapper for
//! cost experiments.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use clir_core::{AdapterError, Lang, MtAdapter};

/// Runs `program args... SRC TGT`, feeding the text on stdin and reading
/// the translation from stdout. Non-zero exit or a timeout is a failure.
#[derive(Debug, Clone)]
pub struct CommandAdapter {
    program: String,
    args: Vec<String>,
    timeout: Duration,
}

impl CommandAdapter {
    pub fn new(program: impl Into<String>, args: Vec<String>, timeout: Duration) -> Self {
        CommandAdapter {
            program: program.into(),
            args,
            timeout,
        }
    }

    /// Splits a command line on whitespace. `None` for a blank string.
    pub fn from_command_line(cmd: &str, timeout: Duration) -> Option<Self> {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(Self::new(program, parts.collect(), timeout))
    }

    fn fail(text: &str, message: impl Into<String>) -> AdapterError {
        AdapterError {
            input: text.into(),
            message: message.into(),
        }
    }
}

impl MtAdapter for CommandAdapter {
    fn translate(&self, text: &str, src: &Lang, tgt: &Lang) -> Result<String, AdapterError> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .arg(src.as_str())
            .arg(tgt.as_str())
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Self::fail(text, format!("cannot start {}: {e}", self.program)))?;

        // Pipes are drained on their own threads so a chatty child cannot
        // block on a full buffer while we wait on it.
        let mut stdin = child.stdin.take().expect("piped stdin");
        let input = text.to_string();
        let writer = thread::spawn(move || stdin.write_all(input.as_bytes()));
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = thread::spawn(move || {
            let mut buf = Vec::new();
            stdout.read_to_end(&mut buf).map(|_| buf)
        });
        let mut stderr = child.stderr.take().expect("piped stderr");
        let err_reader = thread::spawn(move || {
            let mut buf = String::new();
            let _ = stderr.read_to_string(&mut buf);
            buf
        });

        let start = Instant::now();
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if start.elapsed() >= self.timeout => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(Self::fail(
                        text,
                        format!("timed out after {:.1}s", self.timeout.as_secs_f64()),
                    ));
                }
                Ok(None) => thread::sleep(Duration::from_millis(2)),
                Err(e) => return Err(Self::fail(text, format!("wait failed: {e}"))),
            }
        };
        // A child that exits without reading stdin yields a broken pipe; its
        // exit status decides.
        let _ = writer.join();
        let out = reader
            .join()
            .map_err(|_| Self::fail(text, "stdout reader panicked"))?
            .map_err(|e| Self::fail(text, format!("reading stdout: {e}")))?;
        let err_text = err_reader.join().unwrap_or_default();
        if !status.success() {
            let detail = err_text.lines().next().unwrap_or("").trim();
            return Err(Self::fail(
                text,
                if detail.is_empty() {
                    format!("{status}")
                } else {
                    format!("{status}: {detail}")
                },
            ));
        }
        String::from_utf8(out)
            .map(|s| s.trim_end_matches(['\n', '\r']).to_string())
            .map_err(|_| Self::fail(text, "output is not UTF-8"))
    }
}

/// Sleeps for a fixed time before each call to the wrapped adapter.
#[derive(Debug, Clone)]
pub struct DelayedAdapter<A> {
    inner: A,
    delay: Duration,
}

impl<A> DelayedAdapter<A> {
    pub fn new(inner: A, delay: Duration) -> Self {
        DelayedAdapter { inner, delay }
    }
}

impl<A: MtAdapter> MtAdapter for DelayedAdapter<A> {
    fn translate(&self, text: &str, src: &Lang, tgt: &Lang) -> Result<String, AdapterError> {
        thread::sleep(self.delay);
        self.inner.translate(text, src, tgt)
    }

    fn supports_concurrency(&self) -> bool {
        self.inner.supports_concurrency()
    }
}
