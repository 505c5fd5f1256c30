//! Sources of synthetic negative queries.
//!
//! Out-of-process generators speak newline-delimited JSON on stdin/stdout:
//! one request object `{"query", "language", "path"}` per line, answered by
//! one `{"query"}` object per line.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::corpus::LanguageTag;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub query: String,
    pub language: LanguageTag,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationResponse {
    pub query: String,
}

#[derive(Debug, thiserror::Error)]
pub enum GeneratorError {
    #[error("query generator unavailable: {0}")]
    Unavailable(String),
}

/// Produces a query in the request's language that should not match the path.
///
/// `attempt` counts re-requests for the same record, starting at 0.
pub trait QueryGenerator: Send + Sync {
    fn generate(&self, request: &GenerationRequest, attempt: u32)
        -> Result<String, GeneratorError>;
}

impl<F> QueryGenerator for F
where
    F: Fn(&GenerationRequest, u32) -> Result<String, GeneratorError> + Send + Sync,
{
    fn generate(
        &self,
        request: &GenerationRequest,
        attempt: u32,
    ) -> Result<String, GeneratorError> {
        self(request, attempt)
    }
}

/// Deterministic token perturbation: appends `unrelated-token` (numbered
/// after the first attempt).
#[derive(Debug, Clone, Copy, Default)]
pub struct StubGenerator;

impl QueryGenerator for StubGenerator {
    fn generate(
        &self,
        request: &GenerationRequest,
        attempt: u32,
    ) -> Result<String, GeneratorError> {
        Ok(match attempt {
            0 => format!("{} unrelated-token", request.query),
            n => format!("{} unrelated-token-{n}", request.query),
        })
    }
}

/// Replays a fixed list of outputs by attempt number.
#[derive(Debug, Clone, Default)]
pub struct ScriptedGenerator {
    pub outputs: Vec<String>,
}

impl QueryGenerator for ScriptedGenerator {
    fn generate(
        &self,
        _request: &GenerationRequest,
        attempt: u32,
    ) -> Result<String, GeneratorError> {
        self.outputs
            .get(attempt as usize)
            .cloned()
            .ok_or_else(|| GeneratorError::Unavailable("script exhausted".into()))
    }
}

struct Pipes {
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Child process speaking the NDJSON generator protocol.
pub struct ProcessGenerator {
    child: Mutex<Child>,
    pipes: Mutex<Option<Pipes>>,
}

impl ProcessGenerator {
    pub fn spawn(program: &str, args: &[String]) -> Result<Self, GeneratorError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| GeneratorError::Unavailable(format!("cannot start {program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ProcessGenerator {
            child: Mutex::new(child),
            pipes: Mutex::new(Some(Pipes { stdin, stdout })),
        })
    }
}

impl QueryGenerator for ProcessGenerator {
    fn generate(
        &self,
        request: &GenerationRequest,
        _attempt: u32,
    ) -> Result<String, GeneratorError> {
        let mut guard = self.pipes.lock().expect("generator pipes poisoned");
        let pipes = guard
            .as_mut()
            .ok_or_else(|| GeneratorError::Unavailable("generator closed".into()))?;
        let mut line = serde_json::to_string(request).expect("request serializes");
        line.push('\n');
        let io_err = |e: std::io::Error| GeneratorError::Unavailable(e.to_string());
        pipes.stdin.write_all(line.as_bytes()).map_err(io_err)?;
        pipes.stdin.flush().map_err(io_err)?;
        let mut reply = String::new();
        if pipes.stdout.read_line(&mut reply).map_err(io_err)? == 0 {
            return Err(GeneratorError::Unavailable(
                "generator closed its output".into(),
            ));
        }
        let response: GenerationResponse = serde_json::from_str(reply.trim_end())
            .map_err(|e| GeneratorError::Unavailable(format!("malformed response: {e}")))?;
        Ok(response.query)
    }
}

impl Drop for ProcessGenerator {
    fn drop(&mut self) {
        // Closing stdin lets a well-behaved generator exit on EOF.
        if let Ok(mut pipes) = self.pipes.lock() {
            pipes.take();
        }
        if let Ok(mut child) = self.child.lock() {
            let _ = child.wait();
        }
    }
}
