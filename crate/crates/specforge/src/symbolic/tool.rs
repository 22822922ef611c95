//! Invocation of the external analyzers (EVA via frama-c, PathCrawler).
//!
//! Tests never require the tools: a replay directory of stored outputs
//! substitutes for real runs, byte for byte.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which analyzer to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolKind {
    Eva,
    Pathcrawler,
}

impl ToolKind {
    /// Suffix of both replay files and persisted outputs.
    pub fn output_suffix(self) -> &'static str {
        match self {
            ToolKind::Eva => "eva.txt",
            ToolKind::Pathcrawler => "pathcrawler.csv",
        }
    }
}

impl fmt::Display for ToolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ToolKind::Eva => f.write_str("eva"),
            ToolKind::Pathcrawler => f.write_str("pathcrawler"),
        }
    }
}

/// Configuration for one tool binary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolConfig {
    /// Binary to execute; looked up on PATH when not absolute.
    pub binary: String,
    /// Extra flags placed before the program path.
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Directory of stored outputs replayed instead of running the tool.
    #[serde(default)]
    pub replay_dir: Option<PathBuf>,
}

fn default_timeout_secs() -> u64 {
    120
}

#[derive(Debug, Error)]
pub enum ToolError {
    #[error("tool {tool} binary {binary:?} not found")]
    ToolMissing { tool: ToolKind, binary: String },
    #[error("tool {tool} failed with exit code {code}: {stderr_tail}")]
    ToolFailed {
        tool: ToolKind,
        code: i32,
        stderr_tail: String,
    },
    #[error("tool {tool} timed out after {seconds}s")]
    Timeout { tool: ToolKind, seconds: u64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Run the tool on a program (or replay its stored output) and return the
/// captured text verbatim. The output is also persisted next to the
/// program as `<stem>.<tool suffix>`.
pub fn run_external_tool(
    tool: ToolKind,
    program_path: &Path,
    config: &ToolConfig,
) -> Result<String, ToolError> {
    let stem = program_path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_default();

    if let Some(replay_dir) = &config.replay_dir {
        let stored = replay_dir.join(format!("{stem}.{}", tool.output_suffix()));
        if stored.exists() {
            return Ok(std::fs::read_to_string(&stored)?);
        }
    }

    let mut command = Command::new(&config.binary);
    command
        .args(&config.args)
        .arg(program_path)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    let mut child = command.spawn().map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            ToolError::ToolMissing {
                tool,
                binary: config.binary.clone(),
            }
        } else {
            ToolError::Io(e)
        }
    })?;

    // Poll with a deadline; std::process has no built-in wait timeout.
    let deadline = Instant::now() + Duration::from_secs(config.timeout_secs);
    let status = loop {
        match child.try_wait()? {
            Some(status) => break status,
            None if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(ToolError::Timeout {
                    tool,
                    seconds: config.timeout_secs,
                });
            }
            None => std::thread::sleep(Duration::from_millis(20)),
        }
    };

    let mut stdout = String::new();
    let mut stderr = String::new();
    if let Some(mut out) = child.stdout.take() {
        out.read_to_string(&mut stdout)?;
    }
    if let Some(mut err) = child.stderr.take() {
        err.read_to_string(&mut stderr)?;
    }

    if !status.success() {
        let tail: String = stderr
            .lines()
            .rev()
            .take(5)
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect::<Vec<_>>()
            .join("\n");
        return Err(ToolError::ToolFailed {
            tool,
            code: status.code().unwrap_or(-1),
            stderr_tail: tail,
        });
    }

    // Analyzers interleave diagnostics on stderr with results on stdout;
    // keep both, stdout first.
    let mut text = stdout;
    if !stderr.is_empty() {
        text.push_str(&stderr);
    }

    let out_path = program_path.with_file_name(format!("{stem}.{}", tool.output_suffix()));
    std::fs::write(&out_path, &text)?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_binary_is_tool_missing() {
        let config = ToolConfig {
            binary: "definitely-not-a-real-analyzer".into(),
            args: vec![],
            timeout_secs: 5,
            replay_dir: None,
        };
        let err = run_external_tool(ToolKind::Eva, Path::new("x.c"), &config).unwrap_err();
        assert!(matches!(err, ToolError::ToolMissing { .. }));
    }
}
