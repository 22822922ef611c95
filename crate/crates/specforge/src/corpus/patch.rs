//! Minimal unified-diff parsing and strict application.
//!
//! Hunks must apply exactly at their stated positions; there is no fuzzing
//! or offset search. Bug patches are checked-in artifacts written against
//! the exact baseline source, so a mismatch is a corpus error, not
//! something to recover from.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatchError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("hunk @@ -{old_start} does not apply: expected {expected:?} at source line {source_line}, found {found:?}")]
    Conflict {
        old_start: usize,
        source_line: usize,
        expected: String,
        found: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum HunkLine {
    Context(String),
    Remove(String),
    Add(String),
}

#[derive(Debug, Clone)]
struct Hunk {
    old_start: usize,
    lines: Vec<HunkLine>,
}

#[derive(Debug, Clone)]
pub struct Patch {
    hunks: Vec<Hunk>,
}

impl Patch {
    pub fn parse(text: &str) -> Result<Patch, PatchError> {
        let mut hunks: Vec<Hunk> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            if raw.starts_with("--- ")
                || raw.starts_with("+++ ")
                || raw.starts_with("diff ")
                || raw.starts_with("index ")
            {
                continue;
            }
            if let Some(header) = raw.strip_prefix("@@ ") {
                let old_start = parse_hunk_header(header).ok_or_else(|| PatchError::Syntax {
                    line: lineno,
                    message: format!("bad hunk header {raw:?}"),
                })?;
                hunks.push(Hunk {
                    old_start,
                    lines: Vec::new(),
                });
                continue;
            }
            if raw.starts_with('\\') {
                // "\ No newline at end of file" — positional newline data we
                // do not need for LF-normalized corpus files.
                continue;
            }
            let hunk = match hunks.last_mut() {
                Some(h) => h,
                None if raw.trim().is_empty() => continue,
                None => {
                    return Err(PatchError::Syntax {
                        line: lineno,
                        message: "content before first hunk header".into(),
                    })
                }
            };
            match raw.chars().next() {
                Some(' ') => hunk.lines.push(HunkLine::Context(raw[1..].to_string())),
                Some('-') => hunk.lines.push(HunkLine::Remove(raw[1..].to_string())),
                Some('+') => hunk.lines.push(HunkLine::Add(raw[1..].to_string())),
                None => hunk.lines.push(HunkLine::Context(String::new())),
                Some(_) => {
                    return Err(PatchError::Syntax {
                        line: lineno,
                        message: format!("unrecognized hunk line {raw:?}"),
                    })
                }
            }
        }
        if hunks.is_empty() {
            return Err(PatchError::Syntax {
                line: 0,
                message: "patch contains no hunks".into(),
            });
        }
        Ok(Patch { hunks })
    }

    /// Apply to `source`, requiring every context and removal line to match
    /// at the hunk's stated position.
    pub fn apply(&self, source: &str) -> Result<String, PatchError> {
        let had_trailing_newline = source.ends_with('\n');
        let src_lines: Vec<&str> = source.lines().collect();
        let mut out: Vec<String> = Vec::with_capacity(src_lines.len());
        let mut cursor = 0usize; // index into src_lines

        for hunk in &self.hunks {
            let hunk_begin = hunk.old_start.saturating_sub(1);
            if hunk_begin < cursor || hunk_begin > src_lines.len() {
                return Err(PatchError::Conflict {
                    old_start: hunk.old_start,
                    source_line: hunk_begin + 1,
                    expected: "hunk start inside remaining source".into(),
                    found: None,
                });
            }
            out.extend(src_lines[cursor..hunk_begin].iter().map(|s| s.to_string()));
            cursor = hunk_begin;

            for line in &hunk.lines {
                match line {
                    HunkLine::Context(text) | HunkLine::Remove(text) => {
                        let found = src_lines.get(cursor);
                        if found != Some(&text.as_str()) {
                            return Err(PatchError::Conflict {
                                old_start: hunk.old_start,
                                source_line: cursor + 1,
                                expected: text.clone(),
                                found: found.map(|s| s.to_string()),
                            });
                        }
                        if matches!(line, HunkLine::Context(_)) {
                            out.push(text.clone());
                        }
                        cursor += 1;
                    }
                    HunkLine::Add(text) => out.push(text.clone()),
                }
            }
        }
        out.extend(src_lines[cursor..].iter().map(|s| s.to_string()));

        let mut result = out.join("\n");
        if had_trailing_newline && !result.is_empty() {
            result.push('\n');
        }
        Ok(result)
    }
}

fn parse_hunk_header(header: &str) -> Option<usize> {
    // "-8,9 +8,9 @@" — only the old start position matters for strict apply.
    let minus = header.split_whitespace().next()?.strip_prefix('-')?;
    let start = minus.split(',').next()?;
    start.parse().ok()
}
