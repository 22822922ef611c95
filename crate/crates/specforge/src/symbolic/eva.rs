//! Parser for the plain-text reports emitted by the EVA value analyzer.
//!
//! Prompts embed the raw report verbatim; this parser exists so alarms,
//! final states, and the analysis summary can be validated and reported on.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Broad alarm category inferred from the warning message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlarmCategory {
    IntegerOverflow,
    InvalidMemoryAccess,
    DivisionByZero,
    Other,
}

impl fmt::Display for AlarmCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AlarmCategory::IntegerOverflow => "integer_overflow",
            AlarmCategory::InvalidMemoryAccess => "invalid_memory_access",
            AlarmCategory::DivisionByZero => "division_by_zero",
            AlarmCategory::Other => "other",
        };
        f.write_str(s)
    }
}

fn categorize(message: &str) -> AlarmCategory {
    let lower = message.to_ascii_lowercase();
    if lower.contains("overflow") {
        AlarmCategory::IntegerOverflow
    } else if lower.contains("out of bounds")
        || lower.contains("mem_access")
        || lower.contains("memory access")
    {
        AlarmCategory::InvalidMemoryAccess
    } else if lower.contains("division by zero") || lower.contains("division_by_zero") {
        AlarmCategory::DivisionByZero
    } else {
        AlarmCategory::Other
    }
}

/// One `[eva:alarm]` entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvaAlarm {
    pub file: String,
    pub line: u64,
    pub category: AlarmCategory,
    /// The unproven ACSL assertion, from `assert` to the end of the message.
    pub assertion_text: String,
}

/// The `ANALYSIS SUMMARY` block, when present.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EvaSummary {
    pub alarm_count: u64,
    pub per_category: BTreeMap<AlarmCategory, u64>,
    pub functions_analyzed: Option<(u64, u64)>,
    pub statements_reached: Option<(u64, u64)>,
}

/// A parsed EVA report. `raw_text` keeps the input verbatim so prompts can
/// embed exactly what the tool produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvaReport {
    pub alarms: Vec<EvaAlarm>,
    /// `(variable, value-set text)` pairs from the final-states block.
    pub final_states: Vec<(String, String)>,
    pub non_terminating: bool,
    pub summary: Option<EvaSummary>,
    pub raw_text: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvaParseError {
    #[error("no recognizable EVA output (expected `VALUES COMPUTED` marker or an `[eva…]` line)")]
    MalformedReport,
}

/// Parse an EVA report. Requires either the `VALUES COMPUTED` marker or at
/// least one `[eva…]` line.
pub fn parse_eva_report(text: &str) -> Result<EvaReport, EvaParseError> {
    if !text.contains("VALUES COMPUTED")
        && !text.lines().any(|l| l.trim_start().starts_with("[eva"))
    {
        return Err(EvaParseError::MalformedReport);
    }

    let lines: Vec<&str> = text.lines().collect();
    let mut alarms = Vec::new();
    let mut final_states = Vec::new();
    let mut non_terminating = false;
    let mut summary = None;

    let mut i = 0;
    while i < lines.len() {
        let line = lines[i];
        let trimmed = line.trim_start();

        if let Some(rest) = trimmed.strip_prefix("[eva:alarm]") {
            let (file, lineno) = parse_location(rest);
            let message = collect_message(&lines, &mut i);
            let assertion_text = match message.find("assert") {
                Some(idx) => message[idx..].to_string(),
                None => message.clone(),
            };
            alarms.push(EvaAlarm {
                file,
                line: lineno,
                category: categorize(&message),
                assertion_text,
            });
            continue;
        }

        if trimmed.starts_with("[eva:final-states]") {
            i += 1;
            while i < lines.len() {
                let state_line = lines[i];
                if !state_line.starts_with(' ') && !state_line.starts_with('\t') {
                    break;
                }
                let state = state_line.trim();
                if state.is_empty() {
                    break;
                }
                if state == "NON TERMINATING FUNCTION" {
                    non_terminating = true;
                } else if let Some((var, value)) = state.split_once(" in ") {
                    final_states.push((var.trim().to_string(), value.trim().to_string()));
                } else if let Some((var, value)) = state.split_once(" ∈ ") {
                    final_states.push((var.trim().to_string(), value.trim().to_string()));
                }
                i += 1;
            }
            continue;
        }

        if trimmed.starts_with("[eva:summary]") {
            summary = Some(parse_summary(&lines, &mut i));
            continue;
        }

        i += 1;
    }

    Ok(EvaReport {
        alarms,
        final_states,
        non_terminating,
        summary,
        raw_text: text.to_string(),
    })
}

/// `" temp_files/x/eva_temp.c:67: Warning:"` or the `:Warning:` spelling.
fn parse_location(rest: &str) -> (String, u64) {
    let rest = rest.trim();
    let location = rest
        .split_once(": Warning")
        .or_else(|| rest.split_once(":Warning"))
        .map_or(rest, |(loc, _)| loc);
    match location.rsplit_once(':') {
        Some((file, lineno)) => (file.to_string(), lineno.trim().parse().unwrap_or(0)),
        None => (location.to_string(), 0),
    }
}

/// Gather the indented message lines following an alarm header.
fn collect_message(lines: &[&str], i: &mut usize) -> String {
    *i += 1;
    let mut parts = Vec::new();
    while *i < lines.len() {
        let line = lines[*i];
        if line.trim_start().starts_with('[') || (!line.starts_with(' ') && !line.starts_with('\t'))
        {
            break;
        }
        let part = line.trim();
        if part.is_empty() {
            break;
        }
        parts.push(part);
        *i += 1;
    }
    parts.join(" ")
}

fn parse_summary(lines: &[&str], i: &mut usize) -> EvaSummary {
    let mut summary = EvaSummary::default();
    *i += 1;
    let mut in_alarm_list = false;
    while *i < lines.len() {
        let line = lines[*i];
        if line.trim_start().starts_with('[') {
            break;
        }
        let trimmed = line.trim();
        if let Some(idx) = trimmed.find(" alarm") {
            if trimmed.contains("generated by the analysis") {
                summary.alarm_count = trimmed[..idx].trim().parse().unwrap_or(0);
                in_alarm_list = true;
                *i += 1;
                continue;
            }
        }
        if in_alarm_list {
            // Category lines look like "4 integer overflows" with deep indent.
            let mut words = trimmed.split_whitespace();
            if let Some(first) = words.next() {
                if let Ok(n) = first.parse::<u64>() {
                    let rest: Vec<&str> = words.collect();
                    let category = categorize(&rest.join(" "));
                    *summary.per_category.entry(category).or_insert(0) += n;
                    *i += 1;
                    continue;
                }
            }
            in_alarm_list = false;
        }
        if let Some(idx) = trimmed.find(" function") {
            if trimmed.contains("analyzed (out of ") {
                let analyzed = trimmed[..idx].trim().parse().unwrap_or(0);
                let total = between(trimmed, "(out of ", ")")
                    .and_then(|s| s.parse().ok())
                    .unwrap_or(0);
                summary.functions_analyzed = Some((analyzed, total));
            }
        }
        if let Some(idx) = trimmed.find(" statements reached") {
            let reached = trimmed[..idx]
                .rsplit(' ')
                .next()
                .and_then(|s| s.parse().ok())
                .unwrap_or(0);
            let total = between(trimmed, "(out of ", ")")
                .and_then(|s| s.parse().ok())
                .unwrap_or(0);
            summary.statements_reached = Some((reached, total));
        }
        *i += 1;
    }
    summary
}

fn between<'a>(text: &'a str, open: &str, close: &str) -> Option<&'a str> {
    let start = text.find(open)? + open.len();
    let end = text[start..].find(close)? + start;
    Some(&text[start..end])
}
