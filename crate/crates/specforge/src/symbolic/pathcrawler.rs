//! Parser for PathCrawler test-case tables: RFC-4180-style CSV with a
//! header row, one test per row, and a per-test verdict in the last column.
//!
//! A stray `%` after the final row (a shell-prompt artifact that shows up
//! in captured tables) is tolerated and trimmed.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Per-test outcome string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Success,
    Unknown,
    NoExtraCoverage,
    Failure,
    Other(String),
}

impl Verdict {
    fn from_str(s: &str) -> Verdict {
        match s {
            "success" => Verdict::Success,
            "unknown" => Verdict::Unknown,
            "no_extra_coverage" => Verdict::NoExtraCoverage,
            "failure" => Verdict::Failure,
            other => Verdict::Other(other.to_string()),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Success => f.write_str("success"),
            Verdict::Unknown => f.write_str("unknown"),
            Verdict::NoExtraCoverage => f.write_str("no_extra_coverage"),
            Verdict::Failure => f.write_str("failure"),
            Verdict::Other(s) => f.write_str(s),
        }
    }
}

/// One test case: named inputs in header order, optional output, verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PcRow {
    pub inputs: Vec<(String, Option<i64>)>,
    pub output: Option<i64>,
    pub verdict: Verdict,
}

/// A parsed PathCrawler table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PcTable {
    /// Header column names in file order.
    pub columns: Vec<String>,
    pub rows: Vec<PcRow>,
}

impl PcTable {
    /// Count rows per verdict.
    pub fn verdict_histogram(&self) -> BTreeMap<String, usize> {
        let mut hist = BTreeMap::new();
        for row in &self.rows {
            *hist.entry(row.verdict.to_string()).or_insert(0) += 1;
        }
        hist
    }
}

/// What to do with rows whose cell count differs from the header's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RaggedRowPolicy {
    /// Reject the table (default).
    #[default]
    Reject,
    /// Coerce to header arity: the last cell is the verdict, the
    /// second-to-last the output; input columns fill left to right, short
    /// rows pad with empty cells, and surplus interior cells are dropped.
    Pad,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PcParseError {
    #[error("first line is not a header containing a `verdict` column")]
    HeaderMissing,
    #[error("row {row} has {cells} cells but the header has {columns} columns")]
    RaggedRow {
        row: usize,
        cells: usize,
        columns: usize,
    },
}

/// Split one CSV record. Quoted cells with doubled-quote escapes are
/// handled; real PathCrawler tables never need them.
fn split_record(line: &str) -> Vec<String> {
    let mut cells = Vec::new();
    let mut current = String::new();
    let mut chars = line.chars().peekable();
    let mut in_quotes = false;
    while let Some(c) = chars.next() {
        match c {
            '"' if in_quotes => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    current.push('"');
                } else {
                    in_quotes = false;
                }
            }
            '"' => in_quotes = true,
            ',' if !in_quotes => cells.push(std::mem::take(&mut current)),
            _ => current.push(c),
        }
    }
    cells.push(current);
    cells
}

fn parse_cell(cell: &str) -> Option<i64> {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return None;
    }
    trimmed.parse().ok()
}

/// Parse a PathCrawler CSV table under the given ragged-row policy.
pub fn parse_pathcrawler_csv(text: &str, policy: RaggedRowPolicy) -> Result<PcTable, PcParseError> {
    // Trim the shell-prompt artifact: a single stray '%' ending the input.
    let mut cleaned = text.trim_end();
    if let Some(stripped) = cleaned.strip_suffix('%') {
        cleaned = stripped.trim_end();
    }

    let mut lines = cleaned.lines().filter(|l| !l.trim().is_empty());
    let header_line = lines.next().ok_or(PcParseError::HeaderMissing)?;
    let columns: Vec<String> = split_record(header_line)
        .into_iter()
        .map(|c| c.trim().to_string())
        .collect();
    if !columns.iter().any(|c| c == "verdict") {
        return Err(PcParseError::HeaderMissing);
    }
    let n_inputs = columns
        .iter()
        .filter(|c| *c != "output" && *c != "verdict")
        .count();

    let mut rows = Vec::new();
    for (row_idx, line) in lines.enumerate() {
        let cells = split_record(line);
        let cells = if cells.len() == columns.len() {
            cells
        } else {
            match policy {
                RaggedRowPolicy::Reject => {
                    return Err(PcParseError::RaggedRow {
                        row: row_idx + 1,
                        cells: cells.len(),
                        columns: columns.len(),
                    })
                }
                RaggedRowPolicy::Pad => coerce_to_arity(cells, columns.len(), n_inputs),
            }
        };
        let input_names: Vec<&String> = columns
            .iter()
            .filter(|c| *c != "output" && *c != "verdict")
            .collect();
        let inputs = input_names
            .iter()
            .enumerate()
            .map(|(k, name)| ((*name).clone(), parse_cell(&cells[k])))
            .collect();
        let output = parse_cell(&cells[cells.len() - 2]);
        let verdict = Verdict::from_str(cells[cells.len() - 1].trim());
        rows.push(PcRow {
            inputs,
            output,
            verdict,
        });
    }

    Ok(PcTable { columns, rows })
}

/// Lenient coercion for ragged rows, see [`RaggedRowPolicy::Pad`].
fn coerce_to_arity(mut cells: Vec<String>, arity: usize, n_inputs: usize) -> Vec<String> {
    let verdict = cells.pop().unwrap_or_default();
    let output = if cells.len() > n_inputs {
        cells[n_inputs].clone()
    } else {
        String::new()
    };
    cells.truncate(n_inputs);
    while cells.len() < n_inputs {
        cells.push(String::new());
    }
    cells.push(output);
    cells.push(verdict);
    debug_assert_eq!(cells.len(), arity);
    cells
}
