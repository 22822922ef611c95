//! Deterministic CSV and Markdown emission of count tables.
//!
//! Column order is fixed: group keys, record count, per-kind sums in the
//! CountRow schema order, total, then per-kind means. Decimals always use
//! a point; output always ends with a newline.

use crate::acsl::ClauseKind;

use super::{CountTable, GroupKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Markdown,
}

impl EmitFormat {
    pub fn parse(spec: &str) -> Result<EmitFormat, String> {
        match spec {
            "csv" => Ok(EmitFormat::Csv),
            "md" | "markdown" => Ok(EmitFormat::Markdown),
            other => Err(format!("unknown format {other:?} (expected csv or md)")),
        }
    }
}

/// The three clause kinds the study tallies by default.
const CORE_KINDS: [ClauseKind; 3] = [
    ClauseKind::Requires,
    ClauseKind::Ensures,
    ClauseKind::Assigns,
];

fn kinds(all_kinds: bool) -> Vec<ClauseKind> {
    if all_kinds {
        ClauseKind::ALL.to_vec()
    } else {
        CORE_KINDS.to_vec()
    }
}

fn key_columns(table: &CountTable) -> Vec<&'static str> {
    let mut cols = Vec::new();
    if table.group_by.set {
        cols.push("set");
    }
    if table.group_by.suite {
        cols.push("suite");
    }
    if table.group_by.variant {
        cols.push("variant");
    }
    cols
}

fn format_mean(value: f64) -> String {
    format!("{value:.3}")
}

/// Render the table. Deterministic: same table, same bytes.
pub fn emit(table: &CountTable, format: EmitFormat, all_kinds: bool) -> String {
    let kind_list = kinds(all_kinds);
    let mut header: Vec<String> = key_columns(table).iter().map(|s| s.to_string()).collect();
    header.push("records".into());
    for kind in &kind_list {
        header.push(kind.column_name().into());
    }
    header.push("total".into());
    for kind in &kind_list {
        header.push(format!("mean_{}", kind.column_name()));
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    for (key, group) in &table.rows {
        let mut cells = key_cells_for(table, key, format == EmitFormat::Markdown);
        cells.push(group.records.to_string());
        for kind in &kind_list {
            cells.push(group.sums.get(*kind).to_string());
        }
        cells.push(group.sums.total.to_string());
        for kind in &kind_list {
            cells.push(format_mean(group.mean(*kind)));
        }
        rows.push(cells);
    }

    match format {
        EmitFormat::Csv => {
            let mut out = String::new();
            out.push_str(&header.join(","));
            out.push('\n');
            for row in rows {
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        }
        EmitFormat::Markdown => {
            let mut out = String::new();
            out.push_str("| ");
            out.push_str(&header.join(" | "));
            out.push_str(" |\n|");
            for _ in &header {
                out.push_str(" --- |");
            }
            out.push('\n');
            for row in rows {
                out.push_str("| ");
                out.push_str(&row.join(" | "));
                out.push_str(" |\n");
            }
            out
        }
    }
}

/// Group-key cells in header order. Markdown shows suites by display name.
fn key_cells_for(table: &CountTable, key: &GroupKey, markdown: bool) -> Vec<String> {
    let mut cells = Vec::new();
    if table.group_by.set {
        cells.push(
            key.set
                .map_or_else(|| "unknown".to_string(), |s| s.to_string()),
        );
    }
    if table.group_by.suite {
        cells.push(match key.suite {
            Some(suite) if markdown => suite.display_name().to_string(),
            Some(suite) => suite.to_string(),
            None => "unknown".to_string(),
        });
    }
    if table.group_by.variant {
        cells.push(
            key.variant
                .map_or_else(|| "unknown".to_string(), |v| v.to_string()),
        );
    }
    cells
}
