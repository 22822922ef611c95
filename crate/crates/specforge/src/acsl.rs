//! Extraction, classification, counting, and stripping of ACSL annotations.
//!
//! The unit of accounting is the clause: a block such as
//! `/*@ requires A; ensures B; */` contributes one `requires` and one
//! `ensures`. Clause kinds are decided by the leading keyword(s) alone;
//! the predicate text is never parsed.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ctokens::{self, LexError, Span, Token, TokenClass};

/// Clause kinds distinguished by the counter. Everything else maps to `Other`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum ClauseKind {
    Requires,
    Ensures,
    Assigns,
    Assert,
    LoopInvariant,
    LoopAssigns,
    LoopVariant,
    Behavior,
    Logic,
    Predicate,
    Ghost,
    Other,
}

impl ClauseKind {
    /// All kinds in the fixed order used by CSV columns.
    pub const ALL: [ClauseKind; 12] = [
        ClauseKind::Requires,
        ClauseKind::Ensures,
        ClauseKind::Assigns,
        ClauseKind::Assert,
        ClauseKind::LoopInvariant,
        ClauseKind::LoopAssigns,
        ClauseKind::LoopVariant,
        ClauseKind::Behavior,
        ClauseKind::Logic,
        ClauseKind::Predicate,
        ClauseKind::Ghost,
        ClauseKind::Other,
    ];

    /// Column name in count CSV output.
    pub fn column_name(self) -> &'static str {
        match self {
            ClauseKind::Requires => "requires",
            ClauseKind::Ensures => "ensures",
            ClauseKind::Assigns => "assigns",
            ClauseKind::Assert => "assert",
            ClauseKind::LoopInvariant => "loop_invariant",
            ClauseKind::LoopAssigns => "loop_assigns",
            ClauseKind::LoopVariant => "loop_variant",
            ClauseKind::Behavior => "behavior",
            ClauseKind::Logic => "logic",
            ClauseKind::Predicate => "predicate",
            ClauseKind::Ghost => "ghost",
            ClauseKind::Other => "other",
        }
    }
}

impl fmt::Display for ClauseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column_name())
    }
}

/// One ACSL clause with its kind, text, and owning function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Annotation {
    pub kind: ClauseKind,
    /// Clause text without delimiters or leading `@`s, whitespace-joined.
    pub clause_text: String,
    /// Function the clause belongs to: the function whose body contains it,
    /// or the next function defined after it (contract position).
    pub enclosing_function: Option<String>,
    /// Span of the annotation token the clause came from.
    pub span: Span,
}

/// Per-kind clause tallies for one file or one generation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub counts: BTreeMap<ClauseKind, u64>,
    pub total: u64,
}

impl CountRow {
    pub fn get(&self, kind: ClauseKind) -> u64 {
        self.counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn add(&mut self, kind: ClauseKind) {
        *self.counts.entry(kind).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &CountRow) {
        for (kind, n) in &other.counts {
            *self.counts.entry(*kind).or_insert(0) += n;
        }
        self.total += other.total;
    }

    /// Header for the per-record CSV schema.
    pub fn csv_header() -> String {
        let kinds: Vec<_> = ClauseKind::ALL.iter().map(|k| k.column_name()).collect();
        format!("program,variant,set,sample,{},total", kinds.join(","))
    }

    /// One CSV row in the fixed column order. Context columns may be empty.
    pub fn csv_row(&self, program: &str, variant: &str, set: &str, sample: &str) -> String {
        let mut cells = vec![
            program.to_string(),
            variant.to_string(),
            set.to_string(),
            sample.to_string(),
        ];
        for kind in ClauseKind::ALL {
            cells.push(self.get(kind).to_string());
        }
        cells.push(self.total.to_string());
        cells.join(",")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AcslError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("malformed clause in annotation at line {line}: {text:?}")]
    MalformedClause { line: usize, text: String },
}

/// Classify a clause by its leading keyword(s). Total function: anything
/// unrecognized is `Other`.
pub fn classify_clause(clause_text: &str) -> ClauseKind {
    let mut words = clause_text.split_whitespace();
    let first = words.next().unwrap_or("");
    // Keywords can be glued to the expression ("requires\valid(p)" never
    // happens in practice, but "assert true" vs "assert(x)" both occur).
    let head = first
        .split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .next()
        .unwrap_or("");
    match head {
        "requires" => ClauseKind::Requires,
        "ensures" => ClauseKind::Ensures,
        "assigns" => ClauseKind::Assigns,
        "assert" => ClauseKind::Assert,
        "loop" => {
            let second = words.next().unwrap_or("");
            let second = second
                .split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
                .next()
                .unwrap_or("");
            match second {
                "invariant" => ClauseKind::LoopInvariant,
                "assigns" => ClauseKind::LoopAssigns,
                "variant" => ClauseKind::LoopVariant,
                _ => ClauseKind::Other,
            }
        }
        "behavior" => ClauseKind::Behavior,
        "logic" => ClauseKind::Logic,
        "predicate" => ClauseKind::Predicate,
        "ghost" => ClauseKind::Ghost,
        _ => ClauseKind::Other,
    }
}

/// Strip the comment delimiters and ACSL `@` gutter from an annotation
/// token, and drop `//` comments embedded in the annotation body.
fn annotation_body(token: &Token) -> String {
    let text = token.text.as_str();
    let inner = match token.class {
        TokenClass::AcslBlock => {
            let t = text.strip_prefix("/*@").unwrap_or(text);
            t.strip_suffix("*/").unwrap_or(t)
        }
        TokenClass::AcslLine => text.strip_prefix("//@").unwrap_or(text),
        _ => text,
    };
    let mut out = String::new();
    for line in inner.lines() {
        let trimmed = line.trim_start();
        // Leading '@' gutter, possibly repeated, as in "  @ requires p;".
        let without_gutter = trimmed.trim_start_matches('@');
        // Comments inside annotation bodies ("requires x; // why") carry no
        // clause content.
        let without_comment = match without_gutter.find("//") {
            Some(idx) => &without_gutter[..idx],
            None => without_gutter,
        };
        out.push_str(without_comment);
        out.push('\n');
    }
    out
}

/// Binder keywords whose head ends at a `;` that must not split the clause:
/// `\forall integer i, j; P`, `\exists integer i; P`, `\let x = e; body`.
const BINDER_KEYWORDS: &[&str] = &["\\forall", "\\exists", "\\lambda", "\\let"];

/// Split an annotation body into raw clause strings.
///
/// Clauses end at `;`, except that each quantifier/let binder consumes the
/// `;` terminating its binder list. A `behavior` header ends at its `:`
/// instead, so that the clauses inside the behavior count individually.
fn split_clauses(body: &str) -> Vec<String> {
    let mut clauses = Vec::new();
    let mut current = String::new();
    let mut pending_binders = 0usize;
    let bytes = body.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\\' {
            if let Some(keyword) = BINDER_KEYWORDS.iter().find(|k| body[i..].starts_with(**k)) {
                pending_binders += 1;
                current.push_str(keyword);
                i += keyword.len();
                continue;
            }
        }
        let c = body[i..].chars().next().expect("in-bounds char");
        match c {
            ';' if pending_binders > 0 => {
                pending_binders -= 1;
                current.push(c);
            }
            ';' => {
                clauses.push(std::mem::take(&mut current));
                pending_binders = 0;
            }
            ':' if current.trim_start().starts_with("behavior")
                // "::" would be ACSL's scope operator; a behavior label is a
                // plain identifier so a single ':' terminates the header.
                && bytes.get(i + 1) != Some(&b':') =>
            {
                clauses.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
        i += c.len_utf8();
    }
    if !current.trim().is_empty() {
        clauses.push(current);
    }
    clauses
        .into_iter()
        .map(|c| c.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|c| !c.is_empty())
        .collect()
}

fn owner_of(span: &Span, functions: &[ctokens::FunctionDef]) -> Option<String> {
    for f in functions {
        if span.byte_start >= f.body_start && span.byte_end <= f.body_end {
            return Some(f.name.clone());
        }
    }
    // Contract position: annotation precedes the function it specifies.
    functions
        .iter()
        .filter(|f| f.name_start >= span.byte_end)
        .min_by_key(|f| f.name_start)
        .map(|f| f.name.clone())
}

/// Extract every ACSL clause from annotated C, in source order.
pub fn extract_annotations(source: &str) -> Result<Vec<Annotation>, AcslError> {
    let tokens = ctokens::lex(source)?;
    let functions = ctokens::function_definitions(&tokens);
    let mut annotations = Vec::new();
    for token in tokens
        .iter()
        .filter(|t| matches!(t.class, TokenClass::AcslBlock | TokenClass::AcslLine))
    {
        let body = annotation_body(token);
        let terminated = body.trim_end().ends_with(';') || body.trim_end().ends_with(':');
        let clauses = split_clauses(&body);
        if clauses.is_empty() && !body.trim().is_empty() {
            return Err(AcslError::MalformedClause {
                line: token.span.line,
                text: body.trim().to_string(),
            });
        }
        for (idx, clause_text) in clauses.iter().enumerate() {
            let kind = classify_clause(clause_text);
            let last = idx + 1 == clauses.len();
            if kind == ClauseKind::Other && last && !terminated {
                // A trailing fragment with no recognizable keyword and no
                // terminating ';' is noise, not a clause.
                return Err(AcslError::MalformedClause {
                    line: token.span.line,
                    text: clause_text.clone(),
                });
            }
            annotations.push(Annotation {
                kind,
                clause_text: clause_text.clone(),
                enclosing_function: owner_of(&token.span, &functions),
                span: token.span,
            });
        }
    }
    Ok(annotations)
}

/// Count clauses per kind over a whole file.
pub fn count(source: &str) -> Result<CountRow, AcslError> {
    Ok(count_annotations(&extract_annotations(source)?))
}

/// Count clauses per kind over an already-extracted list.
pub fn count_annotations(annotations: &[Annotation]) -> CountRow {
    let mut row = CountRow::default();
    for a in annotations {
        row.add(a.kind);
    }
    row
}

/// Remove every ACSL annotation span, preserving code and plain comments.
///
/// When removal would butt two non-whitespace bytes together (annotations
/// glued between tokens), a single space keeps the surrounding tokens from
/// re-lexing differently.
pub fn strip_annotations(source: &str) -> Result<String, AcslError> {
    let tokens = ctokens::lex(source)?;
    let mut out = String::with_capacity(source.len());
    for token in &tokens {
        if matches!(token.class, TokenClass::AcslBlock | TokenClass::AcslLine) {
            let prev = out.chars().last();
            let next = source[token.span.byte_end..].chars().next();
            let glued = prev.is_some_and(|c| !c.is_whitespace())
                && next.is_some_and(|c| !c.is_whitespace());
            if glued {
                out.push(' ');
            }
            continue;
        }
        out.push_str(&token.text);
    }
    Ok(out)
}
