//! Normalized symbolic-analysis context: EVA report parsing, PathCrawler
//! table parsing, and optional invocation of the external tools.

mod eva;
mod pathcrawler;
mod tool;

pub use eva::{parse_eva_report, AlarmCategory, EvaAlarm, EvaParseError, EvaReport, EvaSummary};
pub use pathcrawler::{
    parse_pathcrawler_csv, PcParseError, PcRow, PcTable, RaggedRowPolicy, Verdict,
};
pub use tool::{run_external_tool, ToolConfig, ToolError, ToolKind};

use serde::Serialize;

/// Which kind of symbolic context a prompt carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextKind {
    None,
    Eva,
    Pathcrawler,
}

/// Parsed form of a context, when parsing succeeded.
#[derive(Debug, Clone, Serialize)]
pub enum ParsedContext {
    Eva(EvaReport),
    Pathcrawler(PcTable),
}

/// A symbolic context ready to embed in a prompt. `rendered_text` is the
/// exact text substituted into the template — always raw tool output, never
/// the parsed form.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolicContext {
    pub kind: ContextKind,
    pub rendered_text: String,
    pub parsed: Option<ParsedContext>,
}

impl SymbolicContext {
    pub fn none() -> Self {
        SymbolicContext {
            kind: ContextKind::None,
            rendered_text: String::new(),
            parsed: None,
        }
    }

    /// EVA context; the text must parse as an EVA report.
    pub fn eva(text: &str) -> Result<Self, EvaParseError> {
        let report = parse_eva_report(text)?;
        Ok(SymbolicContext {
            kind: ContextKind::Eva,
            rendered_text: text.to_string(),
            parsed: Some(ParsedContext::Eva(report)),
        })
    }

    /// PathCrawler context; the text must parse under the given policy.
    pub fn pathcrawler(text: &str, policy: RaggedRowPolicy) -> Result<Self, PcParseError> {
        let table = parse_pathcrawler_csv(text, policy)?;
        Ok(SymbolicContext {
            kind: ContextKind::Pathcrawler,
            rendered_text: text.to_string(),
            parsed: Some(ParsedContext::Pathcrawler(table)),
        })
    }
}
