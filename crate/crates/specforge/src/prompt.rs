//! Prompt templates and rendering.
//!
//! Templates are data files under `assets/prompts/`, embedded at compile
//! time so rendered output is byte-auditable against the stored files. The
//! three primary templates take a C program and, for the augmented
//! variants, raw symbolic tool output. The legacy templates replicate the
//! prompts of the earlier study and are unused by default.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::symbolic::{ContextKind, SymbolicContext};

/// Identifier of a stored prompt template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    Baseline,
    Pathcrawler,
    Eva,
    LegacyBaseline,
    LegacyPathcrawler,
    LegacyEva,
}

impl TemplateId {
    pub const ALL: [TemplateId; 6] = [
        TemplateId::Baseline,
        TemplateId::Pathcrawler,
        TemplateId::Eva,
        TemplateId::LegacyBaseline,
        TemplateId::LegacyPathcrawler,
        TemplateId::LegacyEva,
    ];

    /// The stored template body.
    pub fn body(self) -> &'static str {
        match self {
            TemplateId::Baseline => include_str!("../assets/prompts/baseline.txt"),
            TemplateId::Pathcrawler => include_str!("../assets/prompts/pathcrawler.txt"),
            TemplateId::Eva => include_str!("../assets/prompts/eva.txt"),
            TemplateId::LegacyBaseline => include_str!("../assets/prompts/legacy_baseline.txt"),
            TemplateId::LegacyPathcrawler => {
                include_str!("../assets/prompts/legacy_pathcrawler.txt")
            }
            TemplateId::LegacyEva => include_str!("../assets/prompts/legacy_eva.txt"),
        }
    }

    /// The symbolic-context kind this template embeds.
    pub fn required_context(self) -> ContextKind {
        match self {
            TemplateId::Baseline | TemplateId::LegacyBaseline => ContextKind::None,
            TemplateId::Pathcrawler | TemplateId::LegacyPathcrawler => ContextKind::Pathcrawler,
            TemplateId::Eva | TemplateId::LegacyEva => ContextKind::Eva,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::Baseline => "baseline",
            TemplateId::Pathcrawler => "pathcrawler",
            TemplateId::Eva => "eva",
            TemplateId::LegacyBaseline => "legacy_baseline",
            TemplateId::LegacyPathcrawler => "legacy_pathcrawler",
            TemplateId::LegacyEva => "legacy_eva",
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether and how the prompt directs the model when code may be buggy.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum IntentMode {
    #[default]
    Off,
    Implementation,
    Intent,
}

impl IntentMode {
    pub fn as_str(self) -> &'static str {
        match self {
            IntentMode::Off => "off",
            IntentMode::Implementation => "implementation",
            IntentMode::Intent => "intent",
        }
    }
}

impl fmt::Display for IntentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An extra numbered GOAL line appended when the mode is not `Off`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentDirective {
    pub mode: IntentMode,
    pub directive_text: String,
}

pub const DEFAULT_INTENT_TEXT: &str = "The provided code may contain bugs. If the implementation conflicts with the evident intent, generate annotations for the intended behavior, not the implemented behavior.";
pub const DEFAULT_IMPLEMENTATION_TEXT: &str = "The provided code may contain bugs. Generate annotations for the behavior as implemented, even where it conflicts with the evident intent.";

impl IntentDirective {
    pub fn off() -> Self {
        IntentDirective {
            mode: IntentMode::Off,
            directive_text: String::new(),
        }
    }

    /// Directive with the default wording for the mode.
    pub fn with_default_text(mode: IntentMode) -> Self {
        let directive_text = match mode {
            IntentMode::Off => String::new(),
            IntentMode::Implementation => DEFAULT_IMPLEMENTATION_TEXT.to_string(),
            IntentMode::Intent => DEFAULT_INTENT_TEXT.to_string(),
        };
        IntentDirective {
            mode,
            directive_text,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RenderError {
    #[error("template {template} needs a {required:?} context but got {got:?}")]
    ContextMismatch {
        template: TemplateId,
        required: ContextKind,
        got: ContextKind,
    },
    #[error("placeholder {0:?} left unresolved after substitution")]
    UnresolvedPlaceholder(String),
}

/// Render a template with program and context bindings, byte-exact
/// substitution into the stored body. A directive with mode other than
/// `Off` is appended as one more numbered GOAL line.
pub fn render(
    template: TemplateId,
    program: &str,
    context: &SymbolicContext,
    directive: &IntentDirective,
) -> Result<String, RenderError> {
    let required = template.required_context();
    if context.kind != required {
        return Err(RenderError::ContextMismatch {
            template,
            required,
            got: context.kind,
        });
    }

    let mut body = template.body().to_string();
    if directive.mode != IntentMode::Off {
        body = append_goal_line(&body, &directive.directive_text);
    }

    let context_text: Option<&str> = match context.kind {
        ContextKind::None => None,
        _ => Some(context.rendered_text.as_str()),
    };
    let bindings: Vec<(&str, Option<&str>)> = vec![
        ("{program_str}", Some(program)),
        ("{program}", Some(program)),
        ("{pathcrawler_str}", context_text),
        ("{csv}", context_text),
        ("{eva_str}", context_text),
        ("{eva}", context_text),
    ];

    // Single pass over the template: substituted text is never re-scanned,
    // so placeholder-shaped bytes inside a program or report stay verbatim.
    let mut rendered =
        String::with_capacity(body.len() + program.len() + context.rendered_text.len());
    let mut rest = body.as_str();
    while !rest.is_empty() {
        let next = bindings
            .iter()
            .filter_map(|(name, value)| rest.find(name).map(|at| (at, *name, *value)))
            .min_by_key(|(at, _, _)| *at);
        match next {
            Some((at, name, value)) => {
                let Some(value) = value else {
                    return Err(RenderError::UnresolvedPlaceholder(name.to_string()));
                };
                rendered.push_str(&rest[..at]);
                rendered.push_str(value);
                rest = &rest[at + name.len()..];
            }
            None => {
                rendered.push_str(rest);
                break;
            }
        }
    }
    Ok(rendered)
}

/// Insert `text` as the next numbered line of the GOALS block, or append it
/// at the end when the template has no such block.
fn append_goal_line(body: &str, text: &str) -> String {
    let lines: Vec<&str> = body.split('\n').collect();
    let mut goals_at = None;
    for (idx, line) in lines.iter().enumerate() {
        if line.trim() == "GOALS:" {
            goals_at = Some(idx);
            break;
        }
    }
    let Some(goals_idx) = goals_at else {
        let mut out = body.to_string();
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out.push_str(text);
        out.push('\n');
        return out;
    };

    let mut last_goal = goals_idx;
    let mut last_number = 0u32;
    for (idx, line) in lines.iter().enumerate().skip(goals_idx + 1) {
        let head: String = line.chars().take_while(|c| c.is_ascii_digit()).collect();
        if !head.is_empty() && line[head.len()..].starts_with('.') {
            last_goal = idx;
            last_number = head.parse().unwrap_or(last_number);
        } else if line.trim().is_empty() {
            continue;
        } else {
            break;
        }
    }

    let mut out: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
    out.insert(last_goal + 1, format!("{}. {}", last_number + 1, text));
    out.join("\n")
}

/// Model parameters that key the generation cache together with the prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub model: String,
    pub temperature: f64,
}

/// SHA-256 over model name, temperature in shortest decimal form, and the
/// prompt bytes, as a lowercase hex string. Stable across runs and
/// platforms.
pub fn digest(prompt: &str, params: &ModelParams) -> String {
    let mut hasher = Sha256::new();
    hasher.update(params.model.as_bytes());
    hasher.update(format_temperature(params.temperature).as_bytes());
    hasher.update(prompt.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Shortest decimal representation that round-trips the value: `0.7`, `1`.
fn format_temperature(t: f64) -> String {
    format!("{t}")
}
