//! Program corpus: manifest loading, controlled bug variants, and
//! anonymization.
//!
//! Bugs are explicit checked-in artifacts — either a unified diff or a
//! list of declarative mutation operations — so a variant can be rebuilt
//! byte for byte from the manifest alone.

mod anonymize;
mod patch;

pub use anonymize::{anonymize, AnonymizeOptions};
pub use patch::{Patch, PatchError};

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ctokens::{self, LexError, TokenClass};

/// Test-suite tag for a corpus entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Basic,
    Famous,
    Mirror,
    Unique,
    Pathcrawler,
}

impl Suite {
    /// Row label used in markdown reports.
    pub fn display_name(self) -> &'static str {
        match self {
            Suite::Basic => "Basic",
            Suite::Famous => "Famous",
            Suite::Mirror => "Mirror",
            Suite::Unique => "Unique",
            Suite::Pathcrawler => "Pathcrawler",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Basic => "basic",
            Suite::Famous => "famous",
            Suite::Mirror => "mirror",
            Suite::Unique => "unique",
            Suite::Pathcrawler => "pathcrawler",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One corpus entry: a single-file C program.
#[derive(Debug, Clone, Serialize)]
pub struct Program {
    pub id: String,
    pub source: String,
    pub suite: Suite,
    pub notes: String,
}

/// The four controlled variant kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Baseline,
    Buggy,
    Anonymized,
    BuggyAnonymized,
}

impl VariantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Baseline => "baseline",
            VariantKind::Buggy => "buggy",
            VariantKind::Anonymized => "anonymized",
            VariantKind::BuggyAnonymized => "buggy_anonymized",
        }
    }

    pub fn involves_bug(self) -> bool {
        matches!(self, VariantKind::Buggy | VariantKind::BuggyAnonymized)
    }

    pub fn involves_anonymization(self) -> bool {
        matches!(self, VariantKind::Anonymized | VariantKind::BuggyAnonymized)
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The bug-mutation operator vocabulary. The operator names classify the
/// bug; all of them locate one contiguous token run and substitute
/// replacement text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    OperatorSwap,
    OffByOne,
    IndexSwap,
    TokenReplace,
}

/// Where a mutation applies: a unique token pattern, or an exact position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MutationLocator {
    /// C fragment matched against consecutive code tokens, whitespace-insensitive.
    Pattern(String),
    /// 1-based line and column of the single token to replace.
    Position { line: usize, column: usize },
}

/// One declarative mutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationOp {
    pub op: MutationKind,
    pub locator: MutationLocator,
    pub replacement: String,
}

#[derive(Serialize, Deserialize)]
struct MutationOpWire {
    op: MutationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pattern: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<usize>,
    replacement: String,
}

impl Serialize for MutationOp {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire = match &self.locator {
            MutationLocator::Pattern(p) => MutationOpWire {
                op: self.op,
                pattern: Some(p.clone()),
                line: None,
                column: None,
                replacement: self.replacement.clone(),
            },
            MutationLocator::Position { line, column } => MutationOpWire {
                op: self.op,
                pattern: None,
                line: Some(*line),
                column: Some(*column),
                replacement: self.replacement.clone(),
            },
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MutationOp {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = MutationOpWire::deserialize(deserializer)?;
        let locator = match (wire.pattern, wire.line, wire.column) {
            (Some(p), None, None) => MutationLocator::Pattern(p),
            (None, Some(line), Some(column)) => MutationLocator::Position { line, column },
            _ => {
                return Err(serde::de::Error::custom(
                    "mutation needs either \"pattern\" or both \"line\" and \"column\"",
                ))
            }
        };
        Ok(MutationOp {
            op: wire.op,
            locator,
            replacement: wire.replacement,
        })
    }
}

/// A declared variant of one program.
#[derive(Debug, Clone, Serialize)]
pub struct VariantSpec {
    pub kind: VariantKind,
    /// Unified-diff text, loaded from the manifest's `patch_path`.
    pub patch: Option<String>,
    pub mutations: Vec<MutationOp>,
    pub anonymize_opts: AnonymizeOptions,
}

impl VariantSpec {
    pub fn baseline() -> Self {
        VariantSpec {
            kind: VariantKind::Baseline,
            patch: None,
            mutations: Vec::new(),
            anonymize_opts: AnonymizeOptions::default(),
        }
    }

    fn validate(&self) -> Result<(), String> {
        let has_patch = self.patch.is_some();
        let has_mutations = !self.mutations.is_empty();
        match self.kind {
            VariantKind::Baseline | VariantKind::Anonymized => {
                if has_patch || has_mutations {
                    return Err(format!(
                        "{} variant must not declare a patch or mutations",
                        self.kind
                    ));
                }
            }
            VariantKind::Buggy | VariantKind::BuggyAnonymized => {
                if has_patch == has_mutations {
                    return Err(format!(
                        "{} variant needs exactly one of patch or mutations",
                        self.kind
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A materialized variant: concrete source text plus the rename map when
/// anonymization was involved.
#[derive(Debug, Clone, Serialize)]
pub struct ProgramVariant {
    pub program_id: String,
    pub variant_kind: VariantKind,
    pub source: String,
    pub rename_map: Vec<(String, String)>,
}

/// The loaded corpus: programs plus declared variants.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub programs: Vec<Program>,
    pub variants: Vec<(String, VariantSpec)>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("manifest syntax: {0}")]
    ManifestSyntax(String),
    #[error("missing source file {path}: {cause}")]
    MissingSource { path: PathBuf, cause: String },
    #[error("duplicate program id {0:?}")]
    DuplicateId(String),
    #[error("duplicate variant {kind} for program {program_id:?}")]
    DuplicateVariant {
        program_id: String,
        kind: VariantKind,
    },
    #[error("variant references unknown program {0:?}")]
    UnknownProgram(String),
    #[error("program {id:?} is invalid: {reason}")]
    InvalidProgram { id: String, reason: String },
    #[error("patch conflict: {0}")]
    PatchConflict(#[from] PatchError),
    #[error("mutation locator matched {matches} token runs (need exactly 1)")]
    AmbiguousLocator { matches: usize },
    #[error("lex failure: {0}")]
    LexFailure(#[from] LexError),
    #[error("declared bug for {program_id:?} does not change any code token")]
    IneffectiveBug { program_id: String },
}

#[derive(Deserialize)]
struct ManifestProgram {
    id: String,
    path: String,
    suite: Suite,
    #[serde(default)]
    notes: String,
}

#[derive(Deserialize)]
struct ManifestVariant {
    program_id: String,
    kind: VariantKind,
    #[serde(default)]
    patch_path: Option<String>,
    #[serde(default)]
    mutations: Vec<MutationOp>,
    #[serde(default)]
    anonymize_opts: Option<AnonymizeOptions>,
}

#[derive(Deserialize)]
struct Manifest {
    programs: Vec<ManifestProgram>,
    #[serde(default)]
    variants: Vec<ManifestVariant>,
}

/// Load and validate a corpus manifest. Source and patch paths resolve
/// relative to the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Corpus, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::MissingSource {
        path: path.to_path_buf(),
        cause: e.to_string(),
    })?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| CorpusError::ManifestSyntax(e.to_string()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let mut programs = Vec::new();
    for entry in manifest.programs {
        if programs.iter().any(|p: &Program| p.id == entry.id) {
            return Err(CorpusError::DuplicateId(entry.id));
        }
        let source_path = base.join(&entry.path);
        let source =
            std::fs::read_to_string(&source_path).map_err(|e| CorpusError::MissingSource {
                path: source_path.clone(),
                cause: e.to_string(),
            })?;
        if source.trim().is_empty() {
            return Err(CorpusError::InvalidProgram {
                id: entry.id,
                reason: "empty source".into(),
            });
        }
        let tokens = ctokens::lex(&source)?;
        if ctokens::function_definitions(&tokens).is_empty() {
            return Err(CorpusError::InvalidProgram {
                id: entry.id,
                reason: "source contains no function definition".into(),
            });
        }
        programs.push(Program {
            id: entry.id,
            source,
            suite: entry.suite,
            notes: entry.notes,
        });
    }

    let mut variants = Vec::new();
    for entry in manifest.variants {
        if !programs.iter().any(|p| p.id == entry.program_id) {
            return Err(CorpusError::UnknownProgram(entry.program_id));
        }
        if variants.iter().any(|(id, spec): &(String, VariantSpec)| {
            *id == entry.program_id && spec.kind == entry.kind
        }) {
            return Err(CorpusError::DuplicateVariant {
                program_id: entry.program_id,
                kind: entry.kind,
            });
        }
        let patch = match entry.patch_path {
            Some(rel) => {
                let patch_path = base.join(&rel);
                Some(std::fs::read_to_string(&patch_path).map_err(|e| {
                    CorpusError::MissingSource {
                        path: patch_path.clone(),
                        cause: e.to_string(),
                    }
                })?)
            }
            None => None,
        };
        let spec = VariantSpec {
            kind: entry.kind,
            patch,
            mutations: entry.mutations,
            anonymize_opts: entry.anonymize_opts.unwrap_or_default(),
        };
        spec.validate().map_err(CorpusError::ManifestSyntax)?;
        variants.push((entry.program_id, spec));
    }

    Ok(Corpus { programs, variants })
}

impl Corpus {
    pub fn program(&self, id: &str) -> Option<&Program> {
        self.programs.iter().find(|p| p.id == id)
    }

    /// Variant kinds to plan for a program: the implicit baseline plus
    /// whatever the manifest declares, in kind order.
    pub fn variant_kinds_for(&self, program_id: &str) -> Vec<VariantKind> {
        let mut kinds = vec![VariantKind::Baseline];
        for (id, spec) in &self.variants {
            if id == program_id && !kinds.contains(&spec.kind) {
                kinds.push(spec.kind);
            }
        }
        kinds.sort();
        kinds
    }

    pub fn variant_spec(&self, program_id: &str, kind: VariantKind) -> Option<&VariantSpec> {
        if kind == VariantKind::Baseline {
            return None;
        }
        self.variants
            .iter()
            .find(|(id, spec)| id == program_id && spec.kind == kind)
            .map(|(_, s)| s)
    }

    /// Materialize a (program, kind) pair. Baseline needs no declared spec.
    pub fn materialize(
        &self,
        program_id: &str,
        kind: VariantKind,
    ) -> Result<ProgramVariant, CorpusError> {
        let program = self
            .program(program_id)
            .ok_or_else(|| CorpusError::UnknownProgram(program_id.to_string()))?;
        let spec = match (kind, self.variant_spec(program_id, kind)) {
            (VariantKind::Baseline, _) => VariantSpec::baseline(),
            (_, Some(spec)) => spec.clone(),
            (_, None) => return Err(CorpusError::UnknownProgram(format!("{program_id}/{kind}"))),
        };
        materialize_variant(program, &spec)
    }
}

/// Replace the unique token run matched by the locator with the
/// replacement text.
fn apply_mutation(source: &str, op: &MutationOp) -> Result<String, CorpusError> {
    let tokens = ctokens::lex(source)?;
    let code: Vec<&ctokens::Token> = tokens
        .iter()
        .filter(|t| t.class == TokenClass::Code)
        .collect();

    let (start_byte, end_byte) = match &op.locator {
        MutationLocator::Pattern(pattern) => {
            let pattern_tokens = ctokens::lex(pattern)?;
            let needle: Vec<&str> = pattern_tokens
                .iter()
                .filter(|t| t.class == TokenClass::Code)
                .map(|t| t.text.as_str())
                .collect();
            if needle.is_empty() {
                return Err(CorpusError::AmbiguousLocator { matches: 0 });
            }
            let mut found = Vec::new();
            for window_start in 0..code.len().saturating_sub(needle.len() - 1) {
                if code[window_start..window_start + needle.len()]
                    .iter()
                    .zip(&needle)
                    .all(|(t, n)| t.text == **n)
                {
                    found.push((
                        code[window_start].span.byte_start,
                        code[window_start + needle.len() - 1].span.byte_end,
                    ));
                }
            }
            if found.len() != 1 {
                return Err(CorpusError::AmbiguousLocator {
                    matches: found.len(),
                });
            }
            found[0]
        }
        MutationLocator::Position { line, column } => {
            let token = code
                .iter()
                .find(|t| t.span.line == *line && t.span.col == *column)
                .ok_or(CorpusError::AmbiguousLocator { matches: 0 })?;
            (token.span.byte_start, token.span.byte_end)
        }
    };

    let mut out = String::with_capacity(source.len());
    out.push_str(&source[..start_byte]);
    out.push_str(&op.replacement);
    out.push_str(&source[end_byte..]);
    ctokens::lex(&out)?;
    Ok(out)
}

/// Build the concrete source for one variant of a program.
pub fn materialize_variant(
    program: &Program,
    spec: &VariantSpec,
) -> Result<ProgramVariant, CorpusError> {
    spec.validate().map_err(CorpusError::ManifestSyntax)?;

    let mut source = program.source.clone();
    if spec.kind.involves_bug() {
        if let Some(patch_text) = &spec.patch {
            let patch = Patch::parse(patch_text)?;
            source = patch.apply(&source)?;
        }
        for op in &spec.mutations {
            source = apply_mutation(&source, op)?;
        }
        ctokens::lex(&source)?;
        if ctokens::code_token_equivalent(&program.source, &source)?.equal {
            return Err(CorpusError::IneffectiveBug {
                program_id: program.id.clone(),
            });
        }
    }

    let mut rename_map = Vec::new();
    if spec.kind.involves_anonymization() {
        let (renamed, map) = anonymize(&source, &spec.anonymize_opts)?;
        source = renamed;
        rename_map = map;
    }

    if spec.kind == VariantKind::Baseline {
        debug_assert_eq!(source, program.source);
    }

    Ok(ProgramVariant {
        program_id: program.id.clone(),
        variant_kind: spec.kind,
        source,
        rename_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn program(id: &str, source: &str) -> Program {
        Program {
            id: id.into(),
            source: source.into(),
            suite: Suite::Basic,
            notes: String::new(),
        }
    }

    const PALINDROME: &str = "int isPalindrome(const char* str) {\n    int left = 0, right = strlen(str) - 1;\n    while (left < right) { left++; right--; }\n    return 1;\n}\n";

    #[test]
    fn baseline_is_byte_identical() {
        let p = program("pal", PALINDROME);
        let v = materialize_variant(&p, &VariantSpec::baseline()).unwrap();
        assert_eq!(v.source, PALINDROME);
        assert!(v.rename_map.is_empty());
    }

    #[test]
    fn token_replace_reproduces_buggy_form() {
        let p = program("pal", PALINDROME);
        let spec = VariantSpec {
            kind: VariantKind::Buggy,
            patch: None,
            mutations: vec![MutationOp {
                op: MutationKind::TokenReplace,
                locator: MutationLocator::Pattern("strlen(str) - 1".into()),
                replacement: "strlen(str)".into(),
            }],
            anonymize_opts: AnonymizeOptions::default(),
        };
        let v = materialize_variant(&p, &spec).unwrap();
        assert!(v.source.contains("right = strlen(str);"));
        assert!(
            !ctokens::code_token_equivalent(PALINDROME, &v.source)
                .unwrap()
                .equal
        );
    }

    #[test]
    fn ambiguous_pattern_rejected() {
        let p = program("x", "int f(void) { return 1 + 1 + 1; }\n");
        let spec = VariantSpec {
            kind: VariantKind::Buggy,
            patch: None,
            mutations: vec![MutationOp {
                op: MutationKind::OffByOne,
                locator: MutationLocator::Pattern("+ 1".into()),
                replacement: "+ 2".into(),
            }],
            anonymize_opts: AnonymizeOptions::default(),
        };
        let err = materialize_variant(&p, &spec).unwrap_err();
        assert!(matches!(err, CorpusError::AmbiguousLocator { matches: 2 }));
    }

    #[test]
    fn position_locator_replaces_single_token() {
        let src = "int f(int a) {\n  return a < 10;\n}\n";
        let op = MutationOp {
            op: MutationKind::OperatorSwap,
            locator: MutationLocator::Position {
                line: 2,
                column: 12,
            },
            replacement: "<=".into(),
        };
        let out = apply_mutation(src, &op).unwrap();
        assert_eq!(out, "int f(int a) {\n  return a <= 10;\n}\n");
    }

    #[test]
    fn ineffective_bug_rejected() {
        let p = program("x", "int f(void) { return 0; } // note\n");
        let spec = VariantSpec {
            kind: VariantKind::Buggy,
            patch: None,
            mutations: vec![MutationOp {
                op: MutationKind::TokenReplace,
                locator: MutationLocator::Pattern("0".into()),
                replacement: "0".into(),
            }],
            anonymize_opts: AnonymizeOptions::default(),
        };
        assert!(matches!(
            materialize_variant(&p, &spec),
            Err(CorpusError::IneffectiveBug { .. })
        ));
    }

    #[test]
    fn buggy_needs_patch_xor_mutations() {
        let p = program("x", "int f(void) { return 0; }\n");
        let spec = VariantSpec {
            kind: VariantKind::Buggy,
            patch: None,
            mutations: vec![],
            anonymize_opts: AnonymizeOptions::default(),
        };
        assert!(matches!(
            materialize_variant(&p, &spec),
            Err(CorpusError::ManifestSyntax(_))
        ));
    }

    #[test]
    fn mutation_op_wire_format_round_trips() {
        let op = MutationOp {
            op: MutationKind::TokenReplace,
            locator: MutationLocator::Pattern("a + b".into()),
            replacement: "a - b".into(),
        };
        let json = serde_json::to_string(&op).unwrap();
        let back: MutationOp = serde_json::from_str(&json).unwrap();
        assert_eq!(op, back);
        let err = serde_json::from_str::<MutationOp>(r#"{"op":"off_by_one","replacement":"1"}"#);
        assert!(err.is_err());
    }
}
