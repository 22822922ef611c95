//! Code-unchanged validation of extracted answers.
//!
//! A valid generation lexes, is code-token equivalent to the prompted
//! source, and contains at least one ACSL clause. Failures accumulate;
//! nothing short-circuits except where a lex failure makes the dependent
//! checks meaningless.

use serde::{Deserialize, Serialize};

use crate::acsl;
use crate::ctokens;

/// Location and text of one side of a code divergence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceToken {
    pub text: String,
    pub line: usize,
    pub col: usize,
}

/// The individual validation failures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationFailure {
    /// The answer had no extractable code block.
    NoCodeBlock,
    /// The model edited the code; the first differing token pair.
    CodeEdited {
        original: Option<DivergenceToken>,
        generated: Option<DivergenceToken>,
    },
    /// The returned program carries no annotations.
    ZeroAnnotations,
    /// The returned program does not lex (or its annotations are malformed).
    LexFailure { message: String },
}

/// Outcome of validating one generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct ValidationResult {
    pub ok: bool,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationResult {
    pub fn from_failures(failures: Vec<ValidationFailure>) -> Self {
        ValidationResult {
            ok: failures.is_empty(),
            failures,
        }
    }

    /// The record for an answer with no code block.
    pub fn no_code_block() -> Self {
        ValidationResult::from_failures(vec![ValidationFailure::NoCodeBlock])
    }
}

fn divergence_token(token: Option<&ctokens::Token>) -> Option<DivergenceToken> {
    token.map(|t| DivergenceToken {
        text: t.text.clone(),
        line: t.span.line,
        col: t.span.col,
    })
}

/// Validate an extracted program against the source that was prompted.
pub fn validate(original: &str, extracted: &str) -> ValidationResult {
    let mut failures = Vec::new();

    if let Err(e) = ctokens::lex(extracted) {
        failures.push(ValidationFailure::LexFailure {
            message: e.to_string(),
        });
        return ValidationResult::from_failures(failures);
    }

    match ctokens::code_token_equivalent(original, extracted) {
        Ok(eq) if eq.equal => {}
        Ok(eq) => {
            let d = eq
                .first_divergence
                .expect("unequal comparison reports a divergence");
            failures.push(ValidationFailure::CodeEdited {
                original: divergence_token(d.left.as_ref()),
                generated: divergence_token(d.right.as_ref()),
            });
        }
        Err(e) => failures.push(ValidationFailure::LexFailure {
            message: e.to_string(),
        }),
    }

    match acsl::count(extracted) {
        Ok(row) if row.total == 0 => failures.push(ValidationFailure::ZeroAnnotations),
        Ok(_) => {}
        Err(e) => failures.push(ValidationFailure::LexFailure {
            message: e.to_string(),
        }),
    }

    ValidationResult::from_failures(failures)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORIGINAL: &str = "int f(int x) {\n  return x + 1;\n}\n";

    #[test]
    fn annotated_copy_is_ok() {
        let annotated = "/*@ requires x < 100; */\nint f(int x) {\n  return x + 1;\n}\n";
        let result = validate(ORIGINAL, annotated);
        assert!(result.ok);
        assert!(result.failures.is_empty());
    }

    #[test]
    fn unannotated_echo_is_zero_annotations() {
        let result = validate(ORIGINAL, ORIGINAL);
        assert!(!result.ok);
        assert_eq!(result.failures, vec![ValidationFailure::ZeroAnnotations]);
    }

    #[test]
    fn edited_code_reports_divergence() {
        let edited = "/*@ requires x < 100; */\nint f(int x) {\n  return x - 1;\n}\n";
        let result = validate(ORIGINAL, edited);
        assert!(!result.ok);
        match &result.failures[0] {
            ValidationFailure::CodeEdited {
                original,
                generated,
            } => {
                assert_eq!(original.as_ref().unwrap().text, "+");
                assert_eq!(generated.as_ref().unwrap().text, "-");
            }
            other => panic!("expected CodeEdited, got {other:?}"),
        }
    }

    #[test]
    fn failures_accumulate() {
        // Edited and unannotated at once: both failures recorded.
        let edited_bare = "int f(int x) {\n  return x - 1;\n}\n";
        let result = validate(ORIGINAL, edited_bare);
        assert_eq!(result.failures.len(), 2);
        assert!(matches!(
            result.failures[0],
            ValidationFailure::CodeEdited { .. }
        ));
        assert_eq!(result.failures[1], ValidationFailure::ZeroAnnotations);
    }

    #[test]
    fn unlexable_output_is_lex_failure() {
        let result = validate(ORIGINAL, "int f( /* unterminated\n");
        assert!(!result.ok);
        assert_eq!(result.failures.len(), 1);
        assert!(matches!(
            result.failures[0],
            ValidationFailure::LexFailure { .. }
        ));
    }
}
