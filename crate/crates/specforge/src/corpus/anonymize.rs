//! Identifier anonymization: rename user-defined functions to `f1, f2, …`
//! in textual declaration order, leaving `main` and externally declared
//! functions untouched.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ctokens::{self, LexError, TokenClass};

/// Options for [`anonymize`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnonymizeOptions {
    /// Also remove every plain (non-ACSL) comment.
    #[serde(default)]
    pub strip_comments: bool,
}

/// Rename every function defined in the file (definition, prototypes, and
/// call sites) to `f<N>` by definition order. Functions that are only
/// called, never defined here — standard library calls, analysis stubs —
/// keep their names, as does `main`. Non-identifier tokens are preserved
/// byte for byte.
pub fn anonymize(
    source: &str,
    opts: &AnonymizeOptions,
) -> Result<(String, Vec<(String, String)>), LexError> {
    let tokens = ctokens::lex(source)?;
    let defs = ctokens::function_definitions(&tokens);

    let mut rename_map: Vec<(String, String)> = Vec::new();
    let mut renames: BTreeMap<String, String> = BTreeMap::new();
    let mut counter = 0usize;
    for def in &defs {
        if def.name == "main" || renames.contains_key(&def.name) {
            continue;
        }
        counter += 1;
        let placeholder = format!("f{counter}");
        renames.insert(def.name.clone(), placeholder.clone());
        rename_map.push((def.name.clone(), placeholder));
    }

    let mut out = String::with_capacity(source.len());
    for token in &tokens {
        match token.class {
            TokenClass::Code => match renames.get(&token.text) {
                Some(placeholder) => out.push_str(placeholder),
                None => out.push_str(&token.text),
            },
            TokenClass::Comment if opts.strip_comments => {
                let prev = out.chars().last();
                let next = source[token.span.byte_end..].chars().next();
                if prev.is_some_and(|c| !c.is_whitespace())
                    && next.is_some_and(|c| !c.is_whitespace())
                {
                    out.push(' ');
                }
            }
            _ => out.push_str(&token.text),
        }
    }
    Ok((out, rename_map))
}
