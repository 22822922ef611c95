//! Extraction of the annotated program from a model answer.
//!
//! Answers wrap the final code in a markdown fence. The last block tagged
//! `c` wins; when no tagged block exists, the last untagged fence is used.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("answer contains no usable fenced code block")]
    NoCodeBlock,
}

/// Pull the annotated C source out of a model answer. Fence delimiters are
/// excluded and the trailing newline is normalized to exactly one.
pub fn extract_code_block(answer: &str) -> Result<String, ExtractError> {
    let mut blocks: Vec<(String, Vec<&str>)> = Vec::new();
    let mut current: Option<(String, Vec<&str>)> = None;

    for line in answer.lines() {
        let trimmed = line.trim_start();
        match &mut current {
            None => {
                if let Some(info) = trimmed.strip_prefix("```") {
                    current = Some((info.trim().to_string(), Vec::new()));
                }
            }
            Some((_, content)) => {
                if trimmed == "```" {
                    blocks.push(current.take().unwrap());
                } else {
                    content.push(line);
                }
            }
        }
    }

    let chosen = blocks
        .iter()
        .rev()
        .find(|(info, _)| info.split_whitespace().next() == Some("c"))
        .or_else(|| blocks.iter().rev().find(|(info, _)| info.is_empty()))
        .ok_or(ExtractError::NoCodeBlock)?;

    let mut code = chosen.1.join("\n");
    while code.ends_with('\n') {
        code.pop();
    }
    code.push('\n');
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_tagged_block() {
        assert_eq!(
            extract_code_block("text\n```c\nint f();\n```").unwrap(),
            "int f();\n"
        );
    }

    #[test]
    fn last_c_block_wins() {
        let answer =
            "reasoning:\n```c\nint old();\n```\nfinal version:\n```c\nint new_fn();\n```\n";
        assert_eq!(extract_code_block(answer).unwrap(), "int new_fn();\n");
    }

    #[test]
    fn non_c_blocks_skipped_in_favor_of_c() {
        let answer = "```csv\na,b\n```\n```c\nint f();\n```\n```json\n{}\n```\n";
        assert_eq!(extract_code_block(answer).unwrap(), "int f();\n");
    }

    #[test]
    fn untagged_fence_is_the_fallback() {
        let answer = "here:\n```\nint g();\n```\n";
        assert_eq!(extract_code_block(answer).unwrap(), "int g();\n");
    }

    #[test]
    fn tagged_non_c_only_is_no_code_block() {
        assert_eq!(
            extract_code_block("```python\nx = 1\n```\n"),
            Err(ExtractError::NoCodeBlock)
        );
    }

    #[test]
    fn zero_fences_is_no_code_block() {
        assert_eq!(
            extract_code_block("no code here, sorry"),
            Err(ExtractError::NoCodeBlock)
        );
    }

    #[test]
    fn unterminated_fence_does_not_count() {
        assert_eq!(
            extract_code_block("```c\nint f();"),
            Err(ExtractError::NoCodeBlock)
        );
    }

    #[test]
    fn trailing_newlines_normalized() {
        assert_eq!(
            extract_code_block("```c\nint f();\n\n\n```").unwrap(),
            "int f();\n"
        );
    }

    #[test]
    fn multiline_program_preserved() {
        let answer = "```c\n/*@ requires x > 0; */\nint f(int x) {\n  return x;\n}\n```";
        assert_eq!(
            extract_code_block(answer).unwrap(),
            "/*@ requires x > 0; */\nint f(int x) {\n  return x;\n}\n"
        );
    }
}
