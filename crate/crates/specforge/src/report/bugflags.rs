//! Heuristic flagging of reasoning traces that may mention a bug.
//!
//! Matches are sentence-level and case-insensitive. The output is a
//! candidate list for human review; it never claims a bug was noticed.

use serde::Serialize;

/// Patterns shipped as the config default.
pub const DEFAULT_BUG_PATTERNS: &[&str] = &[
    "bug",
    "incorrect",
    "wrong",
    "off-by-one",
    "should be",
    "the code as written",
];

/// One sentence matched by one pattern.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchedSnippet {
    /// The pattern that hit.
    pub pattern_id: String,
    /// The full sentence, exactly as sliced from the reasoning text.
    pub sentence: String,
    /// Byte span of the sentence within the reasoning text.
    pub byte_start: usize,
    pub byte_end: usize,
}

/// Split text into sentence spans: maximal runs ending at `.`, `!` or `?`
/// followed by whitespace (or end of text), or at blank-line boundaries.
fn sentence_spans(text: &str) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        let terminator = matches!(b, b'.' | b'!' | b'?')
            && bytes.get(i + 1).is_none_or(|n| n.is_ascii_whitespace());
        let paragraph_break = b == b'\n' && bytes.get(i + 1) == Some(&b'\n');
        if terminator || paragraph_break {
            let end = if terminator { i + 1 } else { i };
            if end > start {
                spans.push((start, end));
            }
            // Skip the whitespace run to the next sentence start.
            i = end;
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            start = i;
            continue;
        }
        i += 1;
    }
    if start < bytes.len() {
        let tail = text[start..].trim_end();
        if !tail.is_empty() {
            spans.push((start, start + tail.len()));
        }
    }
    spans
}

/// Scan a reasoning trace for sentences containing any of the patterns,
/// case-insensitively. Spans index into the original text.
pub fn flag_bug_mentions(reasoning: &str, patterns: &[String]) -> Vec<MatchedSnippet> {
    let mut snippets = Vec::new();
    for (start, end) in sentence_spans(reasoning) {
        let sentence = &reasoning[start..end];
        let lowered = sentence.to_ascii_lowercase();
        for pattern in patterns {
            if lowered.contains(&pattern.to_ascii_lowercase()) {
                snippets.push(MatchedSnippet {
                    pattern_id: pattern.clone(),
                    sentence: sentence.to_string(),
                    byte_start: start,
                    byte_end: end,
                });
            }
        }
    }
    snippets
}

/// Precision/recall of the pattern set against hand-labeled traces.
/// Reported, never asserted: the labels are the oracle, the patterns are
/// the heuristic under measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternEvaluation {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
}

pub fn evaluate_patterns(labeled: &[(String, bool)], patterns: &[String]) -> PatternEvaluation {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for (text, mentions_bug) in labeled {
        let flagged = !flag_bug_mentions(text, patterns).is_empty();
        match (flagged, mentions_bug) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    PatternEvaluation {
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        precision,
        recall,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn patterns() -> Vec<String> {
        DEFAULT_BUG_PATTERNS.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn flags_incorrect_mention() {
        let trace =
            "So right starts at 3. Oh, the original code is incorrect here. We annotate as given.";
        let flags = flag_bug_mentions(trace, &patterns());
        assert!(flags
            .iter()
            .any(|f| f.sentence.contains("the original code is incorrect here")));
    }

    #[test]
    fn bubble_sort_is_not_a_bug() {
        let flags = flag_bug_mentions("This is a standard bubble sort.", &patterns());
        assert!(flags.is_empty());
    }

    #[test]
    fn span_slices_back_to_the_sentence() {
        let trace = "First sentence. There is a bug here! Third sentence.";
        for flag in flag_bug_mentions(trace, &patterns()) {
            assert_eq!(&trace[flag.byte_start..flag.byte_end], flag.sentence);
        }
    }

    #[test]
    fn matching_is_case_insensitive() {
        let flags = flag_bug_mentions("The code as WRITTEN is suspicious.", &patterns());
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].pattern_id, "the code as written");
    }

    #[test]
    fn decimal_points_do_not_split_sentences() {
        let trace = "The value 2.5 should be 3.5 in this branch.";
        let flags = flag_bug_mentions(trace, &patterns());
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].sentence, trace);
    }

    #[test]
    fn one_sentence_can_match_multiple_patterns() {
        let trace = "This looks wrong, maybe an off-by-one bug.";
        let flags = flag_bug_mentions(trace, &patterns());
        let hit_patterns: Vec<&str> = flags.iter().map(|f| f.pattern_id.as_str()).collect();
        assert!(hit_patterns.contains(&"wrong"));
        assert!(hit_patterns.contains(&"off-by-one"));
        assert!(hit_patterns.contains(&"bug"));
    }

    #[test]
    fn evaluation_counts() {
        let labeled = vec![
            ("There is a bug in the loop.".to_string(), true),
            ("Standard implementation, nothing odd.".to_string(), false),
            ("The comparison is inverted.".to_string(), true),
        ];
        let eval = evaluate_patterns(&labeled, &patterns());
        assert_eq!(eval.true_positives, 1);
        assert_eq!(eval.false_positives, 0);
        assert_eq!(eval.false_negatives, 1);
        assert!(eval.precision > 0.99);
        assert!((eval.recall - 0.5).abs() < 1e-9);
    }
}
