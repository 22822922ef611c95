//! Aggregation of generation records into count tables, heuristic
//! bug-mention flagging of reasoning traces, and CSV/Markdown emission.
//!
//! The flagger is assistive only: its output is a triage list for human
//! review, not a measurement. Whether a model "noticed" a bug is a human
//! judgment.

mod bugflags;
mod emit;

pub use bugflags::{
    evaluate_patterns, flag_bug_mentions, MatchedSnippet, PatternEvaluation, DEFAULT_BUG_PATTERNS,
};
pub use emit::{emit, EmitFormat};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::acsl::{ClauseKind, CountRow};
use crate::corpus::{Suite, VariantKind};
use crate::pipeline::{GenerationRecord, GenerationSet};

/// Which record dimensions the table groups on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GroupBy {
    pub set: bool,
    pub suite: bool,
    pub variant: bool,
}

impl GroupBy {
    pub const SET: GroupBy = GroupBy {
        set: true,
        suite: false,
        variant: false,
    };

    /// Parse a `set[,suite,variant]` list.
    pub fn parse(spec: &str) -> Result<GroupBy, String> {
        let mut group = GroupBy {
            set: false,
            suite: false,
            variant: false,
        };
        for field in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match field {
                "set" => group.set = true,
                "suite" => group.suite = true,
                "variant" => group.variant = true,
                other => {
                    return Err(format!(
                        "unknown group-by field {other:?} (expected set, suite, variant)"
                    ))
                }
            }
        }
        if group
            == (GroupBy {
                set: false,
                suite: false,
                variant: false,
            })
        {
            return Err("group-by needs at least one of set, suite, variant".into());
        }
        Ok(group)
    }
}

/// Record subset entering the aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordFilter {
    #[default]
    All,
    ValidOnly,
}

impl RecordFilter {
    pub fn parse(spec: &str) -> Result<RecordFilter, String> {
        match spec {
            "all" => Ok(RecordFilter::All),
            "valid-only" | "valid_only" => Ok(RecordFilter::ValidOnly),
            other => Err(format!(
                "unknown filter {other:?} (expected all or valid-only)"
            )),
        }
    }
}

/// Group key for one table row. Dimensions outside the grouping stay `None`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GroupKey {
    pub set: Option<GenerationSet>,
    pub suite: Option<Suite>,
    pub variant: Option<VariantKind>,
}

/// Aggregated counts for one group.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GroupCounts {
    pub records: u64,
    pub sums: CountRow,
}

impl GroupCounts {
    /// Mean clauses of a kind per record.
    pub fn mean(&self, kind: ClauseKind) -> f64 {
        if self.records == 0 {
            0.0
        } else {
            self.sums.get(kind) as f64 / self.records as f64
        }
    }
}

/// The aggregate table.
#[derive(Debug, Clone, Serialize)]
pub struct CountTable {
    pub group_by: GroupBy,
    pub filter: RecordFilter,
    pub rows: BTreeMap<GroupKey, GroupCounts>,
}

/// Aggregate records into per-group clause sums and means. `suites` maps
/// program ids to their suite tag; programs absent from the map group
/// under a `None` suite.
pub fn aggregate_counts(
    records: &[GenerationRecord],
    suites: &BTreeMap<String, Suite>,
    group_by: GroupBy,
    filter: RecordFilter,
) -> CountTable {
    let mut rows: BTreeMap<GroupKey, GroupCounts> = BTreeMap::new();
    for record in records {
        if filter == RecordFilter::ValidOnly && !record.validation.ok {
            continue;
        }
        let key = GroupKey {
            set: group_by.set.then_some(record.set),
            suite: if group_by.suite {
                suites.get(&record.program_id).copied()
            } else {
                None
            },
            variant: group_by.variant.then_some(record.variant_kind),
        };
        let group = rows.entry(key).or_default();
        group.records += 1;
        group.sums.merge(&record.counts);
    }
    CountTable {
        group_by,
        filter,
        rows,
    }
}
