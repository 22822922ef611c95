//! Fixture-driven checks beyond the acceptance gate: clause extraction on
//! the reference listings, corpus manifest loading, variant
//! materialization, and anonymization of multi-function programs.

use std::path::{Path, PathBuf};

use specforge::acsl::{self, ClauseKind};
use specforge::corpus::{self, AnonymizeOptions, CorpusError, VariantKind};
use specforge::ctokens::{self, TokenClass};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("fixture {rel}: {e}"))
}

#[test]
fn bsearch_has_exactly_two_annotation_blocks() {
    let tokens = ctokens::lex(&read("annotated/bsearch_baseline.c")).unwrap();
    let blocks = tokens
        .iter()
        .filter(|t| t.class == TokenClass::AcslBlock)
        .count();
    let lines = tokens
        .iter()
        .filter(|t| t.class == TokenClass::AcslLine)
        .count();
    assert_eq!((blocks, lines), (2, 0));
}

#[test]
fn prelim_bsearch_statement_level_annotations() {
    // The older-model output annotates nearly every statement; a good
    // workout for per-clause counting and the //@ line form.
    let row = acsl::count(&read("annotated/bsearch_prelim.c")).unwrap();
    assert_eq!(row.get(ClauseKind::Requires), 2);
    assert_eq!(row.get(ClauseKind::Ensures), 1);
    assert_eq!(row.get(ClauseKind::Assigns), 11);
    assert_eq!(row.get(ClauseKind::Assert), 1);
    assert_eq!(row.get(ClauseKind::LoopInvariant), 1);
    assert_eq!(row.get(ClauseKind::LoopAssigns), 1);
    assert_eq!(row.get(ClauseKind::LoopVariant), 1);
    assert_eq!(row.total, 18);
}

#[test]
fn apache_annotations_attribute_to_their_functions() {
    let annotations = acsl::extract_annotations(&read("annotated/apache_pc.c")).unwrap();
    let row = acsl::count_annotations(&annotations);
    assert_eq!(row.get(ClauseKind::Requires), 3);
    assert_eq!(row.get(ClauseKind::Ensures), 2);
    assert_eq!(row.get(ClauseKind::Assigns), 1);
    assert_eq!(row.get(ClauseKind::LoopInvariant), 2);
    assert_eq!(row.get(ClauseKind::LoopAssigns), 2);

    let owner_of = |needle: &str| {
        annotations
            .iter()
            .find(|a| a.clause_text.contains(needle))
            .and_then(|a| a.enclosing_function.clone())
    };
    assert_eq!(owner_of("\\valid(s)").as_deref(), Some("mystrlen"));
    assert_eq!(owner_of("n >= 0").as_deref(), Some("mystrncmp"));
    assert_eq!(owner_of("scheme >= 0").as_deref(), Some("testme"));
    assert_eq!(owner_of("\\valid(s+i)").as_deref(), Some("mystrlen"));
}

#[test]
fn testshiftrt_comment_heavy_block_counts_five_ensures() {
    let row = acsl::count(&read("annotated/testshiftrt_pc.c")).unwrap();
    assert_eq!(row.get(ClauseKind::Ensures), 5);
    assert_eq!(row.total, 5);
}

#[test]
fn labels_tritype_counts_and_owner() {
    let annotations = acsl::extract_annotations(&read("annotated/labels_tritype_eva.c")).unwrap();
    let row = acsl::count_annotations(&annotations);
    assert_eq!(row.get(ClauseKind::Requires), 1);
    assert_eq!(row.get(ClauseKind::Ensures), 1);
    assert_eq!(row.get(ClauseKind::Assigns), 1);
    assert_eq!(row.get(ClauseKind::Assert), 3);
    assert!(annotations
        .iter()
        .all(|a| a.enclosing_function.as_deref() == Some("testme")));
}

#[test]
fn buggy_palindrome_spec_counts_with_quantifiers() {
    // The reference contract uses \exists/\forall binders whose interior
    // semicolons must not split the clauses.
    let row = acsl::count(&read("annotated/palindrome_buggy_spec.c")).unwrap();
    assert_eq!(row.get(ClauseKind::Requires), 1);
    assert_eq!(row.get(ClauseKind::Ensures), 1);
    assert_eq!(row.get(ClauseKind::Assigns), 1);
    assert_eq!(row.total, 3);
}

#[test]
fn strip_recovers_the_unannotated_sources() {
    for (annotated, original) in [
        ("annotated/bsearch_baseline.c", "programs/bsearch.c"),
        ("annotated/tritype_baseline.c", "programs/tritype.c"),
        ("annotated/alias5_eva.c", "programs/alias5.c"),
        ("annotated/apache_pc.c", "programs/apache.c"),
    ] {
        let stripped = acsl::strip_annotations(&read(annotated)).unwrap();
        let eq = ctokens::code_token_equivalent(&stripped, &read(original)).unwrap();
        assert!(
            eq.equal,
            "{annotated} stripped != {original}: {:?}",
            eq.first_divergence
        );
    }
}

#[test]
fn manifest_loads_and_materializes_the_declared_variants() {
    let corpus = corpus::load_manifest(&fixture("corpus/manifest.json")).unwrap();
    assert_eq!(corpus.programs.len(), 5);

    // Token-replace mutation reproduces the reference buggy palindrome:
    // right starts at strlen(str) instead of strlen(str) - 1.
    let buggy = corpus
        .materialize("palindrome", VariantKind::Buggy)
        .unwrap();
    assert!(buggy.source.contains("right = strlen(str);"));
    assert!(
        !ctokens::code_token_equivalent(
            &corpus.program("palindrome").unwrap().source,
            &buggy.source
        )
        .unwrap()
        .equal
    );

    // The checked-in diff produces exactly the mutated Levenshtein source.
    let mutated = corpus
        .materialize("levenshtein", VariantKind::Buggy)
        .unwrap();
    assert_eq!(mutated.source, read("programs/levenshtein_mutated.c"));

    // Baseline materialization is byte-identical.
    let baseline = corpus
        .materialize("bsearch", VariantKind::Baseline)
        .unwrap();
    assert_eq!(baseline.source, corpus.program("bsearch").unwrap().source);

    // Buggy + anonymized composes.
    let both = corpus
        .materialize("palindrome", VariantKind::BuggyAnonymized)
        .unwrap();
    assert!(both.source.contains("int f1(const char* str)"));
    assert!(both.source.contains("right = strlen(str);"));
    assert_eq!(
        both.rename_map,
        vec![("isPalindrome".to_string(), "f1".to_string())]
    );
}

#[test]
fn index_swap_mutations_agree_with_the_patch_route() {
    use specforge::corpus::{
        materialize_variant, MutationKind, MutationLocator, MutationOp, Program, Suite, VariantSpec,
    };

    let program = Program {
        id: "levenshtein".into(),
        source: read("programs/levenshtein.c"),
        suite: Suite::Basic,
        notes: String::new(),
    };
    let swap = |from: &str, to: &str| MutationOp {
        op: MutationKind::IndexSwap,
        locator: MutationLocator::Pattern(from.into()),
        replacement: to.into(),
    };
    let spec = VariantSpec {
        kind: VariantKind::Buggy,
        patch: None,
        mutations: vec![
            swap("matrix[x][0] = x", "matrix[0][x] = x"),
            swap("matrix[0][y] = y", "matrix[y][0] = y"),
        ],
        anonymize_opts: AnonymizeOptions::default(),
    };
    let variant = materialize_variant(&program, &spec).unwrap();
    assert_eq!(variant.source, read("programs/levenshtein_mutated.c"));
}

#[test]
fn apache_anonymizes_in_definition_order() {
    let source = read("programs/apache.c");
    let (renamed, map) = corpus::anonymize(&source, &AnonymizeOptions::default()).unwrap();
    assert_eq!(
        map,
        vec![
            ("mystrlen".to_string(), "f1".to_string()),
            ("mystrncmp".to_string(), "f2".to_string()),
            ("testme".to_string(), "f3".to_string()),
        ]
    );
    // Call sites renamed along with definitions.
    assert!(renamed.contains("|| f1(uri) < scheme)"));
    assert!(renamed.contains("if (f2(uri, LDAP, LDAP_SZ) == 0)"));
    // Macros and external names untouched.
    assert!(renamed.contains("EOS"));
    assert!(renamed.contains("TOKEN_SZ"));

    // Anonymization preserves the code-token count exactly.
    let before = ctokens::lex(&source).unwrap();
    let after = ctokens::lex(&renamed).unwrap();
    let count = |tokens: &[ctokens::Token]| {
        tokens
            .iter()
            .filter(|t| t.class == TokenClass::Code)
            .count()
    };
    assert_eq!(count(&before), count(&after));
}

#[test]
fn labels_tritype_keeps_pathcrawler_label_calls() {
    // pathcrawler_label is called but never defined in the file, so it is
    // an external name and survives anonymization.
    let source = read("programs/labels_tritype.c");
    let (renamed, map) = corpus::anonymize(&source, &AnonymizeOptions::default()).unwrap();
    assert!(renamed.contains("pathcrawler_label(triOut == 3);"));
    assert_eq!(map, vec![("testme".to_string(), "f1".to_string())]);
}

#[test]
fn duplicate_manifest_ids_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let program = dir.path().join("a.c");
    std::fs::write(&program, "int f(void) { return 0; }\n").unwrap();
    let manifest = dir.path().join("manifest.json");
    std::fs::write(
        &manifest,
        r#"{ "programs": [
            { "id": "bsearch", "path": "a.c", "suite": "basic" },
            { "id": "bsearch", "path": "a.c", "suite": "basic" }
        ] }"#,
    )
    .unwrap();
    let err = corpus::load_manifest(&manifest).unwrap_err();
    assert!(matches!(err, CorpusError::DuplicateId(id) if id == "bsearch"));
}

#[test]
fn dangling_patch_and_unknown_program_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.c"), "int f(void) { return 0; }\n").unwrap();

    let manifest = dir.path().join("manifest.json");
    std::fs::write(
        &manifest,
        r#"{ "programs": [{ "id": "a", "path": "a.c", "suite": "basic" }],
            "variants": [{ "program_id": "a", "kind": "buggy", "patch_path": "missing.diff" }] }"#,
    )
    .unwrap();
    assert!(matches!(
        corpus::load_manifest(&manifest),
        Err(CorpusError::MissingSource { .. })
    ));

    std::fs::write(
        &manifest,
        r#"{ "programs": [{ "id": "a", "path": "a.c", "suite": "basic" }],
            "variants": [{ "program_id": "ghost", "kind": "anonymized" }] }"#,
    )
    .unwrap();
    assert!(matches!(
        corpus::load_manifest(&manifest),
        Err(CorpusError::UnknownProgram(_))
    ));
}

#[test]
fn pc_bsearch_table_parses_with_sorted_inputs() {
    let table = specforge::symbolic::parse_pathcrawler_csv(
        &read("symbolic/pc_bsearch.csv"),
        Default::default(),
    )
    .unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(table
        .rows
        .iter()
        .all(|r| r.verdict == specforge::symbolic::Verdict::Success));
    assert_eq!(table.columns.len(), 13);
    assert_eq!(table.rows[1].output, Some(1));
}

#[test]
fn count_is_additive_under_translation_unit_concatenation() {
    let pairs = [
        ("annotated/bsearch_baseline.c", "annotated/tritype_eva.c"),
        ("annotated/alias5_eva.c", "programs/bsearch.c"),
        ("annotated/apache_pc.c", "annotated/testshiftrt_pc.c"),
    ];
    for (a, b) in pairs {
        let (ta, tb) = (read(a), read(b));
        let mut expected = acsl::count(&ta).unwrap();
        expected.merge(&acsl::count(&tb).unwrap());
        let concatenated = format!("{ta}\n{tb}");
        assert_eq!(
            acsl::count(&concatenated).unwrap(),
            expected,
            "count not additive for {a} + {b}"
        );
    }
}

#[test]
fn tool_replay_directory_returns_stored_bytes() {
    use specforge::symbolic::{
        parse_eva_report, run_external_tool, AlarmCategory, ToolConfig, ToolKind,
    };

    let temp = tempfile::tempdir().unwrap();
    let replay_dir = temp.path().join("replay");
    std::fs::create_dir_all(&replay_dir).unwrap();
    let stored = read("symbolic/eva_alias5.txt");
    std::fs::write(replay_dir.join("alias5.eva.txt"), &stored).unwrap();

    let config = ToolConfig {
        binary: "frama-c-not-installed".into(),
        args: vec!["-eva".into()],
        timeout_secs: 5,
        replay_dir: Some(replay_dir),
    };
    let text = run_external_tool(ToolKind::Eva, Path::new("alias5.c"), &config).unwrap();
    assert_eq!(
        text, stored,
        "replayed bytes must match the stored report exactly"
    );

    let report = parse_eva_report(&text).unwrap();
    let overflows = report
        .alarms
        .iter()
        .filter(|a| a.category == AlarmCategory::IntegerOverflow)
        .count();
    assert!(overflows >= 4);
}

#[test]
fn tool_run_captures_and_persists_output() {
    use specforge::symbolic::{run_external_tool, ToolConfig, ToolError, ToolKind};

    let temp = tempfile::tempdir().unwrap();
    let program = temp.path().join("tiny.c");
    std::fs::write(&program, "int f(void) { return 0; }\n").unwrap();

    // `cat` stands in for an analyzer: output captured verbatim and
    // persisted next to the program.
    let config = ToolConfig {
        binary: "cat".into(),
        args: vec![],
        timeout_secs: 10,
        replay_dir: None,
    };
    let text = run_external_tool(ToolKind::Eva, &program, &config).unwrap();
    assert_eq!(text, "int f(void) { return 0; }\n");
    assert_eq!(
        std::fs::read_to_string(temp.path().join("tiny.eva.txt")).unwrap(),
        text
    );

    // A failing binary reports its exit code.
    let failing = ToolConfig {
        binary: "false".into(),
        args: vec![],
        timeout_secs: 10,
        replay_dir: None,
    };
    let err = run_external_tool(ToolKind::Pathcrawler, &program, &failing).unwrap_err();
    assert!(matches!(err, ToolError::ToolFailed { code: 1, .. }));
}

#[test]
fn palindrome_reasoning_trace_is_flagged() {
    use specforge::report::{flag_bug_mentions, DEFAULT_BUG_PATTERNS};

    let trace = read("reasoning/palindrome_impl_trace.txt");
    let patterns: Vec<String> = DEFAULT_BUG_PATTERNS.iter().map(|s| s.to_string()).collect();
    let flags = flag_bug_mentions(&trace, &patterns);
    assert!(
        flags
            .iter()
            .any(|f| f.sentence.contains("the original code is incorrect here")),
        "expected the incorrect-code sentence to be flagged, got {flags:#?}"
    );
    for flag in &flags {
        assert_eq!(&trace[flag.byte_start..flag.byte_end], flag.sentence);
    }
}

#[test]
fn default_patterns_precision_recall_reported_on_labeled_traces() {
    use specforge::report::{evaluate_patterns, DEFAULT_BUG_PATTERNS};

    #[derive(serde::Deserialize)]
    struct Labeled {
        #[allow(dead_code)]
        id: String,
        mentions_bug: bool,
        text: String,
    }
    let traces: Vec<Labeled> =
        serde_json::from_str(&read("reasoning/labeled_traces.json")).unwrap();
    assert_eq!(traces.len(), 20);
    let labeled: Vec<(String, bool)> = traces
        .into_iter()
        .map(|t| (t.text, t.mentions_bug))
        .collect();
    let patterns: Vec<String> = DEFAULT_BUG_PATTERNS.iter().map(|s| s.to_string()).collect();
    let eval = evaluate_patterns(&labeled, &patterns);

    // Reported, not asserted: the flagger is a triage aid, not a measurement.
    println!(
        "bug-mention flagger on 20 labeled traces: precision {:.2}, recall {:.2} (tp {}, fp {}, fn {})",
        eval.precision, eval.recall, eval.true_positives, eval.false_positives, eval.false_negatives
    );
    assert!((0.0..=1.0).contains(&eval.precision));
    assert!((0.0..=1.0).contains(&eval.recall));
}

#[test]
fn eva_set_fixtures_show_higher_requires_mean_than_baseline_fixtures() {
    use specforge::pipeline::{GenerationRecord, GenerationSet, ValidationResult};
    use specforge::prompt::IntentMode;
    use specforge::report::{aggregate_counts, GroupBy, GroupKey, RecordFilter};
    use std::collections::BTreeMap;

    let make = |program: &str, set: GenerationSet, file: &str| GenerationRecord {
        program_id: program.to_string(),
        variant_kind: VariantKind::Baseline,
        set,
        intent_mode: IntentMode::Off,
        sample_index: 0,
        prompt_digest: String::new(),
        intent_directive_text: String::new(),
        reasoning: String::new(),
        answer: String::new(),
        extracted_code: None,
        validation: ValidationResult {
            ok: true,
            failures: vec![],
        },
        counts: acsl::count(&read(file)).unwrap(),
        provider_error: None,
        recorded_at: 0,
        latency_ms: 0,
    };

    let records = vec![
        make("tritype", GenerationSet::EvaSet, "annotated/tritype_eva.c"),
        make("alias5", GenerationSet::EvaSet, "annotated/alias5_eva.c"),
        make(
            "labels_tritype",
            GenerationSet::EvaSet,
            "annotated/labels_tritype_eva.c",
        ),
        make(
            "tritype",
            GenerationSet::BaselineSet,
            "annotated/tritype_baseline.c",
        ),
        make(
            "bsearch",
            GenerationSet::BaselineSet,
            "annotated/bsearch_baseline.c",
        ),
    ];
    let table = aggregate_counts(&records, &BTreeMap::new(), GroupBy::SET, RecordFilter::All);
    let mean = |set| {
        table.rows[&GroupKey {
            set: Some(set),
            suite: None,
            variant: None,
        }]
            .mean(ClauseKind::Requires)
    };
    assert!(
        mean(GenerationSet::EvaSet) > mean(GenerationSet::BaselineSet),
        "EVA-aided specs carry more preconditions than baseline specs in the reference listings"
    );
}
