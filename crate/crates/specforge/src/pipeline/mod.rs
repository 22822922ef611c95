//! Generation pipeline: job planning over (program × variant × prompt set
//! × sample), execution against the chat client, validation, and record
//! persistence.

mod extract;
mod store;
mod validate;

pub use extract::{extract_code_block, ExtractError};
pub use store::{GenerationRecord, RecordStore, StoreAppender, StoreError};
pub use validate::{validate, DivergenceToken, ValidationFailure, ValidationResult};

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::acsl;
use crate::corpus::{Corpus, CorpusError, VariantKind};
use crate::llm::{ChatClient, ClientMode, LlmError};
use crate::prompt::{self, IntentDirective, IntentMode, ModelParams, RenderError, TemplateId};
use crate::symbolic::{EvaParseError, PcParseError, RaggedRowPolicy, SymbolicContext};

/// The three prompt sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationSet {
    BaselineSet,
    PathcrawlerSet,
    EvaSet,
}

impl GenerationSet {
    pub const ALL: [GenerationSet; 3] = [
        GenerationSet::BaselineSet,
        GenerationSet::PathcrawlerSet,
        GenerationSet::EvaSet,
    ];

    pub fn template(self) -> TemplateId {
        match self {
            GenerationSet::BaselineSet => TemplateId::Baseline,
            GenerationSet::PathcrawlerSet => TemplateId::Pathcrawler,
            GenerationSet::EvaSet => TemplateId::Eva,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GenerationSet::BaselineSet => "baseline_set",
            GenerationSet::PathcrawlerSet => "pathcrawler_set",
            GenerationSet::EvaSet => "eva_set",
        }
    }
}

impl fmt::Display for GenerationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identity of one planned generation.
pub type JobKey = (String, VariantKind, GenerationSet, IntentMode, u32);

/// One planned generation job.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Job {
    pub program_id: String,
    pub variant_kind: VariantKind,
    pub set: GenerationSet,
    pub intent_mode: IntentMode,
    pub sample_index: u32,
    pub prompt_digest: String,
}

impl Job {
    pub fn key(&self) -> JobKey {
        (
            self.program_id.clone(),
            self.variant_kind,
            self.set,
            self.intent_mode,
            self.sample_index,
        )
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing symbolic artifacts: {}", format_pairs(missing))]
    MissingSymbolicArtifact {
        missing: Vec<(String, GenerationSet)>,
    },
    #[error("artifact {} does not parse: {cause}", path.display())]
    MalformedArtifact { path: PathBuf, cause: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn format_pairs(pairs: &[(String, GenerationSet)]) -> String {
    pairs
        .iter()
        .map(|(p, s)| format!("{p}/{s}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Directory of per-program symbolic artifacts:
/// `<dir>/<program_id>.pathcrawler.csv` and `<dir>/<program_id>.eva.txt`.
#[derive(Debug, Clone)]
pub struct ArtifactDir {
    pub dir: PathBuf,
    pub ragged_row_policy: RaggedRowPolicy,
}

impl ArtifactDir {
    pub fn new(dir: impl Into<PathBuf>, ragged_row_policy: RaggedRowPolicy) -> Self {
        ArtifactDir {
            dir: dir.into(),
            ragged_row_policy,
        }
    }

    pub fn path_for(&self, program_id: &str, set: GenerationSet) -> Option<PathBuf> {
        let name = match set {
            GenerationSet::BaselineSet => return None,
            GenerationSet::PathcrawlerSet => format!("{program_id}.pathcrawler.csv"),
            GenerationSet::EvaSet => format!("{program_id}.eva.txt"),
        };
        Some(self.dir.join(name))
    }

    pub fn available(&self, program_id: &str, set: GenerationSet) -> bool {
        self.path_for(program_id, set).is_none_or(|p| p.exists())
    }

    /// Load and parse the context for a (program, set) pair.
    pub fn context(
        &self,
        program_id: &str,
        set: GenerationSet,
    ) -> Result<SymbolicContext, PipelineError> {
        let Some(path) = self.path_for(program_id, set) else {
            return Ok(SymbolicContext::none());
        };
        let text =
            std::fs::read_to_string(&path).map_err(|_| PipelineError::MissingSymbolicArtifact {
                missing: vec![(program_id.to_string(), set)],
            })?;
        match set {
            GenerationSet::BaselineSet => Ok(SymbolicContext::none()),
            GenerationSet::PathcrawlerSet => {
                SymbolicContext::pathcrawler(&text, self.ragged_row_policy).map_err(
                    |e: PcParseError| PipelineError::MalformedArtifact {
                        path,
                        cause: e.to_string(),
                    },
                )
            }
            GenerationSet::EvaSet => SymbolicContext::eva(&text).map_err(|e: EvaParseError| {
                PipelineError::MalformedArtifact {
                    path,
                    cause: e.to_string(),
                }
            }),
        }
    }
}

/// What to generate: sets, intent modes, and samples per job.
#[derive(Debug, Clone)]
pub struct PlanSpec {
    pub sets: Vec<GenerationSet>,
    pub intent_modes: Vec<IntentMode>,
    pub samples: u32,
}

/// Plan the full job list: the cartesian product of programs, their
/// variants, the requested sets, intent modes, and sample indices, in
/// deterministic (program, variant, set, intent, sample) order. Prompt
/// digests are precomputed, so planning renders every prompt once.
pub fn plan_jobs(
    corpus: &Corpus,
    artifacts: &ArtifactDir,
    plan: &PlanSpec,
    params: &ModelParams,
    directive_text_for: impl Fn(IntentMode) -> String,
) -> Result<Vec<Job>, PipelineError> {
    let mut missing = Vec::new();
    let mut program_ids: Vec<&str> = corpus.programs.iter().map(|p| p.id.as_str()).collect();
    program_ids.sort_unstable();

    for program_id in &program_ids {
        for set in &plan.sets {
            if !artifacts.available(program_id, *set) {
                missing.push((program_id.to_string(), *set));
            }
        }
    }
    if !missing.is_empty() {
        return Err(PipelineError::MissingSymbolicArtifact { missing });
    }

    let mut jobs = Vec::new();
    for program_id in &program_ids {
        let kinds = corpus.variant_kinds_for(program_id);
        for kind in kinds {
            let variant = corpus.materialize(program_id, kind)?;
            for set in &plan.sets {
                let context = artifacts.context(program_id, *set)?;
                for intent_mode in &plan.intent_modes {
                    let directive = IntentDirective {
                        mode: *intent_mode,
                        directive_text: directive_text_for(*intent_mode),
                    };
                    let prompt =
                        prompt::render(set.template(), &variant.source, &context, &directive)?;
                    let digest = prompt::digest(&prompt, params);
                    for sample_index in 0..plan.samples {
                        jobs.push(Job {
                            program_id: program_id.to_string(),
                            variant_kind: kind,
                            set: *set,
                            intent_mode: *intent_mode,
                            sample_index,
                            prompt_digest: digest.clone(),
                        });
                    }
                }
            }
        }
    }
    Ok(jobs)
}

/// Outcome counters for one batch run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BatchOutcome {
    pub planned: usize,
    pub skipped: usize,
    pub written: usize,
    pub valid: usize,
    pub validation_failed: usize,
    pub provider_errors: usize,
}

/// Run one job: render, complete, extract, validate, count. Provider
/// failures produce a failure record instead of aborting the batch.
pub fn run_job(
    job: &Job,
    source: &str,
    context: &SymbolicContext,
    directive: &IntentDirective,
    client: &ChatClient,
    mode: ClientMode,
) -> Result<GenerationRecord, PipelineError> {
    let prompt_text = prompt::render(job.set.template(), source, context, directive)?;
    let request = client.request(prompt_text, job.sample_index);

    let (reasoning, answer, recorded_at, latency_ms, provider_error) =
        match client.complete(&request, mode) {
            Ok(completion) => (
                completion.response.reasoning,
                completion.response.answer,
                completion.recorded_at,
                completion.response.latency_ms,
                None,
            ),
            Err(
                e @ (LlmError::CacheMiss { .. }
                | LlmError::HttpError { .. }
                | LlmError::RateLimited { .. }
                | LlmError::AuthMissing
                | LlmError::MalformedProviderPayload(_)
                | LlmError::Transport(_)),
            ) => (String::new(), String::new(), 0, 0, Some(e.to_string())),
            Err(
                e @ (LlmError::CacheConflict { .. }
                | LlmError::MalformedCacheEntry { .. }
                | LlmError::Io { .. }),
            ) => {
                // Cache corruption is a store-level fault: abort the batch.
                return Err(PipelineError::Store(StoreError::Io {
                    path: PathBuf::from("cache"),
                    cause: e.to_string(),
                }));
            }
        };

    let (extracted_code, validation, counts) = match extract_code_block(&answer) {
        Ok(code) => {
            let validation = validate(source, &code);
            let counts = acsl::count(&code).unwrap_or_default();
            (Some(code), validation, counts)
        }
        Err(_) => (
            None,
            ValidationResult::no_code_block(),
            acsl::CountRow::default(),
        ),
    };

    Ok(GenerationRecord {
        program_id: job.program_id.clone(),
        variant_kind: job.variant_kind,
        set: job.set,
        intent_mode: job.intent_mode,
        sample_index: job.sample_index,
        prompt_digest: job.prompt_digest.clone(),
        intent_directive_text: directive.directive_text.clone(),
        reasoning,
        answer,
        extracted_code,
        validation,
        counts,
        provider_error,
        recorded_at,
        latency_ms,
    })
}

/// Knobs for one batch run.
#[derive(Debug, Clone, Copy)]
pub struct BatchOptions {
    pub mode: ClientMode,
    /// Skip jobs whose identity tuple already has a record.
    pub resume: bool,
    /// Worker-thread bound; clamped to the pending job count.
    pub workers: usize,
}

/// Execute a batch of jobs. Jobs run on worker threads bounded by
/// `options.workers`; records append to the store in plan order through
/// the single writer. With `options.resume`, jobs whose identity already
/// has a record are skipped and the store is left untouched for them.
pub fn run_batch(
    jobs: &[Job],
    corpus: &Corpus,
    artifacts: &ArtifactDir,
    directive_text_for: impl Fn(IntentMode) -> String + Sync,
    client: &ChatClient,
    store: &RecordStore,
    options: BatchOptions,
) -> Result<BatchOutcome, PipelineError> {
    let BatchOptions {
        mode,
        resume,
        workers,
    } = options;
    let mut outcome = BatchOutcome {
        planned: jobs.len(),
        ..BatchOutcome::default()
    };

    let existing: HashSet<JobKey> = if resume {
        store.existing_keys()?
    } else {
        HashSet::new()
    };
    let pending: Vec<&Job> = jobs
        .iter()
        .filter(|j| !existing.contains(&j.key()))
        .collect();
    outcome.skipped = jobs.len() - pending.len();

    // Materialized sources and contexts are shared across jobs.
    let mut sources: BTreeMap<(String, VariantKind), String> = BTreeMap::new();
    let mut contexts: BTreeMap<(String, GenerationSet), SymbolicContext> = BTreeMap::new();
    use std::collections::btree_map::Entry;
    for job in &pending {
        if let Entry::Vacant(slot) = sources.entry((job.program_id.clone(), job.variant_kind)) {
            slot.insert(
                corpus
                    .materialize(&job.program_id, job.variant_kind)?
                    .source,
            );
        }
        if let Entry::Vacant(slot) = contexts.entry((job.program_id.clone(), job.set)) {
            slot.insert(artifacts.context(&job.program_id, job.set)?);
        }
    }

    let next_job = AtomicUsize::new(0);
    let results: Mutex<BTreeMap<usize, GenerationRecord>> = Mutex::new(BTreeMap::new());
    let first_error: Mutex<Option<PipelineError>> = Mutex::new(None);

    let worker_count = workers.clamp(1, pending.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..worker_count {
            scope.spawn(|| loop {
                let idx = next_job.fetch_add(1, Ordering::SeqCst);
                if idx >= pending.len() || first_error.lock().unwrap().is_some() {
                    break;
                }
                let job = pending[idx];
                let source = &sources[&(job.program_id.clone(), job.variant_kind)];
                let context = &contexts[&(job.program_id.clone(), job.set)];
                let directive = IntentDirective {
                    mode: job.intent_mode,
                    directive_text: directive_text_for(job.intent_mode),
                };
                match run_job(job, source, context, &directive, client, mode) {
                    Ok(record) => {
                        results.lock().unwrap().insert(idx, record);
                    }
                    Err(e) => {
                        first_error.lock().unwrap().get_or_insert(e);
                    }
                }
            });
        }
    });

    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }

    let results = results.into_inner().unwrap();
    let mut appender = store.appender()?;
    for idx in 0..pending.len() {
        let record = &results[&idx];
        if record.provider_error.is_some() {
            outcome.provider_errors += 1;
        }
        if record.validation.ok {
            outcome.valid += 1;
        } else {
            outcome.validation_failed += 1;
        }
        appender.append(record)?;
        outcome.written += 1;
    }
    appender.sync()?;

    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Program, Suite, VariantSpec};

    fn tiny_corpus(n: usize) -> Corpus {
        let programs = (0..n)
            .map(|i| Program {
                id: format!("prog{i:03}"),
                source: format!("int f{i}(int x) {{ return x + {i}; }}\n"),
                suite: Suite::Basic,
                notes: String::new(),
            })
            .collect();
        Corpus {
            programs,
            variants: Vec::new(),
        }
    }

    fn baseline_plan(samples: u32) -> PlanSpec {
        PlanSpec {
            sets: vec![GenerationSet::BaselineSet],
            intent_modes: vec![IntentMode::Off],
            samples,
        }
    }

    fn params() -> ModelParams {
        ModelParams {
            model: "test-model".into(),
            temperature: 0.7,
        }
    }

    #[test]
    fn one_program_three_samples_three_jobs() {
        let corpus = tiny_corpus(1);
        let artifacts = ArtifactDir::new("/nonexistent", RaggedRowPolicy::Reject);
        let jobs = plan_jobs(&corpus, &artifacts, &baseline_plan(3), &params(), |_| {
            String::new()
        })
        .unwrap();
        assert_eq!(jobs.len(), 3);
        assert_eq!(jobs[0].sample_index, 0);
        assert_eq!(jobs[2].sample_index, 2);
        // Same prompt, same digest across samples.
        assert_eq!(jobs[0].prompt_digest, jobs[2].prompt_digest);
    }

    #[test]
    fn four_variants_multiply() {
        let mut corpus = tiny_corpus(1);
        let id = corpus.programs[0].id.clone();
        corpus.programs[0].source = "int f(int x) { return x + 1; }\n".into();
        for kind in [
            VariantKind::Buggy,
            VariantKind::Anonymized,
            VariantKind::BuggyAnonymized,
        ] {
            let mutations = if kind.involves_bug() {
                vec![crate::corpus::MutationOp {
                    op: crate::corpus::MutationKind::OffByOne,
                    locator: crate::corpus::MutationLocator::Pattern("x + 1".into()),
                    replacement: "x + 2".into(),
                }]
            } else {
                Vec::new()
            };
            corpus.variants.push((
                id.clone(),
                VariantSpec {
                    kind,
                    patch: None,
                    mutations,
                    anonymize_opts: Default::default(),
                },
            ));
        }
        let artifacts = ArtifactDir::new("/nonexistent", RaggedRowPolicy::Reject);
        let jobs = plan_jobs(&corpus, &artifacts, &baseline_plan(3), &params(), |_| {
            String::new()
        })
        .unwrap();
        assert_eq!(jobs.len(), 4 * 3);
    }

    #[test]
    fn missing_artifact_lists_offending_pairs() {
        let corpus = tiny_corpus(2);
        let artifacts = ArtifactDir::new("/nonexistent", RaggedRowPolicy::Reject);
        let plan = PlanSpec {
            sets: vec![GenerationSet::EvaSet],
            intent_modes: vec![IntentMode::Off],
            samples: 1,
        };
        let err = plan_jobs(&corpus, &artifacts, &plan, &params(), |_| String::new()).unwrap_err();
        match err {
            PipelineError::MissingSymbolicArtifact { missing } => {
                assert_eq!(missing.len(), 2);
                assert!(missing.iter().all(|(_, s)| *s == GenerationSet::EvaSet));
            }
            other => panic!("expected MissingSymbolicArtifact, got {other:?}"),
        }
    }

    #[test]
    fn plan_order_is_deterministic() {
        let corpus = tiny_corpus(3);
        let artifacts = ArtifactDir::new("/nonexistent", RaggedRowPolicy::Reject);
        let a = plan_jobs(&corpus, &artifacts, &baseline_plan(2), &params(), |_| {
            String::new()
        })
        .unwrap();
        let b = plan_jobs(&corpus, &artifacts, &baseline_plan(2), &params(), |_| {
            String::new()
        })
        .unwrap();
        assert_eq!(a, b);
        let ids: Vec<_> = a
            .iter()
            .map(|j| (j.program_id.clone(), j.sample_index))
            .collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }
}
