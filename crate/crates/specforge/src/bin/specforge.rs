//! specforge command-line interface.
//!
//! stdout carries data (CSV rows, rendered prompts, report tables, or the
//! `--json` machine summary); diagnostics go to stderr. Exit codes are
//! stable: 0 success, 1 usage or fatal I/O error, 2 validation failures
//! present, 3 missing artifacts, 4 provider or network error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use specforge::acsl;
use specforge::config::{Config, ConfigError};
use specforge::corpus::{self, CorpusError};
use specforge::llm::{ChatClient, ClientMode, ReplayCache};
use specforge::pipeline::{
    plan_jobs, run_batch, ArtifactDir, BatchOptions, PipelineError, PlanSpec, RecordStore,
    ValidationFailure,
};
use specforge::prompt::{self, IntentDirective, IntentMode, ModelParams, TemplateId};
use specforge::report::{self, EmitFormat, GroupBy, RecordFilter};
use specforge::symbolic::{ContextKind, RaggedRowPolicy, SymbolicContext};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_MISSING: u8 = 3;
const EXIT_PROVIDER: u8 = 4;

#[derive(Parser)]
#[command(
    name = "specforge",
    version,
    about = "ACSL specification-synthesis pipeline for C programs"
)]
struct Cli {
    /// Pipeline config file (JSON). Paths inside resolve relative to it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print a single JSON summary document on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate the corpus, or write out its variants.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Prompt template operations.
    Prompt {
        #[command(subcommand)]
        action: PromptAction,
    },
    /// Print the planned job list without running anything.
    Plan,
    /// Run generation jobs and append records to the store.
    Generate {
        /// live | record | replay-strict | replay-fallback
        #[arg(long, default_value = "replay-strict")]
        mode: String,
        /// Skip jobs that already have a record.
        #[arg(long)]
        resume: bool,
    },
    /// Check that an annotated file only adds annotations to the original.
    Validate {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        annotated: PathBuf,
    },
    /// Count ACSL clauses in a C file (CSV row on stdout).
    Count {
        #[arg(long)]
        file: PathBuf,
    },
    /// Aggregate stored records into a count table.
    Report {
        /// Comma-separated grouping: set,suite,variant
        #[arg(long, default_value = "set")]
        group_by: String,
        /// all | valid-only
        #[arg(long, default_value = "all")]
        filter: String,
        /// csv | md
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit every clause kind instead of requires/ensures/assigns.
        #[arg(long)]
        all_kinds: bool,
    },
    /// List reasoning snippets that may mention bugs (triage aid).
    Flags,
}

#[derive(Subcommand)]
enum CorpusAction {
    /// Load the manifest and report what it contains.
    Check,
    /// Write every (program, variant) source under a directory.
    Materialize {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum PromptAction {
    /// Render a template with a program (and context) to stdout.
    Render {
        /// baseline | pathcrawler | eva | legacy_baseline | legacy_pathcrawler | legacy_eva
        #[arg(long)]
        template: String,
        #[arg(long)]
        program: PathBuf,
        /// Symbolic context file (PathCrawler CSV or EVA report).
        #[arg(long)]
        context: Option<PathBuf>,
        /// Append the intent-priority directive as an extra GOAL.
        #[arg(long)]
        intent: bool,
    },
}

/// A command failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(EXIT_USAGE, e.to_string())
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        let code = match &e {
            CorpusError::MissingSource { .. } => EXIT_MISSING,
            _ => EXIT_USAGE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::MissingSymbolicArtifact { .. }
            | PipelineError::MalformedArtifact { .. } => EXIT_MISSING,
            PipelineError::Corpus(CorpusError::MissingSource { .. }) => EXIT_MISSING,
            _ => EXIT_USAGE,
        };
        Failure::new(code, e.to_string())
    }
}

fn main() -> ExitCode {
    // Data on stdout is meant for shell pipelines; dying quietly on a
    // closed pipe beats a panic from println!.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version on stdout with success; usage errors
            // go to stderr with exit 1.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(EXIT_USAGE);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("specforge: {}", failure.message);
            if cli.json {
                let summary =
                    json!({ "ok": false, "error": failure.message, "exit_code": failure.code });
                println!("{summary}");
            }
            ExitCode::from(failure.code)
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    match &cli.config {
        Some(path) => Ok(Config::load(path)?),
        None => Err(Failure::new(
            EXIT_USAGE,
            "this subcommand needs --config <path>",
        )),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_MISSING, format!("cannot read {}: {e}", path.display())))
}

fn emit_summary(cli: &Cli, summary: serde_json::Value) {
    if cli.json {
        println!("{summary}");
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Corpus { action } => corpus_command(cli, action),
        Command::Prompt { action } => prompt_command(cli, action),
        Command::Plan => plan_command(cli),
        Command::Generate { mode, resume } => generate_command(cli, mode, *resume),
        Command::Validate {
            original,
            annotated,
        } => validate_command(cli, original, annotated),
        Command::Count { file } => count_command(cli, file),
        Command::Report {
            group_by,
            filter,
            format,
            out,
            all_kinds,
        } => report_command(cli, group_by, filter, format, out.as_deref(), *all_kinds),
        Command::Flags => flags_command(cli),
    }
}

fn corpus_command(cli: &Cli, action: &CorpusAction) -> Result<u8, Failure> {
    let config = load_config(cli)?;
    let corpus = corpus::load_manifest(&config.corpus_manifest)?;
    match action {
        CorpusAction::Check => {
            let variants: usize = corpus
                .programs
                .iter()
                .map(|p| corpus.variant_kinds_for(&p.id).len())
                .sum();
            if !cli.json {
                println!(
                    "corpus ok: {} programs, {} (program, variant) pairs",
                    corpus.programs.len(),
                    variants
                );
            }
            emit_summary(
                cli,
                json!({ "ok": true, "programs": corpus.programs.len(), "program_variants": variants }),
            );
            Ok(EXIT_OK)
        }
        CorpusAction::Materialize { out } => {
            let mut written = 0usize;
            for program in &corpus.programs {
                for kind in corpus.variant_kinds_for(&program.id) {
                    let variant = corpus.materialize(&program.id, kind)?;
                    let dir = out.join(&program.id);
                    std::fs::create_dir_all(&dir).map_err(|e| {
                        Failure::new(EXIT_USAGE, format!("cannot create {}: {e}", dir.display()))
                    })?;
                    let path = dir.join(format!("{kind}.c"));
                    std::fs::write(&path, &variant.source).map_err(|e| {
                        Failure::new(EXIT_USAGE, format!("cannot write {}: {e}", path.display()))
                    })?;
                    if !variant.rename_map.is_empty() {
                        let map_path = dir.join(format!("{kind}.rename_map.json"));
                        let map = serde_json::to_string_pretty(&variant.rename_map)
                            .expect("serializable map");
                        std::fs::write(&map_path, map).map_err(|e| {
                            Failure::new(
                                EXIT_USAGE,
                                format!("cannot write {}: {e}", map_path.display()),
                            )
                        })?;
                    }
                    written += 1;
                }
            }
            if !cli.json {
                println!(
                    "materialized {} variant files under {}",
                    written,
                    out.display()
                );
            }
            emit_summary(cli, json!({ "ok": true, "files_written": written }));
            Ok(EXIT_OK)
        }
    }
}

fn parse_template(name: &str) -> Result<TemplateId, Failure> {
    TemplateId::ALL
        .into_iter()
        .find(|t| t.as_str() == name)
        .ok_or_else(|| Failure::new(EXIT_USAGE, format!("unknown template {name:?}")))
}

fn prompt_command(cli: &Cli, action: &PromptAction) -> Result<u8, Failure> {
    let PromptAction::Render {
        template,
        program,
        context,
        intent,
    } = action;
    let template = parse_template(template)?;
    let program_text = read_file(program)?;

    let ragged = cli
        .config
        .as_ref()
        .map(|p| Config::load(p))
        .transpose()?
        .map_or(RaggedRowPolicy::Reject, |c| c.ragged_row_policy);

    let ctx = match (template.required_context(), context) {
        (ContextKind::None, _) => SymbolicContext::none(),
        (ContextKind::Pathcrawler, Some(path)) => {
            let text = read_file(path)?;
            SymbolicContext::pathcrawler(&text, ragged)
                .map_err(|e| Failure::new(EXIT_MISSING, format!("{}: {e}", path.display())))?
        }
        (ContextKind::Eva, Some(path)) => {
            let text = read_file(path)?;
            SymbolicContext::eva(&text)
                .map_err(|e| Failure::new(EXIT_MISSING, format!("{}: {e}", path.display())))?
        }
        (kind, None) => {
            return Err(Failure::new(
                EXIT_USAGE,
                format!("template {template} needs --context with a {kind:?} artifact"),
            ))
        }
    };

    let directive = if *intent {
        IntentDirective::with_default_text(IntentMode::Intent)
    } else {
        IntentDirective::off()
    };
    let rendered = prompt::render(template, &program_text, &ctx, &directive)
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;

    if cli.json {
        emit_summary(
            cli,
            json!({ "ok": true, "template": template.as_str(), "prompt": rendered }),
        );
    } else {
        print!("{rendered}");
    }
    Ok(EXIT_OK)
}

fn build_plan(config: &Config) -> PlanSpec {
    PlanSpec {
        sets: config.sets.clone(),
        intent_modes: vec![config.intent_mode],
        samples: config.samples,
    }
}

fn plan_command(cli: &Cli) -> Result<u8, Failure> {
    let config = load_config(cli)?;
    let corpus = corpus::load_manifest(&config.corpus_manifest)?;
    let artifacts = ArtifactDir::new(&config.artifacts_dir, config.ragged_row_policy);
    let params = ModelParams {
        model: config.client.model.clone(),
        temperature: config.client.temperature,
    };
    let jobs = plan_jobs(&corpus, &artifacts, &build_plan(&config), &params, |m| {
        config.directive_text(m)
    })?;

    if cli.json {
        emit_summary(
            cli,
            json!({ "ok": true, "job_count": jobs.len(), "jobs": jobs }),
        );
    } else {
        println!("program,variant,set,intent,sample,prompt_digest");
        for job in &jobs {
            println!(
                "{},{},{},{},{},{}",
                job.program_id,
                job.variant_kind,
                job.set,
                job.intent_mode,
                job.sample_index,
                job.prompt_digest
            );
        }
        eprintln!("{} jobs planned", jobs.len());
    }
    Ok(EXIT_OK)
}

fn parse_mode(mode: &str) -> Result<ClientMode, Failure> {
    match mode {
        "live" => Ok(ClientMode::Live),
        "record" => Ok(ClientMode::Record),
        "replay-strict" | "replay_strict" => Ok(ClientMode::ReplayStrict),
        "replay-fallback" | "replay_fallback" => Ok(ClientMode::ReplayFallback),
        other => Err(Failure::new(EXIT_USAGE, format!("unknown mode {other:?}"))),
    }
}

fn generate_command(cli: &Cli, mode: &str, resume: bool) -> Result<u8, Failure> {
    let config = load_config(cli)?;
    let mode = parse_mode(mode)?;
    let corpus = corpus::load_manifest(&config.corpus_manifest)?;
    let artifacts = ArtifactDir::new(&config.artifacts_dir, config.ragged_row_policy);
    let params = ModelParams {
        model: config.client.model.clone(),
        temperature: config.client.temperature,
    };
    let jobs = plan_jobs(&corpus, &artifacts, &build_plan(&config), &params, |m| {
        config.directive_text(m)
    })?;

    let client = ChatClient::new(
        config.client.to_client_config(),
        Some(ReplayCache::new(&config.cache_dir)),
    );
    let store = RecordStore::new(&config.store_path);
    let outcome = run_batch(
        &jobs,
        &corpus,
        &artifacts,
        |m| config.directive_text(m),
        &client,
        &store,
        BatchOptions {
            mode,
            resume,
            workers: config.client.max_in_flight,
        },
    )?;

    if !cli.json {
        println!(
            "generate: {} planned, {} skipped, {} written ({} valid, {} invalid, {} provider errors)",
            outcome.planned,
            outcome.skipped,
            outcome.written,
            outcome.valid,
            outcome.validation_failed,
            outcome.provider_errors
        );
    }
    emit_summary(
        cli,
        json!({ "ok": outcome.provider_errors == 0 && outcome.validation_failed == 0, "outcome": outcome }),
    );

    if outcome.provider_errors > 0 {
        Ok(EXIT_PROVIDER)
    } else if outcome.validation_failed > 0 {
        Ok(EXIT_VALIDATION)
    } else {
        Ok(EXIT_OK)
    }
}

fn validate_command(cli: &Cli, original: &Path, annotated: &Path) -> Result<u8, Failure> {
    let original_text = read_file(original)?;
    let annotated_text = read_file(annotated)?;
    let result = specforge::pipeline::validate(&original_text, &annotated_text);

    if !cli.json {
        if result.ok {
            println!("ok: only annotations were added");
        } else {
            for failure in &result.failures {
                match failure {
                    ValidationFailure::CodeEdited {
                        original,
                        generated,
                    } => {
                        let fmt = |t: &Option<specforge::pipeline::DivergenceToken>| match t {
                            Some(t) => format!("{:?} at line {}, col {}", t.text, t.line, t.col),
                            None => "end of file".to_string(),
                        };
                        println!(
                            "code_edited: original has {}, annotated has {}",
                            fmt(original),
                            fmt(generated)
                        );
                    }
                    ValidationFailure::ZeroAnnotations => {
                        println!("zero_annotations: no ACSL clauses added")
                    }
                    ValidationFailure::LexFailure { message } => println!("lex_failure: {message}"),
                    ValidationFailure::NoCodeBlock => println!("no_code_block"),
                }
            }
        }
    }
    emit_summary(cli, json!({ "ok": result.ok, "failures": result.failures }));
    Ok(if result.ok { EXIT_OK } else { EXIT_VALIDATION })
}

fn count_command(cli: &Cli, file: &Path) -> Result<u8, Failure> {
    let text = read_file(file)?;
    let row = acsl::count(&text).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
    let program = file
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_default();

    if cli.json {
        let mut counts = serde_json::Map::new();
        for kind in acsl::ClauseKind::ALL {
            counts.insert(kind.column_name().to_string(), json!(row.get(kind)));
        }
        emit_summary(
            cli,
            json!({ "ok": true, "program": program, "counts": counts, "total": row.total }),
        );
    } else {
        println!("{}", acsl::CountRow::csv_header());
        println!("{}", row.csv_row(&program, "", "", ""));
    }
    Ok(EXIT_OK)
}

fn report_command(
    cli: &Cli,
    group_by: &str,
    filter: &str,
    format: &str,
    out: Option<&Path>,
    all_kinds: bool,
) -> Result<u8, Failure> {
    let config = load_config(cli)?;
    let group_by = GroupBy::parse(group_by).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let filter = RecordFilter::parse(filter).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let format = EmitFormat::parse(format).map_err(|e| Failure::new(EXIT_USAGE, e))?;

    let store = RecordStore::new(&config.store_path);
    let records = store
        .load()
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
    let corpus = corpus::load_manifest(&config.corpus_manifest)?;
    let suites: BTreeMap<String, specforge::corpus::Suite> = corpus
        .programs
        .iter()
        .map(|p| (p.id.clone(), p.suite))
        .collect();

    let table = report::aggregate_counts(&records, &suites, group_by, filter);
    let rendered = report::emit(&table, format, all_kinds);

    match out {
        Some(path) => {
            std::fs::write(path, &rendered).map_err(|e| {
                Failure::new(EXIT_USAGE, format!("cannot write {}: {e}", path.display()))
            })?;
            if !cli.json {
                eprintln!("report written to {}", path.display());
            }
        }
        None if !cli.json => print!("{rendered}"),
        None => {}
    }
    emit_summary(
        cli,
        json!({ "ok": true, "records": records.len(), "rows": table.rows.len(), "table": rendered }),
    );
    Ok(EXIT_OK)
}

fn flags_command(cli: &Cli) -> Result<u8, Failure> {
    let config = load_config(cli)?;
    let store = RecordStore::new(&config.store_path);
    let records = store
        .load()
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;

    let mut flagged = Vec::new();
    for record in &records {
        let snippets = report::flag_bug_mentions(&record.reasoning, &config.bug_patterns);
        if !snippets.is_empty() {
            flagged.push(json!({
                "program": record.program_id,
                "variant": record.variant_kind,
                "set": record.set,
                "sample": record.sample_index,
                "snippets": snippets,
            }));
        }
    }

    if cli.json {
        emit_summary(
            cli,
            json!({ "ok": true, "label": "CANDIDATES FOR HUMAN REVIEW", "flagged": flagged }),
        );
    } else {
        println!(
            "CANDIDATES FOR HUMAN REVIEW ({} of {} records flagged)",
            flagged.len(),
            records.len()
        );
        for entry in &flagged {
            println!("{entry}");
        }
    }
    Ok(EXIT_OK)
}
