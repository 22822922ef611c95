//! Append-only JSONL store of generation records.
//!
//! One record per line, fields in a fixed order, UTF-8. Appends go through
//! a single writer handle; a batch rerun with `resume` skips jobs whose
//! identity tuple already has a record.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GenerationSet, JobKey};
use crate::acsl::CountRow;
use crate::corpus::VariantKind;
use crate::pipeline::validate::ValidationResult;
use crate::prompt::IntentMode;

/// One completed (or failed) generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub program_id: String,
    pub variant_kind: VariantKind,
    pub set: GenerationSet,
    pub intent_mode: IntentMode,
    pub sample_index: u32,
    pub prompt_digest: String,
    /// Directive text in force for this job (provenance; empty when off).
    pub intent_directive_text: String,
    pub reasoning: String,
    pub answer: String,
    pub extracted_code: Option<String>,
    pub validation: ValidationResult,
    pub counts: CountRow,
    /// Provider-side failure that prevented a response, if any.
    pub provider_error: Option<String>,
    /// Unix epoch seconds; from the cache entry when replaying.
    pub recorded_at: u64,
    pub latency_ms: u64,
}

impl GenerationRecord {
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
pub enum StoreError {
    #[error("store io error on {}: {cause}", path.display())]
    Io { path: PathBuf, cause: String },
    #[error("store line {line} is not a valid record: {cause}")]
    Corrupt { line: usize, cause: String },
}

/// JSONL record store.
#[derive(Debug, Clone)]
pub struct RecordStore {
    path: PathBuf,
}

impl RecordStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        RecordStore { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// All records, in append order. A missing file is an empty store.
    pub fn load(&self) -> Result<Vec<GenerationRecord>, StoreError> {
        let file = match std::fs::File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => {
                return Err(StoreError::Io {
                    path: self.path.clone(),
                    cause: e.to_string(),
                })
            }
        };
        let reader = BufReader::new(file);
        let mut records = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| StoreError::Io {
                path: self.path.clone(),
                cause: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
                line: idx + 1,
                cause: e.to_string(),
            })?;
            records.push(record);
        }
        Ok(records)
    }

    pub fn existing_keys(&self) -> Result<HashSet<JobKey>, StoreError> {
        Ok(self.load()?.into_iter().map(|r| r.key()).collect())
    }

    /// Open the single append handle for a batch run.
    pub fn appender(&self) -> Result<StoreAppender, StoreError> {
        if let Some(dir) = self.path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir).map_err(|e| StoreError::Io {
                    path: dir.to_path_buf(),
                    cause: e.to_string(),
                })?;
            }
        }
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| StoreError::Io {
                path: self.path.clone(),
                cause: e.to_string(),
            })?;
        Ok(StoreAppender {
            file,
            path: self.path.clone(),
        })
    }
}

/// The single writer for one batch.
pub struct StoreAppender {
    file: std::fs::File,
    path: PathBuf,
}

impl StoreAppender {
    pub fn append(&mut self, record: &GenerationRecord) -> Result<(), StoreError> {
        let line = serde_json::to_string(record).map_err(|e| StoreError::Io {
            path: self.path.clone(),
            cause: e.to_string(),
        })?;
        writeln!(self.file, "{line}").map_err(|e| StoreError::Io {
            path: self.path.clone(),
            cause: e.to_string(),
        })?;
        Ok(())
    }

    pub fn sync(&mut self) -> Result<(), StoreError> {
        self.file.sync_all().map_err(|e| StoreError::Io {
            path: self.path.clone(),
            cause: e.to_string(),
        })
    }
}
