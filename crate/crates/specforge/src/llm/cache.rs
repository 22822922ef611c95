//! Persistent record/replay cache for provider responses.
//!
//! One entry per (prompt digest, sample index), stored as
//! `<root>/<digest>/<sample_index>.json`. Entries are write-once: writing
//! the same key with identical bytes is a no-op, with different bytes an
//! error. Writes go through a temp file and rename, so readers never see a
//! torn entry.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{LlmError, Usage};

/// On-disk cache entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub request_digest: String,
    pub sample_index: u32,
    pub model: String,
    pub temperature: f64,
    pub reasoning: String,
    pub answer: String,
    pub usage: Usage,
    pub latency_ms: u64,
    /// Unix epoch seconds at record time.
    pub recorded_at: u64,
}

/// Directory-backed response cache.
#[derive(Debug, Clone)]
pub struct ReplayCache {
    root: PathBuf,
}

impl ReplayCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ReplayCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// `<root>/<digest>/<sample_index>.json`
    pub fn key_path(&self, digest: &str, sample_index: u32) -> PathBuf {
        self.root.join(digest).join(format!("{sample_index}.json"))
    }

    pub fn read(&self, digest: &str, sample_index: u32) -> Result<Option<CacheEntry>, LlmError> {
        let path = self.key_path(digest, sample_index);
        let bytes = match std::fs::read(&path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => {
                return Err(LlmError::Io {
                    path,
                    cause: e.to_string(),
                })
            }
        };
        let entry = serde_json::from_slice(&bytes).map_err(|e| LlmError::MalformedCacheEntry {
            path,
            cause: e.to_string(),
        })?;
        Ok(Some(entry))
    }

    /// Write-once semantics per key.
    pub fn write(&self, entry: &CacheEntry) -> Result<(), LlmError> {
        let path = self.key_path(&entry.request_digest, entry.sample_index);
        let bytes = serde_json::to_vec_pretty(entry).map_err(|e| LlmError::Io {
            path: path.clone(),
            cause: e.to_string(),
        })?;

        if let Ok(existing) = std::fs::read(&path) {
            if existing == bytes {
                return Ok(());
            }
            return Err(LlmError::CacheConflict { path });
        }

        let dir = path.parent().expect("cache key path has a parent");
        std::fs::create_dir_all(dir).map_err(|e| LlmError::Io {
            path: dir.to_path_buf(),
            cause: e.to_string(),
        })?;
        let tmp = dir.join(format!(".{}.tmp", entry.sample_index));
        std::fs::write(&tmp, &bytes).map_err(|e| LlmError::Io {
            path: tmp.clone(),
            cause: e.to_string(),
        })?;
        std::fs::rename(&tmp, &path).map_err(|e| LlmError::Io {
            path: path.clone(),
            cause: e.to_string(),
        })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(digest: &str, idx: u32, answer: &str) -> CacheEntry {
        CacheEntry {
            request_digest: digest.into(),
            sample_index: idx,
            model: "test-model".into(),
            temperature: 0.7,
            reasoning: "thinking".into(),
            answer: answer.into(),
            usage: Usage {
                prompt_tokens: 10,
                completion_tokens: 20,
            },
            latency_ms: 5,
            recorded_at: 1_700_000_000,
        }
    }

    #[test]
    fn key_path_layout() {
        let cache = ReplayCache::new("/tmp/cache-root");
        assert_eq!(
            cache.key_path("abc123", 0),
            PathBuf::from("/tmp/cache-root/abc123/0.json")
        );
        assert_eq!(
            cache.key_path("abc123", 1),
            PathBuf::from("/tmp/cache-root/abc123/1.json")
        );
    }

    #[test]
    fn read_back_what_was_written() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ReplayCache::new(dir.path());
        let e = entry("d1", 0, "answer text");
        cache.write(&e).unwrap();
        assert_eq!(cache.read("d1", 0).unwrap(), Some(e));
        assert_eq!(cache.read("d1", 1).unwrap(), None);
    }

    #[test]
    fn rewrite_same_bytes_ok_different_bytes_conflict() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ReplayCache::new(dir.path());
        let e = entry("d1", 0, "answer");
        cache.write(&e).unwrap();
        cache.write(&e).unwrap();
        let different = entry("d1", 0, "other answer");
        assert!(matches!(
            cache.write(&different),
            Err(LlmError::CacheConflict { .. })
        ));
    }
}
