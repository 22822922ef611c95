//! Pipeline configuration file.
//!
//! One JSON document configures a run: corpus manifest, cache and store
//! locations, symbolic artifact directory, generation sets, sampling, and
//! client settings. Relative paths resolve against the config file's
//! directory. `SPECFORGE_CACHE_DIR` overrides the cache root.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm::{ClientConfig, RetryConfig};
use crate::pipeline::GenerationSet;
use crate::prompt::{IntentMode, DEFAULT_IMPLEMENTATION_TEXT, DEFAULT_INTENT_TEXT};
use crate::report::DEFAULT_BUG_PATTERNS;
use crate::symbolic::{RaggedRowPolicy, ToolConfig};

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "SPECFORGE_CACHE_DIR";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ClientFileConfig {
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub max_in_flight: usize,
    pub retry: RetryConfig,
    pub timeout_secs: u64,
}

impl Default for ClientFileConfig {
    fn default() -> Self {
        let defaults = ClientConfig::default();
        ClientFileConfig {
            base_url: defaults.base_url,
            model: defaults.model,
            temperature: defaults.temperature,
            max_in_flight: defaults.max_in_flight,
            retry: defaults.retry,
            timeout_secs: defaults.timeout.as_secs(),
        }
    }
}

impl ClientFileConfig {
    pub fn to_client_config(&self) -> ClientConfig {
        ClientConfig {
            base_url: self.base_url.clone(),
            model: self.model.clone(),
            temperature: self.temperature,
            max_in_flight: self.max_in_flight,
            retry: self.retry.clone(),
            timeout: Duration::from_secs(self.timeout_secs),
            api_key: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ToolsConfig {
    pub eva: Option<ToolConfig>,
    pub pathcrawler: Option<ToolConfig>,
}

/// The on-disk configuration document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub corpus_manifest: PathBuf,
    pub cache_dir: PathBuf,
    pub store_path: PathBuf,
    pub artifacts_dir: PathBuf,
    pub sets: Vec<GenerationSet>,
    pub samples: u32,
    pub intent_mode: IntentMode,
    /// Overrides the built-in intent directive wording.
    pub intent_directive_text: Option<String>,
    /// Overrides the built-in implementation directive wording.
    pub implementation_directive_text: Option<String>,
    pub bug_patterns: Vec<String>,
    pub ragged_row_policy: RaggedRowPolicy,
    pub client: ClientFileConfig,
    pub tools: ToolsConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            corpus_manifest: PathBuf::from("corpus/manifest.json"),
            cache_dir: PathBuf::from("cache"),
            store_path: PathBuf::from("records.jsonl"),
            artifacts_dir: PathBuf::from("artifacts"),
            sets: vec![GenerationSet::BaselineSet],
            samples: 3,
            intent_mode: IntentMode::Off,
            intent_directive_text: None,
            implementation_directive_text: None,
            bug_patterns: DEFAULT_BUG_PATTERNS.iter().map(|s| s.to_string()).collect(),
            ragged_row_policy: RaggedRowPolicy::Reject,
            client: ClientFileConfig::default(),
            tools: ToolsConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {}: {cause}", path.display())]
    Unreadable { path: PathBuf, cause: String },
    #[error("config {} does not parse: {cause}", path.display())]
    Syntax { path: PathBuf, cause: String },
}

impl Config {
    /// Load a config file and resolve every path against its directory.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.to_path_buf(),
            cause: e.to_string(),
        })?;
        let mut config: Config = serde_json::from_str(&text).map_err(|e| ConfigError::Syntax {
            path: path.to_path_buf(),
            cause: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.corpus_manifest = resolve(base, &config.corpus_manifest);
        config.store_path = resolve(base, &config.store_path);
        config.artifacts_dir = resolve(base, &config.artifacts_dir);
        config.cache_dir = match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) => PathBuf::from(dir),
            None => resolve(base, &config.cache_dir),
        };
        Ok(config)
    }

    /// The directive wording for a mode, honoring config overrides.
    pub fn directive_text(&self, mode: IntentMode) -> String {
        match mode {
            IntentMode::Off => String::new(),
            IntentMode::Intent => self
                .intent_directive_text
                .clone()
                .unwrap_or_else(|| DEFAULT_INTENT_TEXT.to_string()),
            IntentMode::Implementation => self
                .implementation_directive_text
                .clone()
                .unwrap_or_else(|| DEFAULT_IMPLEMENTATION_TEXT.to_string()),
        }
    }
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, "{}").unwrap();
        let config = Config::load(&path).unwrap();
        assert_eq!(config.samples, 3);
        assert_eq!(config.client.temperature, 0.7);
        assert_eq!(config.client.model, "deepseek-reasoner");
        assert_eq!(config.sets, vec![GenerationSet::BaselineSet]);
        assert!(config.corpus_manifest.starts_with(dir.path()));
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{ "store_path": "out/records.jsonl" }"#).unwrap();
        let config = Config::load(&path).unwrap();
        assert_eq!(config.store_path, dir.path().join("out/records.jsonl"));
    }

    #[test]
    fn bad_json_is_syntax_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, "{ nope").unwrap();
        assert!(matches!(
            Config::load(&path),
            Err(ConfigError::Syntax { .. })
        ));
    }

    #[test]
    fn directive_text_defaults_and_overrides() {
        let config = Config::default();
        assert_eq!(config.directive_text(IntentMode::Off), "");
        assert_eq!(
            config.directive_text(IntentMode::Intent),
            DEFAULT_INTENT_TEXT
        );
        let with_override = Config {
            intent_directive_text: Some("custom".into()),
            ..Config::default()
        };
        assert_eq!(with_override.directive_text(IntentMode::Intent), "custom");
    }
}
