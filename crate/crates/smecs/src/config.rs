//! Service and CLI configuration.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use smecs_core::crosswalk::{CrosswalkTable, Crosswalks, TableError};
use smecs_core::vocab::MalformedVocabulary;
use smecs_core::{
    load_vocabulary, PipelineConfig, Precedence, ReviewFields, SourceKind, VocabularyKind, VocabularySet,
};

pub const DEFAULT_TOKEN_ENV: &str = "SMECS_DEFAULT_TOKEN";
pub const LICENSES_FILE: &str = "spdx-licenses.json";
pub const LANGUAGES_FILE: &str = "languages.json";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("invalid configuration {path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("crosswalk table {path}: {source}")]
    Crosswalk { path: PathBuf, source: TableError },
    #[error("vocabulary {path}: {source}")]
    Vocabulary { path: PathBuf, source: MalformedVocabulary },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosswalkPaths {
    pub github: Option<PathBuf>,
    pub cff: Option<PathBuf>,
}

/// Settings read from a TOML file, all optional.
#[derive(Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub listen: String,
    /// Token used when a request brings none. Overridden by the
    /// `SMECS_DEFAULT_TOKEN` environment variable.
    pub default_token: Option<String>,
    pub precedence: Precedence,
    pub review_fields: ReviewFields,
    pub session_dir: Option<PathBuf>,
    pub session_ttl_secs: u64,
    /// Replay recorded responses from this directory instead of using the
    /// network.
    pub fixtures: Option<PathBuf>,
    pub ui_dir: Option<PathBuf>,
    /// Directory holding vocabulary snapshots written by `refresh-vocab`.
    pub vocab_dir: Option<PathBuf>,
    /// Hosts accepted for repository URLs; empty accepts any.
    pub allowed_hosts: Vec<String>,
    pub crosswalk: CrosswalkPaths,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen: "127.0.0.1:8080".into(),
            default_token: None,
            precedence: Precedence::default(),
            review_fields: ReviewFields::default(),
            session_dir: None,
            session_ttl_secs: 24 * 60 * 60,
            fixtures: None,
            ui_dir: None,
            vocab_dir: None,
            allowed_hosts: vec!["github.com".into()],
            crosswalk: CrosswalkPaths::default(),
        }
    }
}

impl std::fmt::Debug for Config {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Config")
            .field("listen", &self.listen)
            .field("default_token", &self.default_token.as_ref().map(|_| "***"))
            .field("precedence", &self.precedence)
            .field("review_fields", &self.review_fields)
            .field("session_dir", &self.session_dir)
            .field("session_ttl_secs", &self.session_ttl_secs)
            .field("fixtures", &self.fixtures)
            .field("ui_dir", &self.ui_dir)
            .field("vocab_dir", &self.vocab_dir)
            .field("allowed_hosts", &self.allowed_hosts)
            .field("crosswalk", &self.crosswalk)
            .finish()
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads `path` if given, then applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(path) => Config::from_toml(&read(path)?)
                .map_err(|message| ConfigError::Invalid { path: path.into(), message })?,
            None => Config::default(),
        };
        if let Ok(token) = std::env::var(DEFAULT_TOKEN_ENV) {
            if !token.trim().is_empty() {
                config.default_token = Some(token);
            }
        }
        Ok(config)
    }

    pub fn crosswalks(&self) -> Result<Crosswalks, ConfigError> {
        let load = |path: &Option<PathBuf>, source: SourceKind, builtin: fn() -> CrosswalkTable| match path {
            None => Ok(builtin()),
            Some(path) => CrosswalkTable::from_json(source, &read(path)?)
                .map_err(|source| ConfigError::Crosswalk { path: path.clone(), source }),
        };
        Ok(Crosswalks {
            github: load(&self.crosswalk.github, SourceKind::GitHubApi, CrosswalkTable::builtin_github)?,
            cff: load(&self.crosswalk.cff, SourceKind::CffFile, CrosswalkTable::builtin_cff)?,
        })
    }

    pub fn pipeline(&self) -> Result<PipelineConfig, ConfigError> {
        Ok(PipelineConfig {
            precedence: self.precedence.clone(),
            review_fields: self.review_fields.clone(),
            crosswalks: self.crosswalks()?,
        })
    }

    /// Bundled vocabularies, replaced by snapshots found in `vocab_dir`.
    pub fn vocabularies(&self) -> Result<VocabularySet, ConfigError> {
        let mut set = VocabularySet::bundled();
        let Some(dir) = &self.vocab_dir else { return Ok(set) };
        for (file, kind) in [(LICENSES_FILE, VocabularyKind::License), (LANGUAGES_FILE, VocabularyKind::Language)] {
            let path = dir.join(file);
            if !path.exists() {
                continue;
            }
            let vocab = load_vocabulary(kind, &read(&path)?)
                .map_err(|source| ConfigError::Vocabulary { path: path.clone(), source })?;
            match kind {
                VocabularyKind::License => set.licenses = vocab,
                VocabularyKind::Language => set.languages = vocab,
            }
        }
        Ok(set)
    }
}
