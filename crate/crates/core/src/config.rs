//! Per-dataset configuration files.
//!
//! A config is a small TOML document:
//!
//! ```toml
//! name = "Apache"
//! log_format = '\[<Time>\] \[<Level>\] <Content>'
//! regexes = ['(\d+\.){3}\d+']
//! threshold = 0.61
//! ```
//!
//! `regexes` may be omitted (empty list). Literal (single-quoted) TOML
//! strings keep regex backslashes readable.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{LogFormat, Preprocessor, RegexSet};

/// Similarity threshold used when nothing was tuned for the data.
pub const DEFAULT_THRESHOLD: f64 = 0.61;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    pub log_format: String,
    #[serde(default)]
    pub regexes: Vec<String>,
    pub threshold: f64,
}

impl DatasetConfig {
    pub fn new(
        name: impl Into<String>,
        log_format: impl Into<String>,
        regexes: impl IntoIterator<Item = impl Into<String>>,
        threshold: f64,
    ) -> DatasetConfig {
        DatasetConfig {
            name: name.into(),
            log_format: log_format.into(),
            regexes: regexes.into_iter().map(Into::into).collect(),
            threshold,
        }
    }

    /// Whole-line content, no regexes, default threshold.
    pub fn fallback(name: impl Into<String>) -> DatasetConfig {
        DatasetConfig::new(name, "<Content>", Vec::<String>::new(), DEFAULT_THRESHOLD)
    }

    pub fn from_toml(text: &str) -> Result<DatasetConfig> {
        let config: DatasetConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<DatasetConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DatasetConfig::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks the threshold range and compiles the format and every regex.
    pub fn validate(&self) -> Result<()> {
        check_threshold(self.threshold)?;
        if self.name.trim().is_empty() {
            return Err(Error::Config("name must not be empty".into()));
        }
        self.preprocessor().map(|_| ())
    }

    pub fn preprocessor(&self) -> Result<Preprocessor> {
        Ok(Preprocessor::new(
            LogFormat::parse(&self.log_format)?,
            RegexSet::compile(&self.regexes)?,
        ))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

pub fn check_threshold(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Config(format!("threshold {t} outside [0, 1]")))
    }
}

/// Loads every `*.toml` in `dir`, sorted by file name.
pub fn load_dir(dir: impl AsRef<Path>) -> Result<Vec<DatasetConfig>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "toml"))
        .collect();
    paths.sort();
    paths.iter().map(DatasetConfig::load).collect()
}
