//! Run configuration files.
//!
//! A flat TOML document. `kind` selects the generator (`rewrite`, the
//! default, `cross_class` or `cipher`); `seed` is mandatory; every other
//! key must be known to the selected generator.
//!
//! ```toml
//! kind = "rewrite"
//! seed = 7
//! num_instructions = 1000
//! examples_per_instruction = 1000
//! noop_fraction = 0.5
//! occurrence_set = [1]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::cipher::{
    ingest_corpus, template_pool, CipherConfig, CipherError, CipherSource, Dictionary,
};
use crate::taskgen::{CrossClassConfig, DatasetConfig, SemanticClass, TaskGenError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

impl From<TaskGenError> for ConfigError {
    fn from(e: TaskGenError) -> Self {
        match e {
            TaskGenError::Config { key, message } => ConfigError::Invalid { key, message },
            other => invalid("config", other.to_string()),
        }
    }
}

/// Cipher run settings. Relative paths are resolved against the config
/// file's directory. Without a corpus the template generator fills the pool.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CipherRunConfig {
    pub seed: u64,
    #[serde(default = "default_train_size")]
    pub train_size: usize,
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_noop_fraction")]
    pub noop_fraction: f64,
    pub train_dictionary: PathBuf,
    pub test_dictionary: PathBuf,
    #[serde(default)]
    pub train_corpus: Option<PathBuf>,
    #[serde(default)]
    pub test_corpus: Option<PathBuf>,
    #[serde(default = "default_per_word")]
    pub template_sentences_per_word: usize,
    #[serde(default = "default_plain")]
    pub template_plain_sentences: usize,
    #[serde(default)]
    pub train_instructions: Option<usize>,
    #[serde(default)]
    pub power_law_shape: Option<f64>,
}

fn default_train_size() -> usize {
    CipherConfig::new(0).train_size
}
fn default_test_size() -> usize {
    CipherConfig::new(0).test_size
}
fn default_noop_fraction() -> f64 {
    CipherConfig::new(0).noop_fraction
}
fn default_per_word() -> usize {
    20
}
fn default_plain() -> usize {
    200
}

impl CipherRunConfig {
    pub fn cipher_config(&self) -> CipherConfig {
        CipherConfig {
            seed: self.seed,
            train_size: self.train_size,
            test_size: self.test_size,
            noop_fraction: self.noop_fraction,
            train_instructions: self.train_instructions,
            power_law_shape: self.power_law_shape,
        }
    }

    fn source(&self, dict: &Path, corpus: Option<&Path>, stream: u64) -> Result<CipherSource, CipherError> {
        let dictionary = Dictionary::load(dict)?;
        let pool = match corpus {
            Some(path) => ingest_corpus(path, &dictionary)?,
            None => template_pool(
                &dictionary,
                self.template_sentences_per_word,
                self.template_plain_sentences,
                self.seed ^ stream,
            )?,
        };
        Ok(CipherSource { dictionary, pool })
    }

    pub fn load_sources(&self) -> Result<(CipherSource, CipherSource), CipherError> {
        Ok((
            self.source(&self.train_dictionary, self.train_corpus.as_deref(), 0)?,
            self.source(&self.test_dictionary, self.test_corpus.as_deref(), 1)?,
        ))
    }

    fn resolve(&mut self, base: &Path) {
        for p in [&mut self.train_dictionary, &mut self.test_dictionary] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        for p in [&mut self.train_corpus, &mut self.test_corpus].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunConfig {
    Rewrite(DatasetConfig),
    CrossClass(CrossClassConfig),
    Cipher(CipherRunConfig),
}

fn from_table<T: for<'de> Deserialize<'de>>(table: toml::Table) -> Result<T, ConfigError> {
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))
}

fn class_value(key: &str, v: &toml::Value) -> Result<SemanticClass, ConfigError> {
    v.as_str()
        .ok_or_else(|| invalid(key, "expected a string such as \"repeated:3\""))?
        .parse()
        .map_err(|e: String| invalid(key, e))
}

impl RunConfig {
    /// Parses a config document. `base_dir` anchors relative paths.
    pub fn parse(text: &str, base_dir: &Path, seed_override: Option<u64>) -> Result<Self, ConfigError> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
        let kind = match table.remove("kind") {
            None => "rewrite".to_string(),
            Some(toml::Value::String(s)) => s,
            Some(_) => return Err(invalid("kind", "expected a string")),
        };
        if let Some(seed) = seed_override {
            let seed = i64::try_from(seed).map_err(|_| invalid("seed", "override exceeds the TOML integer range"))?;
            table.insert("seed".into(), toml::Value::Integer(seed));
        }
        if !table.contains_key("seed") {
            return Err(invalid("seed", "is mandatory"));
        }
        match kind.as_str() {
            "rewrite" => {
                let config: DatasetConfig = from_table(table)?;
                config.validate()?;
                Ok(RunConfig::Rewrite(config))
            }
            "cross_class" => {
                if table.contains_key("semantic_class") {
                    return Err(invalid(
                        "semantic_class",
                        "not used by cross_class configs; set train_classes and test_class",
                    ));
                }
                let train_classes = match table.remove("train_classes") {
                    Some(toml::Value::Array(items)) if !items.is_empty() => items
                        .iter()
                        .enumerate()
                        .map(|(i, v)| class_value(&format!("train_classes[{i}]"), v))
                        .collect::<Result<Vec<_>, _>>()?,
                    Some(_) => return Err(invalid("train_classes", "expected a non-empty array of classes")),
                    None => return Err(invalid("train_classes", "is mandatory")),
                };
                let test_class = match table.remove("test_class") {
                    Some(v) => class_value("test_class", &v)?,
                    None => return Err(invalid("test_class", "is mandatory")),
                };
                let base: DatasetConfig = from_table(table)?;
                Ok(RunConfig::CrossClass(CrossClassConfig {
                    base,
                    train_classes,
                    test_class,
                }))
            }
            "cipher" => {
                let mut config: CipherRunConfig = from_table(table)?;
                config.resolve(base_dir);
                Ok(RunConfig::Cipher(config))
            }
            other => Err(invalid(
                "kind",
                format!("unknown kind `{other}` (expected rewrite, cross_class or cipher)"),
            )),
        }
    }

    pub fn load(path: impl AsRef<Path>, seed_override: Option<u64>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base, seed_override)
    }
}
