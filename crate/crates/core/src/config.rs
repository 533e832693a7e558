//! Run configuration shared by the command-line workflows, loaded from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::AugmentConfig;
use crate::corpus::SplitSpec;
use crate::eval::ParseFailurePolicy;
use crate::exec::SearchLimits;
use crate::nl::ResponseSyntax;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Corpus directory read by `augment`, `reward`, `eval` and `continue`.
    pub corpus: Option<PathBuf>,
    /// Output directory for generated artifacts.
    pub out: Option<PathBuf>,
    /// Directory of `<instance id>.plan` files overriding the built-in planner.
    pub plans: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub ks: Vec<usize>,
    pub prefix: usize,
    pub parse_failures: ParseFailurePolicy,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings { ks: vec![1, 3, 5], prefix: 15, parse_failures: ParseFailurePolicy::AllFalse }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// When set, overrides the corpus and augmentation seeds.
    pub seed: Option<u64>,
    pub paths: Paths,
    pub corpus: SplitSpec,
    pub augment: AugmentConfig,
    /// Planner limits for reference plans; replaces `corpus.budget.limits` when set.
    pub search: Option<SearchLimits>,
    /// `angle` or `square`.
    pub syntax: String,
    pub eval: EvalSettings,
    /// `error`, `warn`, `info`, `debug` or `trace`.
    pub log: String,
    /// Worker threads for the scoring service.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            paths: Paths::default(),
            corpus: SplitSpec::default(),
            augment: AugmentConfig::default(),
            search: None,
            syntax: "angle".into(),
            eval: EvalSettings::default(),
            log: "info".into(),
            workers: 4,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Loads, resolves relative paths against the file's directory and checks the result.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let mut cfg = Self::from_toml(&text).map_err(|e| ConfigError::Parse { path: path.into(), msg: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.paths.corpus, &mut cfg.paths.out, &mut cfg.paths.plans].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        cfg.finish()?;
        Ok(cfg)
    }

    /// Propagates the seed and planner limits, then validates.
    pub fn finish(&mut self) -> Result<(), ConfigError> {
        if let Some(seed) = self.seed {
            self.corpus.seed = seed;
            self.augment.seed = seed;
        }
        if let Some(limits) = self.search {
            self.corpus.budget.limits = limits;
        }
        if self.paths.plans.is_some() {
            self.corpus.plan_dir = self.paths.plans.clone();
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, p) in [("corpus", &self.paths.corpus), ("plans", &self.paths.plans)] {
            if let Some(p) = p {
                if !p.is_dir() {
                    return Err(ConfigError::Invalid(format!("paths.{name}: {} is not a directory", p.display())));
                }
            }
        }
        self.response_syntax()?;
        self.augment.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.corpus.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.eval.ks.contains(&0) {
            return Err(ConfigError::Invalid("eval.ks: k must be positive".into()));
        }
        if !["error", "warn", "info", "debug", "trace", "off"].contains(&self.log.as_str()) {
            return Err(ConfigError::Invalid(format!("log: unknown level `{}`", self.log)));
        }
        Ok(())
    }

    pub fn response_syntax(&self) -> Result<ResponseSyntax, ConfigError> {
        ResponseSyntax::by_name(&self.syntax).ok_or_else(|| ConfigError::Invalid(format!("syntax: unknown dialect `{}`", self.syntax)))
    }
}
