//! Pipeline configuration file (TOML).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::converge::TrendConfig;
use crate::ingest::{parse_timestamp, Weighting};
use crate::netmap::{ClusterTarget, MapParams, Month};
use crate::topicmodel::{derive_seed, LdaConfig, DEFAULT_TOP_WORDS};
use crate::{Error, Result};

/// The configuration shipped with the crate.
pub const DEFAULT_CONFIG: &str = include_str!("../../config/default.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_seed")]
    pub rng_seed: u64,
    pub paths: Paths,
    #[serde(default)]
    pub ingest: IngestConfig,
    pub seeds: Seeds,
    pub months: Vec<MonthConfig>,
    #[serde(default)]
    pub map: MapConfig,
    #[serde(default)]
    pub lda: LdaConfig,
    #[serde(default)]
    pub bridge: BridgeConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub tweets: PathBuf,
    pub follows: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub languages: Vec<String>,
    pub keep_unlabeled: bool,
    pub strict: bool,
    /// Drop exact repeats of (account, timestamp, text) before analysis.
    pub dedupe_exact: bool,
    pub min_df: usize,
    pub max_df_ratio: f64,
    pub weighting: Weighting,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            languages: vec!["en".into()],
            keep_unlabeled: true,
            strict: false,
            dedupe_exact: false,
            min_df: 2,
            max_df_ratio: 0.5,
            weighting: Weighting::Tfidf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seeds {
    pub hashtags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonthConfig {
    pub label: String,
    pub start: String,
    pub end: String,
    pub activity_threshold: u32,
    /// Overrides `paths.labels` for this month.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    pub kcore_k: u32,
    pub target: ClusterTarget,
    pub min_cluster_size: usize,
    pub layout_iterations: usize,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            kcore_k: 2,
            target: ClusterTarget::Count(6),
            min_cluster_size: 3,
            layout_iterations: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BridgeConfig {
    pub top_n: usize,
}

impl Default for BridgeConfig {
    fn default() -> Self {
        BridgeConfig { top_n: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Seed-activity threshold of the whole-window snapshot whose clusters
    /// are compared across weeks.
    pub activity_threshold: u32,
    pub min_slope: f64,
    pub min_weeks: usize,
    pub coherence_top_m: usize,
    pub top_words: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        let trend = TrendConfig::default();
        ConvergenceConfig {
            activity_threshold: 1,
            min_slope: trend.min_slope,
            min_weeks: trend.min_weeks,
            coherence_top_m: 10,
            top_words: DEFAULT_TOP_WORDS,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub rng_seed: Option<u64>,
    pub strict: Option<bool>,
    pub k: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config file; relative paths are taken relative to its
    /// directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let p = &mut self.paths;
        resolve(base, &mut p.tweets);
        resolve(base, &mut p.follows);
        resolve(base, &mut p.output_dir);
        for opt in [&mut p.labels, &mut p.stopwords] {
            if let Some(x) = opt {
                resolve(base, x);
            }
        }
        for m in &mut self.months {
            if let Some(x) = &mut m.labels {
                resolve(base, x);
            }
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("serializable config")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.rng_seed {
            self.rng_seed = seed;
        }
        if let Some(strict) = o.strict {
            self.ingest.strict = strict;
        }
        if let Some(k) = o.k {
            self.lda.k = k;
        }
        if let Some(dir) = &o.output_dir {
            self.paths.output_dir = dir.clone();
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.hashtags.is_empty() {
            return Err(Error::config("seeds.hashtags is empty"));
        }
        if self.months.is_empty() {
            return Err(Error::config("no months configured"));
        }
        let months = self.month_specs()?;
        let mut labels = BTreeSet::new();
        for (i, m) in months.iter().enumerate() {
            if m.range.0 >= m.range.1 {
                return Err(Error::config(format!(
                    "month {} ends before it starts",
                    m.label
                )));
            }
            if i > 0 && months[i - 1].range.1 >= m.range.0 {
                return Err(Error::config(format!(
                    "month {} overlaps or precedes its predecessor",
                    m.label
                )));
            }
            if m.activity_threshold == 0 {
                return Err(Error::config(format!(
                    "month {}: activity_threshold must be at least 1",
                    m.label
                )));
            }
            if m.label.is_empty()
                || !m
                    .label
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || "-_".contains(c))
            {
                return Err(Error::config(format!(
                    "month label {:?} must be non-empty [A-Za-z0-9_-]",
                    m.label
                )));
            }
            if m.label == super::WINDOW_LABEL || !labels.insert(m.label.clone()) {
                return Err(Error::config(format!(
                    "month label {} is reserved or repeated",
                    m.label
                )));
            }
        }
        if !(self.ingest.max_df_ratio > 0.0 && self.ingest.max_df_ratio <= 1.0) {
            return Err(Error::config("ingest.max_df_ratio must be in (0, 1]"));
        }
        if self.map.min_cluster_size == 0 {
            return Err(Error::config("map.min_cluster_size must be at least 1"));
        }
        match self.map.target {
            ClusterTarget::Count(0) => {
                return Err(Error::config("map.target count must be at least 1"))
            }
            ClusterTarget::Threshold(t) if !(t > 0.0) => {
                return Err(Error::config("map.target threshold must be positive"))
            }
            _ => {}
        }
        if self.bridge.top_n == 0 {
            return Err(Error::config("bridge.top_n must be at least 1"));
        }
        if self.convergence.activity_threshold == 0 || self.convergence.coherence_top_m < 2 {
            return Err(Error::config(
                "convergence.activity_threshold >= 1 and coherence_top_m >= 2 required",
            ));
        }
        self.lda.validate()
    }

    pub fn seed_set(&self) -> BTreeSet<String> {
        self.seeds
            .hashtags
            .iter()
            .map(|s| s.to_lowercase())
            .collect()
    }

    pub fn month_specs(&self) -> Result<Vec<Month>> {
        self.months
            .iter()
            .map(|m| {
                let parse = |s: &str| {
                    parse_timestamp(s).map_err(|e| Error::config(format!("month {}: {e}", m.label)))
                };
                Ok(Month {
                    label: m.label.clone(),
                    range: (parse(&m.start)?, parse(&m.end)?),
                    activity_threshold: m.activity_threshold,
                })
            })
            .collect()
    }

    /// From the first month's start to the last month's end.
    pub fn window(&self) -> Result<(DateTime<Utc>, DateTime<Utc>)> {
        let months = self.month_specs()?;
        let first = months
            .first()
            .ok_or_else(|| Error::config("no months configured"))?;
        Ok((first.range.0, months.last().expect("non-empty").range.1))
    }

    pub fn map_params(&self) -> MapParams {
        MapParams {
            seeds: self.seed_set(),
            kcore_k: self.map.kcore_k,
            target: self.map.target,
            min_cluster_size: self.map.min_cluster_size,
            layout_iterations: self.map.layout_iterations,
            rng_seed: derive_seed(self.rng_seed, "layout"),
        }
    }

    /// LDA settings with the seed derived from `rng_seed`.
    pub fn lda_config(&self) -> LdaConfig {
        LdaConfig {
            rng_seed: derive_seed(self.rng_seed, "topics"),
            ..self.lda.clone()
        }
    }

    pub fn trend(&self) -> TrendConfig {
        TrendConfig {
            min_slope: self.convergence.min_slope,
            min_weeks: self.convergence.min_weeks,
        }
    }
}
