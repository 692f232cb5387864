//! Human-editable analysis configuration.
//!
//! The file is TOML. Every analysis key must be present; a missing key is
//! reported by its dotted name (`terms.depth`). A `[sim]` table may share the
//! file and is read by [`load_sim_config`].
//!
//! ```toml
//! [stopwords]
//! base_path = "builtin"
//! extra = ["d20"]
//! ratio_threshold = 5.0
//! min_count = 10
//!
//! [markers]
//! similarity_threshold = 0.8
//! min_tokens = 50
//!
//! [slices]
//! buckets_per_sequence = 1
//!
//! [terms]
//! mode = "bow"
//! depth = 20
//! label_depth = 3
//!
//! [groups]
//! include = []
//!
//! [counts]
//! include_dm = false
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::pipeline::ScoringMode;
use crate::sim::SimConfig;

/// Name accepted in `stopwords.base_path` for the bundled English list.
pub const BUILTIN_STOPWORDS: &str = "builtin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopwordSettings {
    pub base_path: String,
    pub extra: Vec<String>,
    pub ratio_threshold: f64,
    pub min_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkerSettings {
    pub similarity_threshold: f64,
    pub min_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSettings {
    pub buckets_per_sequence: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSettings {
    pub mode: ScoringMode,
    pub depth: usize,
    pub label_depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSettings {
    /// Groups to analyze; empty means all.
    pub include: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountSettings {
    /// Count dm posts in term statistics. Marker detection always uses them.
    pub include_dm: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub stopwords: StopwordSettings,
    pub markers: MarkerSettings,
    pub slices: SliceSettings,
    pub terms: TermSettings,
    pub groups: GroupSettings,
    pub counts: CountSettings,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            stopwords: StopwordSettings {
                base_path: BUILTIN_STOPWORDS.to_string(),
                extra: vec!["d20".to_string()],
                ratio_threshold: 5.0,
                min_count: 10,
            },
            markers: MarkerSettings {
                similarity_threshold: 0.8,
                min_tokens: 50,
            },
            slices: SliceSettings {
                buckets_per_sequence: 1,
            },
            terms: TermSettings {
                mode: ScoringMode::Bow,
                depth: 20,
                label_depth: 3,
            },
            groups: GroupSettings { include: vec![] },
            counts: CountSettings { include_dm: false },
        }
    }
}

const ANALYSIS_KEYS: &[(&str, &[&str])] = &[
    ("stopwords", &["base_path", "extra", "ratio_threshold", "min_count"]),
    ("markers", &["similarity_threshold", "min_tokens"]),
    ("slices", &["buckets_per_sequence"]),
    ("terms", &["mode", "depth", "label_depth"]),
    ("groups", &["include"]),
    ("counts", &["include_dm"]),
];

const SIM_KEYS: &[&str] = &[
    "dimensions",
    "agent_count",
    "sih",
    "speed",
    "steps",
    "align_weight",
    "cohesion_weight",
    "noise_angle",
    "cells_per_axis",
    "post_interval",
    "seed",
];

fn require_keys(root: &toml::Table, section: &str, keys: &[&str]) -> Result<()> {
    let table = match root.get(section) {
        Some(toml::Value::Table(t)) => t,
        Some(_) => return Err(Error::InvalidConfig(vec![FieldError::new(section, "must be a table")])),
        None => return Err(Error::MissingKey(section.to_string())),
    };
    for key in keys {
        if !table.contains_key(*key) {
            return Err(Error::MissingKey(format!("{section}.{key}")));
        }
    }
    Ok(())
}

fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| Error::Config(format!("malformed configuration: {e}")))
}

fn deserialize_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(vec![FieldError::new("config", e.to_string())])
}

impl AnalysisConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_table(parse_table(text)?)
    }

    /// Accepts the same structure as JSON.
    pub fn from_json(text: &str) -> Result<Self> {
        let table: toml::Table =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed configuration: {e}")))?;
        Self::from_table(table)
    }

    fn from_table(mut root: toml::Table) -> Result<Self> {
        root.remove("sim");
        for key in root.keys() {
            if !ANALYSIS_KEYS.iter().any(|(s, _)| s == key) {
                return Err(Error::InvalidConfig(vec![FieldError::new(
                    key.as_str(),
                    "unknown section",
                )]));
            }
        }
        for (section, keys) in ANALYSIS_KEYS {
            require_keys(&root, section, keys)?;
        }
        let cfg: AnalysisConfig = toml::Value::Table(root).try_into().map_err(deserialize_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical TOML rendering; loading it back yields an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("analysis config is always representable as TOML")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_toml()).map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &str, msg: &str| {
            if !ok {
                errs.push(FieldError::new(field, msg));
            }
        };
        let s = &self.stopwords;
        check(
            !s.base_path.trim().is_empty(),
            "stopwords.base_path",
            "must not be empty",
        );
        check(
            s.ratio_threshold.is_finite() && s.ratio_threshold > 0.0,
            "stopwords.ratio_threshold",
            "must be a positive number",
        );
        check(s.min_count >= 1, "stopwords.min_count", "must be at least 1");
        let t = self.markers.similarity_threshold;
        check(
            t.is_finite() && t > 0.0 && t <= 1.0,
            "markers.similarity_threshold",
            "must be in (0, 1]",
        );
        check(self.markers.min_tokens >= 1, "markers.min_tokens", "must be at least 1");
        check(
            self.slices.buckets_per_sequence >= 1,
            "slices.buckets_per_sequence",
            "must be at least 1",
        );
        check(self.terms.depth >= 1, "terms.depth", "must be at least 1");
        check(
            self.terms.label_depth >= 1 && self.terms.label_depth <= self.terms.depth,
            "terms.label_depth",
            "must be between 1 and terms.depth",
        );
        let unique: BTreeSet<&String> = self.groups.include.iter().collect();
        check(
            unique.len() == self.groups.include.len(),
            "groups.include",
            "must not repeat a group",
        );
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(errs))
        }
    }

    /// Resolves `stopwords.base_path` against `base_dir` when relative.
    pub fn base_stopwords_path(&self, base_dir: Option<&Path>) -> Option<PathBuf> {
        let p = self.stopwords.base_path.trim();
        if p == BUILTIN_STOPWORDS {
            return None;
        }
        let path = PathBuf::from(p);
        Some(match base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path,
        })
    }
}

/// Reads the `[sim]` table of a shared configuration file.
pub fn sim_config_from_toml(text: &str) -> Result<SimConfig> {
    let mut root = parse_table(text)?;
    require_keys(&root, "sim", SIM_KEYS)?;
    let sim = root.remove("sim").expect("checked above");
    let cfg: SimConfig = sim.try_into().map_err(deserialize_err)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a simulation config given either as a bare JSON object or as a
/// `{"sim": {...}}` wrapper.
pub fn sim_config_from_json(text: &str) -> Result<SimConfig> {
    let mut table: toml::Table =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed configuration: {e}")))?;
    if !table.contains_key("sim") {
        table = toml::Table::from_iter([("sim".to_string(), toml::Value::Table(table))]);
    }
    require_keys(&table, "sim", SIM_KEYS)?;
    let cfg: SimConfig = table
        .remove("sim")
        .expect("checked above")
        .try_into()
        .map_err(deserialize_err)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn sim_config_to_toml(cfg: &SimConfig) -> String {
    #[derive(Serialize)]
    struct Wrapper<'a> {
        sim: &'a SimConfig,
    }
    toml::to_string(&Wrapper { sim: cfg }).expect("sim config is always representable as TOML")
}

pub fn load_sim_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    sim_config_from_toml(&text)
}
