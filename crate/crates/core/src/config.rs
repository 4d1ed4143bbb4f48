//! Run configuration, loaded from JSON with strict key checking.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::NumericConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Parse(String),
    #[error("config field `{field}`: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Lower bound of the embedding-similarity band for type-3 candidates.
    pub sim_lo: f64,
    pub sim_hi: f64,
    /// WUP score given to candidates missing from the lexical graph.
    pub wup_fallback: f64,
    /// Widening applied to each end of the band per relaxation round.
    pub relax_step: f64,
    pub relax_max_rounds: u32,
    /// Use `1/(1+e^E)` for the edit-distance score instead of `1 − 1/(1+e^E)`.
    pub sd_inverted: bool,
    pub numeric: NumericConfig,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            sim_lo: 0.6,
            sim_hi: 0.85,
            wup_fallback: 0.1,
            relax_step: 0.05,
            relax_max_rounds: 3,
            sd_inverted: false,
            numeric: NumericConfig::default(),
            seed: 0,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field, message: String| Err(ConfigError::Invalid { field, message });
        if !(0.0..=1.0).contains(&self.sim_lo) {
            return invalid("sim_lo", format!("{} is outside [0, 1]", self.sim_lo));
        }
        if !(0.0..=1.0).contains(&self.sim_hi) {
            return invalid("sim_hi", format!("{} is outside [0, 1]", self.sim_hi));
        }
        if self.sim_lo >= self.sim_hi {
            return invalid(
                "sim_lo",
                format!("must be below sim_hi ({} >= {})", self.sim_lo, self.sim_hi),
            );
        }
        if !(self.wup_fallback > 0.0 && self.wup_fallback < 1.0) {
            return invalid(
                "wup_fallback",
                format!("{} is outside (0, 1)", self.wup_fallback),
            );
        }
        if !(self.relax_step >= 0.0 && self.relax_step.is_finite()) {
            return invalid(
                "relax_step",
                format!("{} must be a non-negative number", self.relax_step),
            );
        }
        self.numeric
            .validate()
            .map_err(|message| ConfigError::Invalid {
                field: "numeric",
                message,
            })
    }

    /// Similarity band for relaxation round `round` (0 = configured band).
    pub fn interval_for_round(&self, round: u32) -> (f64, f64) {
        let widen = self.relax_step * f64::from(round);
        (
            (self.sim_lo - widen).max(0.0),
            (self.sim_hi + widen).min(1.0),
        )
    }

    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reads a config file, or returns the defaults when no path is given.
pub fn load_config(path: Option<&Path>) -> Result<Config, ConfigError> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Config::from_json_str(&text)
}
