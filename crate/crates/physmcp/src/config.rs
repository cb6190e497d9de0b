//! Tunable constants for the simulated twins, the twin-plane confidence
//! dynamics, and the matcher weight profiles.
//!
//! Everything here has a built-in default; `config/adapters.json` and
//! `config/weights.json` override the defaults when present.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::MatchWeights;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("unknown weight profile: {0}")]
    UnknownProfile(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChemicalConfig {
    pub dim: usize,
    /// Relaxation rate k in dx/dt = k * (sigma(W u + b) - x).
    pub rate_k: f64,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub euler_step_s: f64,
    pub convergence_tol: f64,
    pub max_model_time_s: f64,
    pub contamination_increment: f64,
    pub contamination_threshold: f64,
    pub prep_cost_s: f64,
}

impl Default for ChemicalConfig {
    fn default() -> Self {
        ChemicalConfig {
            dim: 4,
            rate_k: 2.0,
            weights: vec![
                vec![0.5, 0.1, 0.0, 0.0],
                vec![0.1, 0.5, 0.1, 0.0],
                vec![0.0, 0.1, 0.5, 0.1],
                vec![0.0, 0.0, 0.1, 0.5],
            ],
            bias: vec![0.0; 4],
            euler_step_s: 0.01,
            convergence_tol: 1e-6,
            max_model_time_s: 60.0,
            contamination_increment: 0.05,
            contamination_threshold: 0.5,
            prep_cost_s: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WetwareConfig {
    pub channels: u32,
    pub base_rate_hz: f64,
    pub noise_sigma: f64,
    pub initial_viability: f64,
    pub viability_decrement: f64,
    pub rest_increment: f64,
    pub rest_cap: f64,
    pub seed: u64,
    pub prep_cost_s: f64,
}

impl Default for WetwareConfig {
    fn default() -> Self {
        WetwareConfig {
            channels: 8,
            base_rate_hz: 20.0,
            noise_sigma: 0.5,
            initial_viability: 0.95,
            viability_decrement: 0.01,
            rest_increment: 0.05,
            rest_cap: 0.95,
            seed: 7,
            prep_cost_s: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FastConfig {
    pub dim: usize,
    pub weights: Vec<Vec<f64>>,
    /// Per-invoke multiplicative weight drift and drift-score increment.
    pub drift_delta: f64,
    pub program_version: String,
    pub prep_cost_s: f64,
}

impl Default for FastConfig {
    fn default() -> Self {
        FastConfig {
            dim: 4,
            weights: vec![
                vec![0.8, -0.2, 0.0, 0.1],
                vec![-0.1, 0.7, 0.2, 0.0],
                vec![0.0, 0.1, 0.9, -0.3],
                vec![0.2, 0.0, -0.1, 0.6],
            ],
            drift_delta: 0.005,
            program_version: "v1".into(),
            prep_cost_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorticalStubConfig {
    pub seed: u64,
    pub backend_latency_range_ms: (f64, f64),
    pub observation_latency_range_ms: (f64, f64),
    pub fingerprint_len: usize,
    pub prep_cost_s: f64,
}

impl Default for CorticalStubConfig {
    fn default() -> Self {
        CorticalStubConfig {
            seed: 11,
            backend_latency_range_ms: (6940.0, 7730.0),
            observation_latency_range_ms: (16.4, 49.7),
            fingerprint_len: 8,
            prep_cost_s: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwinConfig {
    /// Confidence gain per consistent telemetry ingest.
    pub confidence_gain: f64,
    /// Confidence multiplier on unhealthy telemetry.
    pub confidence_loss_factor: f64,
    pub initial_confidence: f64,
}

impl Default for TwinConfig {
    fn default() -> Self {
        TwinConfig {
            confidence_gain: 0.05,
            confidence_loss_factor: 0.5,
            initial_confidence: 1.0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdapterConfig {
    pub chemical: ChemicalConfig,
    pub wetware: WetwareConfig,
    pub fast: FastConfig,
    pub cortical: CorticalStubConfig,
    pub twin: TwinConfig,
}

impl AdapterConfig {
    /// Loads `config/adapters.json` under `dir`, falling back to defaults
    /// when the file is absent.
    pub fn load(dir: &Path) -> Result<Self, ConfigError> {
        let path = dir.join("adapters.json");
        if !path.exists() {
            return Ok(AdapterConfig::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Named matcher weight profiles, keyed by profile name.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightProfiles {
    pub profiles: BTreeMap<String, [f64; 5]>,
}

impl Default for WeightProfiles {
    fn default() -> Self {
        let mut profiles = BTreeMap::new();
        profiles.insert("default".to_string(), [0.35, 0.25, 0.15, 0.15, 0.10]);
        profiles.insert("timing_heavy".to_string(), [0.15, 0.50, 0.10, 0.15, 0.10]);
        WeightProfiles { profiles }
    }
}

impl WeightProfiles {
    pub fn load(dir: &Path) -> Result<Self, ConfigError> {
        let path = dir.join("weights.json");
        if !path.exists() {
            return Ok(WeightProfiles::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let profiles: BTreeMap<String, [f64; 5]> =
            serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.display().to_string(),
                source,
            })?;
        Ok(WeightProfiles { profiles })
    }

    pub fn get(&self, name: &str) -> Result<MatchWeights, ConfigError> {
        let [alpha, beta, gamma, delta, epsilon] = *self
            .profiles
            .get(name)
            .ok_or_else(|| ConfigError::UnknownProfile(name.to_string()))?;
        Ok(MatchWeights {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
        })
    }
}
