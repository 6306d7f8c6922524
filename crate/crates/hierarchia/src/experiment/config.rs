//! Declarative experiment configuration: a TOML document holding the model
//! matrices (complex entries as `[re, im]` pairs, row-major), the seed, the
//! verification suites to run, and output options.

use std::collections::BTreeMap;
use std::path::PathBuf;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::ModelSpec;

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("config syntax error: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("config field {field}: {message}")]
    Field { field: String, message: String },
}

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { field: field.into(), message: message.into() }
}

/// The verification suites the runner knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Roundtrip,
    VnHierarchy,
    Bbgky,
    NonlinearBbgky,
    Gke,
    Meanfield,
    FunctionalEquality,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Roundtrip => "roundtrip",
            Suite::VnHierarchy => "vn-hierarchy",
            Suite::Bbgky => "bbgky",
            Suite::NonlinearBbgky => "nonlinear-bbgky",
            Suite::Gke => "gke",
            Suite::Meanfield => "meanfield",
            Suite::FunctionalEquality => "functional-equality",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct RawModel {
    d: usize,
    h: Vec<[f64; 2]>,
    phi: Vec<[f64; 2]>,
    epsilon: f64,
    n_max: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
struct RawOutput {
    path: Option<PathBuf>,
    format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct RawMeanfield {
    epsilons: Option<Vec<f64>>,
    t: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
struct RawConfig {
    model: RawModel,
    seed: u64,
    times: Vec<f64>,
    suites: Vec<Suite>,
    #[serde(default)]
    output: Option<RawOutput>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    meanfield: Option<RawMeanfield>,
    #[serde(default)]
    experimental_skrrc: Option<bool>,
}

/// Mean-field sweep settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanfieldSettings {
    pub epsilons: Vec<f64>,
    pub t: f64,
}

impl Default for MeanfieldSettings {
    fn default() -> Self {
        Self { epsilons: vec![1.0, 0.5, 0.25, 0.125], t: 1.0 }
    }
}

/// A validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub seed: u64,
    pub times: Vec<f64>,
    pub suites: Vec<Suite>,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
    pub tolerances: BTreeMap<String, f64>,
    pub meanfield: MeanfieldSettings,
    pub experimental_skrrc: bool,
    /// SHA-256 of the canonical re-serialization of the parsed document.
    pub config_hash: String,
}

impl ExperimentConfig {
    pub fn tolerance(&self, check: &str, default: f64) -> f64 {
        self.tolerances.get(check).copied().unwrap_or(default)
    }
}

fn complex_matrix(
    entries: &[[f64; 2]],
    side: usize,
    field: &str,
) -> Result<DMatrix<C64>, ConfigError> {
    if entries.len() != side * side {
        return Err(field_err(
            field,
            format!("expected {} row-major [re, im] entries, got {}", side * side, entries.len()),
        ));
    }
    if entries.iter().flatten().any(|v| !v.is_finite()) {
        return Err(field_err(field, "entries must be finite"));
    }
    Ok(DMatrix::from_fn(side, side, |r, c| {
        let [re, im] = entries[r * side + c];
        C64::new(re, im)
    }))
}

/// Parse and validate an experiment document.
pub fn parse_config(bytes: &[u8]) -> Result<ExperimentConfig, ConfigError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| field_err("<document>", format!("not valid UTF-8: {e}")))?;
    let raw: RawConfig = toml::from_str(text)?;

    if raw.suites.is_empty() {
        return Err(field_err("suites", "suites must be nonempty"));
    }
    let mut suites = raw.suites.clone();
    suites.sort();
    suites.dedup();

    if raw.times.is_empty() {
        return Err(field_err("times", "at least one evaluation time is required"));
    }
    if raw.times.iter().any(|t| !t.is_finite()) {
        return Err(field_err("times", "times must be finite"));
    }

    let h = complex_matrix(&raw.model.h, raw.model.d, "model.h")?;
    let phi = complex_matrix(&raw.model.phi, raw.model.d * raw.model.d, "model.phi")?;
    let model = ModelSpec::new(raw.model.d, h, phi, raw.model.epsilon, raw.model.n_max)
        .map_err(|e| field_err("model", e.to_string()))?;

    let meanfield = match &raw.meanfield {
        None => MeanfieldSettings::default(),
        Some(m) => {
            let defaults = MeanfieldSettings::default();
            let epsilons = m.epsilons.clone().unwrap_or(defaults.epsilons);
            crate::kinetic::ScalingSchedule::new(epsilons.clone())
                .map_err(|e| field_err("meanfield.epsilons", e.to_string()))?;
            let t = m.t.unwrap_or(defaults.t);
            if !t.is_finite() || t <= 0.0 {
                return Err(field_err("meanfield.t", "must be positive and finite"));
            }
            MeanfieldSettings { epsilons, t }
        }
    };

    let (output_path, output_format) = match &raw.output {
        None => (None, OutputFormat::Csv),
        Some(o) => (o.path.clone(), o.format.unwrap_or_default()),
    };

    // canonical bytes: re-serialize the parsed document deterministically
    let canonical = toml::to_string(&raw)
        .map_err(|e| field_err("<document>", format!("cannot canonicalize: {e}")))?;
    let config_hash = hex_digest(canonical.as_bytes());

    Ok(ExperimentConfig {
        model,
        seed: raw.seed,
        times: raw.times,
        suites,
        output_path,
        output_format,
        tolerances: raw.tolerances,
        meanfield,
        experimental_skrrc: raw.experimental_skrrc.unwrap_or(false),
        config_hash,
    })
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
