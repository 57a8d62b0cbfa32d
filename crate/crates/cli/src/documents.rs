//! JSON documents written and read by the CLI. Every document carries a
//! `schema_version`; the matching JSON schemas live in `schemas/`.

use std::path::Path;

use facepipe::pipeline::{Detection, LabelResult, Model, PipelineConfig};
use facepipe::sample::Sample;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionDocument {
    pub schema_version: String,
    /// Input paths in the order given.
    pub source: Vec<String>,
    pub video: bool,
    pub config: PipelineConfig,
    pub frames: Vec<FrameDetections>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameDetections {
    pub index: usize,
    pub source: String,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fingerprint {
    pub count: usize,
    pub dims: usize,
    pub seed: u64,
    pub classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: String,
    pub fingerprint: Fingerprint,
    #[serde(flatten)]
    pub model: Model,
}

/// Labelled feature vectors, the training input and a `train --images`
/// by-product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSet {
    pub schema_version: String,
    pub samples: Vec<FeatureRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub features: Vec<f64>,
}

impl FeatureSet {
    /// Training samples; every record must be labelled.
    pub fn labelled(&self) -> CliResult<Vec<Sample<f64>>> {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, r)| match &r.label {
                Some(l) => Ok(Sample::new(l.clone(), r.features.clone())),
                None => Err(CliError::Data(format!("sample {i} has no label"))),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationDocument {
    pub schema_version: String,
    pub model_kind: String,
    pub results: Vec<ClassifiedRecord>,
    /// Fraction of labelled records predicted correctly, when any are labelled.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifiedRecord {
    pub index: usize,
    pub source: Option<String>,
    pub expected: Option<String>,
    pub predicted: LabelResult,
}

/// Pretty JSON with a trailing newline. Floats use the shortest
/// representation that parses back to the same value.
pub fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{} ({what}): {e}", path.display())))
}

pub fn check_version(found: &str, path: &Path) -> CliResult<()> {
    if found != SCHEMA_VERSION {
        return Err(CliError::Data(format!(
            "{}: schema_version {found:?} is not supported (expected {SCHEMA_VERSION:?})",
            path.display()
        )));
    }
    Ok(())
}

impl ModelFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let m: ModelFile = read_json(path, "model file")?;
        check_version(&m.schema_version, path)?;
        match &m.model {
            Model::Rbf(net) => net.validate()?,
            Model::Fmaca(t) => {
                if t.class_labels.is_empty() {
                    return Err(CliError::Data(format!("{}: tree has no classes", path.display())));
                }
            }
        }
        if m.model.dim() != m.fingerprint.dims {
            return Err(CliError::Data(format!(
                "{}: fingerprint says {} dims but the model has {}",
                path.display(),
                m.fingerprint.dims,
                m.model.dim()
            )));
        }
        Ok(m)
    }
}
