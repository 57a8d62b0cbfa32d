use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A feature vector with its class label, as consumed by the classifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Sample<T> {
    pub label: String,
    pub features: Vec<T>,
}

impl<T: Scalar> Sample<T> {
    pub fn new(label: impl Into<String>, features: Vec<T>) -> Self {
        Self {
            label: label.into(),
            features,
        }
    }
}

/// Sorted distinct labels.
pub fn class_labels<T>(samples: &[Sample<T>]) -> Vec<String> {
    samples
        .iter()
        .map(|s| s.label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Common feature dimension; errors on empty input, ragged or non-finite
/// vectors.
pub fn feature_dim<T: Scalar>(samples: &[Sample<T>]) -> Result<usize> {
    let first = samples.first().ok_or_else(|| Error::invalid("empty training set"))?;
    let dim = first.features.len();
    if dim == 0 {
        return Err(Error::invalid("feature vectors are empty"));
    }
    for s in samples {
        if s.features.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: (dim, 1),
                found: (s.features.len(), 1),
            });
        }
        if s.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite feature in sample labelled {}", s.label)));
        }
    }
    Ok(dim)
}
