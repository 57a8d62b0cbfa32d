//! Gaussian radial-basis-function network.
//!
//! Each hidden unit responds with `h(x) = exp(-|x - c|^2 / r^2)`. The hidden
//! layer is fixed without supervision: centres come from k-means over the
//! training vectors and each radius is the distance to the nearest other
//! centre. Only the linear output layer sees labels; it is the ridge
//! least-squares map from `[activations; 1]` to one-hot class targets.

use serde::{Deserialize, Serialize};

use crate::clustering::{distinct_kmeans, RunRecord, WeightedPoints};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::sample::{class_labels, feature_dim, Sample};
use crate::scalar::{squared_distance, Scalar};

pub const RIDGE_LAMBDA: f64 = 1e-6;
pub const MIN_RADIUS: f64 = 1e-6;
const CENTER_RESTARTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RbfUnit<T> {
    pub center: Vec<T>,
    pub radius: T,
}

pub fn rbf_response<T: Scalar>(x: &[T], unit: &RbfUnit<T>) -> Result<T> {
    if x.len() != unit.center.len() {
        return Err(Error::DimensionMismatch {
            expected: (unit.center.len(), 1),
            found: (x.len(), 1),
        });
    }
    Ok(gaussian(x, unit))
}

#[inline]
fn gaussian<T: Scalar>(x: &[T], unit: &RbfUnit<T>) -> T {
    (-squared_distance(x, &unit.center) / (unit.radius * unit.radius)).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RbfNetwork<T> {
    pub units: Vec<RbfUnit<T>>,
    /// `classes x (units + 1)`; the last column is the bias.
    pub output_weights: Matrix<T>,
    pub class_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Classification<T> {
    pub label: String,
    /// One score per entry of the network's `class_labels`.
    pub scores: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfTrainingReport {
    pub samples: usize,
    pub units: usize,
    pub training_accuracy: f64,
    /// `|G W - B| / |B|` for the ridge normal equations `G W = B`.
    pub normal_equation_residual: f64,
    pub center_runs: Vec<RunRecord>,
}

impl<T: Scalar> RbfNetwork<T> {
    pub fn dim(&self) -> usize {
        self.units.first().map_or(0, |u| u.center.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.units.is_empty() {
            return Err(Error::invalid("network has no units"));
        }
        let dim = self.dim();
        if self.units.iter().any(|u| u.center.len() != dim || !(u.radius > T::zero())) {
            return Err(Error::invalid("units must share a dimension and have positive radii"));
        }
        if self.output_weights.rows() != self.class_labels.len()
            || self.output_weights.cols() != self.units.len() + 1
        {
            return Err(Error::invalid("output weight matrix does not match units / classes"));
        }
        let mut sorted = self.class_labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.class_labels.len() {
            return Err(Error::invalid("class labels must be unique"));
        }
        Ok(())
    }

    /// Unit responses followed by the constant bias input.
    pub fn activations(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: (self.dim(), 1),
                found: (x.len(), 1),
            });
        }
        let mut a: Vec<T> = self.units.iter().map(|u| gaussian(x, u)).collect();
        a.push(T::one());
        Ok(a)
    }

    pub fn scores(&self, x: &[T]) -> Result<Vec<T>> {
        self.output_weights.mul_vec(&self.activations(x)?)
    }

    pub fn classify(&self, x: &[T]) -> Result<Classification<T>> {
        let scores = self.scores(x)?;
        let best = argmax(&scores);
        Ok(Classification {
            label: self.class_labels[best].clone(),
            scores,
        })
    }
}

/// First index of the maximum.
pub(crate) fn argmax<T: Scalar>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &s) in v.iter().enumerate() {
        if s > v[best] {
            best = i;
        }
    }
    best
}

pub fn train_rbf<T: Scalar>(train: &[Sample<T>], num_units: usize, seed: u64) -> Result<RbfNetwork<T>> {
    train_rbf_with_report(train, num_units, seed).map(|(net, _)| net)
}

pub fn train_rbf_with_report<T: Scalar>(
    train: &[Sample<T>],
    num_units: usize,
    seed: u64,
) -> Result<(RbfNetwork<T>, RbfTrainingReport)> {
    feature_dim(train)?;
    let labels = class_labels(train);
    if labels.len() < 2 {
        return Err(Error::Degenerate(format!(
            "training needs at least two classes, found {}",
            labels.len()
        )));
    }
    if num_units == 0 || num_units > train.len() {
        return Err(Error::invalid(format!(
            "num_units must be in 1..={}, got {num_units}",
            train.len()
        )));
    }
    let first = &train[0].features;
    if train.iter().all(|s| &s.features == first) {
        return Err(Error::Degenerate(
            "all training feature vectors are identical; no centre can separate them".into(),
        ));
    }

    let data = WeightedPoints::unit(train.iter().map(|s| s.features.clone()).collect())?;
    let search = distinct_kmeans(&data, num_units, num_units, CENTER_RESTARTS, seed)?;
    let centers = search.best.centers.clone();

    let min_radius = T::lit(MIN_RADIUS);
    let radii: Vec<T> = if centers.len() == 1 {
        let mean = train
            .iter()
            .map(|s| squared_distance(&s.features, &centers[0]).sqrt())
            .sum::<T>()
            / T::from_usize_lossy(train.len());
        vec![mean.max(min_radius)]
    } else {
        centers
            .iter()
            .enumerate()
            .map(|(i, c)| {
                centers
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, o)| squared_distance(c, o).sqrt())
                    .fold(T::infinity(), T::min)
                    .max(min_radius)
            })
            .collect()
    };
    let units: Vec<RbfUnit<T>> = centers
        .into_iter()
        .zip(radii)
        .map(|(center, radius)| RbfUnit { center, radius })
        .collect();

    // design matrix [activations | 1] and one-hot targets
    let m = units.len();
    let mut design = Matrix::zeros(train.len(), m + 1);
    let mut targets = Matrix::zeros(train.len(), labels.len());
    for (i, s) in train.iter().enumerate() {
        for (j, u) in units.iter().enumerate() {
            design.set(i, j, gaussian(&s.features, u));
        }
        design.set(i, m, T::one());
        let class = labels.binary_search(&s.label).expect("label collected above");
        targets.set(i, class, T::one());
    }
    let dt = design.transpose();
    let mut gram = dt.matmul(&design)?;
    let lambda = T::lit(RIDGE_LAMBDA);
    for d in 0..=m {
        gram.set(d, d, gram.get(d, d) + lambda);
    }
    let rhs = dt.matmul(&targets)?;
    let weights = gram.solve_spd(&rhs)?;

    let check = gram.matmul(&weights)?;
    let diff = Matrix::from_fn(check.rows(), check.cols(), |i, j| check.get(i, j) - rhs.get(i, j));
    let rhs_norm = rhs.frobenius_norm();
    let residual = if rhs_norm > T::zero() {
        (diff.frobenius_norm() / rhs_norm).to_f64_lossy()
    } else {
        diff.frobenius_norm().to_f64_lossy()
    };

    let network = RbfNetwork {
        units,
        output_weights: weights.transpose(),
        class_labels: labels,
    };
    let correct = train
        .iter()
        .filter(|s| network.classify(&s.features).map(|c| c.label == s.label).unwrap_or(false))
        .count();
    let report = RbfTrainingReport {
        samples: train.len(),
        units: m,
        training_accuracy: correct as f64 / train.len() as f64,
        normal_equation_residual: residual,
        center_runs: search.runs,
    };
    Ok((network, report))
}
