//! Tree-structured classifier whose nodes are attractor basins.
//!
//! Building follows the recursive partition procedure:
//!
//! 1. split the node's examples into at most `K` basins;
//! 2. a basin whose examples share one class becomes a labelled leaf;
//! 3. a mixed basin holding `K'` classes is partitioned again with
//!    `max(K', 2)` basins.
//!
//! Basins come from a [`BasinPartitioner`]; the default one is the distinct
//! k-means scan over `k in [2, K]`. Each internal node keeps its basin
//! centres and routes a vector to the nearest one (ties to the lowest
//! index). Training examples are distributed with that same rule so
//! prediction on the training set retraces construction exactly.
//!
//! Recursion stops at `max_depth` and at basins whose examples are all
//! feature-identical; such basins become majority leaves (ties go to the
//! smallest label) with purity below 1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::{distinct_kmeans, nearest_center, WeightedPoints};
use crate::error::{Error, Result};
use crate::sample::{class_labels, feature_dim, Sample};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_DEPTH: usize = 32;

/// Produces basin centres for a set of points.
pub trait BasinPartitioner<T: Scalar> {
    /// Returns up to `k` basin centres for `points`. `k >= 2`.
    fn basins(&self, points: &[Vec<T>], k: usize, seed: u64) -> Result<Vec<Vec<T>>>;
}

/// Distinct k-means over `k in [2, K]`, selecting the run with the smallest
/// MSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistinctKMeansPartitioner {
    pub restarts: usize,
}

impl Default for DistinctKMeansPartitioner {
    fn default() -> Self {
        Self { restarts: 3 }
    }
}

impl<T: Scalar> BasinPartitioner<T> for DistinctKMeansPartitioner {
    fn basins(&self, points: &[Vec<T>], k: usize, seed: u64) -> Result<Vec<Vec<T>>> {
        let data = WeightedPoints::unit(points.to_vec())?;
        Ok(distinct_kmeans(&data, 2, k.max(2), self.restarts, seed)?.best.centers)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case", bound = "T: Scalar")]
pub enum FmacaNode<T> {
    Leaf {
        label: String,
        training_count: usize,
        /// Fraction of the leaf's training examples carrying `label`.
        purity: f64,
    },
    Internal {
        centers: Vec<Vec<T>>,
        children: Vec<FmacaNode<T>>,
        training_count: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FmacaTree<T> {
    pub root: FmacaNode<T>,
    /// Configured basin count at the root.
    pub k: usize,
    pub depth: usize,
    pub node_count: usize,
    pub dim: usize,
    pub max_depth: usize,
    pub class_labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub depth: usize,
    pub node_count: usize,
    pub leaf_count: usize,
    pub internal_count: usize,
    /// Leaf purities in depth-first order.
    pub leaf_purities: Vec<f64>,
    /// Number of nodes at each depth, root first.
    pub nodes_per_level: Vec<usize>,
}

pub fn build_tree<T: Scalar>(train: &[Sample<T>], k: usize, seed: u64, max_depth: usize) -> Result<FmacaTree<T>> {
    build_tree_with(train, k, seed, max_depth, &DistinctKMeansPartitioner::default())
}

pub fn build_tree_with<T: Scalar, P: BasinPartitioner<T>>(
    train: &[Sample<T>],
    k: usize,
    seed: u64,
    max_depth: usize,
    partitioner: &P,
) -> Result<FmacaTree<T>> {
    if train.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    if k < 2 {
        return Err(Error::invalid(format!("basin count K must be at least 2, got {k}")));
    }
    let dim = feature_dim(train)?;
    let mut builder = Builder {
        train,
        partitioner,
        seed,
        max_depth,
        splits: 0,
    };
    let all: Vec<usize> = (0..train.len()).collect();
    let root = builder.node(&all, k, 0)?;
    let stats = stats_of(&root);
    Ok(FmacaTree {
        root,
        k,
        depth: stats.depth,
        node_count: stats.node_count,
        dim,
        max_depth,
        class_labels: class_labels(train),
    })
}

struct Builder<'a, T, P> {
    train: &'a [Sample<T>],
    partitioner: &'a P,
    seed: u64,
    max_depth: usize,
    splits: u64,
}

impl<'a, T: Scalar, P: BasinPartitioner<T>> Builder<'a, T, P> {
    fn node(&mut self, idx: &[usize], k: usize, depth: usize) -> Result<FmacaNode<T>> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for &i in idx {
            *counts.entry(self.train[i].label.as_str()).or_default() += 1;
        }
        if counts.len() == 1 || depth >= self.max_depth {
            return Ok(self.majority_leaf(&counts, idx.len()));
        }
        let first = &self.train[idx[0]].features;
        if idx.iter().all(|&i| &self.train[i].features == first) {
            return Ok(self.majority_leaf(&counts, idx.len()));
        }

        // distinct seed per split, assigned in depth-first order
        let split_seed = self.seed ^ self.splits.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        self.splits += 1;
        let points: Vec<Vec<T>> = idx.iter().map(|&i| self.train[i].features.clone()).collect();
        let centers = self.partitioner.basins(&points, k, split_seed)?;
        if centers.is_empty() {
            return Err(Error::invalid("partitioner returned no basins"));
        }

        let mut members: Vec<Vec<usize>> = vec![Vec::new(); centers.len()];
        for (&i, p) in idx.iter().zip(&points) {
            members[nearest_center(&centers, p).0].push(i);
        }
        let (kept_centers, kept_members): (Vec<_>, Vec<_>) = centers
            .into_iter()
            .zip(members)
            .filter(|(_, m)| !m.is_empty())
            .unzip();
        if kept_members.len() < 2 {
            // one basin would be a 1-child node; the split made no progress
            return Ok(self.majority_leaf(&counts, idx.len()));
        }

        let mut children = Vec::with_capacity(kept_members.len());
        for m in &kept_members {
            let classes = m
                .iter()
                .map(|&i| self.train[i].label.as_str())
                .collect::<std::collections::BTreeSet<_>>()
                .len();
            children.push(self.node(m, classes.max(2), depth + 1)?);
        }
        Ok(FmacaNode::Internal {
            centers: kept_centers,
            children,
            training_count: idx.len(),
        })
    }

    fn majority_leaf(&self, counts: &BTreeMap<&str, usize>, total: usize) -> FmacaNode<T> {
        // labels iterate in order; a later label must strictly beat the count
        let (label, n) = counts
            .iter()
            .fold(None::<(&str, usize)>, |best, (&l, &n)| match best {
                Some((_, bn)) if bn >= n => best,
                _ => Some((l, n)),
            })
            .expect("non-empty node");
        FmacaNode::Leaf {
            label: label.to_string(),
            training_count: total,
            purity: n as f64 / total as f64,
        }
    }
}

impl<T: Scalar> FmacaTree<T> {
    /// Label and purity of the leaf `x` descends to.
    pub fn predict(&self, x: &[T]) -> Result<(String, f64)> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: (self.dim, 1),
                found: (x.len(), 1),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                FmacaNode::Leaf { label, purity, .. } => return Ok((label.clone(), *purity)),
                FmacaNode::Internal { centers, children, .. } => {
                    node = &children[nearest_center(centers, x).0];
                }
            }
        }
    }

    pub fn stats(&self) -> TreeStats {
        stats_of(&self.root)
    }
}

pub fn predict<T: Scalar>(tree: &FmacaTree<T>, x: &[T]) -> Result<(String, f64)> {
    tree.predict(x)
}

pub fn tree_stats<T: Scalar>(tree: &FmacaTree<T>) -> TreeStats {
    tree.stats()
}

fn stats_of<T: Scalar>(root: &FmacaNode<T>) -> TreeStats {
    let mut s = TreeStats {
        depth: 0,
        node_count: 0,
        leaf_count: 0,
        internal_count: 0,
        leaf_purities: Vec::new(),
        nodes_per_level: Vec::new(),
    };
    let mut stack = vec![(root, 0usize)];
    while let Some((node, depth)) = stack.pop() {
        s.node_count += 1;
        s.depth = s.depth.max(depth);
        if s.nodes_per_level.len() <= depth {
            s.nodes_per_level.resize(depth + 1, 0);
        }
        s.nodes_per_level[depth] += 1;
        match node {
            FmacaNode::Leaf { purity, .. } => {
                s.leaf_count += 1;
                s.leaf_purities.push(*purity);
            }
            FmacaNode::Internal { children, .. } => {
                s.internal_count += 1;
                // reversed so the stack pops children in order
                stack.extend(children.iter().rev().map(|c| (c, depth + 1)));
            }
        }
    }
    s
}
