//! Weighted K-means and the cluster-count search built on it.
//!
//! Quality of a clustering is measured two ways:
//!
//! * `ss_distances = sum_x w(x) * |x - c(x)|^2`, with `c(x)` the barycentre of
//!   the cluster `x` is assigned to;
//! * `mse = ss_distances / ((N - c) * b)`, where `N` is the total weight,
//!   `c` the number of non-empty clusters and `b` the point dimension.
//!
//! `mse` is undefined when `N <= c`; it is then reported as `+inf` with
//! [`Clustering::mse_defined`] cleared.
//!
//! Random restarts draw from `ChaCha8Rng` seeded with the caller's seed, one
//! stream per `(k, restart)` pair, so results are identical across platforms
//! and independent of evaluation order.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, GrayImage};
use crate::region::{label_components, Connectivity, LabelMap, Region};
use crate::scalar::{squared_distance, Scalar};

pub const MAX_ITERATIONS: usize = 300;

/// Half-width (in bins) of the non-maximum suppression window used when
/// picking histogram peaks.
pub const PEAK_SUPPRESSION: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoints<T> {
    points: Vec<Vec<T>>,
    weights: Vec<T>,
    dim: usize,
}

impl<T: Scalar> WeightedPoints<T> {
    pub fn new(points: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("no points"));
        }
        if points.len() != weights.len() {
            return Err(Error::invalid(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::invalid("points must have at least one component"));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("points differ in dimension"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite coordinate"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        if !weights.iter().any(|w| *w > T::zero()) {
            return Err(Error::invalid("at least one weight must be positive"));
        }
        Ok(Self { points, weights, dim })
    }

    pub fn unit(points: Vec<Vec<T>>) -> Result<Self> {
        let n = points.len();
        Self::new(points, vec![T::one(); n])
    }

    /// One-dimensional data with unit weights.
    pub fn scalars(values: &[T]) -> Result<Self> {
        Self::unit(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of components per point (the `b` of the MSE denominator).
    pub fn bands(&self) -> usize {
        self.dim
    }

    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }

    pub fn scaled_weights(&self, factor: T) -> Self {
        Self {
            points: self.points.clone(),
            weights: self.weights.iter().map(|&w| w * factor).collect(),
            dim: self.dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering<T> {
    /// Number of non-empty clusters.
    pub k: usize,
    pub centers: Vec<Vec<T>>,
    pub assignment: Vec<usize>,
    pub ss_distances: T,
    pub mse: T,
    pub mse_defined: bool,
    pub iterations: usize,
    pub converged: bool,
    /// Sum of squares after every assignment step, starting with the
    /// initial centres. Non-increasing.
    pub ss_history: Vec<T>,
}

/// Index of the nearest centre (ties go to the lowest index) and its squared
/// distance.
pub fn nearest_center<T: Scalar>(centers: &[Vec<T>], x: &[T]) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (i, c) in centers.iter().enumerate() {
        let d = squared_distance(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

pub fn sum_of_squares<T: Scalar>(data: &WeightedPoints<T>, centers: &[Vec<T>], assignment: &[usize]) -> T {
    data.points
        .iter()
        .zip(&data.weights)
        .zip(assignment)
        .map(|((p, &w), &a)| w * squared_distance(p, &centers[a]))
        .sum()
}

/// `ss / ((N - c) * b)`, or `None` when `N - c <= 0`.
pub fn mean_squared_error<T: Scalar>(ss: T, total_weight: T, clusters: usize, bands: usize) -> Option<T> {
    let dof = total_weight - T::from_usize_lossy(clusters);
    (dof > T::zero()).then(|| ss / (dof * T::from_usize_lossy(bands)))
}

fn assign<T: Scalar>(data: &WeightedPoints<T>, centers: &[Vec<T>]) -> Vec<usize> {
    data.points.iter().map(|p| nearest_center(centers, p).0).collect()
}

/// Weighted barycentres; `None` for clusters with zero total weight.
fn barycenters<T: Scalar>(data: &WeightedPoints<T>, k: usize, assignment: &[usize]) -> Vec<Option<Vec<T>>> {
    let mut sums = vec![vec![T::zero(); data.dim]; k];
    let mut mass = vec![T::zero(); k];
    for ((p, &w), &a) in data.points.iter().zip(&data.weights).zip(assignment) {
        if w == T::zero() {
            continue;
        }
        mass[a] += w;
        for (s, &v) in sums[a].iter_mut().zip(p) {
            *s += w * v;
        }
    }
    sums.into_iter()
        .zip(mass)
        .map(|(s, m)| (m > T::zero()).then(|| s.into_iter().map(|v| v / m).collect()))
        .collect()
}

/// Lloyd iterations from the given initial centres.
///
/// Stops when the assignment no longer changes or after
/// [`MAX_ITERATIONS`]. A cluster that loses all its weight is re-seeded
/// with the positive-weight point farthest from its own centre; if every
/// point sits exactly on its centre the cluster is dropped.
pub fn kmeans<T: Scalar>(data: &WeightedPoints<T>, init: &[Vec<T>]) -> Result<Clustering<T>> {
    if init.is_empty() {
        return Err(Error::invalid("k-means needs at least one initial centre"));
    }
    if init.iter().any(|c| c.len() != data.dim) {
        return Err(Error::invalid(format!(
            "initial centres must have dimension {}",
            data.dim
        )));
    }
    let k = init.len();
    let mut centers = init.to_vec();
    let mut assignment = assign(data, &centers);
    let mut ss_history = vec![sum_of_squares(data, &centers, &assignment)];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let bary = barycenters(data, k, &assignment);
        let mut taken = vec![false; data.len()];
        let mut next: Vec<Vec<T>> = Vec::with_capacity(k);
        let mut empty = Vec::new();
        for (j, b) in bary.into_iter().enumerate() {
            match b {
                Some(c) => next.push(c),
                None => {
                    empty.push(j);
                    next.push(centers[j].clone());
                }
            }
        }
        for j in empty {
            let mut far: Option<(usize, T)> = None;
            for (i, (p, &w)) in data.points.iter().zip(&data.weights).enumerate() {
                if w == T::zero() || taken[i] {
                    continue;
                }
                let d = squared_distance(p, &next[assignment[i]]);
                if d > T::zero() && far.map_or(true, |(_, fd)| d > fd) {
                    far = Some((i, d));
                }
            }
            if let Some((i, _)) = far {
                taken[i] = true;
                next[j] = data.points[i].clone();
            }
        }
        centers = next;
        let reassigned = assign(data, &centers);
        ss_history.push(sum_of_squares(data, &centers, &reassigned));
        if reassigned == assignment {
            converged = true;
            break;
        }
        assignment = reassigned;
    }

    // final centres are the barycentres of the final assignment; empty
    // clusters are dropped and the survivors renumbered in order
    let bary = barycenters(data, k, &assignment);
    let mut remap = vec![usize::MAX; k];
    let mut final_centers = Vec::new();
    for (j, b) in bary.into_iter().enumerate() {
        if let Some(c) = b {
            remap[j] = final_centers.len();
            final_centers.push(c);
        }
    }
    let final_assignment: Vec<usize> = if converged {
        assign(data, &final_centers)
    } else {
        assignment
            .iter()
            .zip(&data.points)
            .map(|(&a, p)| {
                if remap[a] == usize::MAX {
                    nearest_center(&final_centers, p).0
                } else {
                    remap[a]
                }
            })
            .collect()
    };
    let ss_distances = sum_of_squares(data, &final_centers, &final_assignment);
    let c = final_centers.len();
    let mse = mean_squared_error(ss_distances, data.total_weight(), c, data.dim);
    Ok(Clustering {
        k: c,
        centers: final_centers,
        assignment: final_assignment,
        ss_distances,
        mse: mse.unwrap_or(T::infinity()),
        mse_defined: mse.is_some(),
        iterations,
        converged,
        ss_history,
    })
}

/// Deterministic initial centres: points sorted lexicographically, then
/// picked at the weighted quantiles `(i + 1/2) / k`.
pub fn quantile_init<T: Scalar>(data: &WeightedPoints<T>, k: usize) -> Vec<Vec<T>> {
    let mut order: Vec<usize> = (0..data.len()).filter(|&i| data.weights[i] > T::zero()).collect();
    order.sort_by(|&a, &b| {
        data.points[a]
            .iter()
            .zip(&data.points[b])
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let total = data.total_weight();
    (0..k)
        .map(|i| {
            let target = total * (T::from_usize_lossy(i) + T::lit(0.5)) / T::from_usize_lossy(k);
            let mut cum = T::zero();
            let mut pick = *order.last().expect("at least one positive weight");
            for &idx in &order {
                cum += data.weights[idx];
                if cum >= target {
                    pick = idx;
                    break;
                }
            }
            data.points[pick].clone()
        })
        .collect()
}

fn random_init<T: Scalar>(data: &WeightedPoints<T>, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    let eligible: Vec<usize> = (0..data.len()).filter(|&i| data.weights[i] > T::zero()).collect();
    if eligible.len() >= k {
        sample(rng, eligible.len(), k)
            .into_iter()
            .map(|i| data.points[eligible[i]].clone())
            .collect()
    } else {
        (0..k)
            .map(|_| data.points[eligible[rng.gen_range(0..eligible.len())]].clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub k_requested: usize,
    pub restart: usize,
    /// Non-empty clusters at convergence.
    pub k: usize,
    pub iterations: usize,
    pub converged: bool,
    pub ss_distances: f64,
    /// `None` when the MSE denominator is not positive.
    pub mse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistinctKMeans<T> {
    pub best: Clustering<T>,
    /// Index into `runs` of the selected run.
    pub selected: usize,
    pub runs: Vec<RunRecord>,
}

/// Ordering used to pick the winning run: defined MSE first, then smaller
/// MSE, smaller `k`, smaller sum of squares.
pub fn run_order(a: &RunRecord, b: &RunRecord) -> std::cmp::Ordering {
    let key = |r: &RunRecord| (r.mse.is_none(), r.mse.unwrap_or(f64::INFINITY), r.k, r.ss_distances);
    let (ka, kb) = (key(a), key(b));
    ka.0.cmp(&kb.0)
        .then(ka.1.total_cmp(&kb.1))
        .then(ka.2.cmp(&kb.2))
        .then(ka.3.total_cmp(&kb.3))
}

/// Scans `k` over `[k_min, k_max]`, runs `restarts` seeded k-means per `k`
/// and keeps the run with the smallest MSE.
pub fn distinct_kmeans<T: Scalar>(
    data: &WeightedPoints<T>,
    k_min: usize,
    k_max: usize,
    restarts: usize,
    seed: u64,
) -> Result<DistinctKMeans<T>> {
    distinct_kmeans_with(data, k_min, k_max, restarts, seed, |k| quantile_init(data, k))
}

/// [`distinct_kmeans`] with a caller-supplied initialiser for the first
/// restart of every `k`; later restarts pick random distinct points.
pub fn distinct_kmeans_with<T: Scalar>(
    data: &WeightedPoints<T>,
    k_min: usize,
    k_max: usize,
    restarts: usize,
    seed: u64,
    first_init: impl Fn(usize) -> Vec<Vec<T>>,
) -> Result<DistinctKMeans<T>> {
    if k_min == 0 || k_min > k_max {
        return Err(Error::invalid(format!("need 1 <= k_min <= k_max, got {k_min}..{k_max}")));
    }
    if restarts == 0 {
        return Err(Error::invalid("restarts must be at least 1"));
    }
    let mut runs = Vec::new();
    let mut best: Option<(usize, Clustering<T>)> = None;
    for k in k_min..=k_max {
        for restart in 0..restarts {
            let init = if restart == 0 {
                first_init(k)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((k as u64) << 32) | restart as u64);
                random_init(data, k, &mut rng)
            };
            let c = kmeans(data, &init)?;
            let record = RunRecord {
                k_requested: k,
                restart,
                k: c.k,
                iterations: c.iterations,
                converged: c.converged,
                ss_distances: c.ss_distances.to_f64_lossy(),
                mse: c.mse_defined.then(|| c.mse.to_f64_lossy()),
            };
            let better = match &best {
                None => true,
                Some((i, _)) => run_order(&record, &runs[*i]).is_lt(),
            };
            runs.push(record);
            if better {
                best = Some((runs.len() - 1, c));
            }
        }
    }
    let (selected, best) = best.expect("at least one run");
    Ok(DistinctKMeans { best, selected, runs })
}

/// 256-bin histogram of intensities rounded to the nearest integer.
pub fn intensity_histogram<T: Scalar>(img: &GrayImage<T>) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &p in img.pixels() {
        hist[intensity_bin(p)] += 1;
    }
    hist
}

#[inline]
fn intensity_bin<T: Scalar>(v: T) -> usize {
    crate::image::quantize(v.to_f64_lossy()) as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramInit<T> {
    /// Ascending.
    pub centers: Vec<T>,
    /// True when peak picking found fewer than `k` peaks and quantiles were
    /// used instead.
    pub fallback: bool,
}

/// Initial centres from the intensity histogram: the `k` highest bins under
/// +-8 bin non-maximum suppression, sorted ascending.
pub fn histogram_init<T: Scalar>(img: &GrayImage<T>, k: usize) -> Result<HistogramInit<T>> {
    histogram_init_from_counts(&intensity_histogram(img), k)
}

pub fn histogram_init_from_counts<T: Scalar>(hist: &[u64; 256], k: usize) -> Result<HistogramInit<T>> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let total: u64 = hist.iter().sum();
    if total == 0 {
        return Err(Error::invalid("empty histogram"));
    }
    let mut suppressed = [false; 256];
    let mut peaks = Vec::with_capacity(k);
    while peaks.len() < k {
        // highest count wins; equal counts go to the darker bin
        let next = (0..256)
            .filter(|&b| !suppressed[b] && hist[b] > 0)
            .max_by(|&a, &b| hist[a].cmp(&hist[b]).then(b.cmp(&a)));
        let Some(bin) = next else { break };
        peaks.push(bin);
        let lo = bin.saturating_sub(PEAK_SUPPRESSION);
        let hi = (bin + PEAK_SUPPRESSION).min(255);
        suppressed[lo..=hi].iter_mut().for_each(|s| *s = true);
    }
    if peaks.len() == k {
        peaks.sort_unstable();
        return Ok(HistogramInit {
            centers: peaks.into_iter().map(T::from_usize_lossy).collect(),
            fallback: false,
        });
    }
    // fall back to quantiles of the occupied intensities
    let centers = (0..k)
        .map(|i| {
            let target = (i as f64 + 0.5) / k as f64 * total as f64;
            let mut cum = 0u64;
            let bin = (0..256)
                .find(|&b| {
                    cum += hist[b];
                    hist[b] > 0 && cum as f64 >= target
                })
                .unwrap_or(255);
            T::from_usize_lossy(bin)
        })
        .collect();
    Ok(HistogramInit {
        centers,
        fallback: true,
    })
}

/// Number of classes the face segmentation asks for.
pub const FACE_CLASSES: usize = 3;

const SEGMENT_RESTARTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedFace<T> {
    pub width: usize,
    pub height: usize,
    /// Per-pixel class index, classes ordered by ascending centre.
    pub class_map: Vec<u8>,
    pub class_centers: Vec<T>,
    /// Darkest class; holds eyes, nostrils and mouth.
    pub selected_class: usize,
    pub class_one: BinaryMask,
    pub labels: LabelMap,
    /// Components of the selected class (8-connected).
    pub components: Vec<Region>,
    /// Fewer than three distinct intensity levels were available.
    pub degenerate: bool,
    pub run_log: Vec<RunRecord>,
}

impl<T: Scalar> SegmentedFace<T> {
    #[inline]
    pub fn class_at(&self, x: usize, y: usize) -> u8 {
        self.class_map[y * self.width + x]
    }
}

/// Three-class intensity segmentation of a face crop.
///
/// The weighted intensity histogram is clustered (points are bin values,
/// weights are counts); the first restart starts from [`histogram_init`].
/// Every pixel then takes the class of its nearest centre.
pub fn segment_face<T: Scalar>(face: &GrayImage<T>, seed: u64) -> Result<SegmentedFace<T>> {
    let hist = intensity_histogram(face);
    let occupied: Vec<usize> = (0..256).filter(|&b| hist[b] > 0).collect();
    let data = WeightedPoints::new(
        occupied.iter().map(|&b| vec![T::from_usize_lossy(b)]).collect(),
        occupied.iter().map(|&b| T::lit(hist[b] as f64)).collect(),
    )?;
    let result = distinct_kmeans_with(&data, FACE_CLASSES, FACE_CLASSES, SEGMENT_RESTARTS, seed, |k| {
        histogram_init_from_counts::<T>(&hist, k)
            .map(|h| h.centers.into_iter().map(|c| vec![c]).collect())
            .unwrap_or_else(|_| quantile_init(&data, k))
    })?;
    let mut centers: Vec<T> = result.best.centers.iter().map(|c| c[0]).collect();
    centers.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    segment_with_centers(face, &centers, occupied.len() < FACE_CLASSES, result.runs)
}

/// Classifies every pixel by its nearest centre (`centers` ascending) and
/// labels the darkest class.
pub fn segment_with_centers<T: Scalar>(
    face: &GrayImage<T>,
    centers: &[T],
    degenerate: bool,
    run_log: Vec<RunRecord>,
) -> Result<SegmentedFace<T>> {
    if centers.is_empty() {
        return Err(Error::invalid("no class centres"));
    }
    let class_map: Vec<u8> = face
        .pixels()
        .iter()
        .map(|&p| {
            let mut best = (0usize, T::infinity());
            for (i, &c) in centers.iter().enumerate() {
                let d = (p - c).abs();
                if d < best.1 {
                    best = (i, d);
                }
            }
            best.0 as u8
        })
        .collect();
    let class_one = BinaryMask::new(face.width(), face.height(), class_map.iter().map(|&c| c == 0).collect())?;
    let (labels, components) = label_components(&class_one, Connectivity::Eight);
    Ok(SegmentedFace {
        width: face.width(),
        height: face.height(),
        class_map,
        class_centers: centers.to_vec(),
        selected_class: 0,
        class_one,
        labels,
        components,
        degenerate: degenerate || centers.len() < FACE_CLASSES,
        run_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exhaustive optimum over all assignments of 1-D unit-weight points to
    /// `k` labelled clusters (every cluster non-empty).
    fn brute_force_ss(xs: &[f64], k: usize) -> f64 {
        let n = xs.len();
        let mut best = f64::INFINITY;
        let total = k.pow(n as u32);
        for code in 0..total {
            let mut labels = vec![0; n];
            let mut c = code;
            for l in labels.iter_mut() {
                *l = c % k;
                c /= k;
            }
            let mut ss = 0.0;
            let mut ok = true;
            for j in 0..k {
                let members: Vec<f64> = xs.iter().zip(&labels).filter(|(_, &l)| l == j).map(|(&x, _)| x).collect();
                if members.is_empty() {
                    ok = false;
                    break;
                }
                let m = members.iter().sum::<f64>() / members.len() as f64;
                ss += members.iter().map(|x| (x - m).powi(2)).sum::<f64>();
            }
            if ok {
                best = best.min(ss);
            }
        }
        best
    }

    #[test]
    fn four_point_example_is_global_optimum() {
        let xs = [1.0, 2.0, 9.0, 10.0];
        assert_eq!(brute_force_ss(&xs, 2), 1.0);
        let data = WeightedPoints::scalars(&xs).unwrap();
        let c = kmeans(&data, &[vec![1.0], vec![10.0]]).unwrap();
        assert_eq!(c.centers, vec![vec![1.5], vec![9.5]]);
        assert_eq!(c.ss_distances, 1.0);
        assert_eq!(c.mse, 0.5);
        assert!(c.converged && c.mse_defined);
        assert_eq!(c.assignment, vec![0, 0, 1, 1]);
    }

    #[test]
    fn single_cluster_is_weighted_mean() {
        let data = WeightedPoints::new(
            vec![vec![0.0f64, 1.0], vec![2.0, 3.0], vec![10.0, -1.0]],
            vec![1.0, 2.0, 0.5],
        )
        .unwrap();
        let c = kmeans(&data, &[vec![0.0, 0.0]]).unwrap();
        let n = 3.5;
        let mean: [f64; 2] = [(0.0 + 4.0 + 5.0) / n, (1.0 + 6.0 - 0.5) / n];
        assert!((c.centers[0][0] - mean[0]).abs() < 1e-12);
        assert!((c.centers[0][1] - mean[1]).abs() < 1e-12);
        let direct: f64 = data
            .points()
            .iter()
            .zip(data.weights())
            .map(|(p, w)| w * ((p[0] - mean[0]).powi(2) + (p[1] - mean[1]).powi(2)))
            .sum();
        assert!((c.ss_distances - direct).abs() < 1e-9 * direct);
        assert!((c.mse - direct / ((n - 1.0) * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn undefined_mse_is_flagged() {
        let data = WeightedPoints::scalars(&[1.0f64, 2.0]).unwrap();
        let c = kmeans(&data, &[vec![1.0], vec![2.0]]).unwrap();
        assert!(!c.mse_defined);
        assert!(c.mse.is_infinite());
    }

    #[test]
    fn empty_cluster_is_reseeded() {
        // the far-away centre never attracts a point on its own
        let data = WeightedPoints::scalars(&[0.0, 1.0, 10.0, 11.0]).unwrap();
        let c = kmeans(&data, &[vec![5.0], vec![1000.0]]).unwrap();
        assert_eq!(c.k, 2);
        assert_eq!(c.ss_distances, 1.0);
    }

    #[test]
    fn bad_init() {
        let data = WeightedPoints::scalars(&[0.0, 1.0]).unwrap();
        assert!(kmeans(&data, &[]).is_err());
        assert!(kmeans(&data, &[vec![0.0, 0.0]]).is_err());
        assert!(WeightedPoints::new(vec![vec![1.0]], vec![0.0]).is_err());
        assert!(WeightedPoints::new(vec![vec![f64::NAN]], vec![1.0]).is_err());
    }

    #[test]
    fn distinct_picks_two_clusters() {
        let data = WeightedPoints::scalars(&[1.0, 2.0, 9.0, 10.0]).unwrap();
        let r = distinct_kmeans(&data, 1, 2, 3, 42).unwrap();
        assert_eq!(r.best.k, 2);
        assert_eq!(r.best.mse, 0.5);
        let k1 = r.runs.iter().find(|x| x.k_requested == 1).unwrap();
        assert!((k1.mse.unwrap() - 65.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.runs.len(), 6);
    }

    #[test]
    fn repeated_point_collapses_to_one_cluster() {
        let data = WeightedPoints::scalars(&[4.0; 6]).unwrap();
        let r = distinct_kmeans(&data, 1, 3, 2, 9).unwrap();
        assert_eq!(r.best.k, 1);
        assert_eq!(r.best.ss_distances, 0.0);
    }

    #[test]
    fn distinct_is_deterministic() {
        let xs: Vec<f64> = (0..40).map(|i| ((i * 37) % 23) as f64 * 1.7).collect();
        let data = WeightedPoints::scalars(&xs).unwrap();
        let a = distinct_kmeans(&data, 1, 4, 4, 5).unwrap();
        let b = distinct_kmeans(&data, 1, 4, 4, 5).unwrap();
        assert_eq!(a, b);
        assert!(distinct_kmeans(&data, 3, 2, 1, 0).is_err());
        assert!(distinct_kmeans(&data, 0, 2, 1, 0).is_err());
    }

    #[test]
    fn histogram_peaks() {
        let img = GrayImage::from_fn(150, 1, |x, _| if x < 100 { 10.0 } else { 200.0 }).unwrap();
        let h = histogram_init::<f64>(&img, 2).unwrap();
        assert_eq!(h.centers, vec![10.0, 200.0]);
        assert!(!h.fallback);

        let tri = GrayImage::from_fn(300, 1, |x, _| match x % 6 {
            0 | 1 => 30.0,
            2 => 127.0,
            3 | 4 => 128.0,
            _ => 220.0,
        })
        .unwrap();
        let h = histogram_init::<f64>(&tri, 3).unwrap();
        assert_eq!(h.centers, vec![30.0, 128.0, 220.0]);

        let flat = GrayImage::filled(5, 5, 77.0).unwrap();
        let h = histogram_init::<f64>(&flat, 3).unwrap();
        assert!(h.fallback);
        assert_eq!(h.centers, vec![77.0; 3]);
    }

    #[test]
    fn segment_dark_blobs() {
        // face 200, hair/background band 120, eyes 30, mouth 40
        let img = GrayImage::<f64>::from_fn(60, 80, |x, y| {
            let blob = |cx: f64, cy: f64, r: f64| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r;
            if x < 6 || x >= 54 {
                120.0
            } else if blob(20.0, 30.0, 4.0) || blob(40.0, 30.0, 4.0) {
                30.0
            } else if blob(30.0, 60.0, 5.0) {
                40.0
            } else {
                200.0
            }
        })
        .unwrap();
        let seg = segment_face(&img, 0).unwrap();
        assert!(!seg.degenerate);
        assert_eq!(seg.class_centers.len(), 3);
        assert_eq!(seg.components.len(), 3);
        for p in [(20, 30), (40, 30), (30, 60)] {
            assert_eq!(seg.class_at(p.0, p.1), 0);
        }
        // per-pixel nearest-centre oracle
        for (i, &p) in img.pixels().iter().enumerate() {
            let oracle = seg
                .class_centers
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |b, (j, &c)| if (p - c).abs() < b.1 { (j, (p - c).abs()) } else { b })
                .0;
            assert_eq!(seg.class_map[i] as usize, oracle);
        }
    }

    #[test]
    fn constant_face_is_degenerate() {
        let seg = segment_face(&GrayImage::filled(10, 10, 90.0).unwrap(), 1).unwrap();
        assert!(seg.degenerate);
    }

    proptest! {
        #[test]
        fn weight_scaling(xs in proptest::collection::vec(-50.0f64..50.0, 3..30), k in 1usize..4) {
            let data = WeightedPoints::scalars(&xs).unwrap();
            let init = quantile_init(&data, k);
            let a = kmeans(&data, &init).unwrap();
            let b = kmeans(&data.scaled_weights(2.0), &init).unwrap();
            prop_assert_eq!(&a.assignment, &b.assignment);
            for (ca, cb) in a.centers.iter().zip(&b.centers) {
                prop_assert!((ca[0] - cb[0]).abs() < 1e-9);
            }
            prop_assert!((2.0 * a.ss_distances - b.ss_distances).abs() <= 1e-9 * b.ss_distances.max(1.0));
        }

        #[test]
        fn history_non_increasing_and_fixed_point(
            pts in proptest::collection::vec((-20.0f64..20.0, -20.0f64..20.0, 0.1f64..3.0), 5..40),
            k in 1usize..5,
            seed: u64,
        ) {
            let data = WeightedPoints::new(
                pts.iter().map(|p| vec![p.0, p.1]).collect(),
                pts.iter().map(|p| p.2).collect(),
            ).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let init = random_init(&data, k, &mut rng);
            let c = kmeans(&data, &init).unwrap();
            for w in c.ss_history.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
            }
            prop_assert!(c.converged);
            prop_assert!(c.assignment.iter().all(|&a| a < c.k));
            // reassign-then-recompute changes nothing
            prop_assert_eq!(assign(&data, &c.centers), c.assignment.clone());
            let again = kmeans(&data, &c.centers).unwrap();
            prop_assert_eq!(&again.assignment, &c.assignment);
        }
    }
}
