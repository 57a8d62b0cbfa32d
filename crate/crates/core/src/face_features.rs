//! Eye, nose and mouth localisation on a segmented face crop, rotation
//! correction, and the geometry + DCT feature vector.
//!
//! Everything here works in crop coordinates (x right, y down) on `f64`.
//! The face region passed around is the skin component that produced the
//! crop, translated into the crop's frame.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{segment_face, segment_with_centers, SegmentedFace};
use crate::dct::{dct2, truncate_block};
use crate::image::{resize_bilinear, rotate_about_with_fill, rotate_point, to_gray, GrayImage, RgbImage};
use crate::linalg::Matrix;
use crate::region::Region;

pub type Point = (f64, f64);

/// Side of the square block the face is resampled to before the DCT.
pub const DCT_BLOCK: usize = 64;

pub const GEOMETRY_LEN: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Eye components must cover this fraction of the face area...
    pub eye_area_min: f64,
    /// ...and at most this fraction.
    pub eye_area_max: f64,
    /// Larger over smaller area of an eye pair.
    pub eye_pair_area_ratio: f64,
    /// Maximum vertical offset of an eye pair, as a fraction of face height.
    pub eye_dy_max: f64,
    /// Nose/mouth search strip width in units of the inter-eye distance.
    pub strip_width: f64,
    pub part_area_min: f64,
    pub part_area_max: f64,
    /// Fractional margin added around the face bbox when cropping.
    pub crop_margin: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            eye_area_min: 0.001,
            eye_area_max: 0.05,
            eye_pair_area_ratio: 3.0,
            eye_dy_max: 0.25,
            strip_width: 1.0,
            part_area_min: 0.001,
            part_area_max: 0.25,
            crop_margin: 0.05,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let fractions = [
            self.eye_area_min,
            self.eye_area_max,
            self.eye_dy_max,
            self.part_area_min,
            self.part_area_max,
            self.crop_margin,
        ];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f))
            || self.eye_area_min > self.eye_area_max
            || self.part_area_min > self.part_area_max
            || !(self.eye_pair_area_ratio >= 1.0)
            || !(self.strip_width > 0.0 && self.strip_width.is_finite())
        {
            return Err(crate::Error::invalid(format!("feature configuration out of range: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureFailure {
    #[error("segmentation failed: {message}")]
    Segmentation { message: String },
    #[error("{found} eye candidate(s) in the upper half, need 2")]
    TooFewEyeCandidates { found: usize },
    #[error("no pair among {candidates} eye candidates satisfies the area-ratio and alignment limits")]
    NoEyePair { candidates: usize },
    #[error("eye centres coincide")]
    CoincidentEyes,
    #[error("no component below the eye line inside the nose/mouth strip")]
    NoNose,
    #[error("nose found but no component below it inside the strip")]
    NoMouth,
    #[error("feature vector: {message}")]
    Features { message: String },
}

/// Landmarks and measurements after rotation correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceGeometry {
    pub eye_left: Point,
    pub eye_right: Point,
    pub inter_eye_distance: f64,
    pub nose_tip: Point,
    pub nose_length: f64,
    pub mouth_center: Point,
    pub mouth_area: usize,
    pub face_area: usize,
    pub rotation_applied: f64,
    /// Face bbox `(x, y, width, height)` in the same frame as the landmarks;
    /// the normalisation reference.
    pub face_box: (f64, f64, f64, f64),
}

impl FaceGeometry {
    pub fn diagonal(&self) -> f64 {
        self.face_box.2.hypot(self.face_box.3)
    }

    /// The six scale-free geometry features.
    pub fn normalized(&self) -> [f64; GEOMETRY_LEN] {
        let d = self.diagonal();
        let d2 = d * d;
        [
            self.inter_eye_distance / d,
            self.nose_length / d,
            (self.mouth_center.0 - self.face_box.0) / d,
            (self.mouth_center.1 - self.face_box.1) / d,
            self.mouth_area as f64 / d2,
            self.face_area as f64 / d2,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub geometry: Vec<f64>,
    pub dct: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.geometry.len() + self.dct.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Geometry first, then the DCT block.
    pub fn values(&self) -> Vec<f64> {
        self.geometry.iter().chain(&self.dct).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoseMouth {
    pub nose_tip: Point,
    pub nose_length: f64,
    pub mouth_center: Point,
    pub mouth_area: usize,
}

fn touches_border(r: &Region, width: usize, height: usize) -> bool {
    r.bbox.min_x == 0 || r.bbox.min_y == 0 || r.bbox.max_x + 1 == width || r.bbox.max_y + 1 == height
}

fn area_fraction(r: &Region, face_area: usize) -> f64 {
    r.area as f64 / face_area.max(1) as f64
}

/// Picks the eye pair among Class-I components of the upper half of `face`.
///
/// Candidates have an area within the configured band and do not touch the
/// crop border. Among pairs with area ratio and vertical offset inside the
/// limits, the widest horizontal separation wins; ties prefer the smaller
/// vertical offset, then the leftmost pair.
pub fn locate_eyes(
    seg: &SegmentedFace<f64>,
    face: &Region,
    cfg: &FeatureConfig,
) -> std::result::Result<(Point, Point), FeatureFailure> {
    let mid_y = (face.bbox.min_y + face.bbox.max_y) as f64 / 2.0;
    let mut candidates: Vec<&Region> = seg
        .components
        .iter()
        .filter(|c| {
            let frac = area_fraction(c, face.area);
            c.centroid.1 < mid_y
                && frac >= cfg.eye_area_min
                && frac <= cfg.eye_area_max
                && !touches_border(c, seg.width, seg.height)
        })
        .collect();
    if candidates.len() < 2 {
        return Err(FeatureFailure::TooFewEyeCandidates {
            found: candidates.len(),
        });
    }
    candidates.sort_by(|a, b| {
        a.centroid
            .partial_cmp(&b.centroid)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let max_dy = cfg.eye_dy_max * face.bbox.height() as f64;
    let mut best: Option<(f64, f64, Point, Point)> = None;
    for (i, a) in candidates.iter().enumerate() {
        for b in &candidates[i + 1..] {
            let (l, r) = if a.centroid.0 <= b.centroid.0 { (a, b) } else { (b, a) };
            let sep = r.centroid.0 - l.centroid.0;
            let dy = (r.centroid.1 - l.centroid.1).abs();
            let ratio = l.area.max(r.area) as f64 / l.area.min(r.area).max(1) as f64;
            if sep <= 0.0 || dy > max_dy || ratio > cfg.eye_pair_area_ratio {
                continue;
            }
            let better = match best {
                None => true,
                Some((s, d, _, _)) => sep > s || (sep == s && dy < d),
            };
            if better {
                best = Some((sep, dy, l.centroid, r.centroid));
            }
        }
    }
    best.map(|(_, _, l, r)| (l, r)).ok_or(FeatureFailure::NoEyePair {
        candidates: candidates.len(),
    })
}

/// Levels the eye line by rotating the crop by `-angle` about the eye
/// midpoint, where `angle = atan2(dy, dx)` from left to right eye.
///
/// Uncovered pixels take the brightest value of the crop so they never join
/// the darkest class. Returns the rotated crop, the rotated eye centres and
/// the angle.
pub fn correct_orientation(
    face: &GrayImage<f64>,
    eyes: (Point, Point),
) -> std::result::Result<(GrayImage<f64>, (Point, Point), f64), FeatureFailure> {
    let (l, r) = if eyes.0 .0 <= eyes.1 .0 { eyes } else { (eyes.1, eyes.0) };
    let (dx, dy) = (r.0 - l.0, r.1 - l.1);
    if dx.hypot(dy) < 1e-12 {
        return Err(FeatureFailure::CoincidentEyes);
    }
    let angle = dy.atan2(dx);
    let mid = ((l.0 + r.0) / 2.0, (l.1 + r.1) / 2.0);
    let fill = face.pixels().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rotated = rotate_about_with_fill(face, -angle, mid, fill);
    let l2 = rotate_point(l, -angle, mid);
    let r2 = rotate_point(r, -angle, mid);
    Ok((rotated, (l2, r2), angle))
}

/// Finds nose and mouth in the vertical strip under the eye midpoint.
///
/// Qualifying components lie strictly below the eye line, have their
/// centroid inside the strip, fall inside the part-area band and are not
/// one of the eye components. The highest is the nose; the next one down
/// is the mouth.
pub fn locate_nose_mouth(
    seg: &SegmentedFace<f64>,
    eyes: (Point, Point),
    face: &Region,
    cfg: &FeatureConfig,
) -> std::result::Result<NoseMouth, FeatureFailure> {
    let (l, r) = eyes;
    let mid = ((l.0 + r.0) / 2.0, (l.1 + r.1) / 2.0);
    let d = (r.0 - l.0).hypot(r.1 - l.1);
    let half = cfg.strip_width * d / 2.0;
    let eye_line = l.1.max(r.1);
    let mut parts: Vec<&Region> = seg
        .components
        .iter()
        .filter(|c| {
            let frac = area_fraction(c, face.area);
            c.centroid.1 > eye_line
                && (c.centroid.0 - mid.0).abs() <= half
                && frac >= cfg.part_area_min
                && frac <= cfg.part_area_max
                && !touches_border(c, seg.width, seg.height)
                && !c.bbox.contains(l.0, l.1)
                && !c.bbox.contains(r.0, r.1)
        })
        .collect();
    parts.sort_by(|a, b| {
        (a.centroid.1, a.centroid.0)
            .partial_cmp(&(b.centroid.1, b.centroid.0))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let nose = parts.first().ok_or(FeatureFailure::NoNose)?;
    let mouth = parts.get(1).ok_or(FeatureFailure::NoMouth)?;
    Ok(NoseMouth {
        nose_tip: nose.centroid,
        nose_length: nose.centroid.1 - mid.1,
        mouth_center: mouth.centroid,
        mouth_area: mouth.area,
    })
}

/// Geometry block plus the top-left `dct_k x dct_k` DCT coefficients of the
/// crop resampled to 64x64.
pub fn build_feature_vector(
    face: &RgbImage,
    geometry: &FaceGeometry,
    dct_k: usize,
) -> crate::Result<FeatureVector> {
    build_feature_vector_gray(&to_gray(face), geometry, dct_k)
}

pub fn build_feature_vector_gray(
    face: &GrayImage<f64>,
    geometry: &FaceGeometry,
    dct_k: usize,
) -> crate::Result<FeatureVector> {
    if dct_k == 0 || dct_k > DCT_BLOCK {
        return Err(crate::Error::invalid(format!("dct_k must be in 1..={DCT_BLOCK}, got {dct_k}")));
    }
    let normalized = geometry.normalized();
    if !(geometry.diagonal() > 0.0) || normalized.iter().any(|v| !v.is_finite()) {
        return Err(crate::Error::invalid("incomplete or degenerate face geometry"));
    }
    let block = resize_bilinear(face, DCT_BLOCK, DCT_BLOCK)?;
    let coeffs = dct2(&Matrix::from_vec(DCT_BLOCK, DCT_BLOCK, block.pixels().to_vec())?)?;
    Ok(FeatureVector {
        geometry: normalized.to_vec(),
        dct: truncate_block(&coeffs, dct_k)?,
        label: None,
    })
}

/// Everything the landmark chain produced for one crop, including the
/// partial results before a failure.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    /// Eye centres as found, before rotation correction.
    pub eyes: Option<(Point, Point)>,
    pub rotation: Option<f64>,
    /// The rotation-corrected crop.
    pub corrected: Option<GrayImage<f64>>,
    pub geometry: Option<FaceGeometry>,
    pub failure: Option<FeatureFailure>,
}

/// Segments the crop, finds the eyes, levels them, re-labels the darkest
/// class of the rotated crop and finds nose and mouth.
pub fn extract_geometry(crop: &GrayImage<f64>, face: &Region, seed: u64, cfg: &FeatureConfig) -> Extraction {
    let mut out = Extraction {
        eyes: None,
        rotation: None,
        corrected: None,
        geometry: None,
        failure: None,
    };
    let seg = match segment_face(crop, seed) {
        Ok(s) => s,
        Err(e) => {
            out.failure = Some(FeatureFailure::Segmentation { message: e.to_string() });
            return out;
        }
    };
    let eyes = match locate_eyes(&seg, face, cfg) {
        Ok(e) => e,
        Err(f) => {
            out.failure = Some(f);
            return out;
        }
    };
    out.eyes = Some(eyes);
    let (rotated, corrected_eyes, angle) = match correct_orientation(crop, eyes) {
        Ok(v) => v,
        Err(f) => {
            out.failure = Some(f);
            return out;
        }
    };
    out.rotation = Some(angle);
    let reseg = match segment_with_centers(&rotated, &seg.class_centers, seg.degenerate, Vec::new()) {
        Ok(s) => s,
        Err(e) => {
            out.failure = Some(FeatureFailure::Segmentation { message: e.to_string() });
            return out;
        }
    };
    out.corrected = Some(rotated);
    let parts = match locate_nose_mouth(&reseg, corrected_eyes, face, cfg) {
        Ok(p) => p,
        Err(f) => {
            out.failure = Some(f);
            return out;
        }
    };
    let (l, r) = corrected_eyes;
    out.geometry = Some(FaceGeometry {
        eye_left: l,
        eye_right: r,
        inter_eye_distance: (r.0 - l.0).hypot(r.1 - l.1),
        nose_tip: parts.nose_tip,
        nose_length: parts.nose_length,
        mouth_center: parts.mouth_center,
        mouth_area: parts.mouth_area,
        face_area: face.area,
        rotation_applied: angle,
        face_box: (
            face.bbox.min_x as f64,
            face.bbox.min_y as f64,
            face.bbox.width() as f64,
            face.bbox.height() as f64,
        ),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::segment_with_centers;
    use crate::region::BBox;

    const SKIN: f64 = 160.0;
    const DARK: f64 = 20.0;

    fn face_region(w: usize, h: usize) -> Region {
        Region {
            label: 1,
            area: w * h,
            bbox: BBox {
                min_x: 0,
                min_y: 0,
                max_x: w - 1,
                max_y: h - 1,
            },
            centroid: ((w - 1) as f64 / 2.0, (h - 1) as f64 / 2.0),
        }
    }

    /// Skin-valued crop with dark discs (centre, radius).
    fn crop(w: usize, h: usize, blobs: &[(f64, f64, f64)]) -> GrayImage<f64> {
        GrayImage::from_fn(w, h, |x, y| {
            let inside = blobs
                .iter()
                .any(|&(cx, cy, r)| (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r);
            if inside {
                DARK
            } else {
                SKIN
            }
        })
        .unwrap()
    }

    fn seg(img: &GrayImage<f64>) -> SegmentedFace<f64> {
        segment_with_centers(img, &[DARK, 90.0, SKIN], false, Vec::new()).unwrap()
    }

    fn close(a: Point, b: Point, tol: f64) -> bool {
        (a.0 - b.0).abs() <= tol && (a.1 - b.1).abs() <= tol
    }

    #[test]
    fn eyes_from_two_blobs() {
        let img = crop(80, 100, &[(20.0, 30.0, 3.0), (60.0, 32.0, 3.0)]);
        let (l, r) = locate_eyes(&seg(&img), &face_region(80, 100), &FeatureConfig::default()).unwrap();
        assert!(close(l, (20.0, 30.0), 1e-9));
        assert!(close(r, (60.0, 32.0), 1e-9));
    }

    #[test]
    fn single_blob_fails() {
        let img = crop(80, 100, &[(20.0, 30.0, 3.0)]);
        let err = locate_eyes(&seg(&img), &face_region(80, 100), &FeatureConfig::default()).unwrap_err();
        assert_eq!(err, FeatureFailure::TooFewEyeCandidates { found: 1 });
    }

    #[test]
    fn widest_valid_pair_wins() {
        let img = crop(80, 100, &[(15.0, 30.0, 3.0), (65.0, 30.0, 3.0), (40.0, 31.0, 3.0)]);
        let (l, r) = locate_eyes(&seg(&img), &face_region(80, 100), &FeatureConfig::default()).unwrap();
        assert!(close(l, (15.0, 30.0), 1e-9));
        assert!(close(r, (65.0, 30.0), 1e-9));
    }

    #[test]
    fn eye_guards() {
        let cfg = FeatureConfig::default();
        let face = face_region(80, 100);
        // lower half only
        let img = crop(80, 100, &[(20.0, 70.0, 3.0), (60.0, 70.0, 3.0)]);
        assert!(matches!(locate_eyes(&seg(&img), &face, &cfg), Err(FeatureFailure::TooFewEyeCandidates { .. })));
        // vertical offset beyond a quarter of the height
        let img = crop(80, 100, &[(20.0, 5.0, 3.0), (60.0, 40.0, 3.0)]);
        assert!(matches!(locate_eyes(&seg(&img), &face, &cfg), Err(FeatureFailure::NoEyePair { .. })));
        // area ratio above 3
        let img = crop(80, 100, &[(20.0, 30.0, 2.0), (60.0, 30.0, 6.0)]);
        assert!(matches!(locate_eyes(&seg(&img), &face, &cfg), Err(FeatureFailure::NoEyePair { .. })));
    }

    #[test]
    fn level_eyes_are_untouched() {
        let img = crop(40, 40, &[(10.0, 20.0, 2.0), (30.0, 20.0, 2.0)]);
        let (out, (l, r), angle) = correct_orientation(&img, ((10.0, 20.0), (30.0, 20.0))).unwrap();
        assert_eq!(angle, 0.0);
        assert_eq!(out, img);
        assert!(close(l, (10.0, 20.0), 1e-12) && close(r, (30.0, 20.0), 1e-12));
    }

    #[test]
    fn diagonal_eyes() {
        let img = crop(40, 40, &[]);
        let (_, (l, r), angle) = correct_orientation(&img, ((10.0, 10.0), (20.0, 20.0))).unwrap();
        assert!((angle - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((l.1 - r.1).abs() <= 0.5);
        assert!(((r.0 - l.0).hypot(r.1 - l.1) - 200f64.sqrt()).abs() < 1e-6);
        assert_eq!(correct_orientation(&img, ((5.0, 5.0), (5.0, 5.0))).unwrap_err(), FeatureFailure::CoincidentEyes);
    }

    #[test]
    fn correction_is_idempotent() {
        let face = face_region(100, 120);
        let cfg = FeatureConfig::default();
        let img = crop(100, 120, &[(30.0, 35.0, 4.0), (70.0, 47.0, 4.0)]);
        let s = seg(&img);
        let eyes = locate_eyes(&s, &face, &cfg).unwrap();
        let (rot, _, angle) = correct_orientation(&img, eyes).unwrap();
        assert!((angle - (12.0f64).atan2(40.0)).abs() < 0.02);
        let again = locate_eyes(&seg(&rot), &face, &cfg).unwrap();
        let (_, _, second) = correct_orientation(&rot, again).unwrap();
        assert!(second.abs() <= 0.01, "second angle {second}");
    }

    #[test]
    fn nose_and_mouth() {
        let face = face_region(80, 100);
        let cfg = FeatureConfig::default();
        let img = crop(80, 100, &[(20.0, 30.0, 3.0), (60.0, 30.0, 3.0), (40.0, 55.0, 3.0), (40.0, 70.0, 4.0)]);
        let nm = locate_nose_mouth(&seg(&img), ((20.0, 30.0), (60.0, 30.0)), &face, &cfg).unwrap();
        assert!(close(nm.nose_tip, (40.0, 55.0), 1e-9));
        assert!((nm.nose_length - 25.0).abs() < 1e-9);
        assert!(close(nm.mouth_center, (40.0, 70.0), 1e-9));
        assert_eq!(nm.mouth_area, 49);
    }

    #[test]
    fn strip_and_failures() {
        let face = face_region(80, 100);
        let cfg = FeatureConfig::default();
        let eyes = ((20.0, 30.0), (60.0, 30.0));
        // outside the strip (offset 25 > 20)
        let img = crop(80, 100, &[(20.0, 30.0, 3.0), (60.0, 30.0, 3.0), (65.0, 55.0, 3.0)]);
        assert_eq!(locate_nose_mouth(&seg(&img), eyes, &face, &cfg).unwrap_err(), FeatureFailure::NoNose);
        let img = crop(80, 100, &[(20.0, 30.0, 3.0), (60.0, 30.0, 3.0), (40.0, 55.0, 3.0)]);
        assert_eq!(locate_nose_mouth(&seg(&img), eyes, &face, &cfg).unwrap_err(), FeatureFailure::NoMouth);
        let img = crop(80, 100, &[(20.0, 30.0, 3.0), (60.0, 30.0, 3.0)]);
        assert_eq!(locate_nose_mouth(&seg(&img), eyes, &face, &cfg).unwrap_err(), FeatureFailure::NoNose);
    }

    fn geometry(scale: f64) -> FaceGeometry {
        FaceGeometry {
            eye_left: (20.0 * scale, 30.0 * scale),
            eye_right: (60.0 * scale, 30.0 * scale),
            inter_eye_distance: 40.0 * scale,
            nose_tip: (40.0 * scale, 55.0 * scale),
            nose_length: 25.0 * scale,
            mouth_center: (40.0 * scale, 70.0 * scale),
            mouth_area: (49.0 * scale * scale) as usize,
            face_area: (8000.0 * scale * scale) as usize,
            rotation_applied: 0.0,
            face_box: (0.0, 0.0, 80.0 * scale, 100.0 * scale),
        }
    }

    #[test]
    fn feature_vector_layout() {
        let img = crop(80, 100, &[(20.0, 30.0, 3.0)]).to_rgb();
        for (k, len) in [(8, 70), (64, 4102)] {
            let v = build_feature_vector(&img, &geometry(1.0), k).unwrap();
            assert_eq!(v.len(), len);
            assert_eq!(v.values().len(), len);
            assert_eq!(v, build_feature_vector(&img, &geometry(1.0), k).unwrap());
        }
        assert!(build_feature_vector(&img, &geometry(1.0), 65).is_err());
        let mut bad = geometry(1.0);
        bad.face_box.2 = 0.0;
        bad.face_box.3 = 0.0;
        assert!(build_feature_vector(&img, &bad, 8).is_err());
    }

    #[test]
    fn geometry_is_scale_free() {
        let small = build_feature_vector(&crop(80, 100, &[]).to_rgb(), &geometry(1.0), 8).unwrap();
        let big = build_feature_vector(&crop(160, 200, &[]).to_rgb(), &geometry(2.0), 8).unwrap();
        for (a, b) in small.geometry.iter().zip(&big.geometry) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn extraction_chain() {
        let img = crop(80, 100, &[(20.0, 30.0, 3.0), (60.0, 30.0, 3.0), (40.0, 55.0, 3.0), (40.0, 70.0, 4.0)]);
        let face = Region {
            bbox: BBox {
                min_x: 1,
                min_y: 1,
                max_x: 78,
                max_y: 98,
            },
            ..face_region(80, 100)
        };
        let ex = extract_geometry(&img, &face, 7, &FeatureConfig::default());
        assert_eq!(ex.failure, None);
        let g = ex.geometry.unwrap();
        assert!((g.nose_length - 25.0).abs() < 1e-9);
        assert!(g.rotation_applied.abs() < 1e-12);
    }
}
