//! Frames in, face detections out: skin mask, optional motion gate,
//! components, golden-ratio filter, then the per-face landmark chain and an
//! optional classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::face_features::{
    build_feature_vector_gray, extract_geometry, FaceGeometry, FeatureConfig, FeatureFailure, FeatureVector, Point,
    DCT_BLOCK,
};
use crate::fmaca::FmacaTree;
use crate::image::{difference_image, rotate_point, threshold, to_gray, BinaryMask, GrayImage, RgbImage};
use crate::rbf::RbfNetwork;
use crate::region::{face_candidates, label_components, BBox, Connectivity, FaceCandidateRule, Region};
use crate::skin::skin_mask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierChoice {
    #[default]
    None,
    Rbf,
    Fmaca,
}

impl std::str::FromStr for ClassifierChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "rbf" => Ok(Self::Rbf),
            "fmaca" => Ok(Self::Fmaca),
            other => Err(Error::invalid(format!("unknown classifier {other:?} (none, rbf, fmaca)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionGating {
    /// `None` means on for frame sequences. Stills are never gated since
    /// they have no previous frame.
    pub enabled: Option<bool>,
    /// Difference-image intensity a pixel must exceed to count as moving.
    pub threshold: f64,
    /// Dilation radius (pixels) applied to the motion mask.
    pub radius: usize,
}

impl Default for MotionGating {
    fn default() -> Self {
        Self {
            enabled: None,
            threshold: 15.0,
            radius: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub face_rule: FaceCandidateRule,
    pub seed: u64,
    pub dct_k: usize,
    pub motion: MotionGating,
    pub classifier: ClassifierChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_path: Option<std::path::PathBuf>,
    pub features: FeatureConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            face_rule: FaceCandidateRule::default(),
            seed: 0,
            dct_k: DCT_BLOCK,
            motion: MotionGating::default(),
            classifier: ClassifierChoice::None,
            model_path: None,
            features: FeatureConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.face_rule.validate()?;
        self.features.validate()?;
        if self.dct_k == 0 || self.dct_k > DCT_BLOCK {
            return Err(Error::invalid(format!("dct_k must be in 1..={DCT_BLOCK}, got {}", self.dct_k)));
        }
        if !(self.motion.threshold >= 0.0 && self.motion.threshold <= 255.0) {
            return Err(Error::invalid(format!(
                "motion threshold must be in [0, 255], got {}",
                self.motion.threshold
            )));
        }
        Ok(())
    }
}

/// A trained classifier usable by the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_kind", content = "payload", rename_all = "lowercase")]
pub enum Model {
    Rbf(RbfNetwork<f64>),
    Fmaca(FmacaTree<f64>),
}

impl Model {
    pub fn kind(&self) -> ClassifierChoice {
        match self {
            Model::Rbf(_) => ClassifierChoice::Rbf,
            Model::Fmaca(_) => ClassifierChoice::Fmaca,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Rbf(n) => n.dim(),
            Model::Fmaca(t) => t.dim,
        }
    }

    /// Label and its score: the winning output for the network, the leaf
    /// purity for the tree.
    pub fn classify(&self, x: &[f64]) -> Result<LabelResult> {
        match self {
            Model::Rbf(net) => {
                let c = net.classify(x)?;
                let score = c.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Ok(LabelResult { label: c.label, score })
            }
            Model::Fmaca(tree) => {
                let (label, score) = tree.predict(x)?;
                Ok(LabelResult { label, score })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelResult {
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Segmentation,
    EyeLocalization,
    Orientation,
    Nose,
    Mouth,
    Features,
    Classification,
}

impl Stage {
    fn of(f: &FeatureFailure) -> Self {
        match f {
            FeatureFailure::Segmentation { .. } => Stage::Segmentation,
            FeatureFailure::TooFewEyeCandidates { .. } | FeatureFailure::NoEyePair { .. } => Stage::EyeLocalization,
            FeatureFailure::CoincidentEyes => Stage::Orientation,
            FeatureFailure::NoNose => Stage::Nose,
            FeatureFailure::NoMouth => Stage::Mouth,
            FeatureFailure::Features { .. } => Stage::Features,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub reason: String,
}

/// Landmarks in image coordinates of the original (unrotated) frame.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    pub eye_left: Option<Point>,
    pub eye_right: Option<Point>,
    pub nose: Option<Point>,
    pub mouth: Option<Point>,
    /// Eye-line angle in radians.
    pub rotation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// The skin component accepted as a face, in image coordinates.
    pub face_bbox: Region,
    /// Inclusive crop rectangle the landmark chain ran on.
    pub crop: BBox,
    pub landmarks: Landmarks,
    /// Rotation-corrected geometry in crop coordinates; present only when
    /// every landmark was found.
    pub geometry: Option<FaceGeometry>,
    pub feature: Option<FeatureVector>,
    pub label: Option<LabelResult>,
    /// First stage that failed, if any.
    pub failure: Option<StageFailure>,
}

impl Detection {
    pub fn is_complete(&self) -> bool {
        self.geometry.is_some()
    }
}

/// Inclusive crop rectangle: `bbox` grown by `margin` of its size on every
/// side, clipped to the image.
pub fn crop_rect(bbox: &BBox, margin: f64, width: usize, height: usize) -> BBox {
    let mx = (margin * bbox.width() as f64).ceil() as usize;
    let my = (margin * bbox.height() as f64).ceil() as usize;
    BBox {
        min_x: bbox.min_x.saturating_sub(mx),
        min_y: bbox.min_y.saturating_sub(my),
        max_x: (bbox.max_x + mx).min(width - 1),
        max_y: (bbox.max_y + my).min(height - 1),
    }
}

fn crop_gray(img: &GrayImage<f64>, r: &BBox) -> GrayImage<f64> {
    GrayImage::from_fn(r.width(), r.height(), |x, y| img.get(r.min_x + x, r.min_y + y))
        .expect("crop lies inside the image")
}

fn to_crop(region: &Region, r: &BBox) -> Region {
    Region {
        label: region.label,
        area: region.area,
        bbox: BBox {
            min_x: region.bbox.min_x - r.min_x,
            min_y: region.bbox.min_y - r.min_y,
            max_x: region.bbox.max_x - r.min_x,
            max_y: region.bbox.max_y - r.min_y,
        },
        centroid: (region.centroid.0 - r.min_x as f64, region.centroid.1 - r.min_y as f64),
    }
}

fn detect_face(
    gray: &GrayImage<f64>,
    face: &Region,
    cfg: &PipelineConfig,
    model: Option<&Model>,
) -> Detection {
    let rect = crop_rect(&face.bbox, cfg.features.crop_margin, gray.width(), gray.height());
    let crop = crop_gray(gray, &rect);
    let local = to_crop(face, &rect);
    let ex = extract_geometry(&crop, &local, cfg.seed, &cfg.features);
    let off = (rect.min_x as f64, rect.min_y as f64);
    let to_image = |p: Point| (p.0 + off.0, p.1 + off.1);

    let mut det = Detection {
        face_bbox: face.clone(),
        crop: rect,
        landmarks: Landmarks::default(),
        geometry: None,
        feature: None,
        label: None,
        failure: ex.failure.as_ref().map(|f| StageFailure {
            stage: Stage::of(f),
            reason: f.to_string(),
        }),
    };
    if let Some((l, r)) = ex.eyes {
        det.landmarks.eye_left = Some(to_image(l));
        det.landmarks.eye_right = Some(to_image(r));
    }
    det.landmarks.rotation = ex.rotation;
    let (Some(geometry), Some(corrected), Some((l, r)), Some(angle)) = (ex.geometry, ex.corrected, ex.eyes, ex.rotation)
    else {
        return det;
    };
    // the eye midpoint is the rotation centre, so it is the same in both frames
    let mid = ((l.0 + r.0) / 2.0, (l.1 + r.1) / 2.0);
    det.landmarks.nose = Some(to_image(rotate_point(geometry.nose_tip, angle, mid)));
    det.landmarks.mouth = Some(to_image(rotate_point(geometry.mouth_center, angle, mid)));

    let feature = match build_feature_vector_gray(&corrected, &geometry, cfg.dct_k) {
        Ok(f) => f,
        Err(e) => {
            det.failure = Some(StageFailure {
                stage: Stage::Features,
                reason: e.to_string(),
            });
            return det;
        }
    };
    det.geometry = Some(geometry);
    if let Some(m) = model {
        match m.classify(&feature.values()) {
            Ok(l) => det.label = Some(l),
            Err(e) => {
                det.failure = Some(StageFailure {
                    stage: Stage::Classification,
                    reason: e.to_string(),
                })
            }
        }
    }
    det.feature = Some(feature);
    det
}

fn detect_masked(img: &RgbImage, gate: Option<&BinaryMask>, cfg: &PipelineConfig, model: Option<&Model>) -> Result<Vec<Detection>> {
    let mut mask = skin_mask(img);
    if let Some(g) = gate {
        mask = mask.and(g)?;
    }
    let (_, regions) = label_components(&mask, Connectivity::Eight);
    let mut faces = face_candidates(&regions, &cfg.face_rule);
    faces.sort_by_key(|r| (r.bbox.min_y, r.bbox.min_x, r.label));
    let gray = to_gray::<f64>(img);
    Ok(faces.iter().map(|f| detect_face(&gray, f, cfg, model)).collect())
}

fn check_model(cfg: &PipelineConfig, model: Option<&Model>) -> Result<()> {
    match (cfg.classifier, model) {
        (ClassifierChoice::None, None) => Ok(()),
        (ClassifierChoice::None, Some(_)) => Err(Error::invalid("a model was supplied but the classifier is 'none'")),
        (_, None) => Err(Error::invalid("classifier selected but no model supplied")),
        (c, Some(m)) if m.kind() != c => Err(Error::invalid(format!(
            "configured classifier {c:?} does not match the model kind {:?}",
            m.kind()
        ))),
        _ => Ok(()),
    }
}

/// Detections in a single image, ordered by bbox position (top, then left).
pub fn detect_still(img: &RgbImage, cfg: &PipelineConfig) -> Result<Vec<Detection>> {
    detect_still_with(img, cfg, None)
}

pub fn detect_still_with(img: &RgbImage, cfg: &PipelineConfig, model: Option<&Model>) -> Result<Vec<Detection>> {
    cfg.validate()?;
    check_model(cfg, model)?;
    // a still has no previous frame, so it is never gated (like frame 0)
    detect_masked(img, None, cfg, model)
}

/// Moving-pixel mask of `cur` against `prev`, dilated.
pub fn motion_mask(prev: &RgbImage, cur: &RgbImage, gating: &MotionGating) -> Result<BinaryMask> {
    let diff = difference_image(&to_gray::<f64>(cur), &to_gray::<f64>(prev))?;
    Ok(threshold(&diff, gating.threshold).dilate(gating.radius))
}

/// Per-frame detections. With gating on (the default for sequences) frame
/// `t > 0` only keeps skin pixels near motion against frame `t - 1`.
pub fn detect_video(frames: &[RgbImage], cfg: &PipelineConfig) -> Result<Vec<Vec<Detection>>> {
    detect_video_with(frames, cfg, None)
}

pub fn detect_video_with(frames: &[RgbImage], cfg: &PipelineConfig, model: Option<&Model>) -> Result<Vec<Vec<Detection>>> {
    cfg.validate()?;
    check_model(cfg, model)?;
    let first = frames.first().ok_or_else(|| Error::invalid("no frames"))?;
    for f in frames {
        if (f.width(), f.height()) != (first.width(), first.height()) {
            return Err(Error::DimensionMismatch {
                expected: (first.width(), first.height()),
                found: (f.width(), f.height()),
            });
        }
    }
    let gating = cfg.motion.enabled.unwrap_or(true);
    frames
        .iter()
        .enumerate()
        .map(|(t, frame)| {
            if gating && t > 0 {
                let gate = motion_mask(&frames[t - 1], frame, &cfg.motion)?;
                detect_masked(frame, Some(&gate), cfg, model)
            } else {
                detect_masked(frame, None, cfg, model)
            }
        })
        .collect()
}
