//! Synthetic faces with exact ground truth: a skin-coloured ellipse with
//! dark eye, nose and mouth blobs on a non-skin background.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::face_features::{FaceGeometry, Point};
use crate::image::{Rgb, RgbImage};
use crate::region::{FaceCandidateRule, GOLDEN_RATIO};
use crate::skin::is_skin;

/// Axis-aligned ellipse in the face frame (offset from the face centre
/// before rotation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub offset: (f64, f64),
    pub radii: (f64, f64),
    pub color: Rgb,
}

impl Blob {
    fn contains(&self, q: (f64, f64)) -> bool {
        let dx = (q.0 - self.offset.0) / self.radii.0;
        let dy = (q.1 - self.offset.1) / self.radii.1;
        dx * dx + dy * dy <= 1.0
    }

    fn area(&self) -> f64 {
        std::f64::consts::PI * self.radii.0 * self.radii.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaceFixtureSpec {
    pub width: usize,
    pub height: usize,
    pub center: (f64, f64),
    /// Horizontal and vertical semi-axes of the face ellipse.
    pub axes: (f64, f64),
    pub skin: Rgb,
    pub background: Rgb,
    pub eye_left: Blob,
    pub eye_right: Blob,
    pub nose: Blob,
    pub mouth: Blob,
    /// In-plane rotation of the whole face about its centre, radians.
    pub rotation: f64,
    /// Seed the spec was drawn with (see [`corpus`]); rendering itself is
    /// deterministic and does not consume it.
    pub seed: u64,
}

const FEATURE: Rgb = [40, 20, 20];

impl Default for FaceFixtureSpec {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            center: (160.0, 120.0),
            axes: (40.0, 62.0),
            skin: [200, 140, 110],
            background: [40, 60, 160],
            eye_left: Blob {
                offset: (-15.0, -15.0),
                radii: (4.0, 4.0),
                color: FEATURE,
            },
            eye_right: Blob {
                offset: (15.0, -15.0),
                radii: (4.0, 4.0),
                color: FEATURE,
            },
            nose: Blob {
                offset: (0.0, 8.0),
                radii: (3.5, 3.5),
                color: FEATURE,
            },
            mouth: Blob {
                offset: (0.0, 25.0),
                radii: (10.0, 3.5),
                color: FEATURE,
            },
            rotation: 0.0,
            seed: 0,
        }
    }
}

fn luma(c: Rgb) -> f64 {
    0.299 * c[0] as f64 + 0.587 * c[1] as f64 + 0.114 * c[2] as f64
}

/// Rendered image plus the parameters it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedFixture {
    pub image: RgbImage,
    pub truth: FixtureTruth,
}

/// Exact ground truth in image coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureTruth {
    /// Landmarks as drawn, i.e. after the spec's rotation.
    pub eye_left: Point,
    pub eye_right: Point,
    pub nose: Point,
    pub mouth: Point,
    pub rotation: f64,
    /// Unrotated geometry (eye line level) about the same face centre.
    pub geometry: FaceGeometry,
}

impl FaceFixtureSpec {
    pub fn blobs(&self) -> [&Blob; 4] {
        [&self.eye_left, &self.eye_right, &self.nose, &self.mouth]
    }

    /// Half extents of the rotated face ellipse's bounding box.
    pub fn half_extents(&self) -> (f64, f64) {
        let (a, b) = self.axes;
        let (s, c) = self.rotation.sin_cos();
        ((a * a * c * c + b * b * s * s).sqrt(), (a * a * s * s + b * b * c * c).sqrt())
    }

    /// Face geometry and colours uniformly scaled by `s` about the centre.
    pub fn scaled(&self, s: f64) -> Self {
        let scale = |b: &Blob| Blob {
            offset: (b.offset.0 * s, b.offset.1 * s),
            radii: (b.radii.0 * s, b.radii.1 * s),
            color: b.color,
        };
        Self {
            axes: (self.axes.0 * s, self.axes.1 * s),
            eye_left: scale(&self.eye_left),
            eye_right: scale(&self.eye_right),
            nose: scale(&self.nose),
            mouth: scale(&self.mouth),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Fixture(m));
        if self.width == 0 || self.height == 0 {
            return bad("canvas must be non-empty".into());
        }
        let reals = [self.center.0, self.center.1, self.axes.0, self.axes.1, self.rotation];
        if reals.iter().any(|v| !v.is_finite()) || !(self.axes.0 > 0.0 && self.axes.1 > 0.0) {
            return bad("centre, axes and rotation must be finite with positive axes".into());
        }
        if !is_skin(self.skin[0], self.skin[1], self.skin[2]) {
            return bad(format!("skin colour {:?} fails the skin rule", self.skin));
        }
        if is_skin(self.background[0], self.background[1], self.background[2]) {
            return bad(format!("background colour {:?} passes the skin rule", self.background));
        }
        for b in self.blobs() {
            if !(b.radii.0 > 0.0 && b.radii.1 > 0.0) {
                return bad("blob radii must be positive".into());
            }
            if is_skin(b.color[0], b.color[1], b.color[2]) {
                return bad(format!("blob colour {:?} passes the skin rule", b.color));
            }
            // darkest class: well below skin, below the background
            if luma(b.color) + 40.0 > luma(self.skin) || luma(b.color) >= luma(self.background) {
                return bad(format!("blob colour {:?} is not the darkest intensity", b.color));
            }
            let extremes = [
                (b.offset.0 - b.radii.0, b.offset.1),
                (b.offset.0 + b.radii.0, b.offset.1),
                (b.offset.0, b.offset.1 - b.radii.1),
                (b.offset.0, b.offset.1 + b.radii.1),
            ];
            let inside = extremes
                .iter()
                .all(|&(x, y)| (x / self.axes.0).powi(2) + (y / self.axes.1).powi(2) < 1.0);
            if !inside {
                return bad(format!("blob at {:?} leaves the face ellipse", b.offset));
            }
        }
        let rule = FaceCandidateRule::default();
        let (hx, hy) = self.half_extents();
        let ratio = hy / hx;
        // keep clear of the band edges so pixel rounding cannot flip the test
        if (ratio - GOLDEN_RATIO).abs() > rule.tolerance - 0.05 {
            return bad(format!("face bbox ratio {ratio:.3} outside the golden band"));
        }
        if std::f64::consts::PI * self.axes.0 * self.axes.1 < 2.0 * rule.min_area as f64 {
            return bad("face too small".into());
        }
        let (cx, cy) = self.center;
        if cx - hx < 1.0 || cy - hy < 1.0 || cx + hx > (self.width - 2) as f64 || cy + hy > (self.height - 2) as f64 {
            return bad("face leaves the canvas".into());
        }
        Ok(())
    }

    fn to_image(&self, q: (f64, f64)) -> Point {
        let (s, c) = self.rotation.sin_cos();
        (c * q.0 - s * q.1 + self.center.0, s * q.0 + c * q.1 + self.center.1)
    }

    fn to_face(&self, p: (f64, f64)) -> (f64, f64) {
        let (s, c) = self.rotation.sin_cos();
        let (dx, dy) = (p.0 - self.center.0, p.1 - self.center.1);
        (c * dx + s * dy, -s * dx + c * dy)
    }

    pub fn truth(&self) -> FixtureTruth {
        let at = |b: &Blob| (b.offset.0 + self.center.0, b.offset.1 + self.center.1);
        let (l, r) = (at(&self.eye_left), at(&self.eye_right));
        let mid_y = (l.1 + r.1) / 2.0;
        let blob_area: f64 = self.blobs().iter().map(|b| b.area()).sum();
        let (a, b) = self.axes;
        FixtureTruth {
            eye_left: self.to_image(self.eye_left.offset),
            eye_right: self.to_image(self.eye_right.offset),
            nose: self.to_image(self.nose.offset),
            mouth: self.to_image(self.mouth.offset),
            rotation: self.rotation,
            geometry: FaceGeometry {
                eye_left: l,
                eye_right: r,
                inter_eye_distance: (r.0 - l.0).hypot(r.1 - l.1),
                nose_tip: at(&self.nose),
                nose_length: at(&self.nose).1 - mid_y,
                mouth_center: at(&self.mouth),
                mouth_area: self.mouth.area().round() as usize,
                face_area: (std::f64::consts::PI * a * b - blob_area).round() as usize,
                rotation_applied: self.rotation,
                face_box: (self.center.0 - a, self.center.1 - b, 2.0 * a, 2.0 * b),
            },
        }
    }

    fn pixel(&self, x: usize, y: usize) -> Rgb {
        let q = self.to_face((x as f64, y as f64));
        if (q.0 / self.axes.0).powi(2) + (q.1 / self.axes.1).powi(2) > 1.0 {
            return self.background;
        }
        self.blobs()
            .iter()
            .find(|b| b.contains(q))
            .map_or(self.skin, |b| b.color)
    }
}

/// Renders the spec. Pixel centres sit at integer coordinates; every pixel
/// takes exactly one of the spec's colours.
pub fn render_fixture(spec: &FaceFixtureSpec) -> Result<RenderedFixture> {
    spec.validate()?;
    let image = RgbImage::from_fn(spec.width, spec.height, |x, y| spec.pixel(x, y))?;
    Ok(RenderedFixture {
        image,
        truth: spec.truth(),
    })
}

/// `frames` renders with the face translated by `velocity` per frame.
pub fn render_sequence(spec: &FaceFixtureSpec, frames: usize, velocity: (f64, f64)) -> Result<Vec<RgbImage>> {
    (0..frames)
        .map(|t| {
            let moved = FaceFixtureSpec {
                center: (
                    spec.center.0 + velocity.0 * t as f64,
                    spec.center.1 + velocity.1 * t as f64,
                ),
                ..spec.clone()
            };
            render_fixture(&moved).map(|r| r.image)
        })
        .collect()
}

/// Loads a spec from JSON; missing fields take their defaults.
pub fn spec_from_json(text: &str) -> Result<FaceFixtureSpec> {
    let spec: FaceFixtureSpec = serde_json::from_str(text)?;
    spec.validate()?;
    Ok(spec)
}

/// `n` valid specs with rotation in `[-0.4, 0.4]`, scale in `[0.85, 1.2]`
/// and a random position, drawn from `seed`.
pub fn corpus(seed: u64, n: usize) -> Vec<FaceFixtureSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut spec = FaceFixtureSpec::default().scaled(rng.gen_range(0.85..1.2));
        spec.rotation = rng.gen_range(-0.4..=0.4);
        spec.seed = seed;
        let (hx, hy) = spec.half_extents();
        let margin = 4.0;
        spec.center = (
            rng.gen_range(hx + margin..spec.width as f64 - hx - margin),
            rng.gen_range(hy + margin..spec.height as f64 - hy - margin),
        );
        if spec.validate().is_ok() {
            out.push(spec);
        }
    }
    out
}
