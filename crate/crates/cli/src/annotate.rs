//! Overlay drawing for annotated detection output.
//!
//! Colours: face bbox red, eyes green, nose blue, mouth yellow.

use facepipe::image::{Rgb, RgbImage};
use facepipe::pipeline::Detection;
use facepipe::region::BBox;

pub const BBOX_COLOUR: Rgb = [255, 0, 0];
pub const EYE_COLOUR: Rgb = [0, 255, 0];
pub const NOSE_COLOUR: Rgb = [0, 0, 255];
pub const MOUTH_COLOUR: Rgb = [255, 255, 0];

/// Rectangle stroke width; the stroke grows outward from the bbox edge.
pub const STROKE: usize = 3;
/// Crosshair arm length in pixels.
pub const ARM: isize = 4;

/// Pixels covered by the bbox stroke: rings at offsets `0..STROKE` outside
/// the bbox, clipped to the image.
pub fn rectangle_pixels(b: &BBox, width: usize, height: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for t in 0..STROKE as isize {
        let (x0, y0) = (b.min_x as isize - t, b.min_y as isize - t);
        let (x1, y1) = (b.max_x as isize + t, b.max_y as isize + t);
        for x in x0..=x1 {
            out.push((x, y0));
            out.push((x, y1));
        }
        for y in y0..=y1 {
            out.push((x0, y));
            out.push((x1, y));
        }
    }
    clip(out, width, height)
}

pub fn crosshair_pixels(p: (f64, f64), width: usize, height: usize) -> Vec<(usize, usize)> {
    let (cx, cy) = (p.0.round() as isize, p.1.round() as isize);
    let mut out = Vec::new();
    for d in -ARM..=ARM {
        out.push((cx + d, cy));
        out.push((cx, cy + d));
    }
    clip(out, width, height)
}

fn clip(points: Vec<(isize, isize)>, width: usize, height: usize) -> Vec<(usize, usize)> {
    points
        .into_iter()
        .filter(|&(x, y)| x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height)
        .map(|(x, y)| (x as usize, y as usize))
        .collect()
}

/// Copy of `img` with every detection drawn; landmarks are drawn over the
/// rectangle.
pub fn annotate(img: &RgbImage, detections: &[Detection]) -> RgbImage {
    let mut out = img.clone();
    let (w, h) = (img.width(), img.height());
    for d in detections {
        for (x, y) in rectangle_pixels(&d.face_bbox.bbox, w, h) {
            out.set(x, y, BBOX_COLOUR);
        }
    }
    for d in detections {
        let lm = &d.landmarks;
        let marks = [
            (lm.eye_left, EYE_COLOUR),
            (lm.eye_right, EYE_COLOUR),
            (lm.nose, NOSE_COLOUR),
            (lm.mouth, MOUTH_COLOUR),
        ];
        for (p, colour) in marks {
            if let Some(p) = p {
                for (x, y) in crosshair_pixels(p, w, h) {
                    out.set(x, y, colour);
                }
            }
        }
    }
    out
}
