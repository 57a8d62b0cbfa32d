//! Raster types and the pixel-level operations the rest of the pipeline is
//! built on.
//!
//! Coordinates: `x` grows to the right (columns), `y` grows downward (rows).
//! A positive angle rotates `(1, 0)` towards `(0, 1)`, i.e. the usual
//! counter-clockwise matrix `[cos -sin; sin cos]` applied in this frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "{} pixels supplied for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, colour: Rgb) -> Result<Self> {
        Self::new(width, height, vec![colour; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Rgb) -> Result<Self> {
        check_dims(width, height)?;
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, colour: Rgb) {
        self.pixels[y * self.width + x] = colour;
    }

    /// Copies the inclusive rectangle `[x0, x1] x [y0, y1]`.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<Self> {
        if x0 > x1 || y0 > y1 || x1 >= self.width || y1 >= self.height {
            return Err(Error::invalid(format!(
                "crop ({x0},{y0})-({x1},{y1}) outside {}x{} image",
                self.width, self.height
            )));
        }
        Self::from_fn(x1 - x0 + 1, y1 - y0 + 1, |x, y| self.get(x0 + x, y0 + y))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GrayImage<T> {
    width: usize,
    height: usize,
    pixels: Vec<T>,
}

impl<T: Scalar> GrayImage<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<T>) -> Result<Self> {
        check_dims(width, height)?;
        if pixels.len() != width * height {
            return Err(Error::invalid(format!(
                "{} pixels supplied for a {width}x{height} image",
                pixels.len()
            )));
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite intensity"));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.pixels[y * self.width + x]
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> T {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    pub fn transpose(&self) -> Self {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for x in 0..self.width {
            for y in 0..self.height {
                pixels.push(self.get(x, y));
            }
        }
        Self {
            width: self.height,
            height: self.width,
            pixels,
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Quantizes to 8-bit gray stored as an RGB image (clamped, round half up).
    pub fn to_rgb(&self) -> RgbImage {
        let pixels = self
            .pixels
            .iter()
            .map(|&p| {
                let q = quantize(p.to_f64_lossy());
                [q, q, q]
            })
            .collect();
        RgbImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }

    /// Bilinear sample at a real coordinate, or `None` outside
    /// `[0, w-1] x [0, h-1]`.
    pub fn sample_bilinear(&self, x: T, y: T) -> Option<T> {
        let max_x = T::from_usize_lossy(self.width - 1);
        let max_y = T::from_usize_lossy(self.height - 1);
        // absorbs round-off from the rotation matrix at exact borders
        let slack = T::lit(1e-9);
        if x < -slack || y < -slack || x > max_x + slack || y > max_y + slack {
            return None;
        }
        let x = x.max(T::zero()).min(max_x);
        let y = y.max(T::zero()).min(max_y);
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let x0 = x0.to_usize().unwrap_or(0);
        let y0 = y0.to_usize().unwrap_or(0);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let one = T::one();
        let top = self.get(x0, y0) * (one - fx) + self.get(x1, y0) * fx;
        let bottom = self.get(x0, y1) * (one - fx) + self.get(x1, y1) * fx;
        Some(top * (one - fy) + bottom * fy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if bits.len() != width * height {
            return Err(Error::invalid(format!(
                "{} bits supplied for a {width}x{height} mask",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        same_dims((self.width, self.height), (other.width, other.height))?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect();
        BinaryMask::new(self.width, self.height, bits)
    }

    /// Dilation by a square structuring element of the given radius
    /// (Chebyshev distance).
    pub fn dilate(&self, radius: usize) -> BinaryMask {
        if radius == 0 {
            return self.clone();
        }
        let (w, h) = (self.width, self.height);
        // separable: rows then columns
        let mut horizontal = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                if self.bits[y * w + x] {
                    let lo = x.saturating_sub(radius);
                    let hi = (x + radius).min(w - 1);
                    for xx in lo..=hi {
                        horizontal[y * w + xx] = true;
                    }
                }
            }
        }
        let mut bits = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                if horizontal[y * w + x] {
                    let lo = y.saturating_sub(radius);
                    let hi = (y + radius).min(h - 1);
                    for yy in lo..=hi {
                        bits[yy * w + x] = true;
                    }
                }
            }
        }
        BinaryMask {
            width: w,
            height: h,
            bits,
        }
    }

    /// White-on-black rendering.
    pub fn to_rgb(&self) -> RgbImage {
        RgbImage {
            width: self.width,
            height: self.height,
            pixels: self
                .bits
                .iter()
                .map(|&b| if b { [255; 3] } else { [0; 3] })
                .collect(),
        }
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!("image dimensions must be >= 1, got {width}x{height}")));
    }
    Ok(())
}

pub(crate) fn same_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Clamp to [0, 255] and round half up.
pub fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Luma conversion `0.299 R + 0.587 G + 0.114 B`.
pub fn to_gray<T: Scalar>(img: &RgbImage) -> GrayImage<T> {
    let (wr, wg, wb) = (T::lit(0.299), T::lit(0.587), T::lit(0.114));
    let pixels = img
        .pixels
        .iter()
        .map(|&[r, g, b]| {
            wr * T::lit(r as f64) + wg * T::lit(g as f64) + wb * T::lit(b as f64)
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Per-pixel absolute difference of two frames.
pub fn difference_image<T: Scalar>(a: &GrayImage<T>, b: &GrayImage<T>) -> Result<GrayImage<T>> {
    same_dims((a.width, a.height), (b.width, b.height))?;
    let pixels = a.pixels.iter().zip(&b.pixels).map(|(&p, &q)| (p - q).abs()).collect();
    Ok(GrayImage {
        width: a.width,
        height: a.height,
        pixels,
    })
}

/// Sets every bit whose intensity is strictly greater than `t`.
pub fn threshold<T: Scalar>(img: &GrayImage<T>, t: T) -> BinaryMask {
    BinaryMask {
        width: img.width,
        height: img.height,
        bits: img.pixels.iter().map(|&p| p > t).collect(),
    }
}

/// Bilinear resize with corner-aligned sampling: output pixel `i` samples
/// source coordinate `i * (w_in - 1) / (w_out - 1)`.
pub fn resize_bilinear<T: Scalar>(img: &GrayImage<T>, width: usize, height: usize) -> Result<GrayImage<T>> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!("resize target must be >= 1, got {width}x{height}")));
    }
    if width == img.width && height == img.height {
        return Ok(img.clone());
    }
    let scale = |n_in: usize, n_out: usize, i: usize| -> T {
        if n_out == 1 {
            T::from_usize_lossy(n_in - 1) / T::lit(2.0)
        } else {
            T::from_usize_lossy(i) * T::from_usize_lossy(n_in - 1) / T::from_usize_lossy(n_out - 1)
        }
    };
    GrayImage::from_fn(width, height, |x, y| {
        let sx = scale(img.width, width, x);
        let sy = scale(img.height, height, y);
        img.sample_bilinear(sx, sy)
            .expect("resize sample coordinates lie inside the source")
    })
}

/// Rotates `img` by `angle` about `center`; uncovered output pixels are 0.
pub fn rotate_about<T: Scalar>(img: &GrayImage<T>, angle: T, center: (T, T)) -> GrayImage<T> {
    rotate_about_with_fill(img, angle, center, T::zero())
}

/// [`rotate_about`] with a caller-chosen fill value for uncovered pixels.
///
/// Each output pixel `p` samples the input at `R(-angle) (p - c) + c`.
pub fn rotate_about_with_fill<T: Scalar>(img: &GrayImage<T>, angle: T, center: (T, T), fill: T) -> GrayImage<T> {
    let (sin, cos) = angle.sin_cos();
    let (cx, cy) = center;
    let mut pixels = Vec::with_capacity(img.pixels.len());
    for y in 0..img.height {
        for x in 0..img.width {
            let dx = T::from_usize_lossy(x) - cx;
            let dy = T::from_usize_lossy(y) - cy;
            let sx = cos * dx + sin * dy + cx;
            let sy = -sin * dx + cos * dy + cy;
            pixels.push(img.sample_bilinear(sx, sy).unwrap_or(fill));
        }
    }
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Forward rotation of a point by `angle` about `center`.
pub fn rotate_point<T: Scalar>(p: (T, T), angle: T, center: (T, T)) -> (T, T) {
    let (sin, cos) = angle.sin_cos();
    let dx = p.0 - center.0;
    let dy = p.1 - center.1;
    (cos * dx - sin * dy + center.0, sin * dx + cos * dy + center.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray(w: usize, h: usize, v: &[f64]) -> GrayImage<f64> {
        GrayImage::new(w, h, v.to_vec()).unwrap()
    }

    #[test]
    fn to_gray_anchor_values() {
        let img = RgbImage::new(3, 1, vec![[255, 255, 255], [0, 0, 0], [100, 200, 50]]).unwrap();
        let g = to_gray::<f64>(&img);
        assert!((g.get(0, 0) - 255.0).abs() < 1e-9);
        assert_eq!(g.get(1, 0), 0.0);
        assert!((g.get(2, 0) - 153.0).abs() < 1e-9);
    }

    #[test]
    fn difference_basics() {
        let a = GrayImage::filled(4, 3, 200.0).unwrap();
        let b = GrayImage::filled(4, 3, 50.0).unwrap();
        assert!(difference_image(&a, &a).unwrap().pixels().iter().all(|&p| p == 0.0));
        assert!(difference_image(&a, &b).unwrap().pixels().iter().all(|&p| p == 150.0));
        let c = GrayImage::filled(3, 4, 0.0).unwrap();
        assert!(matches!(difference_image(&a, &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn threshold_is_strict() {
        let m = threshold(&gray(3, 1, &[10.0, 20.0, 30.0]), 20.0);
        assert_eq!(m.bits(), &[false, false, true]);
        assert_eq!(threshold(&GrayImage::filled(5, 5, 0.0).unwrap(), 0.0).count(), 0);
        assert_eq!(threshold(&GrayImage::filled(5, 5, 255.0).unwrap(), 0.0).count(), 25);
    }

    #[test]
    fn resize_examples() {
        let r = resize_bilinear(&gray(2, 1, &[0.0, 255.0]), 3, 1).unwrap();
        assert_eq!(r.pixels(), &[0.0, 127.5, 255.0]);
        let c = GrayImage::filled(7, 5, 7.0f64).unwrap();
        for (w, h) in [(1, 1), (3, 9), (64, 64), (7, 5)] {
            let out = resize_bilinear(&c, w, h).unwrap();
            assert!(out.pixels().iter().all(|&p| (p - 7.0).abs() < 1e-12));
        }
        let g = gray(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(resize_bilinear(&g, 2, 2).unwrap(), g);
        assert!(resize_bilinear(&g, 0, 2).is_err());
    }

    #[test]
    fn rotation_identity_and_axis_convention() {
        let g = GrayImage::from_fn(21, 21, |x, y| (x * 3 + y * 7) as f64).unwrap();
        assert_eq!(rotate_about(&g, 0.0, (10.0, 10.0)), g);

        let (cx, cy) = (20usize, 20usize);
        let mut px = vec![0.0; 41 * 41];
        px[cy * 41 + cx + 10] = 255.0;
        let img = gray(41, 41, &px);
        let out = rotate_about(&img, std::f64::consts::FRAC_PI_2, (cx as f64, cy as f64));
        let (idx, _) = out
            .pixels()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        assert_eq!((idx % 41, idx / 41), (cx, cy + 10));
    }

    #[test]
    fn half_turn_twice_recovers_image() {
        let g = GrayImage::from_fn(31, 25, |x, y| ((x * 37 + y * 91) % 256) as f64).unwrap();
        let c = (15.0, 12.0);
        let once = rotate_about(&g, std::f64::consts::PI, c);
        let twice = rotate_about(&once, std::f64::consts::PI, c);
        for (a, b) in g.pixels().iter().zip(twice.pixels()) {
            assert!((a - b).abs() <= 1.0);
        }
    }

    #[test]
    fn rotate_point_matches_image_rotation_direction() {
        let p = rotate_point((30.0, 20.0), std::f64::consts::FRAC_PI_2, (20.0, 20.0));
        assert!((p.0 - 20.0).abs() < 1e-12 && (p.1 - 30.0).abs() < 1e-12);
    }

    #[test]
    fn dilate_square() {
        let mut bits = vec![false; 25];
        bits[12] = true;
        let m = BinaryMask::new(5, 5, bits).unwrap().dilate(1);
        assert_eq!(m.count(), 9);
        assert!(m.get(1, 1) && m.get(3, 3) && !m.get(0, 0));
    }

    proptest! {
        #[test]
        fn difference_is_symmetric(v in proptest::collection::vec((0u8..=255, 0u8..=255), 12)) {
            let a = gray(4, 3, &v.iter().map(|p| p.0 as f64).collect::<Vec<_>>());
            let b = gray(4, 3, &v.iter().map(|p| p.1 as f64).collect::<Vec<_>>());
            prop_assert_eq!(difference_image(&a, &b).unwrap(), difference_image(&b, &a).unwrap());
        }

        #[test]
        fn gray_in_range(r in 0u8..=255, g in 0u8..=255, b in 0u8..=255) {
            let v = to_gray::<f64>(&RgbImage::new(1, 1, vec![[r, g, b]]).unwrap()).get(0, 0);
            prop_assert!((0.0..=255.0 + 1e-9).contains(&v));
        }

        #[test]
        fn rotation_round_trip_interior(angle in -1.0f64..1.0, seed in 0u64..1000) {
            // smooth image so bilinear error stays small
            let g = GrayImage::from_fn(41, 41, |x, y| {
                let (fx, fy) = (x as f64 / 40.0, y as f64 / 40.0);
                127.0 + 100.0 * (fx * 2.0 + seed as f64 * 1e-3).sin() * (fy * 1.5).cos()
            }).unwrap();
            let c = (20.0, 20.0);
            let back = rotate_about(&rotate_about(&g, angle, c), -angle, c);
            for y in 0..41 {
                for x in 0..41 {
                    let r = ((x as f64 - 20.0).powi(2) + (y as f64 - 20.0).powi(2)).sqrt();
                    if r < 17.0 {
                        prop_assert!((g.get(x, y) - back.get(x, y)).abs() <= 1.0);
                    }
                }
            }
        }

        #[test]
        fn rotation_keeps_constants_inside(angle in -3.0f64..3.0, v in 0.0f64..255.0) {
            let g = GrayImage::filled(33, 33, v).unwrap();
            let out = rotate_about(&g, angle, (16.0, 16.0));
            for y in 0..33 {
                for x in 0..33 {
                    let r = ((x as f64 - 16.0).powi(2) + (y as f64 - 16.0).powi(2)).sqrt();
                    if r < 15.0 {
                        prop_assert!((out.get(x, y) - v).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
