//! Gradient-magnitude edge maps (Roberts, Prewitt, Sobel) and
//! Laplacian-of-Gaussian zero crossings.
//!
//! All filters are correlations with edge-replication padding. Edge maps are
//! visual diagnostics; the detection path never consumes them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, GrayImage};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeOperator {
    /// `[[1, 0], [0, -1]]` / `[[0, 1], [-1, 0]]`, anchored top-left.
    Roberts,
    /// `[[-1, 0, 1]] x 3` / its transpose, anchored at the centre.
    Prewitt,
    /// `[[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]` / its transpose.
    Sobel,
}

const ROBERTS_X: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];
const ROBERTS_Y: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];
const PREWITT_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0]];
const PREWITT_Y: [[f64; 3]; 3] = [[-1.0, -1.0, -1.0], [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]];
const SOBEL_X: [[f64; 3]; 3] = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
const SOBEL_Y: [[f64; 3]; 3] = [[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]];

/// Dense kernel with an anchor offset (the kernel cell aligned with the
/// output pixel).
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<T> {
    pub size: usize,
    pub anchor: usize,
    pub weights: Vec<T>,
}

impl<T: Scalar> Kernel<T> {
    fn from_rows<const N: usize>(rows: &[[f64; N]; N], anchor: usize) -> Self {
        Self {
            size: N,
            anchor,
            weights: rows.iter().flatten().map(|&v| T::lit(v)).collect(),
        }
    }

    pub fn sum(&self) -> T {
        self.weights.iter().copied().sum()
    }
}

impl EdgeOperator {
    pub fn kernels<T: Scalar>(self) -> (Kernel<T>, Kernel<T>) {
        match self {
            EdgeOperator::Roberts => (Kernel::from_rows(&ROBERTS_X, 0), Kernel::from_rows(&ROBERTS_Y, 0)),
            EdgeOperator::Prewitt => (Kernel::from_rows(&PREWITT_X, 1), Kernel::from_rows(&PREWITT_Y, 1)),
            EdgeOperator::Sobel => (Kernel::from_rows(&SOBEL_X, 1), Kernel::from_rows(&SOBEL_Y, 1)),
        }
    }
}

impl std::str::FromStr for EdgeOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "roberts" => Ok(EdgeOperator::Roberts),
            "prewitt" => Ok(EdgeOperator::Prewitt),
            "sobel" => Ok(EdgeOperator::Sobel),
            other => Err(Error::invalid(format!("unknown edge operator {other:?}"))),
        }
    }
}

pub fn correlate<T: Scalar>(img: &GrayImage<T>, k: &Kernel<T>) -> GrayImage<T> {
    let a = k.anchor as isize;
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let mut acc = T::zero();
        for ky in 0..k.size {
            for kx in 0..k.size {
                let w = k.weights[ky * k.size + kx];
                if w != T::zero() {
                    let sx = x as isize + kx as isize - a;
                    let sy = y as isize + ky as isize - a;
                    acc += w * img.get_clamped(sx, sy);
                }
            }
        }
        acc
    })
    .expect("correlation preserves dimensions")
}

/// Gradient magnitude `sqrt(gx^2 + gy^2)`.
pub fn gradient_edges<T: Scalar>(img: &GrayImage<T>, op: EdgeOperator) -> Result<GrayImage<T>> {
    let (kx, ky) = op.kernels::<T>();
    if img.width() < kx.size || img.height() < kx.size {
        return Err(Error::invalid(format!(
            "{}x{} image smaller than the {}x{} {op:?} kernel",
            img.width(),
            img.height(),
            kx.size,
            kx.size
        )));
    }
    let gx = correlate(img, &kx);
    let gy = correlate(img, &ky);
    let pixels = gx
        .pixels()
        .iter()
        .zip(gy.pixels())
        .map(|(&a, &b)| (a * a + b * b).sqrt())
        .collect();
    GrayImage::new(img.width(), img.height(), pixels)
}

/// Zero-mean Laplacian-of-Gaussian kernel with radius `ceil(3 sigma)`.
pub fn log_kernel<T: Scalar>(sigma: T) -> Result<Kernel<T>> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let radius = (T::lit(3.0) * sigma).ceil().to_usize().unwrap_or(1).max(1);
    let size = 2 * radius + 1;
    let s2 = sigma * sigma;
    let norm = -T::one() / (T::PI() * s2 * s2);
    let mut weights = Vec::with_capacity(size * size);
    for ky in 0..size {
        for kx in 0..size {
            let dx = T::from_usize_lossy(kx) - T::from_usize_lossy(radius);
            let dy = T::from_usize_lossy(ky) - T::from_usize_lossy(radius);
            let q = (dx * dx + dy * dy) / (T::lit(2.0) * s2);
            weights.push(norm * (T::one() - q) * (-q).exp());
        }
    }
    let mean = weights.iter().copied().sum::<T>() / T::from_usize_lossy(weights.len());
    for w in &mut weights {
        *w -= mean;
    }
    Ok(Kernel {
        size,
        anchor: radius,
        weights,
    })
}

/// Marks Laplacian-of-Gaussian zero crossings.
///
/// A pixel is marked when one of its 4-neighbours has a response of the
/// opposite sign, the jump between the two exceeds `floor`, and the pixel
/// is the one of the pair closer to zero. Responses below a round-off
/// level proportional to the image magnitude count as zero.
pub fn log_zero_crossings<T: Scalar>(img: &GrayImage<T>, sigma: T, floor: T) -> Result<BinaryMask> {
    let kernel = log_kernel(sigma)?;
    let resp = correlate(img, &kernel);
    let peak = img.pixels().iter().fold(T::zero(), |m, &p| m.max(p.abs()));
    let k_l1: T = kernel.weights.iter().map(|w| w.abs()).sum();
    let noise = T::epsilon() * T::lit(64.0) * (peak + T::one()) * k_l1;
    let sign = |v: T| -> i8 {
        if v > noise {
            1
        } else if v < -noise {
            -1
        } else {
            0
        }
    };
    let (w, h) = (img.width(), img.height());
    BinaryMask::from_fn(w, h, |x, y| {
        let r = resp.get(x, y);
        let s = sign(r);
        if s == 0 {
            return false;
        }
        let neighbours = [
            (x.wrapping_sub(1), y),
            (x + 1, y),
            (x, y.wrapping_sub(1)),
            (x, y + 1),
        ];
        neighbours.iter().any(|&(nx, ny)| {
            if nx >= w || ny >= h {
                return false;
            }
            let q = resp.get(nx, ny);
            sign(q) == -s && (r - q).abs() > floor && r.abs() <= q.abs() + noise
        })
    })
}
