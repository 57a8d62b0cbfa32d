//! Face detection by skin colour and connected components, facial feature
//! extraction (geometry + DCT) and two classifiers: a Gaussian RBF network
//! and a recursive basin tree.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`). The
//! pipeline, feature extraction and fixtures are fixed to `f64`; the aliases
//! below name the concrete types they use.

pub mod clustering;
pub mod dct;
pub mod edge;
mod error;
pub mod face_features;
pub mod fixtures;
pub mod fmaca;
pub mod image;
pub mod linalg;
pub mod pipeline;
pub mod ppm;
pub mod rbf;
pub mod region;
pub mod sample;
pub mod scalar;
pub mod skin;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type GrayImage64 = image::GrayImage<f64>;
pub type GrayImage32 = image::GrayImage<f32>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type Clustering64 = clustering::Clustering<f64>;
pub type SegmentedFace64 = clustering::SegmentedFace<f64>;
pub type Sample64 = sample::Sample<f64>;
pub type RbfNetwork64 = rbf::RbfNetwork<f64>;
pub type RbfNetwork32 = rbf::RbfNetwork<f32>;
pub type FmacaTree64 = fmaca::FmacaTree<f64>;
pub type FmacaTree32 = fmaca::FmacaTree<f32>;
