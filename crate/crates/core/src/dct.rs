//! Orthonormal 2-D DCT-II, its inverse, and low-frequency truncation.
//!
//! `X[u][v] = a(u) a(v) sum_{i,j} x[i][j] cos(pi (2i+1) u / 2n) cos(pi (2j+1) v / 2n)`
//! with `a(0) = sqrt(1/n)` and `a(k) = sqrt(2/n)` otherwise. Evaluated as
//! `C x C^T` with the `n x n` basis matrix `C`; at the 64x64 size used for
//! face features the O(n^3) product is cheap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct CoefficientBlock<T> {
    n: usize,
    coeffs: Matrix<T>,
}

impl<T: Scalar> CoefficientBlock<T> {
    pub fn new(coeffs: Matrix<T>) -> Result<Self> {
        if coeffs.rows() != coeffs.cols() || coeffs.rows() == 0 {
            return Err(Error::invalid(format!(
                "coefficient block must be square and non-empty, got {}x{}",
                coeffs.rows(),
                coeffs.cols()
            )));
        }
        Ok(Self {
            n: coeffs.rows(),
            coeffs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &Matrix<T> {
        &self.coeffs
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> T {
        self.coeffs.get(u, v)
    }

    pub fn energy(&self) -> T {
        self.coeffs.data().iter().map(|&c| c * c).sum()
    }
}

/// Row `u` holds basis function `u` sampled at `i = 0..n`.
pub fn dct_basis<T: Scalar>(n: usize) -> Matrix<T> {
    let nf = T::from_usize_lossy(n);
    let a0 = (T::one() / nf).sqrt();
    let a = (T::lit(2.0) / nf).sqrt();
    Matrix::from_fn(n, n, |u, i| {
        let scale = if u == 0 { a0 } else { a };
        let arg = T::PI() * T::from_usize_lossy((2 * i + 1) * u) / (T::lit(2.0) * nf);
        scale * arg.cos()
    })
}

pub fn dct2<T: Scalar>(block: &Matrix<T>) -> Result<CoefficientBlock<T>> {
    if block.rows() != block.cols() {
        return Err(Error::invalid(format!(
            "dct2 needs a square block, got {}x{}",
            block.rows(),
            block.cols()
        )));
    }
    if block.rows() == 0 {
        return Err(Error::invalid("dct2 needs n >= 1"));
    }
    let c = dct_basis::<T>(block.rows());
    let coeffs = c.matmul(block)?.matmul(&c.transpose())?;
    CoefficientBlock::new(coeffs)
}

pub fn idct2<T: Scalar>(coeffs: &CoefficientBlock<T>) -> Matrix<T> {
    let c = dct_basis::<T>(coeffs.n);
    c.transpose()
        .matmul(&coeffs.coeffs)
        .and_then(|m| m.matmul(&c))
        .expect("basis and block are both n x n")
}

/// Top-left `k x k` coefficients flattened row-major.
pub fn truncate_block<T: Scalar>(coeffs: &CoefficientBlock<T>, k: usize) -> Result<Vec<T>> {
    if k > coeffs.n {
        return Err(Error::invalid(format!(
            "truncation side {k} exceeds block side {}",
            coeffs.n
        )));
    }
    Ok((0..k)
        .flat_map(|u| (0..k).map(move |v| coeffs.get(u, v)))
        .collect())
}
