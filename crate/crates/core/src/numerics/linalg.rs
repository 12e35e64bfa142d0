//! Cholesky factorizations and solves.

use num_complex::Complex64;

use super::cmatrix::CMatrix;
use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `L` with `A = L L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: CMatrix,
}

impl Cholesky {
    /// Factorizes a Hermitian positive definite matrix. Only the lower
    /// triangle of `a` is read.
    pub fn new(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Cholesky of a {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Singular { pivot: j });
            }
            let ljj = d.sqrt();
            l[(j, j)] = Complex64::new(ljj, 0.0);
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor(&self) -> &CMatrix {
        &self.l
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.l.rows();
        debug_assert_eq!(b.len(), n);
        // L y = b
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l[(i, k)] * b[k];
            }
            b[i] = s / self.l[(i, i)].re;
        }
        // L^H x = y
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)].conj() * b[k];
            }
            b[i] = s / self.l[(i, i)].re;
        }
    }

    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        if b.rows() != self.l.rows() {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has {} rows, system has {}",
                b.rows(),
                self.l.rows()
            )));
        }
        let mut x = b.clone();
        for j in 0..x.cols() {
            self.solve_in_place(x.col_mut(j));
        }
        Ok(x)
    }
}

/// Solves `A X = B` for Hermitian positive definite `A` via Cholesky.
pub fn hermitian_solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    Cholesky::new(a)?.solve(b)
}

/// Tolerance past |1| accepted by [`elementwise_arcsin_clipped`].
pub const ARCSIN_CLIP_TOL: f64 = 1e-9;

pub(crate) fn arcsin_clipped(x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0 + ARCSIN_CLIP_TOL) {
        return Err(Error::Domain(format!(
            "arcsin argument {x} outside [-1, 1]; input is not a correlation matrix"
        )));
    }
    Ok(x.clamp(-1.0, 1.0).asin())
}

/// Applies `arcsin` separately to the real and imaginary part of every entry.
pub fn elementwise_arcsin_clipped(x: &CMatrix) -> Result<CMatrix> {
    let mut out = x.clone();
    for z in out.as_mut_slice() {
        *z = Complex64::new(arcsin_clipped(z.re)?, arcsin_clipped(z.im)?);
    }
    Ok(out)
}

/// Solves a real symmetric positive definite system (row-major `a`, `n x n`).
pub fn cholesky_solve_real(a: &[f64], n: usize, b: &[f64]) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Singular { pivot: j });
        }
        let ljj = d.sqrt();
        l[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / ljj;
        }
    }
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Ok(x)
}
