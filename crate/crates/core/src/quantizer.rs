//! One-bit quantization and its Bussgang linearization.
//!
//! For a zero-mean circularly symmetric Gaussian input `y` with covariance
//! `R_yy`, the one-bit output `r = Q(y)` splits as `r = A y + q` where `q` is
//! uncorrelated with `y`. With `N = diag(R_yy)^{-1/2} R_yy diag(R_yy)^{-1/2}`
//! the arcsine law gives
//!
//! ```text
//! A    = sqrt(2/pi) diag(R_yy)^{-1/2}
//! R_rr = 2/pi (arcsin(Re N) + j arcsin(Im N))
//! R_qq = R_rr - 2/pi N
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{arcsin_clipped, CMatrix};

/// `1 - 2/pi`, the per-entry distortion power of a one-bit quantizer.
pub const DISTORTION_POWER: f64 = 1.0 - FRAC_2_PI;

/// Second-order statistics of a one-bit quantizer driven by Gaussian input.
#[derive(Debug, Clone)]
pub struct QuantizerStats {
    /// Diagonal of the Bussgang gain `A` (real, positive).
    pub gain: Vec<f64>,
    /// Distortion covariance `R_qq`.
    pub noise_cov: CMatrix,
    /// Output covariance `R_rr`; unit diagonal.
    pub output_cov: CMatrix,
}

impl QuantizerStats {
    pub fn gain_matrix(&self) -> CMatrix {
        CMatrix::from_real_diag(&self.gain)
    }
}

/// Maps every entry to `(sign(Re) + j sign(Im)) / sqrt(2)`, with `sign(0) = +1`.
pub fn one_bit_quantize(y: &[Complex64]) -> Vec<Complex64> {
    y.iter().map(|&z| quantize_entry(z)).collect()
}

#[inline]
pub(crate) fn quantize_entry(z: Complex64) -> Complex64 {
    let s = |x: f64| if x >= 0.0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    Complex64::new(s(z.re), s(z.im))
}

fn inv_sqrt_diag(r_yy: &CMatrix) -> Result<Vec<f64>> {
    if !r_yy.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{}",
            r_yy.rows(),
            r_yy.cols()
        )));
    }
    r_yy.diag_real()
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if d > 0.0 && d.is_finite() {
                Ok(1.0 / d.sqrt())
            } else {
                Err(Error::Domain(format!("diagonal entry {i} of the input covariance is {d}")))
            }
        })
        .collect()
}

/// Diagonal of `sqrt(2/pi) diag(R_yy)^{-1/2}`.
pub fn bussgang_gain(r_yy: &CMatrix) -> Result<Vec<f64>> {
    let s = FRAC_2_PI.sqrt();
    Ok(inv_sqrt_diag(r_yy)?.into_iter().map(|d| s * d).collect())
}

/// Output covariance of the one-bit quantizer (arcsine law).
pub fn arcsine_output_cov(r_yy: &CMatrix) -> Result<CMatrix> {
    Ok(arcsine_pair(r_yy)?.0)
}

/// Returns `(R_rr, 2/pi N)`; only the upper triangle is evaluated.
fn arcsine_pair(r_yy: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let d = inv_sqrt_diag(r_yy)?;
    let n = r_yy.rows();
    let mut rr = CMatrix::zeros(n, n);
    let mut lin = CMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let z = r_yy[(i, j)] * (d[i] * d[j]);
            let a = Complex64::new(arcsin_clipped(z.re)?, arcsin_clipped(z.im)?) * FRAC_2_PI;
            let l = z * FRAC_2_PI;
            rr[(i, j)] = a;
            rr[(j, i)] = a.conj();
            lin[(i, j)] = l;
            lin[(j, i)] = l.conj();
        }
        rr[(j, j)] = Complex64::new(1.0, 0.0);
        lin[(j, j)] = Complex64::new(FRAC_2_PI, 0.0);
    }
    Ok((rr, lin))
}

/// Bussgang gain, output covariance and distortion covariance for `R_yy`.
pub fn quantization_noise_cov(r_yy: &CMatrix) -> Result<QuantizerStats> {
    let gain = bussgang_gain(r_yy)?;
    let (output_cov, lin) = arcsine_pair(r_yy)?;
    let noise_cov = output_cov.sub(&lin)?;
    Ok(QuantizerStats {
        gain,
        noise_cov,
        output_cov,
    })
}

/// Statistics under the diagonal (large-array) approximation, where the
/// input covariance is treated as `level * I`.
pub fn diagonal_stats(n: usize, level: f64) -> QuantizerStats {
    QuantizerStats {
        gain: vec![(FRAC_2_PI / level).sqrt(); n],
        noise_cov: CMatrix::identity(n).scale(DISTORTION_POWER),
        output_cov: CMatrix::identity(n),
    }
}
