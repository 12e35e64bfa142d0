use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Seeded random stream. The same `(seed, stream)` pair always yields the
/// same draws; parallel workers take distinct stream ids.
#[derive(Debug, Clone)]
pub struct SimRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SimRng { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Draws a fresh seed for a family of per-trial streams.
    pub fn fork_seed(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Draws `n` i.i.d. CN(0, variance) samples.
pub fn complex_gaussian(rng: &mut SimRng, n: usize, variance: f64) -> Result<Vec<Complex64>> {
    if !(variance >= 0.0) {
        return Err(Error::Domain(format!("negative variance {variance}")));
    }
    let mut out = Vec::with_capacity(n);
    fill_complex_gaussian(rng, &mut out, n, variance);
    Ok(out)
}

pub(crate) fn fill_complex_gaussian(rng: &mut SimRng, out: &mut Vec<Complex64>, n: usize, variance: f64) {
    let s = (variance / 2.0).sqrt();
    for _ in 0..n {
        let re = rng.standard_normal();
        let im = rng.standard_normal();
        out.push(Complex64::new(s * re, s * im));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_is_zero() {
        let v = complex_gaussian(&mut SimRng::new(1, 0), 16, 0.0).unwrap();
        assert!(v.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn negative_variance_rejected() {
        assert!(matches!(
            complex_gaussian(&mut SimRng::new(1, 0), 4, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn deterministic_per_stream() {
        let a = complex_gaussian(&mut SimRng::new(42, 3), 32, 1.0).unwrap();
        let b = complex_gaussian(&mut SimRng::new(42, 3), 32, 1.0).unwrap();
        let c = complex_gaussian(&mut SimRng::new(42, 4), 32, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unit_power_law_of_large_numbers() {
        let n = 1_000_000;
        let v = complex_gaussian(&mut SimRng::new(7, 0), n, 1.0).unwrap();
        let p = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((0.997..=1.003).contains(&p), "mean power {p}");
        let re_var = v.iter().map(|z| z.re * z.re).sum::<f64>() / n as f64;
        assert!((re_var - 0.5).abs() < 0.003);
    }
}
