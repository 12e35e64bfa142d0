//! Complex-matrix and statistical primitives shared by the other modules.

mod cmatrix;
mod linalg;
mod rng;
mod stats;

pub use cmatrix::{dotc, dotu, norm_sqr, CMatrix};
pub use linalg::{
    cholesky_solve_real, elementwise_arcsin_clipped, hermitian_solve, Cholesky, ARCSIN_CLIP_TOL,
};
pub(crate) use linalg::arcsin_clipped;
pub(crate) use rng::fill_complex_gaussian;
pub use rng::{complex_gaussian, SimRng};
pub use stats::{db_to_linear, linear_to_db, mean, pairwise_sum, std_error, variance};

#[cfg(test)]
mod tests {
    use super::*;

    // E{||g||^4} = n(n+1) beta^2 for g ~ CN(0, beta I_n).
    #[test]
    fn fourth_moment_of_complex_gaussian() {
        let (n, beta, draws) = (16usize, 0.7, 20_000usize);
        let mut rng = SimRng::new(99, 0);
        let samples: Vec<f64> = (0..draws)
            .map(|_| {
                let g = complex_gaussian(&mut rng, n, beta).unwrap();
                norm_sqr(&g).powi(2)
            })
            .collect();
        let expected = (n * (n + 1)) as f64 * beta * beta;
        let z = (mean(&samples) - expected) / std_error(&samples);
        assert!(z.abs() < 3.0, "z = {z}");
    }
}
