//! Large-scale fading from user positions in a circular cell.

use crate::numerics::SimRng;

/// Path-loss exponent of the reference cell.
pub const DEFAULT_PATH_LOSS_EXPONENT: f64 = 3.8;
pub const DEFAULT_CELL_RADIUS_M: f64 = 1000.0;
/// Minimum user-relay distance, also the path-loss reference distance.
pub const DEFAULT_GUARD_M: f64 = 100.0;
pub const DEFAULT_SHADOW_SIGMA_DB: f64 = 8.0;

/// Source-relay coefficients of the five-pair reference cell.
pub const REFERENCE_BETA_SR: [f64; 5] = [0.2688, 0.0368, 0.00025, 0.1398, 0.0047];
/// Relay-destination coefficients of the five-pair reference cell.
pub const REFERENCE_BETA_RD: [f64; 5] = [0.0003, 0.00025, 0.0050, 0.0794, 0.0001];

/// `beta = z (r / r0)^(-exponent)`.
pub fn path_loss(distance_m: f64, reference_m: f64, exponent: f64, shadowing: f64) -> f64 {
    shadowing * (distance_m / reference_m).powf(-exponent)
}

/// Distance of a point drawn uniformly over the annulus `[guard, radius]`.
fn annulus_distance(rng: &mut SimRng, radius_m: f64, guard_m: f64) -> f64 {
    let u = rng.uniform();
    (u * (radius_m * radius_m - guard_m * guard_m) + guard_m * guard_m).sqrt()
}

/// Draws `(beta_SR, beta_RD)` for `k` pairs. Each pair shares one
/// log-normal shadowing draw between its two hops.
///
/// # Panics
///
/// Panics unless `radius_m > guard_m > 0`.
pub fn large_scale_from_geometry(
    rng: &mut SimRng,
    k: usize,
    radius_m: f64,
    guard_m: f64,
    exponent: f64,
    shadow_sigma_db: f64,
) -> (Vec<f64>, Vec<f64>) {
    assert!(radius_m > guard_m && guard_m > 0.0, "need radius > guard > 0");
    let mut sr = Vec::with_capacity(k);
    let mut rd = Vec::with_capacity(k);
    for _ in 0..k {
        let r_sr = annulus_distance(rng, radius_m, guard_m);
        let r_rd = annulus_distance(rng, radius_m, guard_m);
        let z = 10f64.powf(shadow_sigma_db * rng.standard_normal() / 10.0);
        sr.push(path_loss(r_sr, guard_m, exponent, z));
        rd.push(path_loss(r_rd, guard_m, exponent, z));
    }
    (sr, rd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_distance_unit_shadowing() {
        assert_eq!(path_loss(100.0, 100.0, 3.8, 1.0), 1.0);
        assert!(path_loss(200.0, 100.0, 3.8, 1.0) < 1.0);
    }

    #[test]
    fn no_shadowing_keeps_betas_within_distance_bounds() {
        let (sr, rd) = large_scale_from_geometry(&mut SimRng::new(5, 0), 50, 1000.0, 100.0, 3.8, 0.0);
        let floor = path_loss(1000.0, 100.0, 3.8, 1.0);
        for b in sr.iter().chain(&rd) {
            assert!(*b <= 1.0 && *b >= floor);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = large_scale_from_geometry(&mut SimRng::new(9, 2), 5, 1000.0, 100.0, 3.8, 8.0);
        let b = large_scale_from_geometry(&mut SimRng::new(9, 2), 5, 1000.0, 100.0, 3.8, 8.0);
        assert_eq!(a, b);
    }

    #[test]
    fn default_cell_spans_orders_of_magnitude() {
        // The reference coefficients span ~3 decades; so should a typical draw.
        let (sr, rd) = large_scale_from_geometry(
            &mut SimRng::new(2017, 0),
            200,
            DEFAULT_CELL_RADIUS_M,
            DEFAULT_GUARD_M,
            DEFAULT_PATH_LOSS_EXPONENT,
            DEFAULT_SHADOW_SIGMA_DB,
        );
        let all: Vec<f64> = sr.into_iter().chain(rd).collect();
        let max = all.iter().cloned().fold(f64::MIN, f64::max);
        let min = all.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max / min).log10() > 3.0);
        let ref_span = (REFERENCE_BETA_SR[0] / REFERENCE_BETA_SR[2]).log10();
        assert!(ref_span > 3.0);
        let mut sorted = all.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        assert!(median > 1e-5 && median < 0.5, "median {median}");
    }
}
