//! Pilot training through one-bit ADCs and LMMSE channel estimation.
//!
//! Every relay antenna sees the same `tau_p`-symbol pilot model
//! `y_m = sqrt(p_p) Phi g_m + n_m` with `g_m ~ CN(0, diag(beta))`, so the
//! `MK x MK` estimate covariance is `Q (x) I_M` and only the `K x K` factor
//! `Q` is ever formed.

use std::f64::consts::FRAC_2_PI;
use std::fmt;

use num_complex::Complex64;

use crate::channel::PilotKind;
use crate::error::{Error, Result};
use crate::numerics::{complex_gaussian, hermitian_solve, CMatrix, SimRng};
use crate::quantizer::{arcsine_output_cov, bussgang_gain, quantize_entry, DISTORTION_POWER};

/// A `tau_p x K` pilot matrix with `Phi^H Phi = tau_p I_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    kind: PilotKind,
    entries: CMatrix,
}

impl PilotMatrix {
    pub fn kind(&self) -> PilotKind {
        self.kind
    }

    pub fn tau_p(&self) -> usize {
        self.entries.rows()
    }

    pub fn users(&self) -> usize {
        self.entries.cols()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }
}

/// Builds the minimum-length (`tau_p = K`) pilot of the given family.
/// Hadamard pilots use Sylvester doubling, so `K` must be a power of two.
pub fn build_pilot(kind: PilotKind, k: usize) -> Result<PilotMatrix> {
    if k == 0 {
        return Err(Error::config("K", "must be at least 1"));
    }
    let entries = match kind {
        PilotKind::Identity => CMatrix::identity(k).scale((k as f64).sqrt()),
        PilotKind::Hadamard => {
            if !k.is_power_of_two() {
                return Err(Error::UnsupportedOrder(k));
            }
            CMatrix::from_fn(k, k, |i, j| {
                let s = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new(s, 0.0)
            })
        }
    };
    Ok(PilotMatrix { kind, entries })
}

/// Per-user estimate statistics. `est_var + err_var = beta`, `mse = err_var`
/// (per antenna).
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationStats {
    pub est_var: Vec<f64>,
    pub err_var: Vec<f64>,
    pub mse: Vec<f64>,
}

impl EstimationStats {
    pub fn from_est_var(betas: &[f64], est_var: Vec<f64>) -> Self {
        let err_var: Vec<f64> = betas.iter().zip(&est_var).map(|(b, v)| b - v).collect();
        EstimationStats {
            mse: err_var.clone(),
            err_var,
            est_var,
        }
    }
}

/// Estimate variance of user `k` under identity pilots:
/// `2/pi * K p_p beta^2 / (K p_p beta + 1)`.
pub fn sigma_identity(beta: f64, k: usize, p_p: f64) -> f64 {
    let kp = k as f64 * p_p;
    FRAC_2_PI * kp * beta * beta / (kp * beta + 1.0)
}

/// Squared common Bussgang gain under Hadamard pilots,
/// `2/pi / (p_p sum(beta) + 1)`.
pub fn hadamard_gain_sq(betas: &[f64], p_p: f64) -> f64 {
    FRAC_2_PI / (p_p * betas.iter().sum::<f64>() + 1.0)
}

/// Estimate variance of user `k` under Hadamard pilots with the white
/// distortion approximation.
pub fn kappa_hadamard(betas: &[f64], k: usize, p_p: f64) -> f64 {
    let a2 = hadamard_gain_sq(betas, p_p);
    let kk = betas.len() as f64;
    let b = betas[k];
    kk * a2 * b * b * p_p / (kk * a2 * b * p_p + a2 + DISTORTION_POWER)
}

/// Closed-form statistics of every user for the given pilot family.
pub fn estimation_stats(kind: PilotKind, betas: &[f64], p_p: f64) -> EstimationStats {
    let k = betas.len();
    let est_var = match kind {
        PilotKind::Identity => betas.iter().map(|&b| sigma_identity(b, k, p_p)).collect(),
        PilotKind::Hadamard => (0..k).map(|i| kappa_hadamard(betas, i, p_p)).collect(),
    };
    EstimationStats::from_est_var(betas, est_var)
}

/// Per-antenna LMMSE filter `F` (`K x tau_p`, acting on quantized pilots)
/// and the estimate covariance factor `Q = E{g_hat g_hat^H}`.
#[derive(Debug, Clone)]
pub struct LmmseFilter {
    pub filter: CMatrix,
    pub cov: CMatrix,
}

fn check_betas(pilot: &PilotMatrix, betas: &[f64], p_p: f64) -> Result<()> {
    if betas.len() != pilot.users() {
        return Err(Error::DimensionMismatch(format!(
            "{} betas for a pilot with {} columns",
            betas.len(),
            pilot.users()
        )));
    }
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0)) {
        return Err(Error::Domain(format!("large-scale coefficient {b} must be positive")));
    }
    if !(p_p >= 0.0) {
        return Err(Error::Domain(format!("pilot power {p_p} must be nonnegative")));
    }
    Ok(())
}

/// General LMMSE estimator through one-bit ADCs using the exact arcsine-law
/// output covariance.
pub fn lmmse_filter(pilot: &PilotMatrix, betas: &[f64], p_p: f64) -> Result<LmmseFilter> {
    check_betas(pilot, betas, p_p)?;
    let phi = pilot.entries().scale(p_p.sqrt());
    let phi_d = phi.scale_rows_cols(&vec![1.0; phi.rows()], betas);
    let mut r_yy = phi_d.matmul(&phi.adjoint())?;
    for i in 0..r_yy.rows() {
        r_yy[(i, i)] += 1.0;
    }
    let gain = bussgang_gain(&r_yy)?;
    let r_rr = arcsine_output_cov(&r_yy)?;
    // E{r g^H} = A Phi D
    let cross = phi_d.scale_rows_cols(&gain, &vec![1.0; betas.len()]);
    let x = hermitian_solve(&r_rr, &cross)?;
    let mut cov = cross.adjoint_matmul(&x)?;
    cov.symmetrize();
    Ok(LmmseFilter {
        filter: x.adjoint(),
        cov,
    })
}

/// The `K x K` factor `Q` of the estimate covariance `Q (x) I_M`.
pub fn lmmse_cov_general(pilot: &PilotMatrix, betas: &[f64], p_p: f64) -> Result<CMatrix> {
    Ok(lmmse_filter(pilot, betas, p_p)?.cov)
}

/// Quantizes the `M x tau_p` received pilot block and applies the LMMSE
/// filter, returning the `M x K` channel estimate.
pub fn estimate_from_pilots(y_p: &CMatrix, pilot: &PilotMatrix, betas: &[f64], p_p: f64) -> Result<CMatrix> {
    if y_p.cols() != pilot.tau_p() {
        return Err(Error::DimensionMismatch(format!(
            "pilot block has {} columns, pilot length is {}",
            y_p.cols(),
            pilot.tau_p()
        )));
    }
    let f = lmmse_filter(pilot, betas, p_p)?;
    apply_filter(y_p, &f.filter)
}

fn apply_filter(y_p: &CMatrix, filter: &CMatrix) -> Result<CMatrix> {
    let mut r = y_p.clone();
    for z in r.as_mut_slice() {
        *z = quantize_entry(*z);
    }
    r.matmul(&filter.transpose())
}

/// Runs the full training pipeline (channel draw, pilot transmission, one-bit
/// quantization, LMMSE) and returns the empirical per-antenna MSE of each user.
pub fn simulate_pilot_mse(
    pilot: &PilotMatrix,
    betas: &[f64],
    p_p: f64,
    m: usize,
    trials: usize,
    rng: &mut SimRng,
) -> Result<Vec<f64>> {
    let f = lmmse_filter(pilot, betas, p_p)?;
    let (k, tau) = (pilot.users(), pilot.tau_p());
    let phi_t = pilot.entries().transpose().scale(p_p.sqrt());
    let mut acc = vec![0.0; k];
    for _ in 0..trials {
        let mut g = Vec::with_capacity(m * k);
        for &b in betas {
            g.extend(complex_gaussian(rng, m, b)?);
        }
        let g = CMatrix::from_col_major(m, k, g)?;
        let noise = CMatrix::from_col_major(m, tau, complex_gaussian(rng, m * tau, 1.0)?)?;
        let y = g.matmul(&phi_t)?.add(&noise)?;
        let ghat = apply_filter(&y, &f.filter)?;
        for (j, a) in acc.iter_mut().enumerate() {
            *a += ghat.col(j).iter().zip(g.col(j)).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>();
        }
    }
    let n = (trials * m) as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}

/// Per-user pilot preference by closed-form MSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotPreference {
    Identity,
    Hadamard,
    Tie,
}

impl fmt::Display for PilotPreference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PilotPreference::Identity => "identity",
            PilotPreference::Hadamard => "hadamard",
            PilotPreference::Tie => "tie",
        })
    }
}

/// MSE gap below which the two pilot families count as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

pub fn compare_pilots(betas: &[f64], p_p: f64) -> Vec<PilotPreference> {
    let id = estimation_stats(PilotKind::Identity, betas, p_p);
    let had = estimation_stats(PilotKind::Hadamard, betas, p_p);
    id.mse
        .iter()
        .zip(&had.mse)
        .map(|(a, b)| {
            if (a - b).abs() <= TIE_TOLERANCE {
                PilotPreference::Tie
            } else if a < b {
                PilotPreference::Identity
            } else {
                PilotPreference::Hadamard
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_pilot_is_scaled_identity() {
        let p = build_pilot(PilotKind::Identity, 4).unwrap();
        assert_eq!(p.entries(), &CMatrix::identity(4).scale(2.0));
    }

    #[test]
    fn hadamard_orthogonality() {
        for k in [1, 2, 4, 8, 16] {
            let p = build_pilot(PilotKind::Hadamard, k).unwrap();
            let g = p.entries().adjoint_matmul(p.entries()).unwrap();
            assert_eq!(g, CMatrix::identity(k).scale(k as f64));
            assert!(p.entries().as_slice().iter().all(|z| z.im == 0.0 && z.re.abs() == 1.0));
        }
    }

    #[test]
    fn hadamard_order_six_unsupported() {
        assert!(matches!(build_pilot(PilotKind::Hadamard, 6), Err(Error::UnsupportedOrder(6))));
    }

    #[test]
    fn general_lmmse_matches_identity_closed_form() {
        let betas = [0.6, 0.3, 0.1, 0.9];
        let p = build_pilot(PilotKind::Identity, 4).unwrap();
        for pp in [0.01, 1.0, 10.0, 1000.0] {
            let q = lmmse_cov_general(&p, &betas, pp).unwrap();
            for (k, &b) in betas.iter().enumerate() {
                assert!((q[(k, k)].re - sigma_identity(b, 4, pp)).abs() < 1e-10);
                for j in 0..4 {
                    if j != k {
                        assert!(q[(k, j)].norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_pilot_power_gives_no_information() {
        for kind in [PilotKind::Identity, PilotKind::Hadamard] {
            let p = build_pilot(kind, 4).unwrap();
            assert_eq!(lmmse_cov_general(&p, &[1.0; 4], 0.0).unwrap().frobenius_norm(), 0.0);
        }
        assert_eq!(sigma_identity(0.7, 3, 0.0), 0.0);
        assert_eq!(kappa_hadamard(&[0.7, 0.2], 0, 0.0), 0.0);
    }

    #[test]
    fn hadamard_low_power_matches_general() {
        let betas = [0.6, 0.3, 0.1, 0.9];
        let p = build_pilot(PilotKind::Hadamard, 4).unwrap();
        let q = lmmse_cov_general(&p, &betas, 0.01).unwrap();
        for k in 0..4 {
            let kappa = kappa_hadamard(&betas, k, 0.01);
            assert!((q[(k, k)].re / kappa - 1.0).abs() < 0.01, "user {k}");
        }
    }

    #[test]
    fn identity_limit() {
        let b = 0.8;
        assert!((sigma_identity(b, 4, 1e12) - FRAC_2_PI * b).abs() < 1e-10);
        assert!((sigma_identity(0.6, 4, 10.0) / (FRAC_2_PI * 40.0 * 0.36 / 25.0) - 1.0).abs() < 1e-14);
    }

    // Above-mean users under Hadamard training can exceed the identity-pilot
    // ceiling 2/pi * beta once p_p is large; the estimate stays below beta.
    #[test]
    fn hadamard_ceiling() {
        let betas = [0.1, 0.1, 0.1, 1.0];
        let k = kappa_hadamard(&betas, 3, 1e6);
        assert!(k > FRAC_2_PI * 1.0 && k < 1.0);
    }

    #[test]
    fn equal_betas_tie() {
        let betas = [0.4; 4];
        for k in 0..4 {
            assert!((kappa_hadamard(&betas, k, 3.0) - sigma_identity(0.4, 4, 3.0)).abs() < 1e-15);
        }
        assert!(compare_pilots(&betas, 3.0).iter().all(|p| *p == PilotPreference::Tie));
        assert_eq!(compare_pilots(&[0.9], 5.0), vec![PilotPreference::Tie]);
    }

    #[test]
    fn reference_betas_preference() {
        let prefs = compare_pilots(&[0.6, 0.3, 0.1, 0.9], 10.0);
        use PilotPreference::*;
        assert_eq!(prefs, vec![Hadamard, Identity, Identity, Hadamard]);
    }

    #[test]
    fn zero_block_gives_finite_estimate() {
        let p = build_pilot(PilotKind::Identity, 4).unwrap();
        let g = estimate_from_pilots(&CMatrix::zeros(8, 4), &p, &[0.6, 0.3, 0.1, 0.9], 10.0).unwrap();
        assert!(g.as_slice().iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        assert!(estimate_from_pilots(&CMatrix::zeros(8, 3), &p, &[1.0; 4], 1.0).is_err());
    }

    #[test]
    fn identity_pipeline_mse() {
        let betas = [0.6, 0.3, 0.1, 0.9];
        let p = build_pilot(PilotKind::Identity, 4).unwrap();
        let emp = simulate_pilot_mse(&p, &betas, 10.0, 32, 2000, &mut SimRng::new(7, 0)).unwrap();
        let cf = estimation_stats(PilotKind::Identity, &betas, 10.0);
        for k in 0..4 {
            assert!((emp[k] / cf.mse[k] - 1.0).abs() < 0.03, "user {k}: {} vs {}", emp[k], cf.mse[k]);
        }
        let hi = simulate_pilot_mse(&p, &betas, 1e6, 32, 500, &mut SimRng::new(7, 1)).unwrap();
        assert!(hi.iter().zip(&emp).all(|(h, e)| h < e));
    }

    proptest! {
        #[test]
        fn variances_monotone_and_bounded(
            betas in prop::collection::vec(0.01f64..2.0, 1..8),
            lo in 0.0f64..50.0,
            step in 0.0f64..50.0,
        ) {
            for kind in [PilotKind::Identity, PilotKind::Hadamard] {
                let a = estimation_stats(kind, &betas, lo);
                let b = estimation_stats(kind, &betas, lo + step);
                for k in 0..betas.len() {
                    prop_assert!(b.est_var[k] >= a.est_var[k] * (1.0 - 1e-14));
                    let cap = match kind {
                        PilotKind::Identity => FRAC_2_PI * betas[k],
                        PilotKind::Hadamard => betas[k],
                    };
                    prop_assert!(b.est_var[k] <= cap * (1.0 + 1e-14));
                    prop_assert!((a.est_var[k] + a.err_var[k] - betas[k]).abs() < 1e-15);
                }
            }
        }

        #[test]
        fn preference_follows_mean_rule(betas in prop::collection::vec(0.01f64..2.0, 2..10), pp in 0.01f64..100.0) {
            let mean = betas.iter().sum::<f64>() / betas.len() as f64;
            for (b, p) in betas.iter().zip(compare_pilots(&betas, pp)) {
                if (b - mean).abs() > 1e-6 * mean {
                    let expect = if *b < mean { PilotPreference::Identity } else { PilotPreference::Hadamard };
                    prop_assert_eq!(p, expect);
                }
            }
        }
    }
}
