//! Scenario configuration, large-scale fading and instantaneous channels.

mod config;
mod geometry;

pub use config::{parse_power, PilotKind, SystemConfig};
pub use geometry::{
    large_scale_from_geometry, path_loss, DEFAULT_CELL_RADIUS_M, DEFAULT_GUARD_M,
    DEFAULT_PATH_LOSS_EXPONENT, DEFAULT_SHADOW_SIGMA_DB, REFERENCE_BETA_RD, REFERENCE_BETA_SR,
};

use crate::error::{Error, Result};
use crate::estimation::estimation_stats;
use crate::numerics::{fill_complex_gaussian, CMatrix, SimRng};

/// One channel realization for both hops together with its LMMSE
/// estimate/error split. `g = ghat + e` column by column.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    pub g_sr: CMatrix,
    pub g_rd: CMatrix,
    pub ghat_sr: CMatrix,
    pub ghat_rd: CMatrix,
    pub e_sr: CMatrix,
    pub e_rd: CMatrix,
    /// Per-entry variance of `ghat_sr` columns.
    pub est_var_sr: Vec<f64>,
    pub est_var_rd: Vec<f64>,
}

impl ChannelSet {
    /// Draws `ghat_k ~ CN(0, est_var_k I)` and `e_k ~ CN(0, (beta_k - est_var_k) I)`
    /// independently for every user of both hops.
    pub fn from_statistics(
        m: usize,
        beta_sr: &[f64],
        est_var_sr: &[f64],
        beta_rd: &[f64],
        est_var_rd: &[f64],
        rng: &mut SimRng,
    ) -> Result<Self> {
        let (ghat_sr, e_sr) = draw_hop(m, beta_sr, est_var_sr, rng)?;
        let (ghat_rd, e_rd) = draw_hop(m, beta_rd, est_var_rd, rng)?;
        Ok(ChannelSet {
            g_sr: ghat_sr.add(&e_sr)?,
            g_rd: ghat_rd.add(&e_rd)?,
            ghat_sr,
            ghat_rd,
            e_sr,
            e_rd,
            est_var_sr: est_var_sr.to_vec(),
            est_var_rd: est_var_rd.to_vec(),
        })
    }

    pub fn antennas(&self) -> usize {
        self.g_sr.rows()
    }

    pub fn users(&self) -> usize {
        self.g_sr.cols()
    }
}

fn draw_hop(m: usize, beta: &[f64], est_var: &[f64], rng: &mut SimRng) -> Result<(CMatrix, CMatrix)> {
    if beta.len() != est_var.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} betas, {} estimate variances",
            beta.len(),
            est_var.len()
        )));
    }
    let k = beta.len();
    let mut ghat = Vec::with_capacity(m * k);
    let mut err = Vec::with_capacity(m * k);
    for (&b, &v) in beta.iter().zip(est_var) {
        if !(v >= 0.0 && v <= b) {
            return Err(Error::Domain(format!("estimate variance {v} outside [0, {b}]")));
        }
        fill_complex_gaussian(rng, &mut ghat, m, v);
        fill_complex_gaussian(rng, &mut err, m, b - v);
    }
    Ok((CMatrix::from_col_major(m, k, ghat)?, CMatrix::from_col_major(m, k, err)?))
}

/// Draws a channel realization whose estimate statistics follow the
/// closed-form LMMSE variances of the configured pilot family.
pub fn generate_channels(config: &SystemConfig, rng: &mut SimRng) -> Result<ChannelSet> {
    config.validate()?;
    let sr = estimation_stats(config.pilot_kind, &config.beta_sr, config.p_p);
    let rd = estimation_stats(config.pilot_kind, &config.beta_rd, config.p_p);
    ChannelSet::from_statistics(
        config.m,
        &config.beta_sr,
        &sr.est_var,
        &config.beta_rd,
        &rd.est_var,
        rng,
    )
}
