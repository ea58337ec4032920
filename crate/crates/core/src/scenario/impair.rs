use std::f64::consts::TAU;

use rand::Rng;

use super::channel::cn01;
use super::{ChannelSample, ChannelStats, SystemConfig};
use crate::{Error, Result};

/// Zeroth-order Bessel function of the first kind.
pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

/// Outdated CSI: every link becomes `ρ·link + (1−ρ)·mean` with
/// `ρ = J₀(2π f_d s)` and `s` the delay in seconds.
pub fn delayed_sample(sample: &ChannelSample, mean: &ChannelSample, delay_ms: f64, doppler_hz: f64) -> Result<ChannelSample> {
    if !(delay_ms >= 0.0) {
        return Err(Error::Domain(format!("CSI delay must be non-negative, got {delay_ms} ms")));
    }
    mean.check_dims(sample.n_s(), sample.n_r(), sample.m())?;
    let rho = bessel_j0(TAU * doppler_hz * delay_ms * 1e-3);
    if rho == 1.0 {
        return Ok(sample.clone());
    }
    let mut out = sample.clone();
    out.for_each_link_mut(|id, coeffs| {
        for (c, m) in coeffs.iter_mut().zip(mean.link(id)) {
            *c = rho * *c + (1.0 - rho) * m;
        }
    });
    Ok(out)
}

/// Statistical CSI error: additive `CN(0, b·L)` noise on every entry of every link.
pub fn perturbed_sample<R: Rng + ?Sized>(sample: &ChannelSample, stats: &ChannelStats, b_linear: f64, rng: &mut R) -> Result<ChannelSample> {
    if !(b_linear >= 0.0) {
        return Err(Error::Domain(format!("error variance factor must be non-negative, got {b_linear}")));
    }
    if b_linear == 0.0 {
        return Ok(sample.clone());
    }
    let mut out = sample.clone();
    out.for_each_link_mut(|id, coeffs| {
        let delta = (b_linear * stats.losses.of(id)).sqrt();
        for c in coeffs.iter_mut() {
            *c += delta * cn01(rng);
        }
    });
    Ok(out)
}

/// Statistics after the IU moved `x_mo_m` metres along +x from its
/// configured position. EU positions are kept.
pub fn move_iu(stats: &ChannelStats, cfg: &SystemConfig, x_mo_m: f64) -> Result<ChannelStats> {
    if !(x_mo_m >= 0.0) || !x_mo_m.is_finite() {
        return Err(Error::Domain(format!("movement distance must be non-negative, got {x_mo_m}")));
    }
    if x_mo_m == 0.0 {
        return Ok(stats.clone());
    }
    let base = cfg.geometry.iu;
    let iu = [base[0] + x_mo_m, base[1], base[2]];
    ChannelStats::from_positions(cfg, iu, stats.eu_pos.clone())
}

/// Delay multiplier for schemes that need every link (not only the
/// effective channels) at each slot: ratio of the full CSI dimension to
/// the effective CSI dimension.
pub fn full_sample_delay_factor(cfg: &SystemConfig) -> f64 {
    let (n_s, n_r, m) = (cfg.n_s as f64, cfg.n_r as f64, cfg.m as f64);
    (n_s * (m + 1.0) + n_r * n_s + n_r * (m + 1.0)) / (n_s * (m + 1.0))
}
