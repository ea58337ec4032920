//! Physical scenario: configuration, geometry, Rician channel generation,
//! effective channels and CSI impairments.

mod channel;
mod impair;
mod phases;

pub use channel::{draw_channel_sample, effective_channels, ChannelSample, ChannelStats, EffectiveChannels, LinkLosses};
pub use impair::{bessel_j0, delayed_sample, full_sample_delay_factor, move_iu, perturbed_sample};
pub use phases::{circular_distance, PhaseShifts};
pub(crate) use phases::wrap_phase;

use serde::{Deserialize, Serialize};

use crate::linalg::{db_to_linear, dbm_to_watts};
use crate::{Error, Result};

/// Propagation link classes with their own path-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    BsRis,
    BsIu,
    RisIu,
    BsEu,
    RisEu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossConfig {
    /// Path loss at the reference distance, in dB.
    pub c0_db: f64,
    pub d0_m: f64,
    pub alpha_bs_ris: f64,
    pub alpha_bs_iu: f64,
    pub alpha_ris_iu: f64,
    pub alpha_bs_eu: f64,
    pub alpha_ris_eu: f64,
}

impl Default for PathLossConfig {
    fn default() -> Self {
        Self {
            c0_db: -30.0,
            d0_m: 1.0,
            alpha_bs_ris: 2.2,
            alpha_bs_iu: 3.6,
            alpha_ris_iu: 2.2,
            alpha_bs_eu: 3.6,
            alpha_ris_eu: 2.2,
        }
    }
}

impl PathLossConfig {
    pub fn exponent(&self, link: Link) -> f64 {
        match link {
            Link::BsRis => self.alpha_bs_ris,
            Link::BsIu => self.alpha_bs_iu,
            Link::RisIu => self.alpha_ris_iu,
            Link::BsEu => self.alpha_bs_eu,
            Link::RisEu => self.alpha_ris_eu,
        }
    }
}

/// Node reference positions in metres. The BS array is a ULA along the x
/// axis, the RIS a UPA in the y-z plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub bs: [f64; 3],
    pub ris: [f64; 3],
    pub iu: [f64; 3],
    /// EUs are placed on a circle of this radius around the BS, in the z = 0 plane.
    pub eu_radius_m: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self { bs: [6.0, 0.0, 0.0], ris: [0.0, 2.5, 3.0], iu: [6.0, 200.0, 0.0], eu_radius_m: 5.0 }
    }
}

/// All scenario constants. Powers are given in logarithmic units and
/// converted with the accessor methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_s: usize,
    pub n_r: usize,
    pub m: usize,
    pub pt_dbm: f64,
    pub noise_iu_dbm: f64,
    pub noise_eu_dbm: f64,
    /// Minimum RF receive power per EU, in microwatts.
    pub eps_uw: f64,
    /// Log-sum-exp smoothing exponent.
    pub p_smooth: f64,
    pub rician_bs_user_db: f64,
    pub rician_ris_db: f64,
    pub pathloss: PathLossConfig,
    pub geometry: Geometry,
    /// Phase quantization bits per RIS element, 0 for continuous phases.
    pub q_bits: u32,
}

impl Default for SystemConfig {
    /// Desk-scale defaults: the published setup with a 16-element RIS and 4 EUs.
    fn default() -> Self {
        Self {
            n_s: 2,
            n_r: 16,
            m: 4,
            pt_dbm: 45.0,
            noise_iu_dbm: -80.0,
            noise_eu_dbm: -80.0,
            eps_uw: 2.0,
            p_smooth: 4.0,
            rician_bs_user_db: 0.0,
            rician_ris_db: 3.0,
            pathloss: PathLossConfig::default(),
            geometry: Geometry::default(),
            q_bits: 0,
        }
    }
}

impl SystemConfig {
    /// Full published scale: 80 RIS elements and 6 EUs.
    pub fn paper_scale() -> Self {
        Self { n_r: 80, m: 6, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_s == 0 || self.n_r == 0 || self.m == 0 {
            return Err(Error::Config("antenna, element and EU counts must be at least 1".into()));
        }
        // eps = 0 is accepted and disables the harvesting constraints.
        if !(self.eps_uw >= 0.0) || !self.eps_uw.is_finite() {
            return Err(Error::Config(format!("eps_uw must be finite and non-negative, got {}", self.eps_uw)));
        }
        if !(self.p_smooth > 0.0) || !self.p_smooth.is_finite() {
            return Err(Error::Config(format!("p_smooth must be positive, got {}", self.p_smooth)));
        }
        for (name, v) in [("pt_dbm", self.pt_dbm), ("noise_iu_dbm", self.noise_iu_dbm), ("noise_eu_dbm", self.noise_eu_dbm)] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if self.rician_bs_user_db.is_nan() || self.rician_ris_db.is_nan() {
            return Err(Error::Config("Rician factors must not be NaN".into()));
        }
        if !(self.pathloss.d0_m > 0.0) {
            return Err(Error::Config("reference distance d0_m must be positive".into()));
        }
        if !(self.geometry.eu_radius_m > 0.0) {
            return Err(Error::Config("eu_radius_m must be positive".into()));
        }
        if self.q_bits > 16 {
            return Err(Error::Config(format!("q_bits = {} is unreasonably large", self.q_bits)));
        }
        Ok(())
    }

    pub fn pt_w(&self) -> f64 {
        dbm_to_watts(self.pt_dbm)
    }

    pub fn noise_iu_w(&self) -> f64 {
        dbm_to_watts(self.noise_iu_dbm)
    }

    pub fn noise_eu_w(&self) -> f64 {
        dbm_to_watts(self.noise_eu_dbm)
    }

    pub fn eps_w(&self) -> f64 {
        self.eps_uw * 1e-6
    }

    /// Per-EU harvesting thresholds in watts.
    pub fn eps_vec(&self) -> Vec<f64> {
        vec![self.eps_w(); self.m]
    }

    pub fn rician_bs_user(&self) -> f64 {
        db_to_linear(self.rician_bs_user_db)
    }

    pub fn rician_ris(&self) -> f64 {
        db_to_linear(self.rician_ris_db)
    }

    /// Most-square factorization `rows × cols` of the RIS element count,
    /// `rows ≥ cols`.
    pub fn ris_shape(&self) -> (usize, usize) {
        upa_shape(self.n_r)
    }
}

pub fn upa_shape(n: usize) -> (usize, usize) {
    let mut cols = (n as f64).sqrt().floor() as usize;
    while cols > 1 && !n.is_multiple_of(cols) {
        cols -= 1;
    }
    let cols = cols.max(1);
    (n / cols, cols)
}

/// Large-scale gain `C0 (d / D0)^(-alpha)` of a link.
pub fn path_loss(cfg: &PathLossConfig, link: Link, distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::Domain(format!("link distance must be positive, got {distance_m}")));
    }
    Ok(db_to_linear(cfg.c0_db) * (distance_m / cfg.d0_m).powf(-cfg.exponent(link)))
}

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_distance_gain_is_c0() {
        let pl = PathLossConfig::default();
        assert!((path_loss(&pl, Link::BsRis, 1.0).unwrap() - 1e-3).abs() < 1e-18);
        assert!((path_loss(&pl, Link::BsIu, 1.0).unwrap() - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn ten_metre_bs_ris_gain() {
        let pl = PathLossConfig::default();
        let g = path_loss(&pl, Link::BsRis, 10.0).unwrap();
        // log-domain cross-check: -30 dB - 22 dB
        let via_db = 10f64.powf((-30.0 - 10.0 * 2.2) / 10.0);
        assert!((g - via_db).abs() / via_db < 1e-12);
        assert!((g - 6.309_573_444_801_93e-6).abs() < 1e-17);
    }

    #[test]
    fn non_positive_distance_rejected() {
        let pl = PathLossConfig::default();
        assert!(matches!(path_loss(&pl, Link::RisEu, 0.0), Err(Error::Domain(_))));
        assert!(path_loss(&pl, Link::RisEu, -2.0).is_err());
    }

    #[test]
    fn upa_shapes() {
        assert_eq!(upa_shape(80), (10, 8));
        assert_eq!(upa_shape(16), (4, 4));
        assert_eq!(upa_shape(7), (7, 1));
        assert_eq!(upa_shape(1), (1, 1));
    }

    #[test]
    fn validation() {
        assert!(SystemConfig::default().validate().is_ok());
        let bad = SystemConfig { m: 0, ..SystemConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SystemConfig { p_smooth: 0.0, ..SystemConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SystemConfig { eps_uw: -1.0, ..SystemConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn linear_units() {
        let cfg = SystemConfig::default();
        assert!((cfg.pt_w() - 10f64.powf(1.5)).abs() < 1e-12);
        assert!((cfg.eps_w() - 2e-6).abs() < 1e-20);
        assert!((cfg.rician_ris() - 10f64.powf(0.3)).abs() < 1e-12);
    }
}
