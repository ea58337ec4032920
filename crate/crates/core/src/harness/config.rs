//! Flat TOML experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::InstantaneousConfig;
use crate::heuristic::DEFAULT_SAMPLES;
use crate::scenario::{Geometry, PathLossConfig, SystemConfig};
use crate::shortterm::CccpBcdConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    SaSsca,
    LowComplexity,
    ChannelPowerMax,
    Random,
    Instantaneous,
}

impl SchemeId {
    pub const ALL: [SchemeId; 5] =
        [SchemeId::Instantaneous, SchemeId::SaSsca, SchemeId::LowComplexity, SchemeId::ChannelPowerMax, SchemeId::Random];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::SaSsca => "sa-ssca",
            SchemeId::LowComplexity => "low-complexity",
            SchemeId::ChannelPowerMax => "channel-power-max",
            SchemeId::Random => "random",
            SchemeId::Instantaneous => "instantaneous",
        }
    }
}

impl std::fmt::Display for SchemeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

/// Initial long-term phases of each super-frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaInit {
    /// All entries π.
    Pi,
    /// I.i.d. uniform.
    Random,
    /// Final phases of the previous super-frame (first one starts at π).
    Warm,
}

/// Everything an experiment needs besides the master seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub schemes: Vec<SchemeId>,
    pub t_f: usize,
    pub t_s: usize,
    pub t_c: usize,
    /// Leading frames whose slots are not recorded.
    pub warmup_frames: usize,
    /// Independent super-frames averaged per record.
    pub monte_carlo: usize,
    /// Keep the EU positions of the first realization for all of them.
    pub frozen_scenario: bool,
    pub tau: f64,
    pub rho_exponent: f64,
    pub gamma_exponent: f64,
    pub theta_init: ThetaInit,
    pub short_term: CccpBcdConfig,
    pub instantaneous: InstantaneousConfig,
    pub heuristic_samples: usize,
    pub csi_delay_ms: f64,
    pub doppler_hz: f64,
    /// Error-variance factor of the long-term channel samples (linear, 0 = exact).
    pub stat_csi_error_b: f64,
    /// IU displacement along x relative to the reference position, in metres.
    pub x_mo_m: f64,
    /// With a displaced IU, design the phases from the statistics at the reference position.
    pub outdated_stats: bool,
    /// Feed quantized instead of continuous phases into the surrogate update.
    pub project_feedback: bool,
    /// Write measured wall time; when false the column is 0 so reruns are byte-identical.
    pub record_wall_time: bool,
    pub sweep_param: Option<String>,
    pub sweep_values: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        FileConfig::default().into_experiment().expect("defaults are valid")
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.short_term.validate()?;
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.t_f == 0 || self.t_s == 0 || self.t_c == 0 {
            return bad("t_f, t_s and t_c must be at least 1");
        }
        if self.warmup_frames >= self.t_f {
            return bad("warmup_frames must be smaller than t_f");
        }
        if self.monte_carlo == 0 {
            return bad("monte_carlo must be at least 1");
        }
        if self.schemes.is_empty() {
            return bad("no schemes selected");
        }
        if !(self.tau > 0.0) {
            return bad("tau must be positive");
        }
        for e in [self.rho_exponent, self.gamma_exponent] {
            if !(e > 0.0 && e < 1.0) {
                return bad("schedule exponents must lie in (0, 1)");
            }
        }
        if self.heuristic_samples == 0 {
            return bad("heuristic_samples must be at least 1");
        }
        if !(self.csi_delay_ms >= 0.0) || !(self.doppler_hz >= 0.0) || !(self.stat_csi_error_b >= 0.0) || !self.x_mo_m.is_finite() {
            return bad("impairment parameters must be finite and non-negative");
        }
        if self.sweep_param.is_some() && self.sweep_values.is_empty() {
            return bad("sweep values must be nonempty");
        }
        Ok(())
    }
}

/// On-disk form: one flat table, every key optional, unknown keys rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub n_s: usize,
    pub n_r: usize,
    pub m: usize,
    pub pt_dbm: f64,
    pub noise_iu_dbm: f64,
    pub noise_eu_dbm: f64,
    pub eps_uw: f64,
    pub p_smooth: f64,
    pub rician_bs_user_db: f64,
    pub rician_ris_db: f64,
    pub q_bits: u32,
    pub c0_db: f64,
    pub d0_m: f64,
    pub alpha_bs_ris: f64,
    pub alpha_bs_iu: f64,
    pub alpha_ris_iu: f64,
    pub alpha_bs_eu: f64,
    pub alpha_ris_eu: f64,
    pub eu_radius_m: f64,
    pub schemes: Vec<SchemeId>,
    pub t_f: usize,
    pub t_s: usize,
    pub t_c: usize,
    pub warmup_frames: usize,
    pub monte_carlo: usize,
    pub frozen_scenario: bool,
    pub tau: f64,
    pub rho_exponent: f64,
    pub gamma_exponent: f64,
    pub theta_init: ThetaInit,
    pub max_outer_iters: usize,
    pub obj_tol: f64,
    pub energy_start_margin: f64,
    pub solver_tol: f64,
    pub inst_rounds: usize,
    pub inst_ascent_steps: usize,
    pub heuristic_samples: usize,
    pub csi_delay_ms: f64,
    pub doppler_hz: f64,
    pub stat_csi_error_b: f64,
    pub x_mo_m: f64,
    pub outdated_stats: bool,
    pub project_feedback: bool,
    pub record_wall_time: bool,
    /// Empty for no sweep.
    pub sweep_param: String,
    pub sweep_values: Vec<f64>,
}

impl Default for FileConfig {
    fn default() -> Self {
        let s = SystemConfig::default();
        let pl = PathLossConfig::default();
        let st = CccpBcdConfig::default();
        let inst = InstantaneousConfig::default();
        Self {
            n_s: s.n_s,
            n_r: s.n_r,
            m: s.m,
            pt_dbm: s.pt_dbm,
            noise_iu_dbm: s.noise_iu_dbm,
            noise_eu_dbm: s.noise_eu_dbm,
            eps_uw: s.eps_uw,
            p_smooth: s.p_smooth,
            rician_bs_user_db: s.rician_bs_user_db,
            rician_ris_db: s.rician_ris_db,
            q_bits: s.q_bits,
            c0_db: pl.c0_db,
            d0_m: pl.d0_m,
            alpha_bs_ris: pl.alpha_bs_ris,
            alpha_bs_iu: pl.alpha_bs_iu,
            alpha_ris_iu: pl.alpha_ris_iu,
            alpha_bs_eu: pl.alpha_bs_eu,
            alpha_ris_eu: pl.alpha_ris_eu,
            eu_radius_m: s.geometry.eu_radius_m,
            schemes: SchemeId::ALL.to_vec(),
            t_f: 300,
            t_s: 4,
            t_c: 4,
            warmup_frames: 0,
            monte_carlo: 20,
            frozen_scenario: false,
            tau: 1.0,
            rho_exponent: 0.6,
            gamma_exponent: 0.9,
            theta_init: ThetaInit::Pi,
            max_outer_iters: st.max_outer_iters,
            obj_tol: st.obj_tol,
            energy_start_margin: st.energy_start_margin,
            solver_tol: st.solver_tol,
            inst_rounds: inst.rounds,
            inst_ascent_steps: inst.ascent_steps,
            heuristic_samples: DEFAULT_SAMPLES,
            csi_delay_ms: 0.0,
            doppler_hz: 10.0,
            stat_csi_error_b: 0.0,
            x_mo_m: 0.0,
            outdated_stats: true,
            project_feedback: false,
            record_wall_time: false,
            sweep_param: String::new(),
            sweep_values: Vec::new(),
        }
    }
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Copy with one numeric or boolean key replaced; the value is converted
    /// to the key's type.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut table = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        let slot = table.get_mut(name).ok_or_else(|| Error::Config(format!("unknown parameter `{name}`")))?;
        *slot = match slot {
            toml::Value::Float(_) => toml::Value::Float(value),
            toml::Value::Integer(_) => {
                if value.fract() != 0.0 || value < 0.0 || !value.is_finite() {
                    return Err(Error::Config(format!("`{name}` takes a non-negative integer, got {value}")));
                }
                toml::Value::Integer(value as i64)
            }
            toml::Value::Boolean(_) => toml::Value::Boolean(value != 0.0),
            _ => return Err(Error::Config(format!("`{name}` is not a numeric parameter"))),
        };
        table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn into_experiment(self) -> Result<ExperimentConfig> {
        let system = SystemConfig {
            n_s: self.n_s,
            n_r: self.n_r,
            m: self.m,
            pt_dbm: self.pt_dbm,
            noise_iu_dbm: self.noise_iu_dbm,
            noise_eu_dbm: self.noise_eu_dbm,
            eps_uw: self.eps_uw,
            p_smooth: self.p_smooth,
            rician_bs_user_db: self.rician_bs_user_db,
            rician_ris_db: self.rician_ris_db,
            pathloss: PathLossConfig {
                c0_db: self.c0_db,
                d0_m: self.d0_m,
                alpha_bs_ris: self.alpha_bs_ris,
                alpha_bs_iu: self.alpha_bs_iu,
                alpha_ris_iu: self.alpha_ris_iu,
                alpha_bs_eu: self.alpha_bs_eu,
                alpha_ris_eu: self.alpha_ris_eu,
            },
            geometry: Geometry { eu_radius_m: self.eu_radius_m, ..Geometry::default() },
            q_bits: self.q_bits,
        };
        let short_term = CccpBcdConfig {
            max_outer_iters: self.max_outer_iters,
            obj_tol: self.obj_tol,
            solver_tol: self.solver_tol,
            energy_start_margin: self.energy_start_margin,
        };
        let ecfg = ExperimentConfig {
            system,
            schemes: self.schemes,
            t_f: self.t_f,
            t_s: self.t_s,
            t_c: self.t_c,
            warmup_frames: self.warmup_frames,
            monte_carlo: self.monte_carlo,
            frozen_scenario: self.frozen_scenario,
            tau: self.tau,
            rho_exponent: self.rho_exponent,
            gamma_exponent: self.gamma_exponent,
            theta_init: self.theta_init,
            short_term,
            instantaneous: InstantaneousConfig {
                rounds: self.inst_rounds,
                ascent_steps: self.inst_ascent_steps,
                short_term,
                ..InstantaneousConfig::default()
            },
            heuristic_samples: self.heuristic_samples,
            csi_delay_ms: self.csi_delay_ms,
            doppler_hz: self.doppler_hz,
            stat_csi_error_b: self.stat_csi_error_b,
            x_mo_m: self.x_mo_m,
            outdated_stats: self.outdated_stats,
            project_feedback: self.project_feedback,
            record_wall_time: self.record_wall_time,
            sweep_param: (!self.sweep_param.is_empty()).then_some(self.sweep_param),
            sweep_values: self.sweep_values,
        };
        ecfg.validate()?;
        Ok(ecfg)
    }
}
