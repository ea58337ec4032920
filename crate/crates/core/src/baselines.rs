//! Benchmark schemes: random phases, channel-power maximization and the
//! perfect-instantaneous-CSI alternating design.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::cvxcore::is_feasible;
use crate::heuristic::{build_a_bar_from_samples, draw_samples, minimize_unimodular};
use crate::linalg::norm_sqr;
use crate::longterm::{grad_theta, project_discrete};
use crate::metrics::{harvested_power, smooth_secrecy, BeamformingSolution};
use crate::scenario::{effective_channels, ChannelSample, ChannelStats, PhaseShifts, SystemConfig};
use crate::shortterm::{solve_from_scratch, solve_shortterm, CccpBcdConfig};
use crate::{Error, Result};

/// I.i.d. phases uniform on `(0, 2π]`.
pub fn random_phases<R: Rng + ?Sized>(n_r: usize, rng: &mut R) -> PhaseShifts {
    PhaseShifts::new((0..n_r).map(|_| TAU * (1.0 - rng.gen::<f64>())).collect())
}

/// Phases maximizing the average BS-IU effective channel power over the samples.
pub fn channel_power_max_from_samples(samples: &[ChannelSample]) -> Result<PhaseShifts> {
    let mat = build_a_bar_from_samples(samples, 0.0)?;
    let init = PhaseShifts::constant(mat.n_r(), PI);
    Ok(minimize_unimodular(&mat, &init, 500, 1e-10))
}

pub fn channel_power_max_phases<R: Rng + ?Sized>(stats: &ChannelStats, n_samples: usize, rng: &mut R) -> Result<PhaseShifts> {
    if n_samples == 0 {
        return Err(Error::Domain("channel-power maximization needs at least one sample".into()));
    }
    channel_power_max_from_samples(&draw_samples(stats, n_samples, rng))
}

/// Settings of the instantaneous-CSI benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantaneousConfig {
    /// Alternation rounds after the initial beamforming solve.
    pub rounds: usize,
    /// Gradient-ascent steps on the phases per round.
    pub ascent_steps: usize,
    /// Largest per-element phase change of a single step, in radians.
    pub max_step_rad: f64,
    pub armijo: f64,
    pub short_term: CccpBcdConfig,
}

impl Default for InstantaneousConfig {
    fn default() -> Self {
        Self { rounds: 5, ascent_steps: 20, max_step_rad: 0.5, armijo: 1e-4, short_term: CccpBcdConfig::default() }
    }
}

#[derive(Debug, Clone)]
pub struct InstantaneousOutcome {
    pub phases: PhaseShifts,
    pub solution: BeamformingSolution,
    /// Smoothed secrecy after the initial solve and after every round.
    pub trace: Vec<f64>,
}

fn eh_ok(sample: &ChannelSample, phases: &PhaseShifts, sol: &BeamformingSolution, cfg: &SystemConfig) -> Result<bool> {
    let eff = effective_channels(sample, phases)?;
    Ok(cfg.eps_vec().iter().enumerate().all(|(m, &e)| harvested_power(&eff, sol, m) >= e))
}

/// Backtracking gradient ascent on `S̄(θ)` with the beams fixed, never
/// leaving the harvesting-feasible set.
fn ascend_phases(
    sample: &ChannelSample,
    phases: &PhaseShifts,
    sol: &BeamformingSolution,
    cfg: &SystemConfig,
    icfg: &InstantaneousConfig,
) -> Result<PhaseShifts> {
    let mut theta = phases.clone();
    let mut value = smooth_secrecy(&effective_channels(sample, &theta)?, sol, cfg);
    for _ in 0..icfg.ascent_steps {
        let g = grad_theta(sample, &theta, sol, cfg)?;
        let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(gmax > 0.0) {
            break;
        }
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let mut alpha = icfg.max_step_rad / gmax;
        let mut moved = false;
        for _ in 0..40 {
            let cand = PhaseShifts::new(theta.theta().iter().zip(&g).map(|(t, d)| t + alpha * d).collect());
            let v = smooth_secrecy(&effective_channels(sample, &cand)?, sol, cfg);
            if v >= value + icfg.armijo * alpha * g2 && eh_ok(sample, &cand, sol, cfg)? {
                theta = cand;
                value = v;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(theta)
}

fn beams_at(sample: &ChannelSample, phases: &PhaseShifts, warm: Option<&BeamformingSolution>, cfg: &SystemConfig, ccfg: &CccpBcdConfig) -> Result<BeamformingSolution> {
    let eff = effective_channels(sample, phases)?;
    match warm {
        Some(w) if is_feasible(&eff, w, cfg, 1e-9) => Ok(solve_shortterm(&eff, cfg, ccfg, w)?.solution),
        _ => Ok(solve_from_scratch(&eff, cfg, ccfg)?.solution),
    }
}

/// Initial phases: the low-complexity design on the single known sample.
pub fn instantaneous_initial_phases(sample: &ChannelSample) -> Result<PhaseShifts> {
    let dead = sample.g1.iter().all(|g| norm_sqr(g) == 0.0);
    if dead {
        return channel_power_max_from_samples(std::slice::from_ref(sample));
    }
    crate::heuristic::low_complexity_phases(std::slice::from_ref(sample))
}

/// Alternates Algorithm 1 at fixed phases with gradient ascent on the phases
/// at fixed beams. `rounds = 0` is a plain short-term solve at the initial phases.
pub fn instantaneous_csi_scheme(sample: &ChannelSample, cfg: &SystemConfig, icfg: &InstantaneousConfig) -> Result<InstantaneousOutcome> {
    let theta0 = instantaneous_initial_phases(sample)?;
    instantaneous_csi_from(sample, &theta0, cfg, icfg)
}

pub fn instantaneous_csi_from(sample: &ChannelSample, theta0: &PhaseShifts, cfg: &SystemConfig, icfg: &InstantaneousConfig) -> Result<InstantaneousOutcome> {
    let mut theta = theta0.clone();
    let mut sol = beams_at(sample, &theta, None, cfg, &icfg.short_term)?;
    let mut trace = vec![smooth_secrecy(&effective_channels(sample, &theta)?, &sol, cfg)];
    for _ in 0..icfg.rounds {
        theta = ascend_phases(sample, &theta, &sol, cfg, icfg)?;
        sol = beams_at(sample, &theta, Some(&sol), cfg, &icfg.short_term)?;
        trace.push(smooth_secrecy(&effective_channels(sample, &theta)?, &sol, cfg));
    }
    if cfg.q_bits > 0 {
        theta = project_discrete(&theta, cfg.q_bits);
        sol = beams_at(sample, &theta, Some(&sol), cfg, &icfg.short_term)?;
    }
    Ok(InstantaneousOutcome { phases: theta, solution: sol, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heuristic::build_a_bar;
    use num_complex::Complex64;
    use crate::scenario::circular_distance;
    use nalgebra::SymmetricEigen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_phases_are_uniform_and_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let th = random_phases(100_000, &mut rng);
        assert!(th.theta().iter().all(|&t| t > 0.0 && t <= TAU));
        let mean = th.theta().iter().sum::<f64>() / th.len() as f64;
        assert!((mean - PI).abs() < 0.01 * PI);
        let a = random_phases(8, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_phases(8, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn channel_power_max_on_los_aligns_phases() {
        let cfg = SystemConfig { n_r: 6, m: 2, n_s: 1, rician_bs_user_db: f64::INFINITY, rician_ris_db: f64::INFINITY, ..SystemConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let stats = ChannelStats::new(&cfg, &mut rng).unwrap();
        let th = channel_power_max_phases(&stats, 3, &mut rng).unwrap();
        // single antenna, pure LoS: every cascaded term φₙ f₁ₙ h₂ₙ aligns with h₁
        let s = stats.mean_sample();
        for n in 0..6 {
            let got = (Complex64::from_polar(1.0, th.theta()[n]) * s.f1[(0, n)] * s.h2[n]).arg();
            assert!(circular_distance(got, s.h1[0].arg()) < 1e-6);
        }
    }

    #[test]
    fn channel_power_max_beats_all_pi_and_is_nsd() {
        let cfg = SystemConfig { n_r: 8, m: 2, ..SystemConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let stats = ChannelStats::new(&cfg, &mut rng).unwrap();
        let mat = build_a_bar(&stats, 0.0, 50, &mut rng.clone()).unwrap();
        let ev = SymmetricEigen::new(mat.a_bar.clone()).eigenvalues;
        assert!(ev.max() <= 1e-12 * ev.amax());
        let th = channel_power_max_phases(&stats, 50, &mut rng).unwrap();
        assert!(mat.objective(&th) <= mat.objective(&PhaseShifts::constant(8, PI)) + 1e-12);
    }

    fn desk() -> (SystemConfig, ChannelSample) {
        let cfg = SystemConfig { n_r: 8, m: 2, ..SystemConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let stats = ChannelStats::new(&cfg, &mut rng).unwrap();
        let s = crate::scenario::draw_channel_sample(&stats, &mut rng);
        (cfg, s)
    }

    #[test]
    fn zero_rounds_is_a_plain_solve() {
        let (cfg, s) = desk();
        let icfg = InstantaneousConfig { rounds: 0, ..Default::default() };
        let out = instantaneous_csi_scheme(&s, &cfg, &icfg).unwrap();
        let th0 = instantaneous_initial_phases(&s).unwrap();
        assert_eq!(out.phases, th0);
        let eff = effective_channels(&s, &th0).unwrap();
        let plain = solve_from_scratch(&eff, &cfg, &icfg.short_term).unwrap();
        assert!((smooth_secrecy(&eff, &plain.solution, &cfg) - out.trace[0]).abs() < 1e-12);
    }

    #[test]
    fn rounds_do_not_decrease_the_objective() {
        let (cfg, s) = desk();
        let icfg = InstantaneousConfig { rounds: 3, ..Default::default() };
        let out = instantaneous_csi_scheme(&s, &cfg, &icfg).unwrap();
        for w in out.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-6, "{:?}", out.trace);
        }
        let eff = effective_channels(&s, &out.phases).unwrap();
        assert!(is_feasible(&eff, &out.solution, &cfg, 1e-6));
    }

    #[test]
    fn discrete_output_lies_on_the_grid() {
        let (mut cfg, s) = desk();
        cfg.q_bits = 2;
        let icfg = InstantaneousConfig { rounds: 1, ..Default::default() };
        let out = instantaneous_csi_scheme(&s, &cfg, &icfg).unwrap();
        for &t in out.phases.theta() {
            let k = t / (PI / 2.0);
            assert!((k - k.round()).abs() < 1e-9);
        }
    }
}
