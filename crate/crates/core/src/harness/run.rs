//! The two-timescale frame loop and Monte Carlo averaging.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, SchemeId, ThetaInit};
use super::seed::{rng_for, stream};
use crate::baselines::{channel_power_max_from_samples, instantaneous_csi_scheme, random_phases};
use crate::heuristic::low_complexity_phases;
use crate::longterm::{grad_theta, project_discrete, ssca_step, update_surrogate_with, SurrogateState};
use crate::metrics::{smooth_secrecy, worst_case_secrecy};
use crate::scenario::{
    delayed_sample, draw_channel_sample, effective_channels, full_sample_delay_factor, move_iu, perturbed_sample, ChannelSample,
    ChannelStats, PhaseShifts,
};
use crate::shortterm::solve_from_scratch;
use crate::{Error, Result};

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub scheme: String,
    pub param: String,
    pub value: Option<f64>,
    pub rate_bps_hz: f64,
    pub stderr: f64,
    pub n_slots: usize,
    pub n_dropped: usize,
    pub seed: u64,
    pub wall_s: f64,
}

/// Rate of one evaluation slot; `None` when the slot was infeasible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotResult {
    pub realization: usize,
    pub frame: usize,
    pub slot: usize,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperFrameOutcome {
    pub slots: Vec<SlotResult>,
    /// Long-term phases in force at the end of the super-frame.
    pub final_theta: Option<PhaseShifts>,
}

/// All slots of one scheme over the Monte Carlo realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRun {
    pub scheme: SchemeId,
    pub slots: Vec<SlotResult>,
    pub seed: u64,
    pub wall_s: f64,
}

/// Mean and standard error of the feasible slot rates.
pub fn summarize(rates: impl IntoIterator<Item = f64>) -> (f64, f64, usize) {
    let v: Vec<f64> = rates.into_iter().collect();
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let se = if n > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    (mean, se, n)
}

impl SchemeRun {
    pub fn rates(&self) -> impl Iterator<Item = f64> + '_ {
        self.slots.iter().filter_map(|s| s.rate)
    }

    pub fn n_dropped(&self) -> usize {
        self.slots.iter().filter(|s| s.rate.is_none()).count()
    }

    /// Summary row; rate and standard error are NaN when every slot was infeasible.
    pub fn record(&self, param: &str, value: Option<f64>) -> RunRecord {
        let (rate, se, n) = summarize(self.rates());
        RunRecord {
            scheme: self.scheme.name().to_string(),
            param: param.to_string(),
            value,
            rate_bps_hz: rate,
            stderr: se,
            n_slots: n,
            n_dropped: self.n_dropped(),
            seed: self.seed,
            wall_s: self.wall_s,
        }
    }
}

/// Statistics of one realization: `truth` generates the slot channels,
/// `design` the long-term samples.
struct Scenario {
    truth: ChannelStats,
    design: ChannelStats,
    truth_mean: ChannelSample,
}

fn scenario(ecfg: &ExperimentConfig, seed: u64, realization: usize) -> Result<Scenario> {
    let r = if ecfg.frozen_scenario { 0 } else { realization };
    let reference = ChannelStats::new(&ecfg.system, &mut rng_for(seed, &[stream::SCENARIO, r as u64]))?;
    let truth = if ecfg.x_mo_m != 0.0 { move_iu(&reference, &ecfg.system, ecfg.x_mo_m)? } else { reference.clone() };
    let design = if ecfg.outdated_stats { reference } else { truth.clone() };
    let truth_mean = truth.mean_sample();
    Ok(Scenario { truth, design, truth_mean })
}

fn design_samples<R: Rng>(ecfg: &ExperimentConfig, sc: &Scenario, n: usize, rng: &mut R) -> Result<Vec<ChannelSample>> {
    (0..n)
        .map(|_| {
            let s = draw_channel_sample(&sc.design, rng);
            if ecfg.stat_csi_error_b > 0.0 {
                perturbed_sample(&s, &sc.design, ecfg.stat_csi_error_b, rng)
            } else {
                Ok(s)
            }
        })
        .collect()
}

fn droppable(e: &Error) -> bool {
    matches!(e, Error::Infeasible(_) | Error::Solver(_))
}

/// Per-slot policy of a scheme.
enum Policy<'a> {
    Fixed(&'a PhaseShifts),
    RandomPerSlot,
    Instantaneous,
}

fn run_slot(ecfg: &ExperimentConfig, sc: &Scenario, policy: &Policy, seed: u64, r: usize, f: usize, s: usize) -> Result<Option<f64>> {
    let cfg = &ecfg.system;
    let truth = draw_channel_sample(&sc.truth, &mut rng_for(seed, &[stream::SLOT, r as u64, f as u64, s as u64]));
    let estimate = |factor: f64| -> Result<ChannelSample> {
        if ecfg.csi_delay_ms > 0.0 {
            delayed_sample(&truth, &sc.truth_mean, ecfg.csi_delay_ms * factor, ecfg.doppler_hz)
        } else {
            Ok(truth.clone())
        }
    };
    let outcome = match policy {
        Policy::Instantaneous => {
            let est = estimate(full_sample_delay_factor(cfg))?;
            instantaneous_csi_scheme(&est, cfg, &ecfg.instantaneous).map(|o| (o.phases, o.solution))
        }
        _ => {
            let theta = match policy {
                Policy::Fixed(t) => (*t).clone(),
                _ => {
                    let t = random_phases(cfg.n_r, &mut rng_for(seed, &[stream::RANDOM_PHASES, r as u64, f as u64, s as u64]));
                    project_discrete(&t, cfg.q_bits)
                }
            };
            let eff = effective_channels(&estimate(1.0)?, &theta)?;
            solve_from_scratch(&eff, cfg, &ecfg.short_term).map(|o| (theta, o.solution))
        }
    };
    match outcome {
        Ok((theta, sol)) => Ok(Some(worst_case_secrecy(&effective_channels(&truth, &theta)?, &sol, cfg))),
        Err(e) if droppable(&e) => {
            log::debug!("dropped slot r={r} f={f} s={s}: {e}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn run_frame_slots(ecfg: &ExperimentConfig, sc: &Scenario, policy: &Policy, seed: u64, r: usize, f: usize) -> Result<Vec<SlotResult>> {
    (0..ecfg.t_s)
        .into_par_iter()
        .map(|s| Ok(SlotResult { realization: r, frame: f, slot: s, rate: run_slot(ecfg, sc, policy, seed, r, f, s)? }))
        .collect()
}

/// Surrogate refresh and SSCA step from `T_c` fresh design samples.
fn ssca_update(ecfg: &ExperimentConfig, sc: &Scenario, state: &SurrogateState, seed: u64, r: usize, f: usize) -> Result<SurrogateState> {
    let cfg = &ecfg.system;
    let samples = design_samples(ecfg, sc, ecfg.t_c, &mut rng_for(seed, &[stream::SSCA_SAMPLES, r as u64, f as u64]))?;
    let theta = if ecfg.project_feedback { project_discrete(&state.theta, cfg.q_bits) } else { state.theta.clone() };
    let evals: Vec<Option<(f64, Vec<f64>)>> = samples
        .par_iter()
        .map(|s| {
            let eff = effective_channels(s, &theta)?;
            match solve_from_scratch(&eff, cfg, &ecfg.short_term) {
                Ok(out) => Ok(Some((smooth_secrecy(&eff, &out.solution, cfg), grad_theta(s, &theta, &out.solution, cfg)?))),
                Err(e) if droppable(&e) => {
                    log::debug!("skipped design sample in frame {f}: {e}");
                    Ok(None)
                }
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let (values, grads): (Vec<f64>, Vec<Vec<f64>>) = evals.into_iter().flatten().unzip();
    if values.is_empty() {
        // every sample infeasible: keep the estimates, still advance the schedule
        return Ok(SurrogateState { t: state.t + 1, ..state.clone() });
    }
    Ok(ssca_step(&update_surrogate_with(state, &values, &grads)?))
}

fn initial_theta(ecfg: &ExperimentConfig, seed: u64, r: usize, warm: Option<&PhaseShifts>) -> PhaseShifts {
    let n_r = ecfg.system.n_r;
    match ecfg.theta_init {
        ThetaInit::Pi => PhaseShifts::constant(n_r, std::f64::consts::PI),
        ThetaInit::Random => random_phases(n_r, &mut rng_for(seed, &[stream::THETA_INIT, r as u64])),
        ThetaInit::Warm => warm.cloned().unwrap_or_else(|| PhaseShifts::constant(n_r, std::f64::consts::PI)),
    }
}

/// Runs one super-frame of `scheme` for realization `r`.
pub fn run_super_frame(
    ecfg: &ExperimentConfig,
    scheme: SchemeId,
    seed: u64,
    realization: usize,
    warm_theta: Option<&PhaseShifts>,
) -> Result<SuperFrameOutcome> {
    ecfg.validate()?;
    let r = realization;
    let cfg = &ecfg.system;
    let sc = scenario(ecfg, seed, r)?;
    let recorded = ecfg.warmup_frames..ecfg.t_f;
    let mut slots = Vec::with_capacity(recorded.len() * ecfg.t_s);

    match scheme {
        SchemeId::SaSsca => {
            let theta0 = initial_theta(ecfg, seed, r, warm_theta);
            let mut state = SurrogateState::new(theta0, ecfg.tau, ecfg.rho_exponent, ecfg.gamma_exponent)?;
            for f in 0..ecfg.t_f {
                if recorded.contains(&f) {
                    let deployed = project_discrete(&state.theta, cfg.q_bits);
                    slots.extend(run_frame_slots(ecfg, &sc, &Policy::Fixed(&deployed), seed, r, f)?);
                }
                state = ssca_update(ecfg, &sc, &state, seed, r, f)?;
            }
            Ok(SuperFrameOutcome { slots, final_theta: Some(state.theta) })
        }
        SchemeId::LowComplexity | SchemeId::ChannelPowerMax => {
            let samples =
                design_samples(ecfg, &sc, ecfg.heuristic_samples, &mut rng_for(seed, &[stream::HEURISTIC_SAMPLES, r as u64]))?;
            let theta = if scheme == SchemeId::LowComplexity {
                low_complexity_phases(&samples)?
            } else {
                channel_power_max_from_samples(&samples)?
            };
            let deployed = project_discrete(&theta, cfg.q_bits);
            for f in recorded {
                slots.extend(run_frame_slots(ecfg, &sc, &Policy::Fixed(&deployed), seed, r, f)?);
            }
            Ok(SuperFrameOutcome { slots, final_theta: Some(theta) })
        }
        SchemeId::Random | SchemeId::Instantaneous => {
            let policy = if scheme == SchemeId::Random { Policy::RandomPerSlot } else { Policy::Instantaneous };
            for f in recorded {
                slots.extend(run_frame_slots(ecfg, &sc, &policy, seed, r, f)?);
            }
            Ok(SuperFrameOutcome { slots, final_theta: None })
        }
    }
}

/// All Monte Carlo realizations of one scheme. Slot channels depend only on
/// `(seed, realization, frame, slot)`, so different schemes see the same draws.
pub fn run_scheme(ecfg: &ExperimentConfig, scheme: SchemeId, seed: u64) -> Result<SchemeRun> {
    let start = Instant::now();
    let outcomes: Vec<SuperFrameOutcome> = if scheme == SchemeId::SaSsca && ecfg.theta_init == ThetaInit::Warm {
        let mut out = Vec::with_capacity(ecfg.monte_carlo);
        let mut warm: Option<PhaseShifts> = None;
        for r in 0..ecfg.monte_carlo {
            let o = run_super_frame(ecfg, scheme, seed, r, warm.as_ref())?;
            warm = o.final_theta.clone();
            out.push(o);
        }
        out
    } else {
        (0..ecfg.monte_carlo).into_par_iter().map(|r| run_super_frame(ecfg, scheme, seed, r, None)).collect::<Result<_>>()?
    };
    let slots: Vec<SlotResult> = outcomes.into_iter().flat_map(|o| o.slots).collect();
    let wall_s = if ecfg.record_wall_time { start.elapsed().as_secs_f64() } else { 0.0 };
    Ok(SchemeRun { scheme, slots, seed, wall_s })
}

/// Every configured scheme, in configuration order.
pub fn run_experiment(ecfg: &ExperimentConfig, seed: u64) -> Result<Vec<SchemeRun>> {
    ecfg.validate()?;
    ecfg.schemes.iter().map(|&s| run_scheme(ecfg, s, seed)).collect()
}
