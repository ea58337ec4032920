//! CCCP-BCD for the short-term beamforming problem at fixed RIS phases.
//!
//! The smoothed secrecy rate is maximized through the equivalent
//! minimization of
//! `Ē = z·e(w,P,u) − ln z + (v/p) Σ(1+yₘ)^p − (1/p) ln v`
//! subject to the power budget, `SINRₘ ≤ yₘ` and `Qₘ ≥ εₘ`. Blocks `{z, v}`
//! and `u` have closed-form minimizers; the `{w, P, y}` block is convexified
//! by linearizing the EU interference power and the harvested power.
//! In natural-log units, `Ē` at the closed-form auxiliaries equals
//! `1 + 1/p − ln 2 · S̄`.

use num_complex::Complex64;

use crate::cvxcore::{energy_heavy_start, find_feasible, is_feasible, mse_value, solve_step3, ConvexSubproblem, SolverReport};
use crate::linalg::{inner, row_norm_sqr, CMat, CVec};
use crate::metrics::{sinr_eus, smooth_secrecy, BeamformingSolution};
use crate::scenario::{EffectiveChannels, SystemConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CccpBcdConfig {
    /// Maximum number of BCD iterations `J`.
    pub max_outer_iters: usize,
    /// Stop when `|ΔĒ| < obj_tol · max(1, |Ē|)`.
    pub obj_tol: f64,
    /// KKT tolerance of the Step-3 solver.
    pub solver_tol: f64,
    /// `solve_from_scratch` also starts from energy beams aimed at this
    /// multiple of the harvesting thresholds and keeps the better result;
    /// 0 disables the second start.
    pub energy_start_margin: f64,
}

impl Default for CccpBcdConfig {
    fn default() -> Self {
        Self { max_outer_iters: 30, obj_tol: 1e-6, solver_tol: 1e-7, energy_start_margin: 11.0 }
    }
}

impl CccpBcdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iters == 0 || !(self.obj_tol > 0.0) || !(self.solver_tol > 0.0) {
            return Err(Error::Config("CCCP-BCD needs J ≥ 1 and positive tolerances".into()));
        }
        if !(self.energy_start_margin >= 0.0) {
            return Err(Error::Config(format!("energy_start_margin must be non-negative, got {}", self.energy_start_margin)));
        }
        Ok(())
    }
}

/// Receiver MSE `e(w, P, u)` at the IU for the solution's `u`.
pub fn mse_e(eff: &EffectiveChannels, sol: &BeamformingSolution, noise_w: f64) -> f64 {
    mse_value(&eff.h_tilde, &sol.w, &sol.p_mat, sol.u, noise_w)
}

/// Closed-form Step 1: `z = 1/e`, `v = 1/Σ(1+yₘ)^p`.
pub fn update_z_v(eff: &EffectiveChannels, sol: &BeamformingSolution, cfg: &SystemConfig) -> (f64, f64) {
    let e = mse_e(eff, sol, cfg.noise_iu_w());
    let s: f64 = sol.y.iter().map(|y| (1.0 + y).powf(cfg.p_smooth)).sum();
    (1.0 / e, 1.0 / s)
}

/// Closed-form Step 2: the MMSE receiver `h̃ᴴw / (|h̃ᴴw|² + ‖h̃ᴴP‖² + σ²)`.
pub fn update_u(eff: &EffectiveChannels, sol: &BeamformingSolution, noise_w: f64) -> Complex64 {
    let hw = inner(&eff.h_tilde, &sol.w);
    hw / (hw.norm_sqr() + row_norm_sqr(&eff.h_tilde, &sol.p_mat) + noise_w)
}

/// Convex Step-3 subproblem linearized at `(w_f, p_f)`, with neutral
/// weights until `with_weights` sets the auxiliaries.
pub fn linearize(eff: &EffectiveChannels, w_f: &CVec, p_f: &CMat, cfg: &SystemConfig) -> Result<ConvexSubproblem> {
    ConvexSubproblem::new(eff, cfg, w_f.clone(), p_f.clone())
}

/// The BCD objective `Ē` at the solution's own auxiliaries.
pub fn bcd_objective(eff: &EffectiveChannels, sol: &BeamformingSolution, cfg: &SystemConfig) -> f64 {
    let p = cfg.p_smooth;
    sol.z * mse_e(eff, sol, cfg.noise_iu_w()) - sol.z.ln() + sol.v / p * sol.y.iter().map(|y| (1.0 + y).powf(p)).sum::<f64>()
        - sol.v.ln() / p
}

/// Sets `y = SINR_E`, `u = u*`, then `(z, v)` at their closed forms.
pub fn tighten_auxiliaries(eff: &EffectiveChannels, sol: &mut BeamformingSolution, cfg: &SystemConfig) {
    sol.y = sinr_eus(eff, sol, cfg.noise_eu_w());
    sol.u = update_u(eff, sol, cfg.noise_iu_w());
    let (z, v) = update_z_v(eff, sol, cfg);
    sol.z = z;
    sol.v = v;
}

#[derive(Debug, Clone)]
pub struct ShortTermOutcome {
    pub solution: BeamformingSolution,
    /// `Ē` at the initialization and after every BCD iteration.
    pub trace: Vec<f64>,
    /// `Ē` after every individual block update (Step 1, Step 2, Step 3).
    pub step_trace: Vec<f64>,
    pub iterations: usize,
    /// Report of the last Step-3 solve.
    pub last_report: Option<SolverReport>,
    /// Newton steps summed over all Step-3 solves.
    pub newton_steps: usize,
    /// Solution after every BCD iteration.
    pub iterates: Vec<BeamformingSolution>,
}

/// Runs Algorithm 1 from the feasible point `init`.
pub fn solve_shortterm(
    eff: &EffectiveChannels,
    cfg: &SystemConfig,
    ccfg: &CccpBcdConfig,
    init: &BeamformingSolution,
) -> Result<ShortTermOutcome> {
    ccfg.validate()?;
    if !is_feasible(eff, init, cfg, 1e-9) {
        return Err(Error::Infeasible("short-term initialization violates the power or harvesting constraints".into()));
    }
    let mut sol = init.clone();
    tighten_auxiliaries(eff, &mut sol, cfg);
    let first = bcd_objective(eff, &sol, cfg);
    let mut trace = vec![first];
    let mut step_trace = vec![first];
    let mut last_report = None;
    let mut iterations = 0;
    let mut newton_steps = 0;
    let mut iterates = Vec::with_capacity(ccfg.max_outer_iters);

    for _ in 0..ccfg.max_outer_iters {
        let (z, v) = update_z_v(eff, &sol, cfg);
        sol.z = z;
        sol.v = v;
        step_trace.push(bcd_objective(eff, &sol, cfg));

        sol.u = update_u(eff, &sol, cfg.noise_iu_w());
        step_trace.push(bcd_objective(eff, &sol, cfg));

        let prob = linearize(eff, &sol.w, &sol.p_mat, cfg)?.with_weights(sol.z, sol.u, sol.v);
        let (next, report) = solve_step3(&prob, &sol, ccfg.solver_tol)?;
        sol = next;
        newton_steps += report.iterations;
        last_report = Some(report);
        let obj = bcd_objective(eff, &sol, cfg);
        step_trace.push(obj);
        iterations += 1;
        iterates.push(sol.clone());

        let prev = *trace.last().unwrap();
        trace.push(obj);
        if (prev - obj).abs() < ccfg.obj_tol * obj.abs().max(1.0) {
            break;
        }
    }
    Ok(ShortTermOutcome { solution: sol, trace, step_trace, iterations, last_report, newton_steps, iterates })
}

/// Feasibility restoration followed by Algorithm 1.
pub fn solve_from_scratch(eff: &EffectiveChannels, cfg: &SystemConfig, ccfg: &CccpBcdConfig) -> Result<ShortTermOutcome> {
    let init = find_feasible(eff, cfg)?;
    let first = solve_shortterm(eff, cfg, ccfg, &init);
    // weak energy beams tend to end in stationary points with too little
    // artificial noise
    let Some(alt) = energy_heavy_start(eff, cfg, ccfg.energy_start_margin) else { return first };
    let Ok(second) = solve_shortterm(eff, cfg, ccfg, &alt) else { return first };
    match first {
        Ok(f) if smooth_secrecy(eff, &f.solution, cfg) >= smooth_secrecy(eff, &second.solution, cfg) => Ok(f),
        _ => Ok(second),
    }
}
