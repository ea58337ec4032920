//! Stochastic successive convex approximation of the RIS phases.
//!
//! Each frame the running estimates of the expected smoothed secrecy rate and
//! its gradient are refreshed from `T_c` channel samples,
//! `f^t = (1−ρ^t) f^{t−1} + ρ^t · mean(S̄ⱼ)`, and the phases move to the
//! maximizer of the quadratic surrogate `f^t + 𝐟ᵀ(θ−θ^t) − τ‖θ−θ^t‖²`,
//! blended with step size `γ^t`.

use num_complex::Complex64;

use crate::linalg::{inner, CVec};
use crate::metrics::{smooth_secrecy, BeamformingSolution};
use crate::scenario::{circular_distance, effective_channels, wrap_phase, ChannelSample, PhaseShifts, SystemConfig};
use crate::{Error, Result};

/// Gradient of `S̄` (bits/s/Hz) with respect to the RIS phases, with the
/// beams held fixed.
pub fn grad_theta(sample: &ChannelSample, phases: &PhaseShifts, sol: &BeamformingSolution, cfg: &SystemConfig) -> Result<Vec<f64>> {
    let eff = effective_channels(sample, phases)?;
    let (n_r, m) = (sample.n_r(), sample.m());
    if sol.p_mat.ncols() != m || sol.w.len() != sample.n_s() {
        return Err(Error::Dimension("beams do not match the channel sample".into()));
    }
    let phi = phases.coefficients();
    let f1h = sample.f1.adjoint();
    // F₁ᴴx for every beam x ∈ {w, p₁, …, p_M}
    let mut beams = vec![sol.w.clone()];
    beams.extend((0..m).map(|k| sol.p_mat.column(k).into_owned()));
    let projected: Vec<CVec> = beams.iter().map(|x| &f1h * x).collect();

    // ∂γ/∂φ and ∂γ/∂φ* of γ = |c_w|² / (Σₖ|c_k|² + σ²), c_x = h̃ᴴx = φᴴ(h₂* ∘ F₁ᴴx) + h₁ᴴx
    let sinr_derivs = |h_eff: &CVec, h2: &CVec, noise: f64| -> (f64, CVec, CVec) {
        let c: Vec<Complex64> = beams.iter().map(|x| inner(h_eff, x)).collect();
        let coeff = |b: usize| -> CVec { h2.map(|v| v.conj()).component_mul(&projected[b]) };
        let num = c[0].norm_sqr();
        let den: f64 = c[1..].iter().map(|v| v.norm_sqr()).sum::<f64>() + noise;
        let gamma = num / den;
        let mut d_phi = CVec::zeros(n_r);
        let mut d_phi_conj = CVec::zeros(n_r);
        for (b, cb) in c.iter().enumerate() {
            let a = coeff(b);
            let wgt = if b == 0 { 1.0 / den } else { -gamma / den };
            // ∂|c|²/∂φ = c · a*, ∂|c|²/∂φ* = c* · a
            d_phi += a.map(|v| v.conj() * cb) * Complex64::new(wgt, 0.0);
            d_phi_conj += a * Complex64::new(wgt, 0.0) * cb.conj();
        }
        (gamma, d_phi, d_phi_conj)
    };

    let (g_iu, d_iu, dc_iu) = sinr_derivs(&eff.h_tilde, &sample.h2, cfg.noise_iu_w());
    let mut d_total = d_iu / Complex64::new(1.0 + g_iu, 0.0);
    let mut dc_total = dc_iu / Complex64::new(1.0 + g_iu, 0.0);

    // softmax weights (1+γₘ)^p / Σ(1+γₖ)^p, evaluated in the log domain
    let eus: Vec<(f64, CVec, CVec)> = (0..m).map(|k| sinr_derivs(&eff.g_tilde[k], &sample.g2[k], cfg.noise_eu_w())).collect();
    let logs: Vec<f64> = eus.iter().map(|(g, _, _)| cfg.p_smooth * g.ln_1p()).collect();
    let lmax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm: f64 = logs.iter().map(|l| (l - lmax).exp()).sum();
    for ((gm, dm, dcm), l) in eus.iter().zip(&logs) {
        let w = (l - lmax).exp() / norm / (1.0 + gm);
        d_total -= dm * Complex64::new(w, 0.0);
        dc_total -= dcm * Complex64::new(w, 0.0);
    }

    let j = Complex64::new(0.0, 1.0);
    let mut grad = Vec::with_capacity(n_r);
    let mut scale = 0.0f64;
    let mut residue = 0.0f64;
    for n in 0..n_r {
        let gn = d_total[n] * j * phi[n] - dc_total[n] * j * phi[n].conj();
        scale = scale.max(d_total[n].norm() + dc_total[n].norm());
        residue = residue.max(gn.im.abs());
        grad.push(gn.re / std::f64::consts::LN_2);
    }
    debug_assert!(residue <= 1e-10 * scale.max(1e-300) + 1e-300, "phase gradient must be real");
    Ok(grad)
}

/// Running SSCA estimates of one super-frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateState {
    pub f_scalar: f64,
    pub f_grad: Vec<f64>,
    pub theta: PhaseShifts,
    /// Frame counter `t`.
    pub t: usize,
    pub tau: f64,
    pub rho_exponent: f64,
    pub gamma_exponent: f64,
}

impl SurrogateState {
    /// Fresh state at `t = 0` with zero estimates.
    pub fn new(theta: PhaseShifts, tau: f64, rho_exponent: f64, gamma_exponent: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        for (name, e) in [("rho_exponent", rho_exponent), ("gamma_exponent", gamma_exponent)] {
            if !(e > 0.0 && e < 1.0 + 1e-12) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {e}")));
            }
        }
        let n = theta.len();
        Ok(Self { f_scalar: 0.0, f_grad: vec![0.0; n], theta, t: 0, tau, rho_exponent, gamma_exponent })
    }

    /// Forgetting factor `ρ^t = (t+1)^{−β}`.
    pub fn rho(&self) -> f64 {
        ((self.t + 1) as f64).powf(-self.rho_exponent)
    }

    /// Step size `γ^t = (t+1)^{−α}`.
    pub fn gamma(&self) -> f64 {
        ((self.t + 1) as f64).powf(-self.gamma_exponent)
    }
}

/// Recursion update from per-sample objective values and phase gradients.
pub fn update_surrogate_with(state: &SurrogateState, values: &[f64], grads: &[Vec<f64>]) -> Result<SurrogateState> {
    if values.is_empty() || values.len() != grads.len() {
        return Err(Error::Domain("surrogate update needs one gradient per sample and at least one sample".into()));
    }
    let n = state.f_grad.len();
    if grads.iter().any(|g| g.len() != n) {
        return Err(Error::Dimension("gradient length differs from the phase count".into()));
    }
    let rho = state.rho();
    let tc = values.len() as f64;
    let mut next = state.clone();
    next.f_scalar = (1.0 - rho) * state.f_scalar + rho * values.iter().sum::<f64>() / tc;
    for i in 0..n {
        let mean = grads.iter().map(|g| g[i]).sum::<f64>() / tc;
        next.f_grad[i] = (1.0 - rho) * state.f_grad[i] + rho * mean;
    }
    Ok(next)
}

/// Recursion update from `T_c` samples and their short-term solutions at
/// the state's current phases.
pub fn update_surrogate(state: &SurrogateState, samples: &[ChannelSample], solutions: &[BeamformingSolution], cfg: &SystemConfig) -> Result<SurrogateState> {
    if samples.len() != solutions.len() {
        return Err(Error::Dimension(format!("{} samples but {} solutions", samples.len(), solutions.len())));
    }
    let mut values = Vec::with_capacity(samples.len());
    let mut grads = Vec::with_capacity(samples.len());
    for (s, sol) in samples.iter().zip(solutions) {
        let eff = effective_channels(s, &state.theta)?;
        values.push(smooth_secrecy(&eff, sol, cfg));
        grads.push(grad_theta(s, &state.theta, sol, cfg)?);
    }
    update_surrogate_with(state, &values, &grads)
}

/// Surrogate maximizer `θ̄ = θ + 𝐟/(2τ)` blended as `(1−γ)θ + γθ̄`, wrapped
/// into `(0, 2π]`; advances the frame counter.
pub fn ssca_step(state: &SurrogateState) -> SurrogateState {
    let gamma = state.gamma();
    let theta = state
        .theta
        .theta()
        .iter()
        .zip(&state.f_grad)
        .map(|(&th, &f)| {
            let bar = th + f / (2.0 * state.tau);
            wrap_phase((1.0 - gamma) * th + gamma * bar)
        })
        .collect();
    SurrogateState { theta: PhaseShifts::new(theta), t: state.t + 1, ..state.clone() }
}

/// Circularly nearest point of `{0, 2π/L, …, 2π(L−1)/L}`, `L = 2^Q`, for
/// every phase; ties go to the smaller grid angle. `q_bits = 0` keeps the
/// phases continuous.
pub fn project_discrete(phases: &PhaseShifts, q_bits: u32) -> PhaseShifts {
    if q_bits == 0 {
        return phases.clone();
    }
    let levels = 1usize << q_bits;
    let step = std::f64::consts::TAU / levels as f64;
    let theta = phases
        .theta()
        .iter()
        .map(|&th| {
            let mut best = (f64::INFINITY, 0usize);
            for k in 0..levels {
                let d = circular_distance(th, k as f64 * step);
                if d < best.0 - 1e-15 {
                    best = (d, k);
                }
            }
            best.1 as f64 * step
        })
        .collect();
    PhaseShifts::new(theta)
}
