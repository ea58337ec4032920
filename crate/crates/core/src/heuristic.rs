//! Low-complexity statistical phase design: minimize
//! `E{−‖h̃‖² + a Σₘ‖g̃ₘ‖²} = φ̄ᴴĀφ̄` over unit-modulus `φ̄ = [φ; 1]`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;

use crate::linalg::{norm_sqr, CMat, CVec};
use crate::scenario::{draw_channel_sample, ChannelSample, ChannelStats, PhaseShifts};
use crate::{Error, Result};

/// Default number of channel samples for `Ā` and the weight `a`.
pub const DEFAULT_SAMPLES: usize = 500;

/// Sample-average statistical matrix `Ā` of size `(n_r+1) × (n_r+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatMatrix {
    pub a_bar: CMat,
    pub n_samples: usize,
    pub weight: f64,
}

impl StatMatrix {
    pub fn n_r(&self) -> usize {
        self.a_bar.nrows() - 1
    }

    /// `φ̄ᴴĀφ̄` with `φ̄ = [e^{jθ}; 1]`.
    pub fn objective(&self, phases: &PhaseShifts) -> f64 {
        quad(&self.a_bar, &augment(phases))
    }
}

fn augment(phases: &PhaseShifts) -> CVec {
    let phi = phases.coefficients();
    let n = phi.len();
    CVec::from_fn(n + 1, |i, _| if i < n { phi[i] } else { Complex64::new(1.0, 0.0) })
}

fn quad(a: &CMat, x: &CVec) -> f64 {
    x.dotc(&(a * x)).re
}

/// Draws `n` channel samples from the statistics.
pub fn draw_samples<R: Rng + ?Sized>(stats: &ChannelStats, n: usize, rng: &mut R) -> Vec<ChannelSample> {
    (0..n).map(|_| draw_channel_sample(stats, rng)).collect()
}

/// `a = mean ‖h₁‖² / mean((1/M) Σₘ ‖g₁,ₘ‖²)` over the samples.
pub fn weight_a_from_samples(samples: &[ChannelSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("weight needs at least one sample".into()));
    }
    let num: f64 = samples.iter().map(|s| norm_sqr(&s.h1)).sum();
    let den: f64 = samples.iter().map(|s| s.g1.iter().map(norm_sqr).sum::<f64>() / s.m() as f64).sum();
    if !(den > 0.0) {
        return Err(Error::Domain("BS-EU channels carry no power".into()));
    }
    Ok(num / den)
}

pub fn weight_a<R: Rng + ?Sized>(stats: &ChannelStats, n_samples: usize, rng: &mut R) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::Domain("weight needs at least one sample".into()));
    }
    weight_a_from_samples(&draw_samples(stats, n_samples, rng))
}

/// `[F₁ diag(v), v_direct]`, so that the effective channel is this matrix times `φ̄`.
fn cascade(sample: &ChannelSample, ris: &CVec, direct: &CVec) -> CMat {
    let (n_s, n_r) = (sample.n_s(), sample.n_r());
    let mut m = CMat::zeros(n_s, n_r + 1);
    for n in 0..n_r {
        m.set_column(n, &(sample.f1.column(n) * ris[n]));
    }
    m.set_column(n_r, direct);
    m
}

/// `Ā = mean{−H̄ᴴH̄ + a Σₘ ḠₘᴴḠₘ}` over the samples.
pub fn build_a_bar_from_samples(samples: &[ChannelSample], a: f64) -> Result<StatMatrix> {
    let first = samples.first().ok_or_else(|| Error::Domain("statistical matrix needs at least one sample".into()))?;
    let n = first.n_r() + 1;
    let mut acc = CMat::zeros(n, n);
    for s in samples {
        let h = cascade(s, &s.h2, &s.h1);
        acc -= h.adjoint() * &h;
        if a != 0.0 {
            for (g1, g2) in s.g1.iter().zip(&s.g2) {
                let g = cascade(s, g2, g1);
                acc += (g.adjoint() * &g) * Complex64::new(a, 0.0);
            }
        }
    }
    acc /= Complex64::new(samples.len() as f64, 0.0);
    // remove round-off asymmetry
    let a_bar = (&acc + acc.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(StatMatrix { a_bar, n_samples: samples.len(), weight: a })
}

pub fn build_a_bar<R: Rng + ?Sized>(stats: &ChannelStats, a: f64, n_samples: usize, rng: &mut R) -> Result<StatMatrix> {
    build_a_bar_from_samples(&draw_samples(stats, n_samples, rng), a)
}

/// Cyclic coordinate descent over `φ̄[0..n_r]` (last entry stays 1) with the
/// exact coordinate minimizer `φₙ = −cₙ/|cₙ|`, `cₙ = Σ_{k≠n} Ā[n,k] φ̄ₖ`.
/// Returns the final vector and the objective after every sweep (first entry
/// is the starting objective).
pub fn bcd_sweeps(a_bar: &CMat, init: &CVec, max_iters: usize, tol: f64) -> (CVec, Vec<f64>) {
    let n = a_bar.nrows();
    let mut phi = init.clone();
    let mut trace = vec![quad(a_bar, &phi)];
    for _ in 0..max_iters {
        for i in 0..n - 1 {
            let mut c = Complex64::new(0.0, 0.0);
            for k in 0..n {
                if k != i {
                    c += a_bar[(i, k)] * phi[k];
                }
            }
            let r = c.norm();
            if r > 0.0 {
                phi[i] = -c / r;
            }
        }
        let obj = quad(a_bar, &phi);
        let prev = *trace.last().unwrap();
        trace.push(obj);
        if (prev - obj).abs() <= tol * prev.abs().max(1e-300) {
            break;
        }
    }
    (phi, trace)
}

/// Unit-modulus minimization backends.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum UnimodularSolver {
    /// Element-wise cyclic BCD.
    #[default]
    Bcd,
    /// Penalty dual decomposition with an unconstrained copy `x` of `φ`
    /// coupled through `x = φ`; BCD polishing at the end.
    Pdd { outer: usize, penalty: f64, shrink: f64 },
}

impl UnimodularSolver {
    /// PDD defaults chosen for this crate, not taken from any reference.
    pub fn pdd_default() -> Self {
        UnimodularSolver::Pdd { outer: 60, penalty: 1.0, shrink: 0.8 }
    }
}

/// Phases of `φ̄` relative to its last entry.
fn phases_of(phi_bar: &CVec) -> PhaseShifts {
    let n = phi_bar.len() - 1;
    let r = phi_bar[n].conj() / phi_bar[n].norm();
    PhaseShifts::from_coefficients(&CVec::from_fn(n, |i, _| phi_bar[i] * r))
}

/// Start vector from the eigenvector of the smallest eigenvalue of `Ā`,
/// rotated so the last entry is real and every entry projected to unit modulus.
fn eigen_start(a_bar: &CMat) -> CVec {
    let eig = SymmetricEigen::new(a_bar.clone());
    let imin = eig.eigenvalues.imin();
    let v = eig.eigenvectors.column(imin).into_owned();
    let n = v.len();
    let r = if v[n - 1].norm() > 0.0 { v[n - 1].conj() / v[n - 1].norm() } else { Complex64::new(1.0, 0.0) };
    CVec::from_fn(n, |i, _| {
        let c = v[i] * r;
        if i == n - 1 {
            Complex64::new(1.0, 0.0)
        } else if c.norm() > 0.0 {
            c / c.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}

/// Minimizes `φ̄ᴴĀφ̄` from `init`, and from a spectral start; the better
/// result is returned.
pub fn minimize_unimodular(mat: &StatMatrix, init: &PhaseShifts, max_iters: usize, tol: f64) -> PhaseShifts {
    minimize_unimodular_with(mat, init, max_iters, tol, UnimodularSolver::Bcd)
}

pub fn minimize_unimodular_with(mat: &StatMatrix, init: &PhaseShifts, max_iters: usize, tol: f64, solver: UnimodularSolver) -> PhaseShifts {
    let starts = [augment(init), eigen_start(&mat.a_bar)];
    let mut best: Option<(f64, CVec)> = None;
    for s in starts {
        let s = match solver {
            UnimodularSolver::Bcd => s,
            UnimodularSolver::Pdd { outer, penalty, shrink } => pdd(&mat.a_bar, &s, outer, penalty, shrink),
        };
        let (phi, trace) = bcd_sweeps(&mat.a_bar, &s, max_iters, tol);
        let obj = *trace.last().unwrap();
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, phi));
        }
    }
    phases_of(&best.unwrap().1)
}

/// Augmented-Lagrangian iterations for `min xᴴĀx + (1/2ρ)‖x − φ + ρλ‖²`
/// alternating the unconstrained `x` and the unit-modulus `φ` (last entry
/// of both fixed to 1).
fn pdd(a_bar: &CMat, init: &CVec, outer: usize, penalty: f64, shrink: f64) -> CVec {
    let n = a_bar.nrows();
    let k = n - 1;
    let a11 = a_bar.view((0, 0), (k, k)).into_owned();
    let a12 = a_bar.view((0, k), (k, 1)).column(0).into_owned();
    let lmin = SymmetricEigen::new(a11.clone()).eigenvalues.min();
    let mut rho = penalty.min(if lmin < 0.0 { 0.25 / -lmin } else { penalty });
    let mut phi = init.rows(0, k).into_owned();
    let mut lam = CVec::zeros(k);
    for _ in 0..outer {
        // x-step: (A₁₁ + I/(2ρ)) x = (φ − ρλ)/(2ρ) − a₁₂
        let mut m = a11.clone();
        for i in 0..k {
            m[(i, i)] += Complex64::new(0.5 / rho, 0.0);
        }
        let rhs = (&phi - &lam * Complex64::new(rho, 0.0)) * Complex64::new(0.5 / rho, 0.0) - &a12;
        let Some(x) = m.lu().solve(&rhs) else { break };
        // φ-step: projection of x + ρλ onto the unit circle
        let target = &x + &lam * Complex64::new(rho, 0.0);
        phi = target.map(|c| if c.norm() > 0.0 { c / c.norm() } else { Complex64::new(1.0, 0.0) });
        lam += (&x - &phi) / Complex64::new(rho, 0.0);
        rho *= shrink;
    }
    CVec::from_fn(n, |i, _| if i < k { phi[i] } else { Complex64::new(1.0, 0.0) })
}

/// Phases of the low-complexity scheme from pre-drawn samples: weight `a`
/// from the samples, then unit-modulus minimization from the all-π start.
pub fn low_complexity_phases(samples: &[ChannelSample]) -> Result<PhaseShifts> {
    let a = weight_a_from_samples(samples)?;
    let mat = build_a_bar_from_samples(samples, a)?;
    let init = PhaseShifts::constant(mat.n_r(), std::f64::consts::PI);
    Ok(minimize_unimodular(&mat, &init, 500, 1e-10))
}
