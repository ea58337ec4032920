//! Convex machinery for the short-term beamforming problem: the linearized
//! Step-3 subproblem, its dense log-barrier solver and feasibility restoration.
//!
//! Internally the complex beams are scaled by `1/√P_t` and stacked into one
//! real vector `[Re ŵ, Im ŵ, Re p̂₁, Im p̂₁, …, Re p̂_M, Im p̂_M, ŷ₁, …, ŷ_M]`,
//! with every EU SINR bound `yₘ` scaled by its value at the reference point.

mod barrier;
mod nnls;

pub use barrier::{minimize, BarrierOptions, ConvexProgram, SolverReport, SolverStatus, Term, FEAS_TOL};
pub use nnls::nnls;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::linalg::{inner, norm_sqr, CMat, CVec};
use crate::metrics::{harvested_power, BeamformingSolution};
use crate::scenario::{EffectiveChannels, SystemConfig};
use crate::{Error, Result};

/// Step-3 problem of the CCCP-BCD iteration at a fixed reference point
/// `(w_ref, p_ref)` and fixed auxiliaries `(z, u, v)`.
#[derive(Debug, Clone)]
pub struct ConvexSubproblem {
    pub h_tilde: CVec,
    pub g_tilde: Vec<CVec>,
    pub noise_iu: f64,
    pub noise_eu: f64,
    pub pt: f64,
    /// Harvesting thresholds in watts; zero entries are unconstrained.
    pub eps: Vec<f64>,
    pub p_smooth: f64,
    pub z: f64,
    pub u: Complex64,
    pub v: f64,
    pub w_ref: CVec,
    pub p_ref: CMat,
}

/// Real/imaginary coefficient vectors of `c = aᴴξ` where `ξ` is the
/// complex block starting at `offset`: `Re c = r·x`, `Im c = s·x`.
fn reim_rows(a: &CVec, n: usize, offset: usize) -> (DVector<f64>, DVector<f64>) {
    let k = a.len();
    let mut r = DVector::zeros(n);
    let mut s = DVector::zeros(n);
    for i in 0..k {
        r[offset + i] = a[i].re;
        r[offset + k + i] = a[i].im;
        s[offset + i] = -a[i].im;
        s[offset + k + i] = a[i].re;
    }
    (r, s)
}

fn rank2(r: &DVector<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    r * r.transpose() + s * s.transpose()
}

impl ConvexSubproblem {
    /// Linearization at `(w_ref, p_ref)` with neutral weights `z = v = 1`, `u = 0`.
    pub fn new(eff: &EffectiveChannels, cfg: &SystemConfig, w_ref: CVec, p_ref: CMat) -> Result<Self> {
        let (n_s, m) = (eff.n_s(), eff.m());
        if w_ref.len() != n_s || p_ref.nrows() != n_s || p_ref.ncols() != m || cfg.m != m {
            return Err(Error::Dimension(format!("reference beams do not match n_s={n_s}, m={m}")));
        }
        Ok(Self {
            h_tilde: eff.h_tilde.clone(),
            g_tilde: eff.g_tilde.clone(),
            noise_iu: cfg.noise_iu_w(),
            noise_eu: cfg.noise_eu_w(),
            pt: cfg.pt_w(),
            eps: cfg.eps_vec(),
            p_smooth: cfg.p_smooth,
            z: 1.0,
            u: Complex64::new(0.0, 0.0),
            v: 1.0,
            w_ref,
            p_ref,
        })
    }

    pub fn with_weights(mut self, z: f64, u: Complex64, v: f64) -> Self {
        self.z = z;
        self.u = u;
        self.v = v;
        self
    }

    pub fn n_s(&self) -> usize {
        self.h_tilde.len()
    }

    pub fn m(&self) -> usize {
        self.g_tilde.len()
    }

    /// Linearized lower bound of the EU interference-plus-noise power.
    fn sinr_denominator(&self, m: usize, p: &CMat) -> f64 {
        let g = &self.g_tilde[m];
        let mut d = self.noise_eu;
        for k in 0..self.m() {
            let cf = inner(g, &self.p_ref.column(k).into_owned());
            let c = inner(g, &p.column(k).into_owned());
            d += 2.0 * (cf.conj() * c).re - cf.norm_sqr();
        }
        d
    }

    /// Upper bound on `SINRₘ` obtained by linearizing the interference power
    /// at the reference point; tight there. Infinite where the linearized
    /// denominator is not positive.
    pub fn sinr_bound(&self, m: usize, w: &CVec, p: &CMat) -> f64 {
        let den = self.sinr_denominator(m, p);
        if den > 0.0 {
            inner(&self.g_tilde[m], w).norm_sqr() / den
        } else {
            f64::INFINITY
        }
    }

    /// Lower bound on the harvested power `Qₘ` from the first-order
    /// expansion at the reference point; tight there.
    pub fn eh_bound(&self, m: usize, w: &CVec, p: &CMat) -> f64 {
        let g = &self.g_tilde[m];
        let lin = |xf: CVec, x: CVec| {
            let cf = inner(g, &xf);
            2.0 * (cf.conj() * inner(g, &x)).re - cf.norm_sqr()
        };
        let mut q = lin(self.w_ref.clone(), w.clone());
        for k in 0..self.m() {
            q += lin(self.p_ref.column(k).into_owned(), p.column(k).into_owned());
        }
        q
    }

    /// Mean squared error `e(w, P, u)` of the IU's scalar receiver `u`.
    pub fn mse(&self, w: &CVec, p: &CMat) -> f64 {
        mse_value(&self.h_tilde, w, p, self.u, self.noise_iu)
    }

    /// `z·e − ln z + (v/p) Σ(1+yₘ)^p − (1/p) ln v`.
    pub fn objective(&self, sol: &BeamformingSolution) -> f64 {
        let p = self.p_smooth;
        self.z * self.mse(&sol.w, &sol.p_mat) - self.z.ln() + self.v / p * sol.y.iter().map(|y| (1.0 + y).powf(p)).sum::<f64>()
            - self.v.ln() / p
    }

    fn layout(&self) -> Layout {
        Layout { n_s: self.n_s(), m: self.m() }
    }

    /// Per-EU SINR scaling so that the scaled bounds are of order one.
    fn y_scale(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|&yi| yi.max(1.0)).collect()
    }

    fn program(&self, y_scale: &[f64]) -> ConvexProgram {
        let lay = self.layout();
        let n = lay.n();
        let nb = lay.n_beams();
        let mut constraints = Vec::new();

        // objective z·e + (v/p)Σ(1+y)^p + constants
        let a = &self.h_tilde * Complex64::new(self.pt.sqrt(), 0.0);
        let mut q = DMatrix::zeros(nb, nb);
        let mut lin = DVector::zeros(n);
        let u2 = self.u.norm_sqr();
        for b in 0..=self.m() {
            let (r, s) = reim_rows(&a, nb, lay.block(b));
            q += self.z * u2 * rank2(&r, &s);
            if b == 0 {
                let (r, s) = reim_rows(&a, n, 0);
                lin -= 2.0 * self.z * (self.u.re * r + self.u.im * s);
            }
        }
        let c = self.z * u2 * self.noise_iu + self.z - self.z.ln() - self.v.ln() / self.p_smooth;
        let objective = vec![
            Term::Quadratic { q, b: lin, c },
            Term::PowerSum {
                idx: (0..self.m()).map(|m| lay.y(m)).collect(),
                scale: y_scale.to_vec(),
                weight: self.v / self.p_smooth,
                p: self.p_smooth,
            },
        ];

        // power budget
        constraints.push(vec![Term::Quadratic { q: DMatrix::identity(nb, nb), b: DVector::zeros(0), c: -1.0 }]);

        let x_ref = lay.pack(&self.w_ref, &self.p_ref, &vec![0.0; self.m()], self.pt, y_scale);
        for m in 0..self.m() {
            // |bᴴŵ|² / (1 − Σ|cf|² + 2Σ Re{cf* bᴴp̂ₖ}) − ŷ ≤ 0, b = g̃ √P_t / σ
            let bvec = &self.g_tilde[m] * Complex64::new((self.pt / self.noise_eu).sqrt(), 0.0);
            let (r, s) = reim_rows(&bvec, 2 * lay.n_s, 0);
            let qn = rank2(&r, &s) / y_scale[m];
            let mut d = DVector::zeros(nb);
            let mut d0 = 1.0;
            for k in 0..self.m() {
                let (r, s) = reim_rows(&bvec, nb, lay.block(k + 1));
                let cf = Complex64::new(r.dot(&x_ref.rows(0, nb)), s.dot(&x_ref.rows(0, nb)));
                d += 2.0 * (cf.re * &r + cf.im * &s);
                d0 -= cf.norm_sqr();
            }
            let mut e_y = DVector::zeros(n);
            e_y[lay.y(m)] = -1.0;
            constraints.push(vec![Term::QuadOverAffine { q: qn, d, d0 }, Term::Affine { b: e_y, c: 0.0 }]);

            if self.eps[m] > 0.0 {
                constraints.push(vec![eh_affine(&self.g_tilde[m], self.eps[m], self.pt, &lay, &x_ref, 0)]);
            }
        }
        ConvexProgram { n, objective, constraints }
    }
}

/// `1 − L̂ₘ(x)` where `L̂ₘ` is the harvested-power linearization at `x_ref`
/// divided by `εₘ`, as an affine term over a vector with `extra` trailing
/// entries.
fn eh_affine(g: &CVec, eps: f64, pt: f64, lay: &Layout, x_ref: &DVector<f64>, extra: usize) -> Term {
    let nb = lay.n_beams();
    let e = g * Complex64::new((pt / eps).sqrt(), 0.0);
    let mut b = DVector::zeros(nb + extra);
    let mut c = 1.0;
    for blk in 0..=lay.m {
        let (r, s) = reim_rows(&e, nb, lay.block(blk));
        let cf = Complex64::new(r.dot(&x_ref.rows(0, nb)), s.dot(&x_ref.rows(0, nb)));
        b.rows_mut(0, nb).axpy(-2.0, &(cf.re * &r + cf.im * &s), 1.0);
        c += cf.norm_sqr();
    }
    Term::Affine { b, c }
}

pub(crate) fn mse_value(h: &CVec, w: &CVec, p: &CMat, u: Complex64, noise: f64) -> f64 {
    let hw = inner(h, w);
    let interf = crate::linalg::row_norm_sqr(h, p);
    u.norm_sqr() * (hw.norm_sqr() + interf + noise) + 1.0 - 2.0 * (u.conj() * hw).re
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    n_s: usize,
    m: usize,
}

impl Layout {
    fn n_beams(&self) -> usize {
        2 * self.n_s * (self.m + 1)
    }

    fn n(&self) -> usize {
        self.n_beams() + self.m
    }

    /// Offset of beam block `b` (0 = information beam, `k+1` = energy beam `k`).
    fn block(&self, b: usize) -> usize {
        2 * self.n_s * b
    }

    fn y(&self, m: usize) -> usize {
        self.n_beams() + m
    }

    fn pack(&self, w: &CVec, p: &CMat, y: &[f64], pt: f64, y_scale: &[f64]) -> DVector<f64> {
        let mut x = DVector::zeros(self.n());
        let s = 1.0 / pt.sqrt();
        let mut put = |off: usize, col: &CVec| {
            for i in 0..self.n_s {
                x[off + i] = col[i].re * s;
                x[off + self.n_s + i] = col[i].im * s;
            }
        };
        put(self.block(0), w);
        for k in 0..self.m {
            put(self.block(k + 1), &p.column(k).into_owned());
        }
        for m in 0..self.m.min(y.len()) {
            x[self.y(m)] = y[m] / y_scale[m];
        }
        x
    }

    fn unpack_beams(&self, x: &DVector<f64>, pt: f64) -> (CVec, CMat) {
        let s = pt.sqrt();
        let get = |off: usize| CVec::from_fn(self.n_s, |i, _| Complex64::new(x[off + i], x[off + self.n_s + i]) * s);
        let w = get(self.block(0));
        let mut p = CMat::zeros(self.n_s, self.m);
        for k in 0..self.m {
            p.set_column(k, &get(self.block(k + 1)));
        }
        (w, p)
    }
}

/// Solves the Step-3 subproblem from the feasible warm start `warm`.
///
/// The returned solution carries the subproblem's `(z, u, v)`; its
/// objective never exceeds the warm start's.
pub fn solve_step3(prob: &ConvexSubproblem, warm: &BeamformingSolution, tol: f64) -> Result<(BeamformingSolution, SolverReport)> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("solver tolerance must be positive, got {tol}")));
    }
    if prob.p_smooth < 1.0 {
        return Err(Error::Domain(format!("the Step-3 objective is convex only for p ≥ 1, got p = {}", prob.p_smooth)));
    }
    if prob.eps.len() != prob.m() || warm.y.len() != prob.m() {
        return Err(Error::Dimension("per-EU data does not match the EU count".into()));
    }
    let lay = prob.layout();
    let y_scale = prob.y_scale(&warm.y);
    let prog = prob.program(&y_scale);
    let mut x0 = lay.pack(&warm.w, &warm.p_mat, &warm.y, prob.pt, &y_scale);
    nudge_inside(&prog, &lay, &mut x0);
    let opts = BarrierOptions { tol, ..BarrierOptions::default() };
    let (x, report) = minimize(&prog, &x0, &opts)?;
    if report.status == SolverStatus::Infeasible {
        return Err(Error::Infeasible("linearized short-term subproblem has no feasible point".into()));
    }
    let (w, p_mat) = lay.unpack_beams(&x, prob.pt);
    let y = (0..prob.m()).map(|m| x[lay.y(m)] * y_scale[m]).collect();
    Ok((BeamformingSolution { w, p_mat, z: prob.z, u: prob.u, v: prob.v, y }, report))
}

/// Moves a warm start with active power or SINR-bound constraints a
/// negligible distance into the interior so the barrier can start from it.
fn nudge_inside(prog: &ConvexProgram, lay: &Layout, x: &mut DVector<f64>) {
    let Some(vals) = prog.constraint_values(x) else { return };
    if vals.iter().all(|&v| v < -1e-13) {
        return;
    }
    let nb = lay.n_beams();
    if vals[0] >= -1e-13 {
        x.rows_mut(0, nb).scale_mut(1.0 - 1e-10);
    }
    for m in 0..lay.m {
        let i = lay.y(m);
        x[i] = x[i] * (1.0 + 1e-9) + 1e-12;
    }
}

/// Energy beam `√ε g/‖g‖²` that delivers exactly `ε` to a receiver with channel `g`.
pub fn matched_filter_beam(g: &CVec, eps: f64) -> CVec {
    g * Complex64::new(eps.sqrt() / norm_sqr(g), 0.0)
}

fn unit_or_first(h: &CVec) -> CVec {
    let n = h.norm();
    if n > 0.0 {
        h / Complex64::new(n, 0.0)
    } else {
        let mut e = CVec::zeros(h.len());
        e[0] = Complex64::new(1.0, 0.0);
        e
    }
}

/// Whether `(w, P)` meets the power budget and all harvesting thresholds up
/// to a relative tolerance.
pub fn is_feasible(eff: &EffectiveChannels, sol: &BeamformingSolution, cfg: &SystemConfig, rel_tol: f64) -> bool {
    let pt = cfg.pt_w();
    sol.power() <= pt * (1.0 + rel_tol)
        && cfg.eps_vec().iter().enumerate().all(|(m, &e)| harvested_power(eff, sol, m) >= e * (1.0 - rel_tol))
}

/// A point satisfying the power budget and all harvesting constraints.
///
/// Tries matched-filter energy beams with a 10 % margin first, then a
/// max-min harvesting-slack program solved by successive linearization.
pub fn find_feasible(eff: &EffectiveChannels, cfg: &SystemConfig) -> Result<BeamformingSolution> {
    let (n_s, m) = (eff.n_s(), eff.m());
    let pt = cfg.pt_w();
    let eps = cfg.eps_vec();
    if eps.len() != m {
        return Err(Error::Dimension(format!("{} thresholds for {m} EUs", eps.len())));
    }
    let h_dir = unit_or_first(&eff.h_tilde);
    if eps.iter().all(|&e| e == 0.0) {
        return Ok(BeamformingSolution::from_beams(h_dir * Complex64::new(pt.sqrt(), 0.0), CMat::zeros(n_s, m)));
    }
    for (k, (g, &e)) in eff.g_tilde.iter().zip(&eps).enumerate() {
        if e > pt * norm_sqr(g) {
            return Err(Error::Infeasible(format!("EU {k} cannot harvest {e:e} W even with full power")));
        }
    }

    let mut p = CMat::zeros(n_s, m);
    let mut used = 0.0;
    for (k, (g, &e)) in eff.g_tilde.iter().zip(&eps).enumerate() {
        if e > 0.0 {
            let col = matched_filter_beam(g, 1.1 * e);
            used += norm_sqr(&col);
            p.set_column(k, &col);
        }
    }
    if used <= pt {
        // a hair below the budget so the point is strictly feasible after rounding
        let w = h_dir * Complex64::new(((pt - used) * (1.0 - 1e-12)).sqrt(), 0.0);
        return Ok(BeamformingSolution::from_beams(w, p));
    }
    max_min_slack(eff, &eps, pt)
}

/// Matched-filter energy beams aimed at `margin·εₘ` with the rest of the
/// budget on the IU direction. `None` when `margin` is 0, no EU needs power,
/// or the beams would take more than 90 % of the budget.
pub fn energy_heavy_start(eff: &EffectiveChannels, cfg: &SystemConfig, margin: f64) -> Option<BeamformingSolution> {
    let eps = cfg.eps_vec();
    if margin <= 0.0 || eps.len() != eff.m() || eps.iter().all(|&e| e == 0.0) {
        return None;
    }
    let pt = cfg.pt_w();
    let mut p = CMat::zeros(eff.n_s(), eff.m());
    let mut used = 0.0;
    for (k, (g, &e)) in eff.g_tilde.iter().zip(&eps).enumerate() {
        if e > 0.0 {
            let col = matched_filter_beam(g, margin * e);
            used += norm_sqr(&col);
            p.set_column(k, &col);
        }
    }
    if used > 0.9 * pt {
        return None;
    }
    let w = unit_or_first(&eff.h_tilde) * Complex64::new((pt - used).sqrt() * (1.0 - 1e-12), 0.0);
    Some(BeamformingSolution::from_beams(w, p))
}

/// Maximizes `min_m Qₘ/εₘ − 1` under the power budget by repeatedly solving
/// the program with harvested powers linearized at the previous point.
fn max_min_slack(eff: &EffectiveChannels, eps: &[f64], pt: f64) -> Result<BeamformingSolution> {
    let (n_s, m) = (eff.n_s(), eff.m());
    let lay = Layout { n_s, m };
    let nb = lay.n_beams();
    let n = nb + 1;
    let active: Vec<usize> = (0..m).filter(|&k| eps[k] > 0.0).collect();

    // half the budget, split evenly, energy beams along the EU channels
    let share = (pt / (2.0 * (m + 1) as f64)).sqrt();
    let mut w = unit_or_first(&eff.h_tilde) * Complex64::new(share, 0.0);
    let mut p = CMat::zeros(n_s, m);
    for k in 0..m {
        p.set_column(k, &(unit_or_first(&eff.g_tilde[k]) * Complex64::new(share, 0.0)));
    }
    let true_slack = |w: &CVec, p: &CMat| {
        let sol = BeamformingSolution::from_beams(w.clone(), p.clone());
        active.iter().map(|&k| harvested_power(eff, &sol, k) / eps[k] - 1.0).fold(f64::INFINITY, f64::min)
    };

    let mut last_t = f64::NEG_INFINITY;
    for _round in 0..50 {
        let x_ref = lay.pack(&w, &p, &[], pt, &[]);
        let mut e_t = DVector::zeros(n);
        e_t[nb] = 1.0;
        let mut constraints = vec![vec![Term::Quadratic { q: DMatrix::identity(nb, nb), b: DVector::zeros(0), c: -1.0 }]];
        for &k in &active {
            // 1 + t − L̂ₖ(x) ≤ 0
            constraints.push(vec![eh_affine(&eff.g_tilde[k], eps[k], pt, &lay, &x_ref, 1), Term::Affine { b: e_t.clone(), c: 0.0 }]);
        }
        let prog = ConvexProgram { n, objective: vec![Term::Affine { b: -&e_t, c: 0.0 }], constraints };
        let mut x0 = DVector::zeros(n);
        x0.rows_mut(0, nb).copy_from(&x_ref.rows(0, nb));
        let lin_slack = {
            let mut probe = x0.clone();
            probe[nb] = 0.0;
            prog.constraints[1..].iter().map(|c| -c.iter().map(|t| t.value(&probe).unwrap()).sum::<f64>()).fold(f64::INFINITY, f64::min)
        };
        x0[nb] = lin_slack - 1.0;
        // shrink onto a strictly interior point of the power ball
        let pw = x0.rows(0, nb).norm_squared();
        if pw >= 1.0 {
            let f = (0.5 / pw).sqrt();
            x0.rows_mut(0, nb).scale_mut(f);
            let probe = x0.clone();
            let ls = prog.constraints[1..].iter().map(|c| -c.iter().map(|t| t.value(&probe).unwrap()).sum::<f64>() + probe[nb]).fold(f64::INFINITY, f64::min);
            x0[nb] = ls - 1.0;
        }
        let (x, _rep) = minimize(&prog, &x0, &BarrierOptions::default())?;
        let (wn, pn) = lay.unpack_beams(&x, pt);
        w = wn;
        p = pn;
        let t = true_slack(&w, &p);
        if t >= 0.1 || (t - last_t).abs() < 1e-6 {
            break;
        }
        last_t = t;
    }
    if true_slack(&w, &p) < 0.0 {
        return Err(Error::Infeasible("harvesting thresholds cannot be met within the power budget".into()));
    }
    Ok(BeamformingSolution::from_beams(w, p))
}
