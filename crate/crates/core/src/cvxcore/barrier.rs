//! Dense log-barrier interior-point method for small smooth convex programs
//! `min f₀(x) s.t. fᵢ(x) ≤ 0`, every function being a sum of [`Term`]s.

use std::ops::AddAssign;

use nalgebra::{Cholesky, DMatrix, DVector};

use super::nnls::nnls;
use crate::{Error, Result};

/// Smooth convex building block. Each term reads a prefix of `x` (or the
/// listed indices), so the same terms can be reused on an augmented vector.
#[derive(Debug, Clone)]
pub enum Term {
    /// `bᵀx + c`.
    Affine { b: DVector<f64>, c: f64 },
    /// `xᵀQx + bᵀx + c` with `Q` positive semidefinite.
    Quadratic { q: DMatrix<f64>, b: DVector<f64>, c: f64 },
    /// `xᵀQx / (dᵀx + d0)` on the domain `dᵀx + d0 > 0`.
    QuadOverAffine { q: DMatrix<f64>, d: DVector<f64>, d0: f64 },
    /// `weight · Σₖ (1 + scaleₖ x[idxₖ])^p` with `p ≥ 1`, on `1 + scale·x > 0`.
    PowerSum { idx: Vec<usize>, scale: Vec<f64>, weight: f64, p: f64 },
}

fn dot_prefix(a: &DVector<f64>, x: &DVector<f64>) -> f64 {
    a.iter().zip(x.iter()).map(|(a, x)| a * x).sum()
}

fn quad_form(q: &DMatrix<f64>, x: &DVector<f64>) -> (f64, DVector<f64>) {
    let k = q.nrows();
    let xs = x.rows(0, k);
    let qx = q * xs;
    (xs.dot(&qx), qx)
}

impl Term {
    /// Value, or `None` outside the domain.
    pub fn value(&self, x: &DVector<f64>) -> Option<f64> {
        match self {
            Term::Affine { b, c } => Some(dot_prefix(b, x) + c),
            Term::Quadratic { q, b, c } => Some(quad_form(q, x).0 + dot_prefix(b, x) + c),
            Term::QuadOverAffine { q, d, d0 } => {
                let den = dot_prefix(d, x) + d0;
                (den > 0.0).then(|| quad_form(q, x).0 / den)
            }
            Term::PowerSum { idx, scale, weight, p } => {
                let mut s = 0.0;
                for (&i, &a) in idx.iter().zip(scale) {
                    let base = 1.0 + a * x[i];
                    if base <= 0.0 {
                        return None;
                    }
                    s += base.powf(*p);
                }
                Some(weight * s)
            }
        }
    }

    /// Adds the gradient into `g` and returns the value. Must only be
    /// called inside the domain.
    fn value_grad(&self, x: &DVector<f64>, g: &mut DVector<f64>) -> f64 {
        match self {
            Term::Affine { b, c } => {
                g.rows_mut(0, b.len()).add_assign(b);
                dot_prefix(b, x) + c
            }
            Term::Quadratic { q, b, c } => {
                let k = q.nrows();
                let (val, qx) = quad_form(q, x);
                g.rows_mut(0, k).axpy(2.0, &qx, 1.0);
                g.rows_mut(0, b.len()).add_assign(b);
                val + dot_prefix(b, x) + c
            }
            Term::QuadOverAffine { q, d, d0 } => {
                // ∇ = 2Qx/D − N d/D²
                let k = q.nrows();
                let den = dot_prefix(d, x) + d0;
                let (num, qx) = quad_form(q, x);
                g.rows_mut(0, k).axpy(2.0 / den, &qx, 1.0);
                g.rows_mut(0, d.len()).axpy(-num / (den * den), d, 1.0);
                num / den
            }
            Term::PowerSum { idx, scale, weight, p } => {
                let mut s = 0.0;
                for (&i, &a) in idx.iter().zip(scale) {
                    let base = 1.0 + a * x[i];
                    let pm1 = base.powf(p - 1.0);
                    s += pm1 * base;
                    g[i] += weight * p * a * pm1;
                }
                weight * s
            }
        }
    }

    /// Adds `weight · ∇²` into `h`.
    fn add_hessian(&self, x: &DVector<f64>, h: &mut DMatrix<f64>, weight: f64) {
        match self {
            Term::Affine { .. } => {}
            Term::Quadratic { q, .. } => {
                let k = q.nrows();
                h.view_mut((0, 0), (k, k)).zip_apply(q, |hij, qij| *hij += 2.0 * weight * qij);
            }
            Term::QuadOverAffine { q, d, d0 } => {
                // ∇² = 2Q/D − 2(Qx dᵀ + d xᵀQ)/D² + 2N d dᵀ/D³
                let k = q.nrows();
                let kd = d.len();
                let den = dot_prefix(d, x) + d0;
                let (num, qx) = quad_form(q, x);
                h.view_mut((0, 0), (k, k)).zip_apply(q, |hij, qij| *hij += 2.0 * weight / den * qij);
                let c = -2.0 * weight / (den * den);
                h.view_mut((0, 0), (k, kd)).ger(c, &qx, d, 1.0);
                h.view_mut((0, 0), (kd, k)).ger(c, d, &qx, 1.0);
                h.view_mut((0, 0), (kd, kd)).ger(2.0 * weight * num / (den * den * den), d, d, 1.0);
            }
            Term::PowerSum { idx, scale, weight: w, p } => {
                for (&i, &a) in idx.iter().zip(scale) {
                    let base = 1.0 + a * x[i];
                    h[(i, i)] += weight * w * p * (p - 1.0) * a * a * base.powf(p - 2.0);
                }
            }
        }
    }
}

fn sum_value(terms: &[Term], x: &DVector<f64>) -> Option<f64> {
    terms.iter().map(|t| t.value(x)).sum()
}

fn sum_value_grad(terms: &[Term], x: &DVector<f64>, g: &mut DVector<f64>) -> f64 {
    g.fill(0.0);
    terms.iter().map(|t| t.value_grad(x, g)).sum()
}

fn add_hessians(terms: &[Term], x: &DVector<f64>, h: &mut DMatrix<f64>, weight: f64) {
    terms.iter().for_each(|t| t.add_hessian(x, h, weight));
}

#[cfg(test)]
fn sum_derivs(terms: &[Term], x: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
    let n = x.len();
    let mut g = DVector::zeros(n);
    let mut h = DMatrix::zeros(n, n);
    let v = sum_value_grad(terms, x, &mut g);
    add_hessians(terms, x, &mut h, 1.0);
    (v, g, h)
}

/// `min Σ objective  s.t.  Σ constraints[i] ≤ 0`.
#[derive(Debug, Clone)]
pub struct ConvexProgram {
    pub n: usize,
    pub objective: Vec<Term>,
    pub constraints: Vec<Vec<Term>>,
}

impl ConvexProgram {
    pub fn objective_value(&self, x: &DVector<f64>) -> Option<f64> {
        sum_value(&self.objective, x)
    }

    /// Constraint values, `None` if `x` leaves some domain.
    pub fn constraint_values(&self, x: &DVector<f64>) -> Option<Vec<f64>> {
        self.constraints.iter().map(|c| sum_value(c, x)).collect()
    }

    /// Largest constraint value (`−∞` without constraints).
    pub fn max_violation(&self, x: &DVector<f64>) -> Option<f64> {
        self.constraint_values(x).map(|v| v.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierOptions {
    /// KKT tolerance for declaring optimality.
    pub tol: f64,
    pub mu_init: f64,
    pub mu_final: f64,
    pub mu_factor: f64,
    /// Newton stop on the relative barrier-gradient norm.
    pub grad_tol: f64,
    /// Cap on the total number of Newton steps.
    pub max_newton: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self { tol: 1e-7, mu_init: 1.0, mu_final: 1e-8, mu_factor: 0.1, grad_tol: 1e-9, max_newton: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub status: SolverStatus,
    pub objective: f64,
    /// `‖∇f₀ + Σλᵢ∇fᵢ‖∞ / (1 + ‖∇f₀‖∞)` with non-negative multipliers
    /// fitted by NNLS.
    pub stationarity: f64,
    /// Largest `λᵢ·|fᵢ|`.
    pub complementarity: f64,
    /// Largest constraint value at the returned point.
    pub max_violation: f64,
    pub iterations: usize,
}

/// Solves `H Δ = −g` after symmetric diagonal equilibration, adding a
/// growing ridge if the factorization fails.
fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let n = g.len();
    let d = DVector::from_fn(n, |i, _| {
        let hii = h[(i, i)];
        if hii > 1e-300 {
            1.0 / hii.sqrt()
        } else {
            1.0
        }
    });
    let mut hs = h.clone();
    for j in 0..n {
        for i in 0..n {
            hs[(i, j)] *= d[i] * d[j];
        }
    }
    let gs = g.component_mul(&d);
    let mut ridge = 0.0;
    for _ in 0..14 {
        let mut m = hs.clone();
        for i in 0..n {
            m[(i, i)] += ridge;
        }
        if let Some(ch) = Cholesky::new(m) {
            let z = ch.solve(&(-&gs));
            if z.iter().all(|v| v.is_finite()) {
                return Some(z.component_mul(&d));
            }
        }
        ridge = if ridge == 0.0 { 1e-14 } else { ridge * 10.0 };
    }
    None
}

struct Barrier<'a> {
    prog: &'a ConvexProgram,
}

impl Barrier<'_> {
    /// `f₀ + μ Σ −ln(−fᵢ)`, `None` outside the strict interior.
    fn value(&self, x: &DVector<f64>, mu: f64) -> Option<f64> {
        let f0 = self.prog.objective_value(x)?;
        let mut b = 0.0;
        for c in &self.prog.constraints {
            let fi = sum_value(c, x)?;
            if !(fi < 0.0) {
                return None;
            }
            b -= (-fi).ln();
        }
        Some(f0 + mu * b)
    }

    /// Barrier gradient and Hessian together with `∇f₀`.
    fn derivs(&self, x: &DVector<f64>, mu: f64) -> (DVector<f64>, DMatrix<f64>, DVector<f64>) {
        let n = x.len();
        let mut g0 = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        sum_value_grad(&self.prog.objective, x, &mut g0);
        add_hessians(&self.prog.objective, x, &mut h, 1.0);
        let mut g = g0.clone();
        let mut gi = DVector::zeros(n);
        for c in &self.prog.constraints {
            let fi = sum_value_grad(c, x, &mut gi);
            let inv = 1.0 / (-fi);
            g.axpy(mu * inv, &gi, 1.0);
            h.ger(mu * inv * inv, &gi, &gi, 1.0);
            add_hessians(c, x, &mut h, mu * inv);
        }
        (g, h, g0)
    }
}

struct StageResult {
    x: DVector<f64>,
    iterations: usize,
    hit_cap: bool,
}

/// Central-path following from a strictly feasible `x`.
fn follow_path(
    prog: &ConvexProgram,
    mut x: DVector<f64>,
    opts: &BarrierOptions,
    mu_start: f64,
    early_stop: &dyn Fn(&DVector<f64>) -> bool,
) -> StageResult {
    let bar = Barrier { prog };
    let mut mu = mu_start;
    let mut iterations = 0;
    loop {
        loop {
            if iterations >= opts.max_newton {
                return StageResult { x, iterations, hit_cap: true };
            }
            let (g, h, g0) = bar.derivs(&x, mu);
            let scale = 1.0 + g0.amax();
            if g.amax() <= opts.grad_tol * scale {
                break;
            }
            let Some(dx) = newton_direction(&h, &g) else { break };
            let slope = g.dot(&dx);
            let phi = bar.value(&x, mu).expect("iterate stays interior");
            // Newton decrement at the round-off floor of the barrier value
            if !(slope < 0.0) || -slope / 2.0 <= 1e-14 * (scale + phi.abs()) {
                break;
            }
            let mut alpha = 1.0;
            let mut accepted = None;
            while alpha > 1e-14 {
                let xn = &x + alpha * &dx;
                if let Some(pn) = bar.value(&xn, mu) {
                    if pn <= phi + 0.01 * alpha * slope {
                        accepted = Some(xn);
                        break;
                    }
                }
                alpha *= 0.5;
            }
            iterations += 1;
            match accepted {
                Some(xn) => {
                    let moved = (&xn - &x).amax();
                    x = xn;
                    if moved <= 1e-15 * (1.0 + x.amax()) {
                        break;
                    }
                }
                None => break,
            }
            if early_stop(&x) {
                return StageResult { x, iterations, hit_cap: false };
            }
        }
        if mu <= opts.mu_final * (1.0 + 1e-12) {
            return StageResult { x, iterations, hit_cap: false };
        }
        mu = (mu * opts.mu_factor).max(opts.mu_final);
    }
}

/// Finds a strictly feasible point by minimizing the common slack `s` of
/// `fᵢ(x) ≤ s`. Returns the point and iterations, or the optimal slack when
/// no strictly feasible point was found.
fn phase_one(prog: &ConvexProgram, x0: &DVector<f64>, opts: &BarrierOptions) -> Result<(std::result::Result<DVector<f64>, f64>, usize)> {
    let n = prog.n;
    let fmax = prog
        .max_violation(x0)
        .ok_or_else(|| Error::Domain("starting point outside the constraint domains".into()))?;
    let mut e_s = DVector::zeros(n + 1);
    e_s[n] = 1.0;
    let constraints = prog
        .constraints
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.push(Term::Affine { b: -&e_s, c: 0.0 });
            c
        })
        .collect();
    let aug = ConvexProgram { n: n + 1, objective: vec![Term::Affine { b: e_s, c: 0.0 }], constraints };
    let mut xa = DVector::zeros(n + 1);
    xa.rows_mut(0, n).copy_from(x0);
    xa[n] = fmax + 1.0;
    let margin = 1e-4;
    let res = follow_path(&aug, xa, opts, opts.mu_init, &|x| x[n] < -margin);
    let s = res.x[n];
    let x = res.x.rows(0, n).into_owned();
    if s < 0.0 && prog.max_violation(&x).is_some_and(|v| v < 0.0) {
        Ok((Ok(x), res.iterations))
    } else {
        Ok((Err(s), res.iterations))
    }
}

/// KKT residual at a feasible point with multipliers from NNLS on
/// `[∇fᵢ; diag(fᵢ)] λ ≈ [−∇f₀; 0]`.
fn kkt_residual(prog: &ConvexProgram, x: &DVector<f64>) -> (f64, f64) {
    let n = prog.n;
    let k = prog.constraints.len();
    let mut g0 = DVector::zeros(n);
    sum_value_grad(&prog.objective, x, &mut g0);
    let mut a = DMatrix::zeros(n + k, k);
    let mut gi = DVector::zeros(n);
    for (i, c) in prog.constraints.iter().enumerate() {
        let fi = sum_value_grad(c, x, &mut gi);
        a.view_mut((0, i), (n, 1)).copy_from(&gi);
        a[(n + i, i)] = fi;
    }
    let mut b = DVector::zeros(n + k);
    b.rows_mut(0, n).copy_from(&(-&g0));
    let lam = nnls(&a, &b);
    let r = &a * &lam - &b;
    let scale = 1.0 + g0.amax();
    (r.rows(0, n).amax() / scale, r.rows(n, k).amax())
}

fn report_at(prog: &ConvexProgram, x: &DVector<f64>, status: SolverStatus, iterations: usize) -> SolverReport {
    let (stationarity, complementarity) = kkt_residual(prog, x);
    SolverReport {
        status,
        objective: prog.objective_value(x).unwrap_or(f64::NAN),
        stationarity,
        complementarity,
        max_violation: prog.max_violation(x).unwrap_or(f64::NAN),
        iterations,
    }
}

/// Threshold below which a constraint value counts as satisfied.
pub const FEAS_TOL: f64 = 1e-12;

/// Minimizes `prog` starting from `x0`.
///
/// A feasible `x0` that already satisfies the KKT conditions is returned
/// unchanged, and a feasible `x0` is never replaced by a worse point.
pub fn minimize(prog: &ConvexProgram, x0: &DVector<f64>, opts: &BarrierOptions) -> Result<(DVector<f64>, SolverReport)> {
    if x0.len() != prog.n {
        return Err(Error::Dimension(format!("start has {} entries, program has {}", x0.len(), prog.n)));
    }
    let f0_start = prog.objective_value(x0);
    let viol0 = prog.max_violation(x0);
    let start_feasible = f0_start.is_some() && viol0.is_some_and(|v| v <= FEAS_TOL);

    if start_feasible {
        let (stat, comp) = kkt_residual(prog, x0);
        if stat <= opts.tol && comp <= opts.tol {
            let rep = SolverReport {
                status: SolverStatus::Optimal,
                objective: f0_start.unwrap(),
                stationarity: stat,
                complementarity: comp,
                max_violation: viol0.unwrap(),
                iterations: 0,
            };
            return Ok((x0.clone(), rep));
        }
    }

    let mut iterations = 0;
    let interior = match viol0 {
        Some(v) if v < -1e-13 && f0_start.is_some() => x0.clone(),
        _ => {
            let (res, it) = phase_one(prog, x0, opts)?;
            iterations += it;
            match res {
                Ok(x) => x,
                Err(s) if s > 1e-9 => {
                    let rep = SolverReport {
                        status: SolverStatus::Infeasible,
                        objective: f0_start.unwrap_or(f64::NAN),
                        stationarity: f64::NAN,
                        complementarity: f64::NAN,
                        max_violation: s,
                        iterations,
                    };
                    return Ok((x0.clone(), rep));
                }
                Err(_) => {
                    // feasible set without a usable interior
                    let mut rep = report_at(prog, x0, SolverStatus::MaxIter, iterations);
                    rep.max_violation = viol0.unwrap_or(f64::NAN);
                    return Ok((x0.clone(), rep));
                }
            }
        }
    };

    let run = follow_path(prog, interior, opts, opts.mu_init, &|_| false);
    iterations += run.iterations;
    let mut rep = report_at(prog, &run.x, SolverStatus::MaxIter, iterations);
    let converged = !run.hit_cap && rep.stationarity <= opts.tol && rep.complementarity <= opts.tol;
    if converged {
        rep.status = SolverStatus::Optimal;
    }
    if start_feasible && rep.objective > f0_start.unwrap() {
        rep.objective = f0_start.unwrap();
        rep.max_violation = viol0.unwrap();
        return Ok((x0.clone(), rep));
    }
    Ok((run.x, rep))
}
