//! Quick invariant smoke suite behind `validate --quick`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, SchemeId};
use super::run::run_scheme;
use crate::cvxcore::is_feasible;
use crate::heuristic::{bcd_sweeps, build_a_bar, weight_a};
use crate::linalg::CVec;
use crate::longterm::grad_theta;
use crate::metrics::{log_sum_exp, smooth_secrecy};
use crate::scenario::{draw_channel_sample, effective_channels, ChannelStats, PhaseShifts, SystemConfig};
use crate::shortterm::{bcd_objective, solve_from_scratch, tighten_auxiliaries, CccpBcdConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn small_cfg() -> SystemConfig {
    SystemConfig { n_r: 4, m: 2, ..SystemConfig::default() }
}

fn lse_bounds(rng: &mut ChaCha8Rng) -> Check {
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let m = rng.gen_range(1..=8);
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mx = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for p in [1.0, 2.0, 4.0, 8.0] {
            let l = log_sum_exp(&x, p).unwrap_or(f64::NAN);
            let up = mx + (m as f64).log2() / p;
            worst = worst.max(mx - l).max(l - up);
        }
    }
    check("log-sum-exp bounds", worst <= 1e-12, format!("max violation {worst:.2e}"))
}

fn shortterm_monotone(rng: &mut ChaCha8Rng) -> Check {
    let cfg = small_cfg();
    let ccfg = CccpBcdConfig { max_outer_iters: 10, ..CccpBcdConfig::default() };
    let mut worst_rise = 0.0f64;
    let mut identity = 0.0f64;
    let mut feasible = true;
    for _ in 0..3 {
        let Ok(stats) = ChannelStats::new(&cfg, rng) else { return check("short-term monotonicity", false, "scenario".into()) };
        let s = draw_channel_sample(&stats, rng);
        let eff = effective_channels(&s, &PhaseShifts::constant(cfg.n_r, 1.0)).expect("dimensions");
        match solve_from_scratch(&eff, &cfg, &ccfg) {
            Ok(out) => {
                for w in out.trace.windows(2) {
                    worst_rise = worst_rise.max(w[1] - w[0]);
                }
                feasible &= is_feasible(&eff, &out.solution, &cfg, 1e-6);
                let mut sol = out.solution.clone();
                tighten_auxiliaries(&eff, &mut sol, &cfg);
                let lhs = bcd_objective(&eff, &sol, &cfg);
                let rhs = 1.0 + 1.0 / cfg.p_smooth - std::f64::consts::LN_2 * smooth_secrecy(&eff, &sol, &cfg);
                identity = identity.max((lhs - rhs).abs());
            }
            Err(e) => return check("short-term monotonicity", false, e.to_string()),
        }
    }
    check(
        "short-term monotonicity",
        worst_rise <= 1e-7 && feasible && identity <= 1e-8,
        format!("max rise {worst_rise:.2e}, identity gap {identity:.2e}, feasible {feasible}"),
    )
}

fn gradient_fd(rng: &mut ChaCha8Rng) -> Check {
    let cfg = small_cfg();
    let stats = ChannelStats::new(&cfg, rng).expect("scenario");
    let s = draw_channel_sample(&stats, rng);
    let theta = PhaseShifts::new((0..cfg.n_r).map(|_| rng.gen::<f64>() * 6.0).collect());
    let eff = effective_channels(&s, &theta).expect("dimensions");
    let Ok(out) = solve_from_scratch(&eff, &cfg, &CccpBcdConfig { max_outer_iters: 3, ..CccpBcdConfig::default() }) else {
        return check("phase gradient", false, "short-term solve failed".into());
    };
    let sol = out.solution;
    let g = grad_theta(&s, &theta, &sol, &cfg).expect("dimensions");
    let h = 1e-6;
    let mut err = 0.0f64;
    let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    for n in 0..cfg.n_r {
        let shift = |d: f64| {
            let mut t = theta.theta().to_vec();
            t[n] += d;
            smooth_secrecy(&effective_channels(&s, &PhaseShifts::new(t)).expect("dimensions"), &sol, &cfg)
        };
        err = err.max(((shift(h) - shift(-h)) / (2.0 * h) - g[n]).abs());
    }
    let rel = err / gnorm.max(1e-300);
    check("phase gradient", rel < 1e-5, format!("relative error {rel:.2e}"))
}

fn heuristic_monotone(rng: &mut ChaCha8Rng) -> Check {
    let cfg = small_cfg();
    let stats = ChannelStats::new(&cfg, rng).expect("scenario");
    let a = weight_a(&stats, 50, rng).unwrap_or(1.0);
    let Ok(mat) = build_a_bar(&stats, a, 50, rng) else { return check("unimodular sweeps", false, "matrix".into()) };
    let init = CVec::from_fn(cfg.n_r + 1, |_, _| num_complex::Complex64::new(1.0, 0.0));
    let (_, trace) = bcd_sweeps(&mat.a_bar, &init, 50, 0.0);
    let scale = trace[0].abs().max(1e-300);
    let rise = trace.windows(2).map(|w| (w[1] - w[0]) / scale).fold(0.0f64, f64::max);
    check("unimodular sweeps", rise <= 1e-12, format!("max relative rise {rise:.2e}"))
}

fn determinism() -> Check {
    let ecfg = ExperimentConfig {
        system: small_cfg(),
        t_f: 2,
        t_s: 2,
        t_c: 1,
        monte_carlo: 1,
        heuristic_samples: 20,
        short_term: CccpBcdConfig { max_outer_iters: 3, ..CccpBcdConfig::default() },
        ..ExperimentConfig::default()
    };
    let runs: Vec<_> = (0..2).map(|_| run_scheme(&ecfg, SchemeId::SaSsca, 11)).collect();
    match (&runs[0], &runs[1]) {
        (Ok(a), Ok(b)) => check("determinism", a == b, format!("{} slots", a.slots.len())),
        _ => check("determinism", false, "run failed".into()),
    }
}

/// Runs every check; a few seconds on one core.
pub fn run_quick(seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    vec![lse_bounds(&mut rng), shortterm_monotone(&mut rng), gradient_fd(&mut rng), heuristic_monotone(&mut rng), determinism()]
}

#[cfg(test)]
mod tests {
    #[test]
    fn quick_suite_passes() {
        for c in super::run_quick(1) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
