use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_swipt::cvxcore::{find_feasible, is_feasible};
use ris_swipt::heuristic::{draw_samples, low_complexity_phases, minimize_unimodular, StatMatrix};
use ris_swipt::linalg::{c64, CMat, CVec};
use ris_swipt::longterm::{project_discrete, ssca_step, update_surrogate_with, SurrogateState};
use ris_swipt::metrics::{smooth_secrecy, worst_case_secrecy, BeamformingSolution};
use ris_swipt::scenario::{circular_distance, draw_channel_sample, effective_channels, ChannelStats, EffectiveChannels, PhaseShifts, SystemConfig};

fn cvec_from(parts: &[(f64, f64)]) -> CVec {
    CVec::from_iterator(parts.len(), parts.iter().map(|&(a, b)| c64(a, b)))
}

fn hermitian(n: usize, vals: &[(f64, f64)]) -> CMat {
    let b = CMat::from_fn(n, n, |i, j| {
        let (a, c) = vals[i * n + j];
        c64(a, c)
    });
    (&b + b.adjoint()) * c64(0.5, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantized_phases_are_on_grid_and_nearest(theta in prop::collection::vec(-10.0f64..10.0, 1..20), q in 1u32..5) {
        let p = PhaseShifts::new(theta);
        let d = project_discrete(&p, q);
        let step = TAU / (1u32 << q) as f64;
        for (a, b) in p.theta().iter().zip(d.theta()) {
            let k = (b / step).round();
            prop_assert!(circular_distance(*b, k * step) < 1e-12);
            prop_assert!(circular_distance(*a, *b) <= 0.5 * step + 1e-12);
        }
        prop_assert_eq!(project_discrete(&d, q), d);
    }

    #[test]
    fn unimodular_minimizer_never_worse_than_start(n in 2usize..8, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<(f64, f64)> = (0..(n + 1) * (n + 1)).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let mat = StatMatrix { a_bar: hermitian(n + 1, &vals), n_samples: 1, weight: 0.0 };
        let init = PhaseShifts::new((0..n).map(|_| rng.gen_range(0.0..TAU)).collect());
        let out = minimize_unimodular(&mat, &init, 200, 1e-10);
        prop_assert_eq!(out.len(), n);
        prop_assert!(mat.objective(&out) <= mat.objective(&init) + 1e-9);
    }

    #[test]
    fn worst_case_secrecy_dominates_smooth(seed in any::<u64>(), p in 1.0f64..16.0) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = SystemConfig { n_r: 4, m: 3, p_smooth: p, ..SystemConfig::default() };
        let stats = ChannelStats::new(&cfg, &mut rng).unwrap();
        let s = draw_channel_sample(&stats, &mut rng);
        let theta = PhaseShifts::new((0..cfg.n_r).map(|_| rng.gen_range(0.0..TAU)).collect());
        let eff = effective_channels(&s, &theta).unwrap();
        let mut g = |k: usize| CVec::from_fn(k, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let sol = BeamformingSolution::from_beams(g(cfg.n_s), CMat::from_columns(&(0..cfg.m).map(|_| g(cfg.n_s)).collect::<Vec<_>>()));
        let wc = worst_case_secrecy(&eff, &sol, &cfg);
        prop_assert!(wc >= 0.0);
        prop_assert!(wc + 1e-12 >= smooth_secrecy(&eff, &sol, &cfg));
    }

    #[test]
    fn ssca_step_interpolates_toward_maximizer(n in 1usize..10, t in 0usize..50, grads in prop::collection::vec(-1.0f64..1.0, 10)) {
        let mut st = SurrogateState::new(PhaseShifts::constant(n, 1.0), 0.5, 0.6, 0.9).unwrap();
        st.t = t;
        let g = grads[..n].to_vec();
        let next = ssca_step(&update_surrogate_with(&st, &[1.0], &[g]).unwrap());
        prop_assert_eq!(next.t, t + 1);
        prop_assert!(next.rho() < st.rho() && next.gamma() < st.gamma());
        prop_assert_eq!(next.theta.len(), n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn find_feasible_output_is_feasible(n_s in 1usize..5, m in 1usize..5, eps_uw in 0.0f64..50.0, parts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 25)) {
        let cfg = SystemConfig { n_s, m, eps_uw, noise_iu_dbm: 30.0, noise_eu_dbm: 30.0, ..SystemConfig::default() };
        let eff = EffectiveChannels {
            h_tilde: cvec_from(&parts[..n_s]),
            g_tilde: (0..m).map(|k| cvec_from(&parts[n_s * (k + 1)..n_s * (k + 2)]).scale(1e-3)).collect(),
        };
        if let Ok(sol) = find_feasible(&eff, &cfg) {
            prop_assert!(is_feasible(&eff, &sol, &cfg, 1e-9));
        }
    }

    #[test]
    fn low_complexity_phases_are_finite(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = SystemConfig { n_r: 6, m: 2, ..SystemConfig::default() };
        let stats = ChannelStats::new(&cfg, &mut rng).unwrap();
        let samples = draw_samples(&stats, 20, &mut rng);
        let theta = low_complexity_phases(&samples).unwrap();
        prop_assert_eq!(theta.len(), 6);
        prop_assert!(theta.theta().iter().all(|t| t.is_finite() && *t > 0.0 && *t <= TAU));
    }
}
