//! SINRs, harvested power and secrecy-rate metrics. All rates are in bits/s/Hz.

use num_complex::Complex64;

use crate::linalg::{frob_sqr, inner, norm_sqr, row_norm_sqr, CMat, CVec};
use crate::scenario::{EffectiveChannels, SystemConfig};
use crate::{Error, Result};

/// Short-term variables: information beam `w`, energy beams (columns of
/// `p_mat`) and the auxiliaries of the WMMSE reformulation.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub w: CVec,
    /// `n_s × m`, column `m` serves EU `m`.
    pub p_mat: CMat,
    pub z: f64,
    pub u: Complex64,
    pub v: f64,
    pub y: Vec<f64>,
}

impl BeamformingSolution {
    /// Beams with neutral auxiliaries (`z = v = 1`, `u = 0`, `y = 0`).
    pub fn from_beams(w: CVec, p_mat: CMat) -> Self {
        let m = p_mat.ncols();
        Self { w, p_mat, z: 1.0, u: Complex64::new(0.0, 0.0), v: 1.0, y: vec![0.0; m] }
    }

    pub fn zeros(n_s: usize, m: usize) -> Self {
        Self::from_beams(CVec::zeros(n_s), CMat::zeros(n_s, m))
    }

    /// Total transmit power `‖w‖² + ‖P‖²_F`.
    pub fn power(&self) -> f64 {
        norm_sqr(&self.w) + frob_sqr(&self.p_mat)
    }
}

/// Total received power `|aᴴw|² + ‖aᴴP‖²` from all beams.
fn received(a: &CVec, sol: &BeamformingSolution) -> (f64, f64) {
    (inner(a, &sol.w).norm_sqr(), row_norm_sqr(a, &sol.p_mat))
}

pub fn sinr_iu(eff: &EffectiveChannels, sol: &BeamformingSolution, noise_w: f64) -> f64 {
    let (sig, interf) = received(&eff.h_tilde, sol);
    sig / (interf + noise_w)
}

pub fn sinr_eu(eff: &EffectiveChannels, sol: &BeamformingSolution, m: usize, noise_w: f64) -> f64 {
    let (sig, interf) = received(&eff.g_tilde[m], sol);
    sig / (interf + noise_w)
}

pub fn sinr_eus(eff: &EffectiveChannels, sol: &BeamformingSolution, noise_w: f64) -> Vec<f64> {
    (0..eff.m()).map(|m| sinr_eu(eff, sol, m, noise_w)).collect()
}

/// RF power `Qₘ` reaching EU `m`; receiver noise is not counted.
pub fn harvested_power(eff: &EffectiveChannels, sol: &BeamformingSolution, m: usize) -> f64 {
    let (sig, interf) = received(&eff.g_tilde[m], sol);
    sig + interf
}

/// IU rate minus the best eavesdropper rate, without the clamp at zero.
pub fn secrecy_unclamped(eff: &EffectiveChannels, sol: &BeamformingSolution, cfg: &SystemConfig) -> f64 {
    let r_iu = sinr_iu(eff, sol, cfg.noise_iu_w()).ln_1p();
    let r_eu = sinr_eus(eff, sol, cfg.noise_eu_w()).into_iter().map(f64::ln_1p).fold(f64::NEG_INFINITY, f64::max);
    (r_iu - r_eu) / std::f64::consts::LN_2
}

/// Worst-case secrecy rate, clamped at zero.
pub fn worst_case_secrecy(eff: &EffectiveChannels, sol: &BeamformingSolution, cfg: &SystemConfig) -> f64 {
    secrecy_unclamped(eff, sol, cfg).max(0.0)
}

/// `(1/p) log₂ Σ 2^{p xᵢ}`, evaluated around the maximum entry.
pub fn log_sum_exp(x: &[f64], p: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Domain("log-sum-exp of an empty vector".into()));
    }
    if !(p > 0.0) {
        return Err(Error::Domain(format!("log-sum-exp exponent must be positive, got {p}")));
    }
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // the max term contributes exactly 1; log1p keeps the tiny remainder accurate
    let rest: f64 = x.iter().map(|&xi| (p * (xi - max)).exp2()).sum::<f64>() - 1.0;
    Ok(max + rest.ln_1p() / (p * std::f64::consts::LN_2))
}

/// Smoothed secrecy rate `log₂(1+SINR_I) − (1/p) log₂ Σₘ (1+SINRₘ)^p`.
pub fn smooth_secrecy(eff: &EffectiveChannels, sol: &BeamformingSolution, cfg: &SystemConfig) -> f64 {
    let r_iu = sinr_iu(eff, sol, cfg.noise_iu_w()).ln_1p() / std::f64::consts::LN_2;
    let r_eu: Vec<f64> = sinr_eus(eff, sol, cfg.noise_eu_w()).into_iter().map(|s| s.ln_1p() / std::f64::consts::LN_2).collect();
    r_iu - log_sum_exp(&r_eu, cfg.p_smooth).expect("at least one EU and p > 0 by config validation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;
    use proptest::prelude::*;

    fn eff_from(h: Vec<Complex64>, gs: Vec<Vec<Complex64>>) -> EffectiveChannels {
        EffectiveChannels { h_tilde: CVec::from_vec(h), g_tilde: gs.into_iter().map(CVec::from_vec).collect() }
    }

    /// Scalar-by-scalar expansion of `|aᴴw|² / (Σₖ |aᴴpₖ|² + σ²)`.
    fn sinr_explicit(a: &CVec, sol: &BeamformingSolution, noise: f64) -> f64 {
        let mut sig = c64(0.0, 0.0);
        for i in 0..a.len() {
            sig += a[i].conj() * sol.w[i];
        }
        let mut interf = 0.0;
        for k in 0..sol.p_mat.ncols() {
            let mut c = c64(0.0, 0.0);
            for i in 0..a.len() {
                c += a[i].conj() * sol.p_mat[(i, k)];
            }
            interf += c.re * c.re + c.im * c.im;
        }
        (sig.re * sig.re + sig.im * sig.im) / (interf + noise)
    }

    fn cfg_unit_noise(m: usize, p: f64) -> SystemConfig {
        SystemConfig { m, noise_iu_dbm: 30.0, noise_eu_dbm: 30.0, p_smooth: p, ..SystemConfig::default() }
    }

    #[test]
    fn sinr_trivial_cases() {
        let eff = eff_from(vec![c64(1.0, 0.0)], vec![vec![c64(0.5, 0.5)]]);
        let zero = BeamformingSolution::zeros(1, 1);
        assert_eq!(sinr_iu(&eff, &zero, 1.0), 0.0);
        assert_eq!(sinr_eu(&eff, &zero, 0, 1.0), 0.0);
        assert_eq!(harvested_power(&eff, &zero, 0), 0.0);
        let sol = BeamformingSolution::from_beams(CVec::from_vec(vec![c64(1.0, 0.0)]), CMat::zeros(1, 1));
        assert_eq!(sinr_iu(&eff, &sol, 1.0), 1.0);
        assert!((sinr_eu(&eff, &sol, 0, 2.0) - 0.5 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn harvested_power_sum_of_squares() {
        let eff = eff_from(vec![c64(1.0, 0.0)], vec![vec![c64(1.0, 0.0)]]);
        let sol = BeamformingSolution::from_beams(
            CVec::from_vec(vec![c64(1.0, 0.0)]),
            CMat::from_row_slice(1, 2, &[c64(1.0, 0.0), c64(0.0, 1.0)]),
        );
        assert!((harvested_power(&eff, &sol, 0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn secrecy_trivial_cases() {
        let cfg = cfg_unit_noise(2, 4.0);
        // equal channels for all users: SINRs coincide
        let h = vec![c64(0.3, 0.1), c64(-0.2, 0.4)];
        let eff = eff_from(h.clone(), vec![h.clone(), h.clone()]);
        let sol = BeamformingSolution::from_beams(CVec::from_vec(vec![c64(1.0, 0.0), c64(0.5, -1.0)]), CMat::zeros(2, 2));
        assert_eq!(worst_case_secrecy(&eff, &sol, &cfg), 0.0);
        // SINR_I = 3, SINR_E = 1
        let cfg1 = cfg_unit_noise(3, 4.0);
        let eff = eff_from(vec![c64(3f64.sqrt(), 0.0)], vec![vec![c64(1.0, 0.0)]; 3]);
        let sol = BeamformingSolution::from_beams(CVec::from_vec(vec![c64(1.0, 0.0)]), CMat::zeros(1, 3));
        assert!((worst_case_secrecy(&eff, &sol, &cfg1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lse_examples() {
        assert!((log_sum_exp(&[0.0, 0.0], 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[5.0], 3.7).unwrap(), 5.0);
        // reference: mpmath at 50 digits, (1/20) log2(2^20 + 2^40)
        let exact = 2.000_000_068_793_027_5;
        assert!((log_sum_exp(&[1.0, 2.0], 20.0).unwrap() - exact).abs() < 1e-15);
        assert!(log_sum_exp(&[], 1.0).is_err());
        assert!(log_sum_exp(&[1.0], 0.0).is_err());
        // overflow safety
        let big = log_sum_exp(&[1e4, 1e4], 8.0).unwrap();
        assert!((big - 1e4 - 0.125).abs() < 1e-9);
    }

    #[test]
    fn smooth_secrecy_gap_examples() {
        let cfg = cfg_unit_noise(4, 4.0);
        let g = vec![c64(0.3, 0.0)];
        let eff = eff_from(vec![c64(2.0, 0.0)], vec![g.clone(), g.clone(), g.clone(), g]);
        let sol = BeamformingSolution::from_beams(CVec::from_vec(vec![c64(1.0, 0.0)]), CMat::zeros(1, 4));
        let gap = secrecy_unclamped(&eff, &sol, &cfg) - smooth_secrecy(&eff, &sol, &cfg);
        assert!((gap - 0.5).abs() < 1e-12);

        let cfg1 = cfg_unit_noise(1, 4.0);
        let eff = eff_from(vec![c64(2.0, 0.0)], vec![vec![c64(0.7, 0.2)]]);
        let sol = BeamformingSolution::from_beams(CVec::from_vec(vec![c64(1.0, 0.0)]), CMat::zeros(1, 1));
        assert!((secrecy_unclamped(&eff, &sol, &cfg1) - smooth_secrecy(&eff, &sol, &cfg1)).abs() < 1e-14);
    }

    fn cplx() -> impl Strategy<Value = Complex64> {
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| c64(a, b))
    }

    fn instance(n_s: usize, m: usize) -> impl Strategy<Value = (EffectiveChannels, BeamformingSolution)> {
        (
            prop::collection::vec(cplx(), n_s),
            prop::collection::vec(prop::collection::vec(cplx(), n_s), m),
            prop::collection::vec(cplx(), n_s),
            prop::collection::vec(cplx(), n_s * m),
        )
            .prop_map(move |(h, gs, w, p)| {
                (eff_from(h, gs), BeamformingSolution::from_beams(CVec::from_vec(w), CMat::from_vec(n_s, m, p)))
            })
    }

    proptest! {
        #[test]
        fn sinrs_match_explicit_expansion((eff, sol) in instance(3, 3), noise in 0.01f64..2.0) {
            let s = sinr_iu(&eff, &sol, noise);
            prop_assert!((s - sinr_explicit(&eff.h_tilde, &sol, noise)).abs() <= 1e-12 * s.max(1.0));
            for m in 0..3 {
                let s = sinr_eu(&eff, &sol, m, noise);
                prop_assert!((s - sinr_explicit(&eff.g_tilde[m], &sol, noise)).abs() <= 1e-12 * s.max(1.0));
                let q = harvested_power(&eff, &sol, m);
                let explicit = sinr_explicit(&eff.g_tilde[m], &BeamformingSolution::from_beams(sol.w.clone(), CMat::zeros(3, 0)), 1.0)
                    + (0..3).map(|k| sol.p_mat.column(k).dotc(&eff.g_tilde[m]).norm_sqr()).sum::<f64>();
                prop_assert!((q - explicit).abs() <= 1e-12 * q.max(1.0));
            }
        }

        #[test]
        fn worst_case_is_brute_force_max((eff, sol) in instance(2, 3)) {
            let cfg = cfg_unit_noise(3, 4.0);
            let r_iu = (1.0 + sinr_iu(&eff, &sol, 1.0)).log2();
            let mut best = f64::NEG_INFINITY;
            for m in 0..3 {
                best = best.max((1.0 + sinr_eu(&eff, &sol, m, 1.0)).log2());
            }
            let wc = worst_case_secrecy(&eff, &sol, &cfg);
            prop_assert!(wc >= 0.0);
            prop_assert!((wc - (r_iu - best).max(0.0)).abs() < 1e-12);
        }

        #[test]
        fn smooth_bounds((eff, sol) in instance(2, 6)) {
            let cfg = cfg_unit_noise(6, 4.0);
            let st = secrecy_unclamped(&eff, &sol, &cfg);
            let sb = smooth_secrecy(&eff, &sol, &cfg);
            prop_assert!(sb <= st + 1e-12);
            prop_assert!(st - sb <= 6f64.log2() / 4.0 + 1e-12);
        }

        #[test]
        fn invariant_under_common_rotation((eff, sol) in instance(2, 2), alpha in 0.0f64..6.3) {
            let cfg = cfg_unit_noise(2, 4.0);
            let rot = Complex64::from_polar(1.0, alpha);
            let mut rsol = sol.clone();
            rsol.w *= rot;
            prop_assert!((sinr_iu(&eff, &sol, 1.0) - sinr_iu(&eff, &rsol, 1.0)).abs() < 1e-10 * (1.0 + sinr_iu(&eff, &sol, 1.0)));
            prop_assert!((worst_case_secrecy(&eff, &sol, &cfg) - worst_case_secrecy(&eff, &rsol, &cfg)).abs() < 1e-10);
            prop_assert!((harvested_power(&eff, &sol, 1) - harvested_power(&eff, &rsol, 1)).abs() < 1e-10 * (1.0 + harvested_power(&eff, &sol, 1)));
        }

        #[test]
        fn sinr_scale_invariance((eff, sol) in instance(2, 1), scale in 0.1f64..10.0, noise in 0.1f64..1.0) {
            let scaled = EffectiveChannels { h_tilde: &eff.h_tilde * c64(scale, 0.0), g_tilde: eff.g_tilde.iter().map(|g| g * c64(scale, 0.0)).collect() };
            let a = sinr_iu(&eff, &sol, noise);
            let b = sinr_iu(&scaled, &sol, noise * scale * scale);
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
            let a = sinr_eu(&eff, &sol, 0, noise);
            let b = sinr_eu(&scaled, &sol, 0, noise * scale * scale);
            prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
        }

        #[test]
        fn lse_monotone(x in prop::collection::vec(-5.0f64..5.0, 1..8), i in 0usize..8, dx in 0.0f64..1.0) {
            let i = i % x.len();
            let mut y = x.clone();
            y[i] += dx;
            prop_assert!(log_sum_exp(&y, 2.0).unwrap() >= log_sum_exp(&x, 2.0).unwrap() - 1e-12);
            prop_assert!(log_sum_exp(&x, 4.0).unwrap() <= log_sum_exp(&x, 2.0).unwrap() + 1e-12);
        }
    }
}
