use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{distance, path_loss, upa_shape, Link, PhaseShifts, SystemConfig};
use crate::linalg::{CMat, CVec};
use crate::{Error, Result};

/// One realization of every link.
///
/// `f1` is stored as the `n_s × n_r` matrix `F₁`, so that `F₁ᴴ` is the
/// BS→RIS channel. Vectors are stored un-conjugated: the IU receives
/// `h₁ᴴ x` over the direct link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub h1: CVec,
    pub f1: CMat,
    pub h2: CVec,
    pub g1: Vec<CVec>,
    pub g2: Vec<CVec>,
}

/// Identifies one link of a [`ChannelSample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkId {
    H1,
    F1,
    H2,
    G1(usize),
    G2(usize),
}

impl ChannelSample {
    pub fn zeros(n_s: usize, n_r: usize, m: usize) -> Self {
        Self {
            h1: CVec::zeros(n_s),
            f1: CMat::zeros(n_s, n_r),
            h2: CVec::zeros(n_r),
            g1: vec![CVec::zeros(n_s); m],
            g2: vec![CVec::zeros(n_r); m],
        }
    }

    pub fn n_s(&self) -> usize {
        self.h1.len()
    }

    pub fn n_r(&self) -> usize {
        self.h2.len()
    }

    pub fn m(&self) -> usize {
        self.g1.len()
    }

    pub fn check_dims(&self, n_s: usize, n_r: usize, m: usize) -> Result<()> {
        let ok = self.h1.len() == n_s
            && self.f1.nrows() == n_s
            && self.f1.ncols() == n_r
            && self.h2.len() == n_r
            && self.g1.len() == m
            && self.g2.len() == m
            && self.g1.iter().all(|g| g.len() == n_s)
            && self.g2.iter().all(|g| g.len() == n_r);
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!("channel sample does not match n_s={n_s}, n_r={n_r}, m={m}")))
        }
    }

    /// Visits every link's coefficients in a fixed order.
    pub fn for_each_link_mut(&mut self, mut f: impl FnMut(LinkId, &mut [Complex64])) {
        f(LinkId::H1, self.h1.as_mut_slice());
        f(LinkId::F1, self.f1.as_mut_slice());
        f(LinkId::H2, self.h2.as_mut_slice());
        for (m, (g1, g2)) in self.g1.iter_mut().zip(self.g2.iter_mut()).enumerate() {
            f(LinkId::G1(m), g1.as_mut_slice());
            f(LinkId::G2(m), g2.as_mut_slice());
        }
    }

    pub fn link(&self, id: LinkId) -> &[Complex64] {
        match id {
            LinkId::H1 => self.h1.as_slice(),
            LinkId::F1 => self.f1.as_slice(),
            LinkId::H2 => self.h2.as_slice(),
            LinkId::G1(m) => self.g1[m].as_slice(),
            LinkId::G2(m) => self.g2[m].as_slice(),
        }
    }
}

/// Large-scale gains of every link (linear).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkLosses {
    pub bs_ris: f64,
    pub bs_iu: f64,
    pub ris_iu: f64,
    pub bs_eu: Vec<f64>,
    pub ris_eu: Vec<f64>,
}

impl LinkLosses {
    pub fn of(&self, id: LinkId) -> f64 {
        match id {
            LinkId::H1 => self.bs_iu,
            LinkId::F1 => self.bs_ris,
            LinkId::H2 => self.ris_iu,
            LinkId::G1(m) => self.bs_eu[m],
            LinkId::G2(m) => self.ris_eu[m],
        }
    }
}

/// Channel statistics of a super-frame: node positions, unit-modulus LoS
/// components, path losses and Rician factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub iu_pos: [f64; 3],
    pub eu_pos: Vec<[f64; 3]>,
    /// LoS components with unit-modulus entries.
    pub los: ChannelSample,
    pub losses: LinkLosses,
    /// Linear Rician factor of the BS-user links.
    pub k_bs_user: f64,
    /// Linear Rician factor of the BS-RIS and RIS-user links.
    pub k_ris: f64,
}

fn unit(from: &[f64; 3], to: &[f64; 3]) -> [f64; 3] {
    let d = distance(from, to);
    [(to[0] - from[0]) / d, (to[1] - from[1]) / d, (to[2] - from[2]) / d]
}

/// Half-wavelength ULA along x.
fn ula_steering(n: usize, dir: &[f64; 3]) -> CVec {
    CVec::from_iterator(n, (0..n).map(|k| Complex64::from_polar(1.0, PI * k as f64 * dir[0])))
}

/// Half-wavelength UPA in the y-z plane, `rows` along y and `cols` along z.
fn upa_steering(n: usize, dir: &[f64; 3]) -> CVec {
    let (_rows, cols) = upa_shape(n);
    CVec::from_iterator(
        n,
        (0..n).map(|idx| {
            let (i, k) = (idx / cols, idx % cols);
            Complex64::from_polar(1.0, PI * (i as f64 * dir[1] + k as f64 * dir[2]))
        }),
    )
}

impl ChannelStats {
    /// Statistics with EUs at uniformly random angles on the configured circle.
    pub fn new<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let bs = cfg.geometry.bs;
        let r = cfg.geometry.eu_radius_m;
        let eus = (0..cfg.m)
            .map(|_| {
                let a: f64 = rng.gen::<f64>() * TAU;
                [bs[0] + r * a.cos(), bs[1] + r * a.sin(), bs[2]]
            })
            .collect::<Vec<_>>();
        Self::from_positions(cfg, cfg.geometry.iu, eus)
    }

    /// Deterministic statistics for given user positions.
    pub fn from_positions(cfg: &SystemConfig, iu: [f64; 3], eus: Vec<[f64; 3]>) -> Result<Self> {
        if eus.len() != cfg.m {
            return Err(Error::Dimension(format!("expected {} EU positions, got {}", cfg.m, eus.len())));
        }
        let pl = &cfg.pathloss;
        let bs = cfg.geometry.bs;
        let ris = cfg.geometry.ris;
        let (n_s, n_r) = (cfg.n_s, cfg.n_r);

        let a_bs_to_ris = ula_steering(n_s, &unit(&bs, &ris));
        let a_ris_from_bs = upa_steering(n_r, &unit(&ris, &bs));
        let f1 = &a_bs_to_ris * a_ris_from_bs.adjoint();

        let h1 = ula_steering(n_s, &unit(&bs, &iu));
        let h2 = upa_steering(n_r, &unit(&ris, &iu));
        let g1 = eus.iter().map(|e| ula_steering(n_s, &unit(&bs, e))).collect();
        let g2 = eus.iter().map(|e| upa_steering(n_r, &unit(&ris, e))).collect();

        let losses = LinkLosses {
            bs_ris: path_loss(pl, Link::BsRis, distance(&bs, &ris))?,
            bs_iu: path_loss(pl, Link::BsIu, distance(&bs, &iu))?,
            ris_iu: path_loss(pl, Link::RisIu, distance(&ris, &iu))?,
            bs_eu: eus.iter().map(|e| path_loss(pl, Link::BsEu, distance(&bs, e))).collect::<Result<_>>()?,
            ris_eu: eus.iter().map(|e| path_loss(pl, Link::RisEu, distance(&ris, e))).collect::<Result<_>>()?,
        };

        Ok(Self {
            iu_pos: iu,
            eu_pos: eus,
            los: ChannelSample { h1, f1, h2, g1, g2 },
            losses,
            k_bs_user: cfg.rician_bs_user(),
            k_ris: cfg.rician_ris(),
        })
    }

    pub fn rician_of(&self, id: LinkId) -> f64 {
        match id {
            LinkId::H1 | LinkId::G1(_) => self.k_bs_user,
            LinkId::F1 | LinkId::H2 | LinkId::G2(_) => self.k_ris,
        }
    }

    /// Channel mean `sqrt(L K/(K+1)) · LoS` of every link.
    pub fn mean_sample(&self) -> ChannelSample {
        let mut mean = self.los.clone();
        mean.for_each_link_mut(|id, coeffs| {
            let (los_w, _) = rician_weights(self.rician_of(id));
            let s = self.losses.of(id).sqrt() * los_w;
            coeffs.iter_mut().for_each(|c| *c *= s);
        });
        mean
    }
}

/// `(sqrt(K/(K+1)), sqrt(1/(K+1)))`, with the pure-LoS limit for infinite K.
pub(crate) fn rician_weights(k: f64) -> (f64, f64) {
    if k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
    }
}

/// Zero-mean, unit-variance circularly-symmetric complex Gaussian.
pub(crate) fn cn01<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws one Rician realization of every link.
pub fn draw_channel_sample<R: Rng + ?Sized>(stats: &ChannelStats, rng: &mut R) -> ChannelSample {
    let mut sample = stats.los.clone();
    sample.for_each_link_mut(|id, coeffs| {
        let (los_w, nlos_w) = rician_weights(stats.rician_of(id));
        let amp = stats.losses.of(id).sqrt();
        for c in coeffs.iter_mut() {
            let scatter = cn01(rng);
            *c = amp * (los_w * *c + nlos_w * scatter);
        }
    });
    sample
}

/// Effective BS→user channels for a fixed RIS configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannels {
    pub h_tilde: CVec,
    pub g_tilde: Vec<CVec>,
}

impl EffectiveChannels {
    pub fn n_s(&self) -> usize {
        self.h_tilde.len()
    }

    pub fn m(&self) -> usize {
        self.g_tilde.len()
    }
}

/// `h̃ = F₁ diag(h₂) φ + h₁` and likewise for every EU, which is the
/// conjugate transpose of `φᴴ diag(h₂ᴴ) F₁ᴴ + h₁ᴴ`.
pub fn effective_channels(sample: &ChannelSample, phases: &PhaseShifts) -> Result<EffectiveChannels> {
    if phases.len() != sample.n_r() {
        return Err(Error::Dimension(format!("{} phases for {} RIS elements", phases.len(), sample.n_r())));
    }
    sample.check_dims(sample.n_s(), sample.n_r(), sample.m())?;
    let phi = phases.coefficients();
    let through_ris = |v: &CVec, direct: &CVec| -> CVec { &sample.f1 * v.component_mul(&phi) + direct };
    Ok(EffectiveChannels {
        h_tilde: through_ris(&sample.h2, &sample.h1),
        g_tilde: sample.g1.iter().zip(&sample.g2).map(|(g1, g2)| through_ris(g2, g1)).collect(),
    })
}
