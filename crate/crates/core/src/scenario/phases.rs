use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::linalg::CVec;

/// RIS phase-shift vector with entries kept in `(0, 2π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShifts {
    theta: Vec<f64>,
}

/// Maps any angle into `(0, 2π]`.
pub(crate) fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r == 0.0 {
        TAU
    } else {
        r
    }
}

impl PhaseShifts {
    /// Wraps every entry into `(0, 2π]`.
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta: theta.into_iter().map(wrap_phase).collect() }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Self::new(vec![value; n])
    }

    /// Phases of a unit-modulus (or arbitrary nonzero) coefficient vector.
    pub fn from_coefficients(phi: &CVec) -> Self {
        Self::new(phi.iter().map(|c| c.arg()).collect())
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Unit-modulus reflection coefficients `e^{jθ}`.
    pub fn coefficients(&self) -> CVec {
        CVec::from_iterator(self.theta.len(), self.theta.iter().map(|&t| Complex64::from_polar(1.0, t)))
    }
}

/// Shortest angular distance between two phases.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrapping_range() {
        for x in [-7.0, -TAU, -0.1, 0.0, 1e-300, 3.0, TAU, TAU + 1.0, 100.0] {
            let w = wrap_phase(x);
            assert!(w > 0.0 && w <= TAU, "{x} -> {w}");
            assert!(circular_distance(w, x) < 1e-12);
        }
        assert_eq!(wrap_phase(0.0), TAU);
        assert_eq!(wrap_phase(TAU), TAU);
    }

    #[test]
    fn coefficients_are_unit_modulus() {
        let p = PhaseShifts::new(vec![0.3, PI, 5.0, -2.0]);
        for c in p.coefficients().iter() {
            assert!((c.norm() - 1.0).abs() < 1e-15);
        }
        let back = PhaseShifts::from_coefficients(&p.coefficients());
        for (a, b) in back.theta().iter().zip(p.theta()) {
            assert!(circular_distance(*a, *b) < 1e-12);
        }
    }
}
