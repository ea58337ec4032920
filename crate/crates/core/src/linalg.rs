//! Complex vector helpers shared by the channel and solver modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `aᴴ b`.
#[inline]
pub fn inner(a: &CVec, b: &CVec) -> Complex64 {
    a.dotc(b)
}

/// `‖aᴴ M‖²` summed over the columns of `m`.
pub fn row_norm_sqr(a: &CVec, m: &CMat) -> f64 {
    m.column_iter()
        .map(|col| a.iter().zip(col.iter()).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr())
        .sum()
}

/// `aᴴ M` as a vector of per-column inner products.
pub fn row_products(a: &CVec, m: &CMat) -> Vec<Complex64> {
    m.column_iter()
        .map(|col| a.iter().zip(col.iter()).map(|(x, y)| x.conj() * y).sum())
        .collect()
}

pub fn norm_sqr(v: &CVec) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn frob_sqr(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-25);
        assert!((dbm_to_watts(45.0) - 31.622_776_601_683_793).abs() < 1e-12);
    }

    #[test]
    fn row_norm_matches_explicit_product() {
        let a = CVec::from_vec(vec![c64(1.0, 2.0), c64(-0.5, 0.25)]);
        let m = CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 1.0), c64(2.0, -1.0), c64(0.5, 0.5)]);
        let explicit = (a.adjoint() * &m).iter().map(|x| x.norm_sqr()).sum::<f64>();
        assert!((row_norm_sqr(&a, &m) - explicit).abs() < 1e-12);
    }
}
