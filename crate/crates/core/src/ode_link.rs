//! The link between `S_k(f)` and the linear equation `y^(k) + p0 y = 0`:
//! writing `f' = h^(-k)`, the function `h` solves it with `p0 = S_k(f)/k`,
//! and `S_k(f) = -k h^(k)/h`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSource, SIGNIFICANCE};
use crate::schwarzian::{order_budget, schwarzian_recursive};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeLinkReport {
    #[serde(skip)]
    pub h_jet: Jet,
    pub p0_value: Complex64,
    /// `|h^(k) + p0 h| / (1 + |h^(k)|)`.
    pub residual: f64,
    /// `|S_k(f) + k h^(k)/h| / (1 + |S_k(f)|)`.
    pub schwarzian_mismatch: f64,
}

/// `h = (f')^(-1/k)` on the principal branch, through `order`.
pub fn h_from_f<F: JetSource + ?Sized>(f: &F, k: usize, z0: Complex64, order: usize) -> Result<Jet> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if order < k + 1 {
        return Err(Error::InsufficientOrder { have: order, need: k + 1 });
    }
    let d1 = f.jet_at(z0, order + 1)?.derive()?;
    match d1.value() {
        Ok(v) if v.norm() > SIGNIFICANCE => {}
        Ok(_) => return Err(Error::CriticalPoint(z0)),
        Err(e) => return Err(e),
    }
    d1.pow_rational(-1, k as i64)
}

pub fn verify_link<F: JetSource + ?Sized>(f: &F, k: usize, z0: Complex64) -> Result<OdeLinkReport> {
    let order = order_budget(k);
    let h = h_from_f(f, k, z0, order)?;
    let h0 = h.nth_value(0)?;
    let hk = h.nth_value(k)?;
    let s = schwarzian_recursive(f, k, z0)?
        .value()
        .ok_or(Error::CriticalPoint(z0))?;
    let p0 = s / k as f64;
    let residual = (hk + p0 * h0).norm() / (1.0 + hk.norm());
    let schwarzian_mismatch = (s + hk / h0 * k as f64).norm() / (1.0 + s.norm());
    Ok(OdeLinkReport {
        h_jet: h,
        p0_value: p0,
        residual,
        schwarzian_mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::expr::FunctionExpr;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn h_of_exponential() {
        let e = FunctionExpr::parse("exp(z)").unwrap();
        let h = h_from_f(&e, 2, c(0.0, 0.0), 4).unwrap();
        let want = [1.0, -0.5, 0.125, -1.0 / 48.0, 1.0 / 384.0];
        for (got, w) in h.coeffs().iter().zip(want) {
            assert!((got - c(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn h_of_identity_is_one() {
        let z = FunctionExpr::parse("z").unwrap();
        for k in 1..5 {
            let h = h_from_f(&z, k, c(0.3, 0.2), k + 2).unwrap();
            assert_eq!(h.coeffs()[0], c(1.0, 0.0));
            assert!(h.coeffs()[1..].iter().all(|x| x.norm() == 0.0));
        }
    }

    #[test]
    fn h_of_reciprocal_power() {
        let g = catalog::reciprocal_power(2, 3).unwrap();
        let h = h_from_f(&g, 3, c(0.5, 0.0), 4).unwrap();
        assert!((h.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((h.coeffs()[1] - c(2.0, 0.0)).norm() < 1e-13);
        assert!(h.coeffs()[2..].iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn link_examples() {
        let e = FunctionExpr::parse("exp(z)").unwrap();
        let r = verify_link(&e, 2, c(0.0, 0.0)).unwrap();
        assert!((r.p0_value - c(-0.25, 0.0)).norm() < 1e-14);
        assert!(r.residual < 1e-12 && r.schwarzian_mismatch < 1e-12);

        let z = FunctionExpr::parse("z").unwrap();
        let r = verify_link(&z, 3, c(0.1, 0.0)).unwrap();
        assert_eq!(r.residual, 0.0);

        let m = catalog::mobius_power(3).unwrap();
        let r = verify_link(&m, 2, c(0.1, 0.0)).unwrap();
        assert!(r.residual <= 1e-9 && r.schwarzian_mismatch <= 1e-9);
    }

    #[test]
    fn critical_point_rejected() {
        let sq = FunctionExpr::parse("z^2").unwrap();
        assert_eq!(h_from_f(&sq, 2, c(0.0, 0.0), 4), Err(Error::CriticalPoint(c(0.0, 0.0))));
        assert!(h_from_f(&sq, 2, c(1.0, 0.0), 2).is_err());
    }

    #[test]
    fn reconstructs_derivative() {
        let f = catalog::hayman(c(0.7, 0.4)).unwrap();
        let z0 = c(0.2, -0.3);
        for k in 2..6 {
            let h = h_from_f(&f, k, z0, 8).unwrap();
            let back = h.powi(-(k as i32)).unwrap();
            let d1 = f.jet_at(z0, 9).unwrap().derive().unwrap();
            for (a, b) in back.coeffs().iter().zip(d1.coeffs()) {
                assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0));
            }
        }
    }
}
