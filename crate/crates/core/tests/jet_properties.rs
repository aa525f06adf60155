use proptest::prelude::*;
use schwarzian::{Complex64, Jet};

const ORDER: usize = 8;

fn base() -> Complex64 {
    Complex64::new(0.3, -0.2)
}

fn arb_c(scale: f64) -> impl Strategy<Value = Complex64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| Complex64::new(re, im))
}

fn arb_jet() -> impl Strategy<Value = Jet> {
    prop::collection::vec(arb_c(2.0), ORDER + 1).prop_map(|v| Jet::from_taylor(base(), &v, ORDER))
}

/// Jets whose constant term stays well away from zero.
fn arb_unit_jet() -> impl Strategy<Value = Jet> {
    (0.5f64..2.0, -3.0f64..3.0, prop::collection::vec(arb_c(1.0), ORDER)).prop_map(|(r, t, tail)| {
        let mut v = vec![Complex64::from_polar(r, t)];
        v.extend(tail);
        Jet::from_taylor(base(), &v, ORDER)
    })
}

fn close(a: &Jet, b: &Jet, rel: f64) -> Result<(), TestCaseError> {
    let n = a.coeffs().len().min(b.coeffs().len());
    prop_assert_eq!(a.lead_order(), b.lead_order());
    let scale = b.coeffs()[..n].iter().map(|x| x.norm()).fold(1.0, f64::max);
    for i in 0..n {
        let d = (a.coeffs()[i] - b.coeffs()[i]).norm();
        prop_assert!(d <= rel * scale, "coefficient {}: {} vs {}", i, a.coeffs()[i], b.coeffs()[i]);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn multiplication_is_associative(a in arb_jet(), b in arb_jet(), c in arb_jet()) {
        let l = a.mul(&b).unwrap().mul(&c).unwrap();
        let r = a.mul(&b.mul(&c).unwrap()).unwrap();
        close(&l, &r, 1e-13)?;
    }

    #[test]
    fn multiplication_distributes(a in arb_jet(), b in arb_jet(), c in arb_jet()) {
        let l = a.mul(&b.add(&c).unwrap()).unwrap();
        let r = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
        close(&l, &r, 1e-13)?;
    }

    #[test]
    fn exp_and_log_are_inverse(a in arb_unit_jet()) {
        close(&a.ln().unwrap().exp().unwrap(), &a, 1e-12)?;
        // keep the imaginary part of the constant inside the principal strip
        let mut v = a.coeffs().to_vec();
        v[0] = Complex64::new(v[0].re, v[0].im.clamp(-3.0, 3.0));
        let s = Jet::from_taylor(base(), &v, ORDER);
        close(&s.exp().unwrap().ln().unwrap(), &s, 1e-12)?;
    }

    #[test]
    fn rational_root_powers_back(a in arb_unit_jet(), k in 2i64..7) {
        let root = a.pow_rational(1, k).unwrap();
        let back = root.powi(k as i32).unwrap();
        close(&back, &a, 1e-12)?;
    }

    #[test]
    fn leibniz_rule(a in arb_jet(), b in arb_jet()) {
        let l = a.mul(&b).unwrap().derive().unwrap();
        let r = a.derive().unwrap().mul(&b).unwrap()
            .add(&a.mul(&b.derive().unwrap()).unwrap()).unwrap();
        close(&l, &r, 1e-13)?;
    }

    #[test]
    fn reciprocal_power_is_laurent(m in 1i32..8) {
        let z = Jet::variable(Complex64::new(0.0, 0.0), ORDER);
        let one = Jet::constant(z.base_point(), Complex64::new(1.0, 0.0), ORDER);
        let q = one.div(&z.powi(m).unwrap()).unwrap();
        prop_assert_eq!(q.lead_order(), -m);
        prop_assert_eq!(q.coeffs()[0], Complex64::new(1.0, 0.0));
    }
}
