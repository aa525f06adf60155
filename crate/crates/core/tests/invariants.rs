use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schwarzian::catalog::{self, CatalogEntry};
use schwarzian::disconjugacy::{count_zeros, pole_count_bound, ConvexRegion};
use schwarzian::normality::marty_inequality_check;
use schwarzian::ode_link::verify_link;
use schwarzian::schwarzian::{schwarzian_closed_form, schwarzian_recursive};
use schwarzian::verify::term_scale;
use schwarzian::{Complex64, FunctionExpr, Jet, JetSource, Result};

fn samples(seed: u64, n: usize, radius: f64, margin: f64) -> Vec<(CatalogEntry, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let f = catalog::random_instance(&mut rng);
            let z = catalog::random_point(&mut rng, &f, radius, margin);
            (f, z)
        })
        .collect()
}

struct Affine<'a> {
    f: &'a CatalogEntry,
    a: Complex64,
    c: Complex64,
}

impl JetSource for Affine<'_> {
    fn jet_at(&self, z0: Complex64, order: usize) -> Result<Jet> {
        Ok(self.f.jet_at(z0, order)?.scale(self.a).add_scalar(self.c))
    }
}

#[test]
fn recursion_and_closed_form_agree() {
    for (f, z) in samples(11, 60, 1.5, 0.3) {
        for k in 2..=6 {
            let r = schwarzian_recursive(&f, k, z).unwrap().value().unwrap();
            let c = schwarzian_closed_form(&f, k, z).unwrap().value().unwrap();
            assert!(
                (r - c).norm() <= 1e-9 * (1.0 + r.norm()),
                "{} at {z}, k={k}: {r} vs {c}",
                f.name
            );
        }
    }
}

#[test]
fn second_order_is_classical_schwarzian() {
    for (f, z) in samples(12, 60, 1.5, 0.3) {
        let jet = f.jet_at(z, 3).unwrap();
        let (d1, d2, d3) = (
            jet.nth_value(1).unwrap(),
            jet.nth_value(2).unwrap(),
            jet.nth_value(3).unwrap(),
        );
        let g = d2 / d1;
        let dg = d3 / d1 - g * g;
        let direct = dg - 0.5 * g * g;
        let s = schwarzian_recursive(&f, 2, z).unwrap().value().unwrap();
        // both sides vanish identically for some families, so measure against the terms
        let scale = s.norm().max(direct.norm()).max(dg.norm() + 0.5 * g.norm_sqr());
        assert!((s - direct).norm() <= 1e-10 * scale.max(1e-300), "{} at {z}", f.name);
    }
}

#[test]
fn affine_changes_leave_schwarzians_fixed() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (i, (f, z)) in samples(14, 40, 1.5, 0.3).into_iter().enumerate() {
        use rand::Rng;
        let a = Complex64::from_polar(rng.gen_range(0.2..3.0), rng.gen_range(0.0..TAU));
        let c = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let g = Affine { f: &f, a, c };
        let k = 2 + i % 5;
        let s = schwarzian_recursive(&f, k, z).unwrap().value().unwrap();
        let t = schwarzian_recursive(&g, k, z).unwrap().value().unwrap();
        // rounding lives on the size of the largest term in the expansion of S_k
        let scale = s.norm().max(t.norm()).max(term_scale(&f, k, z).unwrap());
        assert!((s - t).norm() <= 1e-12 * scale.max(1.0), "{} k={k}: {s} vs {t}", f.name);
    }
}

#[test]
fn ode_link_holds_on_random_instances() {
    for (f, z) in samples(15, 60, 1.5, 0.6) {
        for k in 2..=5 {
            let r = verify_link(&f, k, z).unwrap();
            assert!(r.residual <= 1e-9, "{} at {z}, k={k}: {}", f.name, r.residual);
            assert!(r.schwarzian_mismatch <= 1e-9, "{} at {z}, k={k}", f.name);
        }
    }
}

#[test]
fn marty_inequality_holds_off_degenerate_points() {
    let mut checked = 0;
    for (f, z) in samples(16, 80, 1.5, 0.1) {
        let m = marty_inequality_check(&f, z).unwrap();
        if !m.degenerate {
            assert!(m.holds, "{} at {z}: {} vs {}", f.name, m.lhs, m.rhs);
            checked += 1;
        }
    }
    assert!(checked >= 50);
}

#[test]
fn exponential_affine_has_constant_schwarzians() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    use rand::Rng;
    for _ in 0..10 {
        let a = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..TAU));
        let b = Complex64::from_polar(rng.gen_range(0.3..1.5), rng.gen_range(0.0..TAU));
        let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let f = catalog::exp_affine(a, b, c).unwrap();
        for k in 2..=6usize {
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            let want = b.powi(k as i32) * sign / (k as f64).powi(k as i32 - 1);
            for _ in 0..5 {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let s = schwarzian_recursive(&f, k, z).unwrap().value().unwrap();
                assert!((s - want).norm() <= 1e-10 * want.norm(), "k={k}: {s} vs {want}");
            }
        }
    }
}

#[test]
fn pole_bound_covers_exponential_mobius_images() {
    // f = (e^(wz) - 1)/(e^(wz) + 1) has S_2 = -w^2/2 everywhere, so
    // ||S_2|| = |w|^2/2 on the disk while the pole count grows like |w|
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let disk = ConvexRegion::disk(Complex64::new(0.0, 0.0), 1.0);
    let mut most = 0;
    for i in 0..12 {
        use rand::Rng;
        let w = Complex64::from_polar(1.0 + 5.0 * i as f64, rng.gen_range(0.0..TAU));
        let f = catalog::exp_mobius(w).unwrap();
        let m = w.norm_sqr() / 2.0;
        // away from the strip |Re(wz)| <= 3 the quotient (E-1)/(E+1) cancels
        // to 1 - 2/E and its jet loses digits, whatever S_2 is
        let mut checked = 0;
        while checked < 5 {
            let z = catalog::random_point(&mut rng, &f, 0.95, 0.05);
            if (w * z).re.abs() > 3.0 {
                continue;
            }
            checked += 1;
            let s = schwarzian_recursive(&f, 2, z).unwrap().value().unwrap();
            assert!((s.norm() - m).abs() <= 1e-8 * m, "w={w} z={z}: {} vs {m}, clearance {}", s.norm(), f.clearance(z));
        }
        let denominator = FunctionExpr::parse_with_params("exp(w*z) + 1", &["w"]).unwrap().bind("w", w);
        let poles = count_zeros(&denominator, &disk).unwrap();
        let bound = pole_count_bound(2, m).unwrap();
        assert!(poles as usize <= bound.n, "w={w}: {poles} poles, bound {}", bound.n);
        most = most.max(poles);
    }
    assert!(most >= 10);
}
