//! Named test functions and the parametric families they come from.
//!
//! Each constructor parses a template and binds its parameters, so one
//! template serves a whole family. Integer parameters that appear in an
//! exponent are spliced into the template text because `^` only accepts
//! integer literals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_zero, BesselKind};
use crate::error::{Error, Result};
use crate::expr::FunctionExpr;
use crate::jet::{Jet, JetSource};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ParamValue {
    Int(i64),
    Complex(Complex64),
}

impl ParamValue {
    pub fn as_complex(&self) -> Complex64 {
        match *self {
            ParamValue::Int(n) => Complex64::new(n as f64, 0.0),
            ParamValue::Complex(c) => c,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub expr: FunctionExpr,
    pub params: Vec<(String, ParamValue)>,
    pub known_identity: Option<String>,
    /// Poles and branch points of the function inside |z| <= 10.
    pub singularities: Vec<Complex64>,
    /// Zeros of f' inside |z| <= 10.
    pub critical_points: Vec<Complex64>,
}

impl JetSource for CatalogEntry {
    fn jet_at(&self, z0: Complex64, order: usize) -> Result<Jet> {
        self.expr.jet_at(z0, order)
    }
}

impl CatalogEntry {
    fn new(name: &str, expr: FunctionExpr, params: Vec<(&str, ParamValue)>) -> Self {
        CatalogEntry {
            name: name.to_string(),
            expr,
            params: params
                .into_iter()
                .map(|(n, v)| (n.to_string(), v))
                .collect(),
            known_identity: None,
            singularities: Vec::new(),
            critical_points: Vec::new(),
        }
    }

    fn identity(mut self, text: &str) -> Self {
        self.known_identity = Some(text.to_string());
        self
    }

    /// Distance from `z` to the nearest declared singularity or critical point.
    pub fn clearance(&self, z: Complex64) -> f64 {
        self.singularities
            .iter()
            .chain(&self.critical_points)
            .map(|s| (z - s).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn param(&self, name: &str) -> Option<ParamValue> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

fn parse(template: &str, params: &[&str]) -> FunctionExpr {
    FunctionExpr::parse_with_params(template, params).expect("catalog templates are valid")
}

fn bind(template: &str, bindings: &[(&str, Complex64)]) -> FunctionExpr {
    let names: Vec<&str> = bindings.iter().map(|(n, _)| *n).collect();
    parse(template, &names).bind_all(bindings)
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `f_n(z) = n z`, whose Schwarzians of every order vanish.
pub fn linear(n: i64) -> CatalogEntry {
    CatalogEntry::new("linear", bind("n*z", &[("n", c(n as f64))]), vec![("n", ParamValue::Int(n))])
        .identity("S_k(n z) = 0")
}

/// `g_n(z) = -1 / (n^k (k-1) z^(k-1))` with `g_n' = (n z)^(-k)`.
pub fn reciprocal_power(n: i64, k: i32) -> Result<CatalogEntry> {
    if k < 2 || n == 0 {
        return Err(Error::InvalidArgument("reciprocal_power needs k >= 2, n != 0".into()));
    }
    let text = format!("-1/(n^{k} * {} * z^{})", k - 1, k - 1);
    let mut e = CatalogEntry::new(
        "reciprocal_power",
        bind(&text, &[("n", c(n as f64))]),
        vec![("n", ParamValue::Int(n)), ("k", ParamValue::Int(k as i64))],
    )
    .identity("S_k(g_n) = 0");
    e.singularities.push(c(0.0));
    Ok(e)
}

/// `h_n(z) = z^(1-k) + n`, with `h_n'/h_n = (1-k) / (z (1 + n z^(k-1)))`.
pub fn shifted_reciprocal(n: i64, k: i32) -> Result<CatalogEntry> {
    if k < 2 {
        return Err(Error::InvalidArgument("shifted_reciprocal needs k >= 2".into()));
    }
    let text = format!("z^{} + n", 1 - k);
    let mut e = CatalogEntry::new(
        "shifted_reciprocal",
        bind(&text, &[("n", c(n as f64))]),
        vec![("n", ParamValue::Int(n)), ("k", ParamValue::Int(k as i64))],
    )
    .identity("h_n'/h_n = (1-k)/(z(1+n z^(k-1)))");
    e.singularities.push(c(0.0));
    Ok(e)
}

/// `f_n(z) = ((2z)^n - 1)^(-1)`, with `S_2(f_n) = (1 - n^2) / (2 z^2)`.
pub fn mobius_power(n: i64) -> Result<CatalogEntry> {
    if !(1..=64).contains(&n) {
        return Err(Error::InvalidArgument("mobius_power needs 1 <= n <= 64".into()));
    }
    let text = format!("1/((2*z)^{n} - 1)");
    let mut e = CatalogEntry::new("mobius_power", parse(&text, &[]), vec![("n", ParamValue::Int(n))])
        .identity("S_2 = (1-n^2)/(2z^2)");
    e.singularities = (0..n)
        .map(|j| Complex64::from_polar(0.5, 2.0 * PI * j as f64 / n as f64))
        .collect();
    if n >= 2 {
        e.critical_points.push(c(0.0));
    }
    Ok(e)
}

/// `z^n`.
pub fn power(n: i32) -> Result<CatalogEntry> {
    if n == 0 || n == 1 {
        return Err(Error::InvalidArgument("power needs n outside {0, 1}".into()));
    }
    let mut e = CatalogEntry::new("power", parse(&format!("z^{n}"), &[]), vec![("n", ParamValue::Int(n as i64))])
        .identity("S_2 = (1-n^2)/(2z^2)");
    if n < 0 {
        e.singularities.push(c(0.0));
    } else {
        e.critical_points.push(c(0.0));
    }
    Ok(e)
}

/// `exp(exp(c z) / c)`, with `S_2 = -e^(2cz)/2 - c^2/2`.
pub fn hayman(cval: Complex64) -> Result<CatalogEntry> {
    if cval.norm() == 0.0 {
        return Err(Error::InvalidArgument("hayman needs c != 0".into()));
    }
    Ok(CatalogEntry::new(
        "hayman",
        bind("exp(exp(c*z)/c)", &[("c", cval)]),
        vec![("c", ParamValue::Complex(cval))],
    )
    .identity("S_2 = -exp(2cz)/2 - c^2/2"))
}

/// `a e^(b z) + c`, whose `S_k` is the constant `(-1)^(k+1) b^k / k^(k-1)`.
pub fn exp_affine(a: Complex64, b: Complex64, cval: Complex64) -> Result<CatalogEntry> {
    if a.norm() == 0.0 || b.norm() == 0.0 {
        return Err(Error::InvalidArgument("exp_affine needs a, b != 0".into()));
    }
    Ok(CatalogEntry::new(
        "exp_affine",
        bind("a*exp(b*z) + c", &[("a", a), ("b", b), ("c", cval)]),
        vec![
            ("a", ParamValue::Complex(a)),
            ("b", ParamValue::Complex(b)),
            ("c", ParamValue::Complex(cval)),
        ],
    )
    .identity("S_k = (-1)^(k+1) b^k / k^(k-1)"))
}

/// `(e^(w z) - 1) / (e^(w z) + 1)`, a Möbius image of `e^(wz)` with `S_2 = -w^2/2`.
pub fn exp_mobius(w: Complex64) -> Result<CatalogEntry> {
    if w.norm() == 0.0 {
        return Err(Error::InvalidArgument("exp_mobius needs w != 0".into()));
    }
    let mut e = CatalogEntry::new(
        "exp_mobius",
        bind("(exp(w*z) - 1)/(exp(w*z) + 1)", &[("w", w)]),
        vec![("w", ParamValue::Complex(w))],
    )
    .identity("S_2 = -w^2/2");
    // poles where w z = i pi (2m + 1)
    for m in -40..40 {
        let p = Complex64::new(0.0, PI * (2 * m + 1) as f64) / w;
        if p.norm() <= 10.0 {
            e.singularities.push(p);
        }
    }
    Ok(e)
}

/// `f1(z) = J0(e^(z/2))`, solving `y'' + (e^z/4) y = 0`.
pub fn bessel_j() -> CatalogEntry {
    CatalogEntry::new("bessel_j", parse("J0(exp(z/2))", &[]), vec![]).identity("f1'' + e^z/4 f1 = 0")
}

/// `f2(z) = Y0(e^(z/2))`, evaluated with the principal logarithm.
pub fn bessel_y() -> CatalogEntry {
    CatalogEntry::new("bessel_y", parse("Y0(exp(z/2))", &[]), vec![]).identity("f2'' + e^z/4 f2 = 0")
}

/// `f1 / f2`, with `S_2 = e^z / 2`.
pub fn bessel_quotient() -> CatalogEntry {
    let mut e = CatalogEntry::new("bessel_quotient", parse("J0(exp(z/2))/Y0(exp(z/2))", &[]), vec![])
        .identity("S_2 = e^z/2");
    // poles on the real axis where e^(z/2) is a zero of Y0
    e.singularities = (1..=4)
        .map(|n| c(2.0 * bessel_zero(BesselKind::Y0, n).expect("first zeros are in range").ln()))
        .collect();
    e
}

/// Names of every family in the catalog.
pub const NAMES: &[&str] = &[
    "linear",
    "reciprocal_power",
    "shifted_reciprocal",
    "mobius_power",
    "power",
    "hayman",
    "exp_affine",
    "exp_mobius",
    "bessel_j",
    "bessel_y",
    "bessel_quotient",
];

/// Builds a catalog entry by name with default parameters where `params` is silent.
pub fn instantiate(name: &str, params: &[(&str, ParamValue)]) -> Result<CatalogEntry> {
    let get = |key: &str, default: ParamValue| {
        params
            .iter()
            .find(|(n, _)| *n == key)
            .map(|(_, v)| *v)
            .unwrap_or(default)
    };
    let int = |key: &str, default: i64| -> Result<i64> {
        match get(key, ParamValue::Int(default)) {
            ParamValue::Int(n) => Ok(n),
            ParamValue::Complex(z) if z.im == 0.0 && z.re.fract() == 0.0 => Ok(z.re as i64),
            _ => Err(Error::InvalidArgument(format!("parameter {key} must be an integer"))),
        }
    };
    let cplx = |key: &str, default: f64| get(key, ParamValue::Complex(c(default))).as_complex();
    match name {
        "linear" => Ok(linear(int("n", 2)?)),
        "reciprocal_power" => reciprocal_power(int("n", 2)?, int("k", 3)? as i32),
        "shifted_reciprocal" => shifted_reciprocal(int("n", 2)?, int("k", 3)? as i32),
        "mobius_power" => mobius_power(int("n", 3)?),
        "power" => power(int("n", 3)? as i32),
        "hayman" => hayman(cplx("c", 1.0)),
        "exp_affine" => exp_affine(cplx("a", 1.0), cplx("b", 1.0), cplx("c", 0.0)),
        "exp_mobius" => exp_mobius(cplx("w", 1.0)),
        "bessel_j" => Ok(bessel_j()),
        "bessel_y" => Ok(bessel_y()),
        "bessel_quotient" => Ok(bessel_quotient()),
        other => Err(Error::InvalidArgument(format!("unknown catalog entry `{other}`"))),
    }
}

/// One default instance of every family.
pub fn defaults() -> Vec<CatalogEntry> {
    NAMES
        .iter()
        .map(|n| instantiate(n, &[]).expect("defaults are valid"))
        .collect()
}

fn random_complex<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    loop {
        let z = Complex64::new(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius));
        if z.norm() <= radius {
            return z;
        }
    }
}

fn random_nonzero<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> Complex64 {
    Complex64::from_polar(rng.gen_range(lo..hi), rng.gen_range(0.0..2.0 * PI))
}

/// A random instance of a randomly chosen family that is analytic away from
/// its declared singularities. The Bessel entries are omitted because their
/// strip of validity is narrower than the unit disk sampling used elsewhere.
pub fn random_instance<R: Rng>(rng: &mut R) -> CatalogEntry {
    match rng.gen_range(0..8) {
        0 => linear(rng.gen_range(1..10)),
        1 => reciprocal_power(rng.gen_range(1..4), rng.gen_range(2..6)).expect("valid"),
        2 => shifted_reciprocal(rng.gen_range(1..5), rng.gen_range(2..5)).expect("valid"),
        3 => mobius_power(rng.gen_range(2..7)).expect("valid"),
        4 => power(rng.gen_range(2..6)).expect("valid"),
        5 => hayman(random_nonzero(rng, 0.3, 1.5)).expect("valid"),
        6 => exp_affine(
            random_nonzero(rng, 0.5, 2.0),
            random_nonzero(rng, 0.3, 1.5),
            random_complex(rng, 1.0),
        )
        .expect("valid"),
        _ => exp_mobius(random_nonzero(rng, 0.3, 1.5)).expect("valid"),
    }
}

/// A random point in the disk of radius `radius` at least `margin` away from
/// the entry's singularities and critical points.
pub fn random_point<R: Rng>(rng: &mut R, entry: &CatalogEntry, radius: f64, margin: f64) -> Complex64 {
    loop {
        let z = random_complex(rng, radius);
        if entry.clearance(z) >= margin {
            return z;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cz(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn every_family_is_present() {
        let d = defaults();
        assert_eq!(d.len(), NAMES.len());
        for (e, n) in d.iter().zip(NAMES) {
            assert_eq!(&e.name, n);
            assert!(e.expr.free_params().is_empty());
        }
    }

    #[test]
    fn reciprocal_power_derivative() {
        for k in 2..6 {
            let g = reciprocal_power(2, k).unwrap();
            let z = cz(0.4, 0.3);
            let d = g.jet_at(z, 1).unwrap().nth_value(1).unwrap();
            let expected = (z * 2.0).powi(-k);
            assert!((d - expected).norm() < 1e-12 * expected.norm());
        }
    }

    /// Fourth-order central differences of pointwise values, independent of
    /// jet propagation.
    fn finite_differences(e: &CatalogEntry, z: Complex64) -> [Complex64; 3] {
        let h = 2e-3;
        let f = |m: f64| e.expr.eval(z + h * m).unwrap();
        let d1 = (-f(2.0) + f(1.0) * 8.0 - f(-1.0) * 8.0 + f(-2.0)) / (12.0 * h);
        let d2 = (-f(2.0) + f(1.0) * 16.0 - f(0.0) * 30.0 + f(-1.0) * 16.0 - f(-2.0)) / (12.0 * h * h);
        let d3 = (-f(3.0) + f(2.0) * 8.0 - f(1.0) * 13.0 + f(-1.0) * 13.0 - f(-2.0) * 8.0 + f(-3.0))
            / (8.0 * h * h * h);
        [d1, d2, d3]
    }

    #[test]
    fn jets_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let e = random_instance(&mut rng);
            let z = random_point(&mut rng, &e, 0.9, 0.3);
            let j = e.jet_at(z, 3).unwrap();
            let scale = (0..4).map(|m| j.nth_value(m).unwrap().norm()).fold(1.0, f64::max);
            let fd = finite_differences(&e, z);
            for (m, approx) in fd.iter().enumerate() {
                let exact = j.nth_value(m + 1).unwrap();
                assert!(
                    (exact - approx).norm() <= 1e-6 * scale,
                    "{} at {}: d{} {} vs {}",
                    e.name,
                    z,
                    m + 1,
                    exact,
                    approx
                );
            }
        }
    }

    #[test]
    fn log_derivative_of_shifted_reciprocal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 2..6 {
            for n in 1..5 {
                let h = shifted_reciprocal(n, k).unwrap();
                let z = random_point(&mut rng, &h, 0.9, 0.1);
                let j = h.jet_at(z, 1).unwrap();
                let ld = j.nth_value(1).unwrap() / j.nth_value(0).unwrap();
                let expected = Complex64::new((1 - k) as f64, 0.0)
                    / (z * (z.powi(k - 1) * n as f64 + 1.0));
                assert!((ld - expected).norm() <= 1e-10 * expected.norm().max(1.0));
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(reciprocal_power(1, 1).is_err());
        assert!(mobius_power(0).is_err());
        assert!(hayman(cz(0.0, 0.0)).is_err());
        assert!(instantiate("nope", &[]).is_err());
    }
}
