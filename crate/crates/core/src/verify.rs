//! Seeded verification suites, each comparing the library against an
//! independent closed form or exact count. Used by the CLI `verify`
//! subcommand and by the acceptance tests.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bessel::{bessel_zero, BesselKind};
use crate::catalog::{self, CatalogEntry};
use crate::disconjugacy::{
    count_solution_zeros, disconjugacy_threshold, integrate, random_in_disk, ConvexRegion,
};
use crate::error::{Error, Result};
use crate::expr::FunctionExpr;
use crate::jet::JetSource;
use crate::normality::{marty_inequality_check, omitted_function_check, rect_grid};
use crate::ode_link::verify_link;
use crate::schwarzian::{
    closed_form_terms, grahl_decompose, is_schwarzian_null, order_budget, pole_order_at, pre_schwarzian,
    rational_to_f64, schwarzian_closed_form, schwarzian_recursive,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    FaaDiBruno,
    Classical,
    Mobius,
    Hayman,
    Bessel,
    BesselZeros,
    PoleOrder,
    OdeLink,
    Disconjugacy,
    Grahl,
    Corollary,
    Marty,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::FaaDiBruno,
        Suite::Classical,
        Suite::Mobius,
        Suite::Hayman,
        Suite::Bessel,
        Suite::BesselZeros,
        Suite::PoleOrder,
        Suite::OdeLink,
        Suite::Disconjugacy,
        Suite::Grahl,
        Suite::Corollary,
        Suite::Marty,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::FaaDiBruno => "faa-di-bruno",
            Suite::Classical => "classical",
            Suite::Mobius => "mobius",
            Suite::Hayman => "hayman",
            Suite::Bessel => "bessel",
            Suite::BesselZeros => "bessel-zeros",
            Suite::PoleOrder => "pole-order",
            Suite::OdeLink => "ode-link",
            Suite::Disconjugacy => "disconjugacy",
            Suite::Grahl => "grahl",
            Suite::Corollary => "corollary",
            Suite::Marty => "marty",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::FaaDiBruno | Suite::Mobius | Suite::Hayman | Suite::OdeLink | Suite::Disconjugacy => 1e-9,
            Suite::Classical | Suite::Corollary => 1e-10,
            Suite::Bessel => 1e-8,
            Suite::BesselZeros => 0.05,
            Suite::PoleOrder | Suite::Grahl | Suite::Marty => 0.0,
        }
    }

    pub fn default_ks(self) -> Vec<usize> {
        match self {
            Suite::FaaDiBruno => (2..=6).collect(),
            Suite::PoleOrder => (2..=6).collect(),
            Suite::OdeLink | Suite::Corollary => (2..=5).collect(),
            Suite::Disconjugacy => vec![2, 3],
            Suite::Grahl => (2..=12).collect(),
            _ => vec![2],
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::FaaDiBruno | Suite::OdeLink => 50,
            Suite::Mobius | Suite::Hayman => 20,
            Suite::Bessel | Suite::Corollary | Suite::Disconjugacy => 10,
            Suite::Classical => 50,
            Suite::Marty => 1000,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub ks: Vec<usize>,
    pub tolerance: f64,
}

impl SuiteConfig {
    pub fn defaults(suite: Suite, seed: u64) -> Self {
        SuiteConfig {
            seed,
            trials: suite.default_trials(),
            ks: suite.default_ks(),
            tolerance: suite.default_tolerance(),
        }
    }
}

/// One comparison. `z` is absent for checks not tied to a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteRow {
    pub label: String,
    pub z: Option<Complex64>,
    pub value: Complex64,
    pub expected: Complex64,
    pub error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub config: SuiteConfig,
    pub rows: Vec<SuiteRow>,
    pub max_error: f64,
    pub failures: usize,
    pub pass: bool,
}

/// `|a - b| / max(|a|, |b|)`, falling back to the absolute difference when
/// both are below `1e-12`.
pub fn rel_error(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    let d = (a - b).norm();
    if scale < 1e-12 {
        d
    } else {
        d / scale
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

struct Rows {
    tol: f64,
    rows: Vec<SuiteRow>,
}

impl Rows {
    fn new(tol: f64) -> Self {
        Rows { tol, rows: Vec::new() }
    }

    fn compare(&mut self, label: String, z: Option<Complex64>, value: Complex64, expected: Complex64) {
        let error = rel_error(value, expected);
        self.rows.push(SuiteRow {
            label,
            z,
            value,
            expected,
            error,
            pass: error <= self.tol,
        });
    }

    /// A check whose error measure and outcome are decided by the caller.
    fn verdict(
        &mut self,
        label: String,
        z: Option<Complex64>,
        value: Complex64,
        expected: Complex64,
        error: f64,
        pass: bool,
    ) {
        self.rows.push(SuiteRow {
            label,
            z,
            value,
            expected,
            error,
            pass,
        });
    }
}

fn schwarzian_value<F: JetSource + ?Sized>(f: &F, k: usize, z: Complex64) -> Result<Complex64> {
    schwarzian_recursive(f, k, z)?
        .value()
        .ok_or(Error::LaurentJet(0))
}

/// Random instances paired with points in `|z| < radius` at least `margin`
/// from their singular set.
fn sample_instances(rng: &mut ChaCha8Rng, n: usize, radius: f64, margin: f64) -> Vec<(CatalogEntry, Complex64)> {
    (0..n)
        .map(|_| {
            let f = catalog::random_instance(rng);
            let z = catalog::random_point(rng, &f, radius, margin);
            (f, z)
        })
        .collect()
}

/// Largest `|c_mu prod (g^(j-1))^(n_j)|` in the partition expansion of
/// `S_k`, the scale against which cancellation to zero is measured.
pub fn term_scale<F: JetSource + ?Sized>(f: &F, k: usize, z: Complex64) -> Result<f64> {
    let (_, g) = pre_schwarzian(f, z, order_budget(k))?;
    let derivs: Vec<f64> = (0..k).map(|m| g.nth_value(m).map(|v| v.norm())).collect::<Result<_>>()?;
    let mut scale = 0.0f64;
    for term in closed_form_terms(k)? {
        let mut prod = rational_to_f64(&term.coefficient).abs();
        for (j, &n) in term.tuple.counts().iter().enumerate() {
            prod *= derivs[j].powi(n as i32);
        }
        scale = scale.max(prod);
    }
    Ok(scale)
}

/// Points of the unit disk at least `margin` from the origin and from `avoid`.
fn disk_points(rng: &mut ChaCha8Rng, n: usize, avoid: &[Complex64], margin: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = random_in_disk(rng, 0.95);
        if z.norm() >= margin && avoid.iter().all(|s| (z - s).norm() >= margin) {
            out.push(z);
        }
    }
    out
}

fn param_label(f: &CatalogEntry) -> String {
    let ps: Vec<String> = f
        .params
        .iter()
        .map(|(n, v)| match v {
            catalog::ParamValue::Int(i) => format!("{n}={i}"),
            catalog::ParamValue::Complex(c) => format!("{n}={c:.4}"),
        })
        .collect();
    format!("{}({})", f.name, ps.join(","))
}

pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rows = Rows::new(config.tolerance);
    match suite {
        Suite::FaaDiBruno => {
            for (f, z) in sample_instances(&mut rng, config.trials, 0.9, 0.1) {
                for &k in &config.ks {
                    let a = schwarzian_value(&f, k, z)?;
                    let b = schwarzian_closed_form(&f, k, z)?.value().ok_or(Error::LaurentJet(0))?;
                    let scale = a.norm().max(b.norm()).max(term_scale(&f, k, z)?);
                    let error = if scale > 0.0 { (a - b).norm() / scale } else { (a - b).norm() };
                    rows.verdict(format!("{} k={k}", param_label(&f)), Some(z), a, b, error, error <= rows.tol);
                }
            }
        }
        Suite::Classical => {
            for (f, z) in sample_instances(&mut rng, config.trials, 0.9, 0.1) {
                let j = f.jet_at(z, 3)?;
                let (d1, d2, d3) = (j.nth_value(1)?, j.nth_value(2)?, j.nth_value(3)?);
                let classical = d3 / d1 - 1.5 * (d2 / d1) * (d2 / d1);
                rows.compare(param_label(&f), Some(z), schwarzian_value(&f, 2, z)?, classical);
            }
        }
        Suite::Mobius => {
            for n in 2..=6 {
                let f = catalog::mobius_power(n)?;
                for z in disk_points(&mut rng, config.trials, &f.singularities, 0.05) {
                    let expected = real(1.0 - (n * n) as f64) / (z * z * 2.0);
                    rows.compare(format!("n={n}"), Some(z), schwarzian_value(&f, 2, z)?, expected);
                }
            }
        }
        Suite::Hayman => {
            for c in [real(1.0), real(2.0), Complex64::new(1.0, 1.0)] {
                let f = catalog::hayman(c)?;
                for z in disk_points(&mut rng, config.trials, &[], 0.0) {
                    let expected = -(c * z * 2.0).exp() / 2.0 - c * c / 2.0;
                    rows.compare(format!("c={c}"), Some(z), schwarzian_value(&f, 2, z)?, expected);
                }
            }
        }
        Suite::Bessel => bessel_rows(&mut rng, config.trials, 1.0, &mut rows)?,
        Suite::BesselZeros => {
            for n in 5..=8 {
                for (kind, shift) in [(BesselKind::J0, 0.25), (BesselKind::Y0, 0.75)] {
                    let zero = bessel_zero(kind, n)?;
                    let asym = (n as f64 - shift) * PI;
                    let err = (zero - asym).abs();
                    rows.verdict(
                        format!("{} n={n}", kind.name()),
                        None,
                        real(zero),
                        real(asym),
                        err,
                        err <= config.tolerance,
                    );
                }
            }
        }
        Suite::PoleOrder => {
            let sq = FunctionExpr::parse("z^2")?;
            for &k in &config.ks {
                let order = pole_order_at(&sq, k, real(0.0))?;
                rows.verdict(
                    format!("z^2 k={k}"),
                    Some(real(0.0)),
                    real(order as f64),
                    real(k as f64),
                    (order as f64 - k as f64).abs(),
                    order as usize == k,
                );
            }
            let grid = crate::normality::disk_grid(real(0.0), 0.9, 3, 12);
            for k in 2..=5 {
                for n in 1..=3 {
                    let g = catalog::reciprocal_power(n, k as i32)?;
                    let null = is_schwarzian_null(&g, k, &grid)?;
                    rows.verdict(format!("S_{k}(g_{n}) = 0"), None, real(0.0), real(0.0), 0.0, null);
                }
            }
        }
        Suite::OdeLink => {
            // the residual is normalized by 1 + |h^(k)|, so it degrades like
            // dist^(-k) near poles where h^(k) cancels to zero
            for (f, z) in sample_instances(&mut rng, config.trials, 1.5, 0.6) {
                for &k in &config.ks {
                    let r = verify_link(&f, k, z)?;
                    let err = r.residual.max(r.schwarzian_mismatch);
                    rows.verdict(
                        format!("{} k={k}", param_label(&f)),
                        Some(z),
                        real(err),
                        real(0.0),
                        err,
                        err <= config.tolerance,
                    );
                }
            }
        }
        Suite::Disconjugacy => disconjugacy_rows(&mut rng, config, &mut rows)?,
        Suite::Grahl => {
            for &k in &config.ks {
                let (ok, n) = match grahl_decompose(k) {
                    Ok(d) => (true, d.terms.len()),
                    Err(Error::GrahlCondition { .. }) => (false, 0),
                    Err(e) => return Err(e),
                };
                rows.verdict(format!("k={k} terms={n}"), None, real(n as f64), real(n as f64), 0.0, ok);
            }
        }
        Suite::Corollary => {
            for _ in 0..config.trials {
                let a = Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI));
                let b = Complex64::from_polar(rng.gen_range(0.3..1.5), rng.gen_range(0.0..2.0 * PI));
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let f = catalog::exp_affine(a, b, c)?;
                let grid = rect_grid((-0.8, 0.8), (-0.8, 0.8), 4, 4);
                for &k in &config.ks {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    let expected = b.powu(k as u32) * (sign / (k as f64).powi(k as i32 - 1));
                    for &z in &grid {
                        rows.compare(format!("{} k={k}", param_label(&f)), Some(z), schwarzian_value(&f, k, z)?, expected);
                    }
                    let zero = FunctionExpr::constant(real(0.0));
                    let om = omitted_function_check(&f, k, &zero, &grid)?;
                    rows.verdict(
                        format!("{} k={k} omits 0", param_label(&f)),
                        Some(om.argmin),
                        real(om.min_gap),
                        real(0.0),
                        0.0,
                        om.omits_on_grid,
                    );
                }
            }
        }
        Suite::Marty => marty_rows(&mut rng, config.trials, &mut rows)?,
    }
    let rows = rows.rows;
    let max_error = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    let failures = rows.iter().filter(|r| !r.pass).count();
    Ok(SuiteReport {
        suite,
        config: config.clone(),
        pass: failures == 0 && !rows.is_empty(),
        rows,
        max_error,
        failures,
    })
}

/// Points of the strip `|Re z| <= 3, |Im z| <= half_width` away from the
/// quotient's poles.
pub fn bessel_strip_points(rng: &mut ChaCha8Rng, n: usize, half_width: f64) -> Vec<Complex64> {
    let q = catalog::bessel_quotient();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = Complex64::new(rng.gen_range(-3.0..=3.0), rng.gen_range(-half_width..=half_width));
        if q.clearance(z) >= 0.1 {
            out.push(z);
        }
    }
    out
}

fn bessel_rows(rng: &mut ChaCha8Rng, n: usize, half_width: f64, rows: &mut Rows) -> Result<()> {
    let q = catalog::bessel_quotient();
    let (f1, f2) = (catalog::bessel_j(), catalog::bessel_y());
    for z in bessel_strip_points(rng, n, half_width) {
        rows.compare("S_2(f1/f2)".into(), Some(z), schwarzian_value(&q, 2, z)?, z.exp() / 2.0);
        for (name, f) in [("f1", &f1), ("f2", &f2)] {
            let j = f.jet_at(z, 2)?;
            let (y, d2) = (j.nth_value(0)?, j.nth_value(2)?);
            let p = z.exp() / 4.0 * y;
            let residual = (d2 + p).norm() / (d2.norm() + p.norm());
            rows.verdict(
                format!("{name}'' + e^z/4 {name}"),
                Some(z),
                d2 + p,
                real(0.0),
                residual,
                residual <= rows.tol,
            );
        }
    }
    Ok(())
}

/// CSV-style table for `bessel counterexample`.
pub fn bessel_counterexample(seed: u64, n: usize, half_width: f64, tolerance: f64) -> Result<Vec<SuiteRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = catalog::bessel_quotient();
    let mut rows = Rows::new(tolerance);
    for z in bessel_strip_points(&mut rng, n, half_width) {
        rows.compare("S_2(f1/f2)".into(), Some(z), schwarzian_value(&q, 2, z)?, z.exp() / 2.0);
    }
    Ok(rows.rows)
}

/// A random cell of diameter `delta` inside the unit disk.
fn random_cell(rng: &mut ChaCha8Rng, delta: f64) -> ConvexRegion {
    let center = random_in_disk(rng, 1.0 - delta / 2.0);
    if rng.gen_bool(0.5) {
        ConvexRegion::disk(center, delta / 2.0)
    } else {
        ConvexRegion::square(center, delta / std::f64::consts::SQRT_2)
    }
}

fn disconjugacy_rows(rng: &mut ChaCha8Rng, config: &SuiteConfig, rows: &mut Rows) -> Result<()> {
    const INITIAL_CONDITIONS: usize = 25;
    for &k in &config.ks {
        for _ in 0..config.trials {
            let delta = rng.gen_range(0.2..=1.0);
            let cell = random_cell(rng, delta);
            let size = 0.9 * disconjugacy_threshold(k, delta);
            let p0 = FunctionExpr::constant(Complex64::from_polar(size, rng.gen_range(0.0..2.0 * PI)));
            for _ in 0..INITIAL_CONDITIONS {
                let init: Vec<Complex64> = (0..k)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
                    .collect();
                let n = count_solution_zeros(&p0, k, &init, &cell)?;
                rows.verdict(
                    format!("k={k} delta={delta:.3} zeros<={}", k - 1),
                    Some(cell.center()),
                    real(n as f64),
                    real((k - 1) as f64),
                    0.0,
                    n < k as i64,
                );
            }
        }
    }
    // sine closed form along a real path
    let p0 = FunctionExpr::constant(real(1.0));
    let path: Vec<Complex64> = (0..=6).map(|i| real(i as f64 * 0.5)).collect();
    let t = integrate(&p0, 2, &[real(0.0), real(1.0)], &path)?;
    for (z, s) in t.path.iter().zip(&t.states) {
        let exact = z.sin();
        let err = (s[0] - exact).norm();
        rows.verdict("sin".into(), Some(*z), s[0], exact, err, err <= rows.tol);
    }
    Ok(())
}

fn marty_rows(rng: &mut ChaCha8Rng, pairs: usize, rows: &mut Rows) -> Result<()> {
    // entries with f'' = 0 identically (the linear family) contribute only
    // degenerate points, so the quota is spread over the others
    const ATTEMPTS_PER_PAIR: usize = 20;
    let mut entries = catalog::defaults();
    while entries.len() < 40 {
        entries.push(catalog::random_instance(rng));
    }
    entries.retain(|f| f.name != "linear");
    let per_entry = pairs.div_ceil(entries.len());
    for f in &entries {
        let bessel = f.name.starts_with("bessel");
        let (mut done, mut attempts) = (0, 0);
        while done < per_entry && attempts < ATTEMPTS_PER_PAIR * per_entry {
            attempts += 1;
            let z = if bessel {
                bessel_strip_points(rng, 1, 1.0)[0]
            } else {
                catalog::random_point(rng, f, 0.95, 0.05)
            };
            let m = match marty_inequality_check(f, z) {
                Ok(m) => m,
                Err(Error::CriticalPoint(_)) => continue,
                Err(e) => return Err(e),
            };
            if m.degenerate {
                continue;
            }
            done += 1;
            rows.verdict(param_label(f), Some(z), real(m.lhs), real(m.rhs), 0.0, m.holds);
        }
    }
    Ok(())
}
