use std::f64::consts::PI;

use anyhow::{Context, Result};
use num_complex::Complex64;
use schwarzian::bessel::{bessel_value, bessel_zero, BesselKind};
use schwarzian::catalog::{self, CatalogEntry, ParamValue};
use schwarzian::disconjugacy::{check_disconjugacy, pole_count_bound, ConvexRegion};
use schwarzian::normality::{
    disk_grid, exclude_near, family_bound_probe, marty_inequality_check, omitted_function_check, FamilySpec,
    Transform,
};
use schwarzian::ode_link::verify_link;
use schwarzian::schwarzian::{
    closed_form_terms, enumerate_partitions, grahl_decompose, pole_order_at, rational_to_f64,
    schwarzian_closed_form, schwarzian_recursive,
};
use schwarzian::verify::{bessel_counterexample, run_suite, term_scale, Suite, SuiteConfig};
use schwarzian::{Error, FunctionExpr};
use serde_json::{json, Value};

use crate::output::{num, Output};
use crate::{BesselAction, Cli, Command, Kind, PointArgs, Shape, UsageError};

const ORACLE_TOLERANCE: f64 = 1e-9;
const LINK_TOLERANCE: f64 = 1e-9;
const BESSEL_TOLERANCE: f64 = 1e-8;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn parse_expr(text: &str) -> Result<FunctionExpr> {
    FunctionExpr::parse(text).map_err(|e| usage(format!("cannot parse `{text}`: {e}")))
}

/// A constant expression such as `0.5-2i`.
fn parse_complex(text: &str) -> Result<Complex64> {
    let e = parse_expr(text)?;
    if e.depends_on_z() {
        return Err(usage(format!("`{text}` is not a constant")));
    }
    e.eval(Complex64::new(0.0, 0.0))
        .map_err(|err| usage(format!("cannot evaluate `{text}`: {err}")))
}

fn parse_param(text: &str) -> Result<ParamValue> {
    match text.trim().parse::<i64>() {
        Ok(n) => Ok(ParamValue::Int(n)),
        Err(_) => Ok(ParamValue::Complex(parse_complex(text)?)),
    }
}

fn parse_pairs(text: &str) -> Result<Vec<(String, ParamValue)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| usage(format!("expected name=value, got `{pair}`")))?;
            Ok((name.trim().to_string(), parse_param(value)?))
        })
        .collect()
}

/// `@family:name=value,...` selects a catalog entry, anything else is an expression.
fn resolve_function(text: &str) -> Result<CatalogEntry> {
    if let Some(spec) = text.strip_prefix('@') {
        let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
        let params = parse_pairs(params)?;
        let refs: Vec<(&str, ParamValue)> = params.iter().map(|(n, v)| (n.as_str(), *v)).collect();
        return catalog::instantiate(name, &refs).map_err(|e| usage(e.to_string()));
    }
    Ok(CatalogEntry {
        name: "expr".into(),
        expr: parse_expr(text)?,
        params: Vec::new(),
        known_identity: None,
        singularities: Vec::new(),
        critical_points: Vec::new(),
    })
}

/// The points to visit and whether they came from a single `-z`.
fn points(args: &PointArgs, avoid: &[Complex64]) -> Result<(Vec<Complex64>, bool)> {
    if let Some(z) = &args.z {
        return Ok((vec![parse_complex(z)?], true));
    }
    if args.grid_radius <= 0.0 || args.grid_rings == 0 || args.grid_per_ring == 0 {
        return Err(usage("grid needs a positive radius, rings and points per ring"));
    }
    let center = parse_complex(&args.grid_center)?;
    let mut grid = vec![center];
    grid.extend(disk_grid(center, args.grid_radius, args.grid_rings, args.grid_per_ring));
    Ok((exclude_near(&grid, avoid), false))
}

fn tolerance(given: Option<f64>, default: f64, allow_unsafe: bool, flag: &str) -> Result<f64> {
    match given {
        None => Ok(default),
        Some(t) if t.is_nan() || t < 0.0 => Err(usage(format!("{flag} must be non-negative"))),
        Some(t) if t > default && !allow_unsafe => Err(usage(format!(
            "{flag} {t:e} is looser than the default {default:e}; pass --unsafe to allow it"
        ))),
        Some(t) => Ok(t),
    }
}

fn cplx(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Runs `step` at every point. On a grid, points where it fails are
/// skipped and counted; a single point propagates the error.
fn each_point<F>(out: &mut Output, pts: &[Complex64], single: bool, mut step: F) -> Result<()>
where
    F: FnMut(&mut Output, Complex64) -> Result<()>,
{
    let mut skipped = 0;
    for &z in pts {
        if let Err(e) = step(out, z) {
            if single {
                return Err(e.context(format!("at z = {z}")));
            }
            log::warn!("skipping {z}: {e:#}");
            skipped += 1;
        }
    }
    if !single {
        out.extra.insert("skipped".into(), json!(skipped));
    }
    if out.rows() == 0 {
        out.pass = false;
    }
    Ok(())
}

fn kind(k: Kind) -> BesselKind {
    match k {
        Kind::J0 => BesselKind::J0,
        Kind::Y0 => BesselKind::Y0,
    }
}

pub fn run(cli: &Cli) -> Result<Output> {
    let unsafe_ok = cli.allow_unsafe;
    match &cli.command {
        Command::Eval { f, k, points: p, tol_oracle } => {
            let tol = tolerance(*tol_oracle, ORACLE_TOLERANCE, unsafe_ok, "--tol-oracle")?;
            let f = resolve_function(&f.function)?;
            let (pts, single) = points(p, &f.singularities)?;
            let mut out = Output::pointwise(&["re(closed_form)", "im(closed_form)", "rel_error"]);
            each_point(&mut out, &pts, single, |out, z| {
                let r = schwarzian_recursive(&f, *k, z)?;
                let a = r.value().ok_or_else(|| {
                    anyhow::anyhow!("S_{k} has a pole of order {} here", r.pole_order())
                })?;
                let b = schwarzian_closed_form(&f, *k, z)?
                    .value()
                    .context("closed form has a pole here")?;
                let scale = a.norm().max(b.norm()).max(term_scale(&f, *k, z)?);
                let diff = (a - b).norm();
                let rel = if scale > 0.0 { diff / scale } else { diff };
                out.pass &= rel <= tol;
                out.max_error = out.max_error.max(rel);
                out.push_point(
                    Some(z),
                    a,
                    diff,
                    vec![("re(closed_form)", json!(b.re)), ("im(closed_form)", json!(b.im)), ("rel_error", json!(rel))],
                );
                Ok(())
            })?;
            Ok(out)
        }
        Command::Partitions { k } => {
            let mut out = Output::table(&["tuple", "parts"]);
            for t in enumerate_partitions(*k).map_err(|e| usage(e.to_string()))? {
                out.push(
                    vec![crate::output::cell(&json!(t.counts())), t.parts().to_string()],
                    json!({"tuple": t.counts(), "parts": t.parts()}),
                );
            }
            Ok(out)
        }
        Command::Coefficients { k } => {
            let mut out = Output::table(&["tuple", "coefficient", "approx"]);
            for term in closed_form_terms(*k).map_err(|e| usage(e.to_string()))? {
                let approx = rational_to_f64(&term.coefficient);
                out.push(
                    vec![
                        crate::output::cell(&json!(term.tuple.counts())),
                        term.coefficient.to_string(),
                        num(approx),
                    ],
                    json!({"tuple": term.tuple.counts(), "coefficient": term.coefficient.to_string(), "approx": approx}),
                );
            }
            Ok(out)
        }
        Command::Grahl { k } => {
            if *k < 2 {
                return Err(usage("-k must be at least 2"));
            }
            let d = grahl_decompose(*k)?;
            let (k, ell) = (*k as u32, d.ell as u32);
            let mut out = Output::table(&["tuple", "a_mu", "s_mu", "omegas", "omega_sum", "condition"]);
            for t in &d.terms {
                let w = t.omega_sum();
                let ok = (k - 1) * w + ell * t.s_mu == ell * k && (2..k).contains(&t.s_mu) && w >= 1;
                out.pass &= ok;
                let row = json!({
                    "tuple": t.tuple.counts(),
                    "a_mu": t.a_mu.to_string(),
                    "s_mu": t.s_mu,
                    "omegas": t.omegas,
                    "omega_sum": w,
                    "condition": ok,
                });
                let cells = ["tuple", "a_mu", "s_mu", "omegas", "omega_sum", "condition"]
                    .iter()
                    .map(|c| crate::output::cell(&row[c]))
                    .collect();
                out.push(cells, row);
            }
            out.extra.insert("leading".into(), json!(d.leading.to_string()));
            out.extra.insert("ell".into(), json!(d.ell));
            Ok(out)
        }
        Command::PoleOrder { f, k, z } => {
            let f = resolve_function(&f.function)?;
            let z = parse_complex(z)?;
            let order = pole_order_at(&f, *k, z).with_context(|| format!("at z = {z}"))?;
            let mut out = Output::pointwise(&["pole_order"]);
            out.push_point(Some(z), Complex64::new(order as f64, 0.0), 0.0, vec![("pole_order", json!(order))]);
            Ok(out)
        }
        Command::OdeLink { f, k, points: p, tol_link } => {
            let tol = tolerance(*tol_link, LINK_TOLERANCE, unsafe_ok, "--tol-link")?;
            let f = resolve_function(&f.function)?;
            let avoid: Vec<Complex64> = f.singularities.iter().chain(&f.critical_points).copied().collect();
            let (pts, single) = points(p, &avoid)?;
            let mut out = Output::pointwise(&["residual", "schwarzian_mismatch"]);
            each_point(&mut out, &pts, single, |out, z| {
                let r = verify_link(&f, *k, z)?;
                let err = r.residual.max(r.schwarzian_mismatch);
                out.pass &= err <= tol;
                out.max_error = out.max_error.max(err);
                out.push_point(
                    Some(z),
                    r.p0_value,
                    err,
                    vec![("residual", json!(r.residual)), ("schwarzian_mismatch", json!(r.schwarzian_mismatch))],
                );
                Ok(())
            })?;
            Ok(out)
        }
        Command::Disconjugacy { p0, k, shape, center, diameter, trials } => {
            if *k < 1 {
                return Err(usage("-k must be at least 1"));
            }
            if diameter.is_nan() || *diameter <= 0.0 {
                return Err(usage("--diameter must be positive"));
            }
            let p0 = parse_expr(p0)?;
            let center = parse_complex(center)?;
            let region = match shape {
                Shape::Disk => ConvexRegion::disk(center, diameter / 2.0),
                Shape::Square => ConvexRegion::square(center, diameter / std::f64::consts::SQRT_2),
            };
            let r = check_disconjugacy(&p0, *k, &region, *trials, cli.seed)?;
            let mut out = Output::table(&["trial", "zeros"]);
            for (i, n) in r.counts.iter().enumerate() {
                out.push(vec![i.to_string(), n.to_string()], json!({"trial": i, "zeros": n}));
            }
            // above the threshold nothing is claimed, so a large count is not a failure
            out.pass = r.pass || r.vacuous;
            out.extra.insert("threshold".into(), json!(r.threshold));
            out.extra.insert("sup_p0".into(), json!(r.sup_p0));
            out.extra.insert("vacuous".into(), json!(r.vacuous));
            out.extra.insert("max_count".into(), json!(r.max_count));
            if r.vacuous {
                eprintln!("note: sup |p0| = {} is not below k!/delta^k = {}, the bound is vacuous", r.sup_p0, r.threshold);
            }
            Ok(out)
        }
        Command::PoleBound { k, m, cells } => {
            let b = pole_count_bound(*k, *m).map_err(|e| usage(e.to_string()))?;
            if *cells {
                let mut out = Output::table(&["shape", "re(center)", "im(center)", "diameter"]);
                for c in &b.covering.cells {
                    let shape = match c {
                        ConvexRegion::Disk { .. } => "disk",
                        ConvexRegion::Square { .. } => "square",
                    };
                    let z = c.center();
                    out.push(
                        vec![shape.into(), num(z.re), num(z.im), num(c.diameter())],
                        json!({"shape": shape, "center": cplx(z), "diameter": c.diameter()}),
                    );
                }
                Ok(out)
            } else {
                let mut out = Output::table(&["k", "M", "delta", "cells", "n_tilde", "n"]);
                out.push(
                    vec![
                        b.k.to_string(),
                        num(b.m),
                        num(b.delta),
                        b.covering.count.to_string(),
                        b.n_tilde.to_string(),
                        b.n.to_string(),
                    ],
                    json!({"k": b.k, "M": b.m, "delta": b.delta, "cells": b.covering.count, "n_tilde": b.n_tilde, "n": b.n}),
                );
                Ok(out)
            }
        }
        Command::Bessel { action } => bessel(action, cli.seed, unsafe_ok),
        Command::Marty { f, points: p } => {
            let f = resolve_function(&f.function)?;
            let (pts, single) = points(p, &f.singularities)?;
            let mut out = Output::pointwise(&["rhs", "holds", "degenerate"]);
            each_point(&mut out, &pts, single, |out, z| {
                let m = marty_inequality_check(&f, z)?;
                out.pass &= m.holds || m.degenerate;
                out.push_point(
                    Some(z),
                    Complex64::new(m.lhs, 0.0),
                    0.0,
                    vec![("rhs", json!(m.rhs)), ("holds", json!(m.holds)), ("degenerate", json!(m.degenerate))],
                );
                Ok(())
            })?;
            Ok(out)
        }
        Command::FamilyProbe { family, vary, values, fixed, k, transform, points: p } => {
            let values = values
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(parse_param)
                .collect::<Result<Vec<_>>>()?;
            let mut spec = FamilySpec::new(family, vary, values, *k);
            for (name, v) in parse_pairs(fixed)? {
                spec = spec.with_fixed(&name, v);
            }
            spec.members().map_err(|e| usage(e.to_string()))?;
            let transform = Transform::parse(transform).map_err(|e| usage(e.to_string()))?;
            let (grid, _) = points(p, &[])?;
            let r = family_bound_probe(&spec, transform, &grid)?;
            let mut out = Output::table(&["param", "sup", "re(argsup)", "im(argsup)", "skipped"]);
            for m in &r.members {
                let param = match m.param {
                    ParamValue::Int(n) => n.to_string(),
                    ParamValue::Complex(c) => c.to_string(),
                };
                out.push(
                    vec![
                        param.clone(),
                        num(m.sup),
                        num(m.argsup.re),
                        num(m.argsup.im),
                        m.skipped.to_string(),
                    ],
                    json!({"param": param, "sup": m.sup, "argsup": cplx(m.argsup), "skipped": m.skipped}),
                );
            }
            out.extra.insert("overall_sup".into(), json!(r.overall_sup));
            out.extra.insert("diverging".into(), json!(r.diverging));
            Ok(out)
        }
        Command::OmitCheck { f, k, b, points: p } => {
            let f = resolve_function(&f.function)?;
            let b = parse_expr(b)?;
            let (pts, single) = points(p, &f.singularities)?;
            let report = omitted_function_check(&f, *k, &b, &pts)?;
            let mut out = Output::pointwise(&["re(b)", "im(b)"]);
            each_point(&mut out, &pts, single, |out, z| {
                let s = schwarzian_recursive(&f, *k, z)?.value().context("S_k has a pole here")?;
                let bz = b.eval(z)?;
                out.push_point(Some(z), s, (s - bz).norm(), vec![("re(b)", json!(bz.re)), ("im(b)", json!(bz.im))]);
                Ok(())
            })?;
            out.pass = report.omits_on_grid;
            out.extra.insert("min_gap".into(), json!(report.min_gap));
            out.extra.insert("argmin".into(), cplx(report.argmin));
            out.extra.insert("points_used".into(), json!(report.points_used));
            Ok(out)
        }
        Command::Verify { suite, k, trials, tol_suite } => {
            let suites = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![Suite::parse(suite).map_err(|e| usage(e.to_string()))?]
            };
            let mut out = Output::pointwise(&["suite", "label", "re(expected)", "im(expected)", "error", "pass"]);
            for s in suites {
                let mut cfg = SuiteConfig::defaults(s, cli.seed);
                if !k.is_empty() {
                    cfg.ks = k.clone();
                }
                if let Some(t) = trials {
                    cfg.trials = *t;
                }
                cfg.tolerance = tolerance(*tol_suite, s.default_tolerance(), unsafe_ok, "--tol-suite")?;
                let r = run_suite(s, &cfg).with_context(|| format!("suite {}", s.name()))?;
                for row in &r.rows {
                    out.push_point(
                        row.z,
                        row.value,
                        (row.value - row.expected).norm(),
                        vec![
                            ("suite", json!(s.name())),
                            ("label", json!(row.label)),
                            ("re(expected)", json!(row.expected.re)),
                            ("im(expected)", json!(row.expected.im)),
                            ("error", json!(row.error)),
                            ("pass", json!(row.pass)),
                        ],
                    );
                }
                out.pass &= r.pass;
                out.max_error = out.max_error.max(r.max_error);
            }
            Ok(out)
        }
    }
}

fn bessel(action: &BesselAction, seed: u64, unsafe_ok: bool) -> Result<Output> {
    match action {
        BesselAction::Eval { kind: kd, points: p } => {
            let (pts, single) = points(p, &[])?;
            let mut out = Output::pointwise(&[]);
            each_point(&mut out, &pts, single, |out, z| {
                out.push_point(Some(z), bessel_value(kind(*kd), z)?, 0.0, vec![]);
                Ok(())
            })?;
            Ok(out)
        }
        BesselAction::Zeros { kind: kd, count } => {
            let shift = match kd {
                Kind::J0 => 0.25,
                Kind::Y0 => 0.75,
            };
            let mut out = Output::table(&["n", "zero", "asymptotic", "difference"]);
            for n in 1..=*count {
                let zero = match bessel_zero(kind(*kd), n) {
                    Ok(z) => z,
                    Err(e @ (Error::Bracketing { .. } | Error::SeriesRadius(..))) => {
                        return Err(usage(format!("zero {n} is out of range: {e}")))
                    }
                    Err(e) => return Err(e.into()),
                };
                let asym = (n as f64 - shift) * PI;
                let diff = (zero - asym).abs();
                out.max_error = out.max_error.max(diff);
                out.push(
                    vec![n.to_string(), num(zero), num(asym), num(diff)],
                    json!({"n": n, "zero": zero, "asymptotic": asym, "difference": diff}),
                );
            }
            Ok(out)
        }
        BesselAction::Counterexample { grid_strip, trials, tol_bessel } => {
            let tol = tolerance(*tol_bessel, BESSEL_TOLERANCE, unsafe_ok, "--tol-bessel")?;
            if grid_strip.is_nan() || *grid_strip <= 0.0 {
                return Err(usage("--grid-strip must be positive"));
            }
            let rows = bessel_counterexample(seed, *trials, *grid_strip, tol)?;
            let mut out = Output::pointwise(&["re(expected)", "im(expected)", "rel_error"]);
            for r in &rows {
                out.pass &= r.pass;
                out.max_error = out.max_error.max(r.error);
                out.push_point(
                    r.z,
                    r.value,
                    (r.value - r.expected).norm(),
                    vec![
                        ("re(expected)", json!(r.expected.re)),
                        ("im(expected)", json!(r.expected.im)),
                        ("rel_error", json!(r.error)),
                    ],
                );
            }
            if rows.is_empty() {
                out.pass = false;
            }
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_parameters() {
        assert_eq!(parse_complex("0.5-2i").unwrap(), Complex64::new(0.5, -2.0));
        assert!(parse_complex("z+1").unwrap_err().downcast_ref::<UsageError>().is_some());
        assert_eq!(parse_param("3").unwrap(), ParamValue::Int(3));
        assert_eq!(parse_param("1+1i").unwrap(), ParamValue::Complex(Complex64::new(1.0, 1.0)));
        let pairs = parse_pairs("n=2, k=4").unwrap();
        assert_eq!(pairs[1], ("k".to_string(), ParamValue::Int(4)));
        assert!(parse_pairs("n").is_err());
    }

    #[test]
    fn catalog_lookup() {
        let f = resolve_function("@reciprocal_power:n=2,k=4").unwrap();
        assert_eq!(f.param("k"), Some(ParamValue::Int(4)));
        assert_eq!(resolve_function("exp(z)").unwrap().name, "expr");
        assert!(resolve_function("@missing").is_err());
    }

    #[test]
    fn tolerances_only_tighten() {
        assert_eq!(tolerance(None, 1e-9, false, "--t").unwrap(), 1e-9);
        assert_eq!(tolerance(Some(1e-12), 1e-9, false, "--t").unwrap(), 1e-12);
        assert!(tolerance(Some(1e-6), 1e-9, false, "--t").is_err());
        assert_eq!(tolerance(Some(1e-6), 1e-9, true, "--t").unwrap(), 1e-6);
        assert!(tolerance(Some(f64::NAN), 1e-9, true, "--t").is_err());
    }

    #[test]
    fn grid_starts_at_its_center() {
        let args = PointArgs {
            z: None,
            grid_center: "1".into(),
            grid_radius: 0.5,
            grid_rings: 2,
            grid_per_ring: 4,
        };
        let (pts, single) = points(&args, &[]).unwrap();
        assert!(!single);
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], Complex64::new(1.0, 0.0));
        let (pts, _) = points(&args, &[Complex64::new(1.0, 0.0)]).unwrap();
        assert_eq!(pts.len(), 8);
    }
}
