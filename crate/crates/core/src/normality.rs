//! Spherical derivatives, the Marty-type bound `(f')^# < 2 |f''/f'|`, grid
//! sweeps over parametric families and omitted-function checks for `S_k`.

use num_complex::Complex64;
use serde::Serialize;

use crate::catalog::{self, CatalogEntry, ParamValue};
use crate::error::{Error, Result};
use crate::expr::FunctionExpr;
use crate::jet::{Jet, JetSource, SIGNIFICANCE};
use crate::schwarzian::schwarzian_recursive;

/// Grid points closer than this to a declared singularity are dropped.
pub const EXCLUSION_MARGIN: f64 = 1e-3;
pub const DIVERGENCE_FACTOR: f64 = 10.0;
pub const OMISSION_GAP: f64 = 1e-12;

/// `|f'| / (1 + |f|^2)`, using `1/f` at poles.
pub fn spherical_derivative<F: JetSource + ?Sized>(f: &F, z: Complex64) -> Result<f64> {
    let jet = f.jet_at(z, 1)?;
    let jet = if jet.lead_order() < 0 { jet.recip()? } else { jet };
    let (v, d) = (jet.coeff_at(0), jet.coeff_at(1));
    Ok(d.norm() / (1.0 + v.norm_sqr()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MartyCheck {
    /// `(f')^# = |f''| / (1 + |f'|^2)`.
    pub lhs: f64,
    /// `2 |f''/f'|`.
    pub rhs: f64,
    pub holds: bool,
    /// `f''(z) = 0`, so both sides vanish.
    pub degenerate: bool,
}

pub fn marty_inequality_check<F: JetSource + ?Sized>(f: &F, z: Complex64) -> Result<MartyCheck> {
    let jet = f.jet_at(z, 2)?;
    let d1 = jet.nth_value(1)?;
    let d2 = jet.nth_value(2)?;
    if d1.norm() <= SIGNIFICANCE {
        return Err(Error::CriticalPoint(z));
    }
    let lhs = d2.norm() / (1.0 + d1.norm_sqr());
    let rhs = 2.0 * (d2 / d1).norm();
    let degenerate = d2.norm() <= SIGNIFICANCE;
    Ok(MartyCheck {
        lhs,
        rhs,
        holds: !degenerate && lhs < rhs,
        degenerate,
    })
}

/// A catalog family with one parameter running through `values`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilySpec {
    pub family: String,
    pub fixed: Vec<(String, ParamValue)>,
    pub varying: String,
    pub values: Vec<ParamValue>,
    pub k: usize,
    /// Claimed bound on `||S_k(f)||`, if the family is meant to lie in one.
    pub m: Option<f64>,
}

impl FamilySpec {
    pub fn new(family: &str, varying: &str, values: Vec<ParamValue>, k: usize) -> Self {
        FamilySpec {
            family: family.to_string(),
            fixed: Vec::new(),
            varying: varying.to_string(),
            values,
            k,
            m: None,
        }
    }

    pub fn with_fixed(mut self, name: &str, value: ParamValue) -> Self {
        self.fixed.push((name.to_string(), value));
        self
    }

    pub fn members(&self) -> Result<Vec<CatalogEntry>> {
        self.values
            .iter()
            .map(|v| {
                let mut params: Vec<(&str, ParamValue)> =
                    self.fixed.iter().map(|(n, p)| (n.as_str(), *p)).collect();
                params.push((self.varying.as_str(), *v));
                catalog::instantiate(&self.family, &params)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    Derivative,
    LogDerivative,
    PreSchwarzian,
    /// `f^#`, for probing normality directly.
    SphericalDerivative,
}

impl Transform {
    pub const ALL: [Transform; 5] = [
        Transform::Identity,
        Transform::Derivative,
        Transform::LogDerivative,
        Transform::PreSchwarzian,
        Transform::SphericalDerivative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Derivative => "derivative",
            Transform::LogDerivative => "log_derivative",
            Transform::PreSchwarzian => "pre_schwarzian",
            Transform::SphericalDerivative => "spherical",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Transform::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown transform `{s}`")))
    }

    /// Value of the transformed function at `z`; poles of the transform are errors.
    pub fn apply<F: JetSource + ?Sized>(self, f: &F, z: Complex64) -> Result<Complex64> {
        if self == Transform::SphericalDerivative {
            return Ok(Complex64::new(spherical_derivative(f, z)?, 0.0));
        }
        let jet = f.jet_at(z, 2)?;
        let out: Jet = match self {
            Transform::Identity => jet,
            Transform::Derivative => jet.derive()?,
            Transform::LogDerivative => jet.derive()?.div(&jet)?,
            Transform::PreSchwarzian => {
                let d1 = jet.derive()?;
                d1.derive()?.div(&d1)?
            }
            Transform::SphericalDerivative => unreachable!(),
        };
        out.value()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemberSup {
    pub param: ParamValue,
    pub sup: f64,
    pub argsup: Complex64,
    /// Grid points where the transform has a pole for this member.
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridReport {
    pub transform: Transform,
    pub grid: Vec<Complex64>,
    pub members: Vec<MemberSup>,
    pub overall_sup: f64,
    pub diverging: bool,
}

/// Drops points within [`EXCLUSION_MARGIN`] of any of `avoid`.
pub fn exclude_near(grid: &[Complex64], avoid: &[Complex64]) -> Vec<Complex64> {
    grid.iter()
        .copied()
        .filter(|z| avoid.iter().all(|s| (z - s).norm() >= EXCLUSION_MARGIN))
        .collect()
}

/// Polar grid: `rings` circles of radius `radius * i / rings` with `per_ring` points each.
pub fn disk_grid(center: Complex64, radius: f64, rings: usize, per_ring: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(rings * per_ring);
    for i in 1..=rings {
        let r = radius * i as f64 / rings as f64;
        for j in 0..per_ring {
            // stagger rings so points do not line up radially
            let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5 * (i % 2) as f64) / per_ring as f64;
            out.push(center + Complex64::from_polar(r, theta));
        }
    }
    out
}

/// `nx x ny` lattice over `[x0, x1] x [y0, y1]`.
pub fn rect_grid((x0, x1): (f64, f64), (y0, y1): (f64, f64), nx: usize, ny: usize) -> Vec<Complex64> {
    let step = |a: f64, b: f64, n: usize, i: usize| {
        if n <= 1 {
            0.5 * (a + b)
        } else {
            a + (b - a) * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            out.push(Complex64::new(step(x0, x1, nx, i), step(y0, y1, ny, j)));
        }
    }
    out
}

fn is_pole(e: &Error) -> bool {
    matches!(
        e,
        Error::LaurentJet(_) | Error::DivisionByZero | Error::NonUnitJet { .. } | Error::OrderUnderflow
    )
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Heuristic evidence of unbounded growth along a parameter sequence.
pub fn looks_divergent(sups: &[f64]) -> bool {
    match sups.last() {
        Some(&last) if sups.len() >= 3 => last > DIVERGENCE_FACTOR * median(sups),
        _ => false,
    }
}

pub fn family_bound_probe(spec: &FamilySpec, transform: Transform, grid: &[Complex64]) -> Result<GridReport> {
    let members = spec.members()?;
    let avoid: Vec<Complex64> = members
        .iter()
        .flat_map(|m| {
            let crit = if transform == Transform::PreSchwarzian {
                m.critical_points.clone()
            } else {
                Vec::new()
            };
            m.singularities.iter().copied().chain(crit)
        })
        .collect();
    let grid = exclude_near(grid, &avoid);
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(members.len());
    for (member, param) in members.iter().zip(&spec.values) {
        let mut sup = 0.0f64;
        let mut argsup = grid[0];
        let mut skipped = 0;
        for &z in &grid {
            match transform.apply(member, z) {
                Ok(v) => {
                    if v.norm() > sup {
                        sup = v.norm();
                        argsup = z;
                    }
                }
                Err(e) if is_pole(&e) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        if skipped == grid.len() {
            return Err(Error::EmptyGrid);
        }
        rows.push(MemberSup {
            param: *param,
            sup,
            argsup,
            skipped,
        });
    }
    let sups: Vec<f64> = rows.iter().map(|r| r.sup).collect();
    Ok(GridReport {
        transform,
        overall_sup: sups.iter().copied().fold(0.0, f64::max),
        diverging: looks_divergent(&sups),
        grid,
        members: rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OmissionReport {
    pub min_gap: f64,
    pub argmin: Complex64,
    pub omits_on_grid: bool,
    pub points_used: usize,
    /// Points where `S_k(f)` or `b` could not be evaluated.
    pub skipped: usize,
}

/// `min |S_k(f) - b|` over the grid.
pub fn omitted_function_check<F: JetSource + ?Sized>(
    f: &F,
    k: usize,
    b: &FunctionExpr,
    grid: &[Complex64],
) -> Result<OmissionReport> {
    let mut min_gap = f64::INFINITY;
    let mut argmin = Complex64::new(f64::NAN, f64::NAN);
    let mut used = 0;
    let mut skipped = 0;
    for &z in grid {
        let s = match schwarzian_recursive(f, k, z) {
            Ok(v) => v.value(),
            Err(e) if is_pole(&e) || matches!(e, Error::CriticalPoint(_)) => None,
            Err(e) => return Err(e),
        };
        let bv = b.eval(z).ok();
        let (Some(s), Some(bv)) = (s, bv) else {
            skipped += 1;
            continue;
        };
        used += 1;
        let gap = (s - bv).norm();
        if gap < min_gap {
            min_gap = gap;
            argmin = z;
        }
    }
    if used == 0 {
        return Err(Error::EmptyGrid);
    }
    Ok(OmissionReport {
        min_gap,
        argmin,
        omits_on_grid: min_gap > OMISSION_GAP,
        points_used: used,
        skipped,
    })
}
