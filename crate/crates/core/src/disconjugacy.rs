//! The equation `y^(k) + p0 y = 0` along complex paths: a Taylor-series
//! integrator, zero counting by the argument principle, the disconjugacy
//! threshold `k!/delta^k` and the pole-count bound built on it.

use std::cmp::Ordering;
use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::FunctionExpr;
use crate::jet::{Jet, JetSource, SIGNIFICANCE};

/// Order of the local Taylor series of the solution.
pub const SERIES_ORDER: usize = 20;
pub const MAX_STEP: f64 = 0.1;
pub const STEP_TOLERANCE: f64 = 1e-12;
pub const MIN_STEP: f64 = 1e-8;

pub const BOUNDARY_ZERO_DISTANCE: f64 = 1e-8;
pub const DILATION: f64 = 1e-6;
pub const MAX_DILATIONS: usize = 3;
pub const WINDING_TOLERANCE: f64 = 0.1;

const DISK_POLYGON_VERTICES: usize = 256;
const INITIAL_PANELS: usize = 16;
const MAX_DEPTH: u32 = 48;
/// Target absolute error of the winding number before rounding.
const WINDING_ACCURACY: f64 = 1e-3;

// 8-point Gauss-Legendre on [-1, 1]
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

fn c0() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexRegion {
    Disk { center: Complex64, radius: f64 },
    Square { center: Complex64, side: f64 },
}

impl ConvexRegion {
    pub fn disk(center: Complex64, radius: f64) -> Self {
        ConvexRegion::Disk { center, radius }
    }

    pub fn square(center: Complex64, side: f64) -> Self {
        ConvexRegion::Square { center, side }
    }

    pub fn center(&self) -> Complex64 {
        match *self {
            ConvexRegion::Disk { center, .. } | ConvexRegion::Square { center, .. } => center,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            ConvexRegion::Disk { radius, .. } => 2.0 * radius,
            ConvexRegion::Square { side, .. } => side * SQRT_2,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            ConvexRegion::Disk { center, radius } => (z - center).norm() <= radius,
            ConvexRegion::Square { center, side } => {
                let d = z - center;
                d.re.abs() <= side / 2.0 && d.im.abs() <= side / 2.0
            }
        }
    }

    /// Grows the region by `eps` (radius or half-side).
    pub fn dilate(&self, eps: f64) -> Self {
        match *self {
            ConvexRegion::Disk { center, radius } => ConvexRegion::disk(center, radius + eps),
            ConvexRegion::Square { center, side } => ConvexRegion::square(center, side + 2.0 * eps),
        }
    }

    /// Points of a `n x n` lattice over the bounding box that lie in the
    /// closed region, plus `4n` points on the boundary.
    pub fn sample_grid(&self, n: usize) -> Vec<Complex64> {
        let n = n.max(2);
        let center = self.center();
        let half = match *self {
            ConvexRegion::Disk { radius, .. } => radius,
            ConvexRegion::Square { side, .. } => side / 2.0,
        };
        let mut pts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let x = -half + 2.0 * half * i as f64 / (n - 1) as f64;
                let y = -half + 2.0 * half * j as f64 / (n - 1) as f64;
                let z = center + Complex64::new(x, y);
                if self.contains(z) {
                    pts.push(z);
                }
            }
        }
        for i in 0..4 * n {
            pts.push(self.boundary_point(i as f64 / (4 * n) as f64));
        }
        pts
    }

    /// Counter-clockwise boundary parametrization over `t in [0, 1)`.
    fn boundary_point(&self, t: f64) -> Complex64 {
        self.boundary(t).0
    }

    /// Boundary point and `dz/dt` at `t`.
    fn boundary(&self, t: f64) -> (Complex64, Complex64) {
        match *self {
            ConvexRegion::Disk { center, radius } => {
                let e = Complex64::from_polar(1.0, 2.0 * PI * t);
                (center + e * radius, Complex64::new(0.0, 2.0 * PI * radius) * e)
            }
            ConvexRegion::Square { .. } => {
                let corners = self.corners();
                let edge = ((t * 4.0).floor() as usize).min(3);
                let s = t * 4.0 - edge as f64;
                let (a, b) = (corners[edge], corners[(edge + 1) % 4]);
                (a + (b - a) * s, (b - a) * 4.0)
            }
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        match *self {
            ConvexRegion::Square { center, side } => {
                let h = side / 2.0;
                [
                    center + Complex64::new(-h, -h),
                    center + Complex64::new(h, -h),
                    center + Complex64::new(h, h),
                    center + Complex64::new(-h, h),
                ]
            }
            ConvexRegion::Disk { .. } => unreachable!("disks have no corners"),
        }
    }

    /// Polyline from the center to the boundary and once around it,
    /// slightly outside the contour so small dilations stay on the path.
    pub fn integration_path(&self) -> Vec<Complex64> {
        let center = self.center();
        let grow = self.dilate(4.0 * DILATION);
        let mut path = vec![center];
        match grow {
            ConvexRegion::Disk { radius, .. } => {
                // circumscribed polygon
                let r = radius / (PI / DISK_POLYGON_VERTICES as f64).cos();
                for i in 0..=DISK_POLYGON_VERTICES {
                    let t = i as f64 / DISK_POLYGON_VERTICES as f64;
                    path.push(center + Complex64::from_polar(r, 2.0 * PI * t));
                }
            }
            ConvexRegion::Square { .. } => {
                let corners = grow.corners();
                path.extend(corners);
                path.push(corners[0]);
            }
        }
        path
    }
}

/// Local solution series at one node.
#[derive(Clone, Debug, PartialEq)]
struct LocalSeries {
    at: Complex64,
    reach: f64,
    coeffs: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeTrajectory {
    pub k: usize,
    #[serde(serialize_with = "display")]
    pub p0: FunctionExpr,
    /// Every step point, including the caller's path vertices.
    pub path: Vec<Complex64>,
    /// `(y, y', ..., y^(k-1))` at each node.
    pub states: Vec<Vec<Complex64>>,
    #[serde(skip)]
    series: Vec<LocalSeries>,
}

fn display<S: serde::Serializer>(e: &FunctionExpr, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(e)
}

/// Taylor coefficients of the solution at `z` with the given state.
fn local_series(p0: &FunctionExpr, k: usize, z: Complex64, state: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let wrap = |e: Error| Error::CoefficientEvaluation {
        at: z,
        source: Box::new(e),
    };
    let pj = p0.jet_at(z, SERIES_ORDER - k).map_err(wrap)?;
    if pj.lead_order() != 0 {
        return Err(wrap(Error::LaurentJet(pj.pole_order())));
    }
    let p = pj.coeffs();
    let mut c = vec![c0(); SERIES_ORDER + 1];
    for (j, s) in state.iter().enumerate() {
        c[j] = s / factorial(j);
    }
    for m in 0..=SERIES_ORDER - k {
        let conv: Complex64 = (0..=m).map(|i| p.get(i).copied().unwrap_or_default() * c[m - i]).sum();
        let ratio: f64 = (m + 1..=m + k).map(|i| i as f64).product();
        c[m + k] = -conv / ratio;
    }
    // root-test radius of p0 from the upper half of its coefficients
    let rho = p
        .iter()
        .enumerate()
        .skip((p.len() / 2).max(1))
        .filter(|(_, x)| x.norm() > SIGNIFICANCE)
        .map(|(i, x)| x.norm().powf(-1.0 / i as f64))
        .fold(f64::INFINITY, f64::min);
    Ok((c, rho))
}

/// Derivatives `0..k` of the series at offset `t`.
fn advance(c: &[Complex64], k: usize, t: Complex64) -> Vec<Complex64> {
    (0..k)
        .map(|j| {
            let mut acc = c0();
            for m in (j..c.len()).rev() {
                let falling: f64 = (m - j + 1..=m).map(|i| i as f64).product();
                acc = acc * t + c[m] * falling;
            }
            acc
        })
        .collect()
}

fn truncation_error(c: &[Complex64], h: f64) -> f64 {
    let n = c.len() - 1;
    (c[n - 1].norm() * h.powi(n as i32 - 1)).max(c[n].norm() * h.powi(n as i32))
}

/// Integrates `y^(k) + p0 y = 0` from `path[0]` with `init = (y, ..., y^(k-1))`.
pub fn integrate(p0: &FunctionExpr, k: usize, init: &[Complex64], path: &[Complex64]) -> Result<OdeTrajectory> {
    if !(1..SERIES_ORDER).contains(&k) {
        return Err(Error::InvalidArgument(format!("order k = {} out of range", k)));
    }
    if init.len() != k {
        return Err(Error::InvalidArgument(format!(
            "expected {} initial values, got {}",
            k,
            init.len()
        )));
    }
    if path.is_empty() {
        return Err(Error::InvalidArgument("empty path".into()));
    }
    let mut z = path[0];
    let mut state = init.to_vec();
    let mut traj = OdeTrajectory {
        k,
        p0: p0.clone(),
        path: vec![z],
        states: vec![state.clone()],
        series: Vec::new(),
    };
    for &target in &path[1..] {
        loop {
            let remaining = (target - z).norm();
            if remaining <= 1e-14 * target.norm().max(1.0) {
                z = target;
                break;
            }
            let dir = (target - z) / remaining;
            let (c, rho) = local_series(p0, k, z, &state)?;
            let scale = state[0].norm().max(1.0);
            let mut h = remaining.min(MAX_STEP).min(rho / 4.0);
            // a NaN error estimate must also shrink the step
            while h >= MIN_STEP && !matches!(
                truncation_error(&c, h).partial_cmp(&(STEP_TOLERANCE * scale)),
                Some(Ordering::Less | Ordering::Equal)
            ) {
                h /= 2.0;
            }
            if h < MIN_STEP && h < remaining {
                return Err(Error::StepUnderflow(z));
            }
            let last = h >= remaining;
            let next = if last { target } else { z + dir * h };
            state = advance(&c, k, next - z);
            traj.series.push(LocalSeries { at: z, reach: h, coeffs: c });
            z = next;
            traj.path.push(z);
            traj.states.push(state.clone());
            if last {
                break;
            }
        }
    }
    let (c, _) = local_series(p0, k, z, &state)?;
    let reach = traj.series.last().map_or(0.0, |s| s.reach);
    traj.series.push(LocalSeries { at: z, reach, coeffs: c });
    Ok(traj)
}

impl OdeTrajectory {
    /// Closest node whose series is trusted at `z`.
    fn nearest(&self, z: Complex64) -> Result<&LocalSeries> {
        self.series
            .iter()
            .filter(|s| (s.at - z).norm() <= s.reach)
            .min_by(|a, b| (a.at - z).norm().total_cmp(&(b.at - z).norm()))
            .ok_or(Error::OutsideTrajectory(z))
    }

    pub fn value(&self, z: Complex64) -> Result<Complex64> {
        let s = self.nearest(z)?;
        Ok(advance(&s.coeffs, 1, z - s.at)[0])
    }

    pub fn final_state(&self) -> &[Complex64] {
        self.states.last().expect("trajectory has at least one node")
    }
}

/// Dense output: the nearest node's series re-expanded at `z0`.
impl JetSource for OdeTrajectory {
    fn jet_at(&self, z0: Complex64, order: usize) -> Result<Jet> {
        let s = self.nearest(z0)?;
        let n = order.min(SERIES_ORDER);
        let t = z0 - s.at;
        let derivs = advance(&s.coeffs, n + 1, t);
        let taylor: Vec<Complex64> = derivs
            .iter()
            .enumerate()
            .map(|(j, d)| d / factorial(j))
            .collect();
        Ok(Jet::from_taylor(z0, &taylor, n))
    }
}

/// Gauss-Legendre estimate of `integral y'/y dz` over the boundary piece
/// `[a, b]`, or `None` if a node sits within the boundary-zero distance.
fn panel<F: JetSource + ?Sized>(y: &F, region: &ConvexRegion, a: f64, b: f64) -> Result<Option<Complex64>> {
    let mut total = c0();
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        let t = 0.5 * (a + b) + 0.5 * (b - a) * x;
        let (z, dz) = region.boundary(t);
        let jet = y.jet_at(z, 1)?;
        let (v, dv) = (jet.coeff_at(0), jet.coeff_at(1));
        if v.norm() <= BOUNDARY_ZERO_DISTANCE * dv.norm() || v.norm() < SIGNIFICANCE {
            return Ok(None);
        }
        total += dv / v * dz * (w * 0.5 * (b - a));
    }
    Ok(Some(total))
}

/// Adaptive bisection of one panel; `None` when a zero is too close to the
/// contour to resolve.
fn adaptive<F: JetSource + ?Sized>(
    y: &F,
    region: &ConvexRegion,
    (a, b): (f64, f64),
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Result<Option<Complex64>> {
    let m = 0.5 * (a + b);
    let (Some(left), Some(right)) = (panel(y, region, a, m)?, panel(y, region, m, b)?) else {
        return Ok(None);
    };
    if (left + right - whole).norm() <= tol {
        return Ok(Some(left + right));
    }
    if depth == 0 {
        return Ok(None);
    }
    let Some(l) = adaptive(y, region, (a, m), left, tol / 2.0, depth - 1)? else {
        return Ok(None);
    };
    let Some(r) = adaptive(y, region, (m, b), right, tol / 2.0, depth - 1)? else {
        return Ok(None);
    };
    Ok(Some(l + r))
}

/// `(1/2 pi i)` times the contour integral of `y'/y`.
fn winding<F: JetSource + ?Sized>(y: &F, region: &ConvexRegion) -> Result<Option<f64>> {
    let tol = 2.0 * PI * WINDING_ACCURACY / INITIAL_PANELS as f64;
    let mut total = c0();
    for p in 0..INITIAL_PANELS {
        let ab = (p as f64 / INITIAL_PANELS as f64, (p + 1) as f64 / INITIAL_PANELS as f64);
        let Some(whole) = panel(y, region, ab.0, ab.1)? else {
            return Ok(None);
        };
        let Some(v) = adaptive(y, region, ab, whole, tol, MAX_DEPTH)? else {
            return Ok(None);
        };
        total += v;
    }
    Ok(Some((total / Complex64::new(0.0, 2.0 * PI)).re))
}

/// Zeros of `y` inside `region`, counted with multiplicity.
pub fn count_zeros<F: JetSource + ?Sized>(y: &F, region: &ConvexRegion) -> Result<i64> {
    let mut contour = *region;
    for _ in 0..=MAX_DILATIONS {
        match winding(y, &contour)? {
            Some(w) => {
                let n = w.round();
                if (w - n).abs() > WINDING_TOLERANCE {
                    return Err(Error::NonIntegerWinding(w));
                }
                return Ok(n as i64);
            }
            None => {
                log::debug!("zero near contour, dilating by {}", DILATION);
                contour = contour.dilate(DILATION);
            }
        }
    }
    Err(Error::BoundaryZero(MAX_DILATIONS))
}

/// Integrates from the region's center around its boundary and counts the
/// solution's zeros inside.
pub fn count_solution_zeros(p0: &FunctionExpr, k: usize, init: &[Complex64], region: &ConvexRegion) -> Result<i64> {
    let traj = integrate(p0, k, init, &region.integration_path())?;
    count_zeros(&traj, region)
}

/// `k! / delta^k`.
pub fn disconjugacy_threshold(k: usize, delta: f64) -> f64 {
    factorial(k) / delta.powi(k as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisconjugacyReport {
    pub k: usize,
    pub region: ConvexRegion,
    pub threshold: f64,
    pub sup_p0: f64,
    /// The hypothesis `sup |p0| < k!/delta^k` fails, so no bound is implied.
    pub vacuous: bool,
    pub counts: Vec<i64>,
    pub max_count: i64,
    pub pass: bool,
}

pub const SUP_GRID: usize = 15;

pub fn check_disconjugacy(
    p0: &FunctionExpr,
    k: usize,
    region: &ConvexRegion,
    trials: usize,
    seed: u64,
) -> Result<DisconjugacyReport> {
    let threshold = disconjugacy_threshold(k, region.diameter());
    let mut sup_p0 = 0.0f64;
    for z in region.sample_grid(SUP_GRID) {
        let v = p0.eval(z).map_err(|e| Error::CoefficientEvaluation {
            at: z,
            source: Box::new(e),
        })?;
        sup_p0 = sup_p0.max(v.norm());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(trials);
    for _ in 0..trials {
        let init: Vec<Complex64> = (0..k)
            .map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
            .collect();
        counts.push(count_solution_zeros(p0, k, &init, region)?);
    }
    let max_count = counts.iter().copied().max().unwrap_or(0);
    Ok(DisconjugacyReport {
        k,
        region: *region,
        threshold,
        sup_p0,
        vacuous: sup_p0 >= threshold,
        counts,
        max_count,
        pass: max_count < k as i64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Covering {
    pub cells: Vec<ConvexRegion>,
    pub delta: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleBound {
    pub k: usize,
    pub m: f64,
    pub delta: f64,
    pub n_tilde: usize,
    pub n: usize,
    pub covering: Covering,
}

pub const DELTA_SAFETY: f64 = 0.99;

/// Cells of diameter at most `delta` covering the closed unit disk and a
/// pole bound `N = count * (k - 1)` for `||S_k(f)|| <= M`.
pub fn pole_count_bound(k: usize, m: f64) -> Result<PoleBound> {
    if k < 2 {
        return Err(Error::InvalidArgument("k must be at least 2".into()));
    }
    if m.is_nan() {
        return Err(Error::InvalidArgument("M is NaN".into()));
    }
    let raw = if m > 0.0 {
        DELTA_SAFETY * (k as f64 * factorial(k) / m).powf(1.0 / k as f64)
    } else {
        f64::INFINITY
    };
    let (delta, cells) = if raw >= 2.0 {
        (2.0, vec![ConvexRegion::disk(c0(), 1.0)])
    } else {
        // n x n squares tiling [-1, 1]^2 exactly, each of diameter <= delta
        let n = (2.0 * SQRT_2 / raw).ceil() as usize;
        let side = 2.0 / n as f64;
        let mut cells = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let lo = Complex64::new(-1.0 + i as f64 * side, -1.0 + j as f64 * side);
                let center = lo + Complex64::new(side / 2.0, side / 2.0);
                // distance from the origin to the square
                let dx = lo.re.max(-(lo.re + side)).max(0.0);
                let dy = lo.im.max(-(lo.im + side)).max(0.0);
                if dx * dx + dy * dy < 1.0 {
                    cells.push(ConvexRegion::square(center, side));
                }
            }
        }
        (raw, cells)
    };
    let count = cells.len();
    Ok(PoleBound {
        k,
        m,
        delta,
        n_tilde: count,
        n: count * (k - 1),
        covering: Covering { cells, delta, count },
    })
}

/// Uniformly random point in the disk `|z| < radius`.
pub fn random_in_disk<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn constant(v: f64) -> FunctionExpr {
        FunctionExpr::constant(c(v, 0.0))
    }

    #[test]
    fn sine_solution() {
        let t = integrate(&constant(1.0), 2, &[c(0.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(PI / 2.0, 0.0)]).unwrap();
        assert!((t.final_state()[0] - c(1.0, 0.0)).norm() < 1e-10);
        assert!(t.final_state()[1].norm() < 1e-10);
    }

    #[test]
    fn polynomial_solutions() {
        let t = integrate(&constant(0.0), 2, &[c(1.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((t.final_state()[0] - c(2.0, 0.0)).norm() < 1e-13);
        let t = integrate(
            &constant(0.0),
            3,
            &[c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)],
            &[c(0.0, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        assert!((t.final_state()[0] - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn cosine_sine_closed_form_on_complex_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let lambda = c(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0));
            let (a, b) = (c(rng.gen_range(-1.0..1.0), 0.3), c(0.2, rng.gen_range(-1.0..1.0)));
            let p0 = FunctionExpr::constant(lambda * lambda);
            let end = Complex64::from_polar(rng.gen_range(0.5..3.0), rng.gen_range(0.0..2.0 * PI));
            let path = [c(0.0, 0.0), end * 0.5 + c(0.0, 0.3), end];
            let t = integrate(&p0, 2, &[a, b * lambda], &path).unwrap();
            for (z, s) in t.path.iter().zip(&t.states) {
                let exact = a * (lambda * z).cos() + b * (lambda * z).sin();
                assert!((s[0] - exact).norm() <= 1e-9 * exact.norm().max(1.0));
            }
        }
    }

    #[test]
    fn dense_output_matches_nodes() {
        let p0 = FunctionExpr::parse("exp(z)").unwrap();
        let t = integrate(&p0, 2, &[c(1.0, 0.0), c(0.0, 1.0)], &[c(0.0, 0.0), c(1.0, 1.0)]).unwrap();
        let mid = t.path[3] + (t.path[4] - t.path[3]) * 0.5;
        let a = t.jet_at(mid, 2).unwrap();
        let b = integrate(&p0, 2, &[c(1.0, 0.0), c(0.0, 1.0)], &[c(0.0, 0.0), mid]).unwrap();
        assert!((a.coeffs()[0] - b.final_state()[0]).norm() < 1e-11);
        assert!((a.coeffs()[1] - b.final_state()[1]).norm() < 1e-11);
        assert!(matches!(t.value(c(5.0, 0.0)), Err(Error::OutsideTrajectory(_))));
    }

    #[test]
    fn pole_in_coefficient_is_reported() {
        let p0 = FunctionExpr::parse("1/z").unwrap();
        let r = integrate(&p0, 2, &[c(1.0, 0.0), c(0.0, 0.0)], &[c(-1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(r, Err(Error::CoefficientEvaluation { .. }) | Err(Error::StepUnderflow(_))));
    }

    #[test]
    fn count_examples() {
        let sin = FunctionExpr::parse("(exp(1i*z) - exp(-1i*z)) / 2i").unwrap();
        assert_eq!(count_zeros(&sin, &ConvexRegion::disk(c(0.0, 0.0), 4.0)).unwrap(), 3);
        let q = FunctionExpr::parse("1 + z^2").unwrap();
        assert_eq!(count_zeros(&q, &ConvexRegion::disk(c(0.0, 0.0), 0.5)).unwrap(), 0);
        let sq = FunctionExpr::parse("z^2").unwrap();
        assert_eq!(count_zeros(&sq, &ConvexRegion::disk(c(0.0, 0.0), 1.0)).unwrap(), 2);
        assert_eq!(count_zeros(&sq, &ConvexRegion::square(c(0.2, 0.1), 1.0)).unwrap(), 2);
    }

    #[test]
    fn boundary_zero_is_dilated_past() {
        let y = FunctionExpr::parse("z - 1").unwrap();
        assert_eq!(count_zeros(&y, &ConvexRegion::disk(c(0.0, 0.0), 1.0)).unwrap(), 1);
    }

    /// Winding number from the principal argument on a fine boundary mesh.
    fn phase_scan(y: &FunctionExpr, region: &ConvexRegion) -> i64 {
        let n = 20_000;
        let mut total = 0.0;
        let mut prev = y.eval(region.boundary_point(0.0)).unwrap();
        for i in 1..=n {
            let v = y.eval(region.boundary_point(i as f64 / n as f64)).unwrap();
            total += (v / prev).arg();
            prev = v;
        }
        (total / (2.0 * PI)).round() as i64
    }

    #[test]
    fn count_matches_phase_scan_for_polynomials() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 20 {
            let deg = rng.gen_range(1..=5);
            let roots: Vec<Complex64> = (0..deg).map(|_| random_in_disk(&mut rng, 2.0)).collect();
            let region = if checked % 2 == 0 {
                ConvexRegion::disk(c(0.1, -0.1), 1.0)
            } else {
                ConvexRegion::square(c(0.0, 0.2), 1.6)
            };
            // keep roots off the contour so the scan is reliable
            let clear = (0..400).all(|i| {
                let b = region.boundary_point(i as f64 / 400.0);
                roots.iter().all(|r| (b - r).norm() > 0.05)
            });
            if !clear {
                continue;
            }
            let text = roots
                .iter()
                .map(|r| format!("(z - ({} + {}i))", r.re, r.im))
                .collect::<Vec<_>>()
                .join(" * ");
            let y = FunctionExpr::parse(&text).unwrap();
            let inside = roots.iter().filter(|r| region.contains(**r)).count() as i64;
            let counted = count_zeros(&y, &region).unwrap();
            assert_eq!(counted, phase_scan(&y, &region), "{}", text);
            assert_eq!(counted, inside);
            checked += 1;
        }
    }

    #[test]
    fn thresholds() {
        assert_eq!(disconjugacy_threshold(2, 1.0), 2.0);
        assert_eq!(disconjugacy_threshold(3, 1.0), 6.0);
        assert_eq!(disconjugacy_threshold(2, 0.5), 8.0);
    }

    #[test]
    fn sine_equation_is_disconjugate_on_small_disk() {
        let r = check_disconjugacy(&constant(1.0), 2, &ConvexRegion::disk(c(0.0, 0.0), 0.5), 8, 1).unwrap();
        assert!(!r.vacuous && r.pass && r.max_count <= 1);
        let r = check_disconjugacy(&constant(0.0), 2, &ConvexRegion::square(c(0.3, 0.0), 1.0), 8, 2).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn large_coefficient_is_vacuous_and_has_more_zeros() {
        let region = ConvexRegion::disk(c(0.0, 0.0), 0.5);
        let r = check_disconjugacy(&constant(100.0), 2, &region, 12, 5).unwrap();
        assert!(r.vacuous);
        // a real solution of y'' + 100y = 0 through the center
        let n = count_solution_zeros(&constant(100.0), 2, &[c(0.0, 0.0), c(1.0, 0.0)], &region).unwrap();
        assert_eq!(n, 3);
        assert!(r.max_count >= 2);
    }

    /// Squares of the covering meeting the open disk, counted by sampling.
    fn sampled_cover_count(b: &PoleBound) -> usize {
        b.covering
            .cells
            .iter()
            .filter(|cell| {
                let ConvexRegion::Square { center, side } = **cell else { return true };
                (0..=40).any(|i| {
                    (0..=40).any(|j| {
                        let z = center + c(side * (i as f64 / 40.0 - 0.5), side * (j as f64 / 40.0 - 0.5));
                        z.norm() < 1.0
                    })
                })
            })
            .count()
    }

    #[test]
    fn pole_bound_examples() {
        let b = pole_count_bound(2, 8.0).unwrap();
        assert!((b.delta - 0.7).abs() < 1e-3);
        // side 0.495 rounds down to 2/5
        let ConvexRegion::Square { side, .. } = b.covering.cells[0] else { panic!() };
        assert!((side - 0.4).abs() < 1e-12);
        assert_eq!(b.n, b.n_tilde);
        assert_eq!(b.n_tilde, sampled_cover_count(&b));

        let b = pole_count_bound(2, 1e-9).unwrap();
        assert_eq!((b.n_tilde, b.n), (1, 1));
        let b = pole_count_bound(3, 0.0).unwrap();
        assert_eq!(b.n, 2);

        let b = pole_count_bound(3, 36.0).unwrap();
        assert!((b.delta - 0.99 * 0.5f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(b.n, 2 * b.n_tilde);
        assert_eq!(b.n_tilde, sampled_cover_count(&b));
    }

    #[test]
    fn covering_covers_the_closed_disk() {
        for &(k, m) in &[(2, 8.0), (3, 36.0), (4, 500.0), (2, 3.3)] {
            let b = pole_count_bound(k, m).unwrap();
            for cell in &b.covering.cells {
                assert!(cell.diameter() <= b.delta * (1.0 + 1e-12));
            }
            for i in 0..200 {
                for r in [0.0, 0.5, 0.999, 1.0] {
                    let z = Complex64::from_polar(r, 2.0 * PI * i as f64 / 200.0);
                    assert!(b.covering.cells.iter().any(|cell| cell.dilate(1e-12).contains(z)));
                }
            }
        }
    }

    #[test]
    fn pole_bound_is_monotone_in_m() {
        for k in 2..=5 {
            let mut prev = 0;
            for i in 0..400 {
                let m = 10f64.powf(-1.0 + 5.0 * i as f64 / 400.0);
                let b = pole_count_bound(k, m).unwrap();
                assert!(b.n >= prev, "k={} M={}", k, m);
                prev = b.n;
            }
        }
    }
}
