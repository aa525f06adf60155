//! Power-series Bessel functions `J0` and `Y0`, composable with jets.
//!
//! Both are written as series in `u = (x/2)^2`:
//!
//! ```text
//! J0(x) = sum_k (-1)^k / (k!)^2 u^k
//! Y0(x) = (2/pi) (log(x/2) + gamma) J0(x) + (2/pi) sum_{k>=1} (-1)^(k+1) H_k / (k!)^2 u^k
//! ```
//!
//! and a jet argument is handled by expanding each series around the
//! argument's constant term and composing with the remainder.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

/// Largest |argument| accepted for jet evaluation.
pub const SERIES_RADIUS: f64 = 12.0;

/// Largest real argument accepted by [`bessel_zero`]. Cancellation in the
/// alternating series costs about seven digits at this radius, which is
/// still far below the zero tolerance used by callers.
pub const ZERO_SEARCH_RADIUS: f64 = 30.0;

/// Terms smaller than this fraction of the largest term are dropped.
pub const TERM_CUTOFF: f64 = 1e-18;

const MAX_TERMS: usize = 600;

#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577215664901532860606512090082;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BesselKind {
    J0,
    Y0,
}

impl BesselKind {
    pub fn name(self) -> &'static str {
        match self {
            BesselKind::J0 => "J0",
            BesselKind::Y0 => "Y0",
        }
    }
}

/// Coefficient generator for a series `sum c_k u^k`.
trait SeriesCoefficients {
    fn coefficient(&self, k: usize) -> f64;
}

struct J0Series;

impl SeriesCoefficients for J0Series {
    fn coefficient(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign / (fact * fact)
    }
}

/// The harmonic-number part of `Y0`, without the `2/pi` factor.
struct Y0Tail;

impl SeriesCoefficients for Y0Tail {
    fn coefficient(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let harmonic: f64 = (1..=k).map(|i| 1.0 / i as f64).sum();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * harmonic / (fact * fact)
    }
}

/// Taylor coefficients `d_m = sum_k c_k C(k, m) u0^(k-m)` of the series at `u0`, for `m <= order`.
fn taylor_at(series: &impl SeriesCoefficients, u0: Complex64, order: usize) -> Result<Vec<Complex64>> {
    let scale = u0.norm().max(1.0);
    let mut out = Vec::with_capacity(order + 1);
    for m in 0..=order {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut largest = 0.0f64;
        let mut binom = 1.0f64;
        let mut power = Complex64::new(1.0, 0.0);
        let mut converged = false;
        for k in m..m + MAX_TERMS {
            if k > m {
                binom *= k as f64 / (k - m) as f64;
                power *= u0;
            }
            let term = power * (series.coefficient(k) * binom);
            sum += term;
            largest = largest.max(term.norm());
            // past the peak of the terms and below the cutoff
            let past_peak = (k as f64) * (k as f64) > 4.0 * scale + (m * m) as f64;
            if past_peak && term.norm() <= TERM_CUTOFF * largest && k > m + 2 {
                converged = true;
                break;
            }
            if largest == 0.0 && past_peak {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::SeriesDivergence(MAX_TERMS));
        }
        out.push(sum);
    }
    Ok(out)
}

fn check_radius(arg: &Jet, radius: f64) -> Result<Complex64> {
    let a0 = arg.value()?;
    if a0.norm() > radius {
        return Err(Error::SeriesRadius(a0.norm(), radius));
    }
    Ok(a0)
}

fn series_of_arg(arg: &Jet) -> Result<Jet> {
    let half = arg.scale(Complex64::new(0.5, 0.0));
    half.mul(&half)
}

fn bessel_series_within(kind: BesselKind, arg: &Jet, radius: f64) -> Result<Jet> {
    check_radius(arg, radius)?;
    let order = arg.trunc_order();
    let u = series_of_arg(arg)?.truncate(order);
    let u0 = u.value()?;
    let j0 = u.compose_taylor(&taylor_at(&J0Series, u0, order)?)?;
    match kind {
        BesselKind::J0 => Ok(j0),
        BesselKind::Y0 => {
            let half = arg.scale(Complex64::new(0.5, 0.0));
            let log_part = half.ln()?.add_scalar(Complex64::new(EULER_GAMMA, 0.0));
            let tail = u.compose_taylor(&taylor_at(&Y0Tail, u0, order)?)?;
            let two_over_pi = Complex64::new(2.0 / PI, 0.0);
            Ok(log_part.mul(&j0)?.add(&tail)?.scale(two_over_pi))
        }
    }
}

/// Jet of `J0(arg)` or `Y0(arg)`. `Y0` uses the principal logarithm at the
/// argument's constant term, which must be nonzero.
pub fn bessel_series(kind: BesselKind, arg: &Jet) -> Result<Jet> {
    bessel_series_within(kind, arg, SERIES_RADIUS)
}

pub fn bessel_value(kind: BesselKind, x: Complex64) -> Result<Complex64> {
    bessel_series(kind, &Jet::constant(x, x, 0))?.value()
}

fn real_value(kind: BesselKind, x: f64) -> Result<f64> {
    let z = Complex64::new(x, 0.0);
    Ok(bessel_series_within(kind, &Jet::constant(z, z, 0), ZERO_SEARCH_RADIUS)?
        .value()?
        .re)
}

/// The `n`-th positive real zero of `J0` or `Y0`, bracketed around the
/// McMahon-type guess `(n - 1/4) pi` (resp. `(n - 3/4) pi`) and refined by
/// bisection to `1e-10`.
pub fn bessel_zero(kind: BesselKind, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("zeros are numbered from 1".into()));
    }
    let guess = match kind {
        BesselKind::J0 => (n as f64 - 0.25) * PI,
        BesselKind::Y0 => (n as f64 - 0.75) * PI,
    };
    let bracket_err = || Error::Bracketing {
        kind: kind.name(),
        n,
    };
    let mut lo = (guess - 1.2).max(1e-3);
    let mut hi = guess + 1.2;
    if hi > ZERO_SEARCH_RADIUS {
        return Err(Error::SeriesRadius(hi, ZERO_SEARCH_RADIUS));
    }
    let mut f_lo = real_value(kind, lo)?;
    let f_hi = real_value(kind, hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(bracket_err());
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let f_mid = real_value(kind, mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
