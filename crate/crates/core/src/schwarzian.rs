//! Generalized Schwarzian derivatives.
//!
//! With `g = f''/f'`, the recursion is
//!
//! ```text
//! S_{2,n} = g,    S_{j+1,n} = (S_{j,n})' - (1/n) g S_{j,n},    S_k = S_{k+1,k}
//! ```
//!
//! and the closed form sums over partitions `(n_1, ..., n_k)` of `k`
//! (`sum r n_r = k`):
//!
//! ```text
//! S_k = sum  -k k! / prod_j ((-k j!)^(n_j) n_j!)  *  prod_j (g^(j-1))^(n_j)
//! ```
//!
//! The two are computed along separate code paths so that each can serve as
//! an oracle for the other.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSource};

/// Extra jet orders requested beyond `k + 2`.
pub const ORDER_GUARD: usize = 4;

/// Jet order needed to evaluate `S_k` at a point.
pub fn order_budget(k: usize) -> usize {
    k + 2 + ORDER_GUARD
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Recursive,
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchwarzianValue {
    pub jet: Jet,
    pub k: usize,
    pub method: Method,
}

impl SchwarzianValue {
    /// Value at the base point, `None` at a pole.
    pub fn value(&self) -> Option<Complex64> {
        self.jet.value().ok()
    }

    pub fn pole_order(&self) -> u32 {
        self.jet.pole_order()
    }
}

/// `f'` and `g = f''/f'` at `z0`, each through the requested order budget.
pub fn pre_schwarzian<F: JetSource + ?Sized>(f: &F, z0: Complex64, order: usize) -> Result<(Jet, Jet)> {
    let fj = f.jet_at(z0, order)?;
    let d1 = fj.derive()?;
    if d1.is_zero() {
        return Err(Error::SchwarzianOfConstant);
    }
    let d2 = d1.derive()?;
    let g = d2.div(&d1)?;
    Ok((d1, g))
}

/// `S_{k,n}(f)` for `k >= 2`, by literal recursion on jets.
pub fn generalized_recursive<F: JetSource + ?Sized>(
    f: &F,
    k: usize,
    n: usize,
    z0: Complex64,
) -> Result<Jet> {
    if k < 2 || n < 1 {
        return Err(Error::InvalidArgument(format!("S_{{k,n}} needs k >= 2, n >= 1 (got k={k}, n={n})")));
    }
    let (_, g) = pre_schwarzian(f, z0, order_budget(k))?;
    recurse(&g, k, n)
}

fn recurse(g: &Jet, k: usize, n: usize) -> Result<Jet> {
    let inv_n = Complex64::new(1.0 / n as f64, 0.0);
    let mut s = g.clone();
    for _ in 2..k {
        s = s.derive()?.sub(&g.mul(&s)?.scale(inv_n))?;
    }
    Ok(s)
}

/// `S_k(f) = S_{k+1,k}(f)` at `z0` via the recursion.
pub fn schwarzian_recursive<F: JetSource + ?Sized>(f: &F, k: usize, z0: Complex64) -> Result<SchwarzianValue> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let (_, g) = pre_schwarzian(f, z0, order_budget(k))?;
    Ok(SchwarzianValue {
        jet: recurse(&g, k + 1, k)?,
        k,
        method: Method::Recursive,
    })
}

/// `(n_1, ..., n_k)` with `sum r n_r = k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionTuple {
    counts: Vec<u32>,
}

impl PartitionTuple {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        let k = counts.len();
        let weight: usize = counts
            .iter()
            .enumerate()
            .map(|(i, n)| (i + 1) * *n as usize)
            .sum();
        if k == 0 || weight != k {
            return Err(Error::InvalidArgument(format!(
                "tuple {counts:?} does not satisfy sum r n_r = {k}"
            )));
        }
        Ok(PartitionTuple { counts })
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Number of factors `s = sum n_r`.
    pub fn parts(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// All partitions of `k` as multiplicity tuples, in descending
/// lexicographic order (so `(k, 0, ..., 0)` first and `(0, ..., 0, 1)` last).
pub fn enumerate_partitions(k: usize) -> Result<Vec<PartitionTuple>> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    fn walk(r: usize, k: usize, remaining: usize, counts: &mut Vec<u32>, out: &mut Vec<PartitionTuple>) {
        if r > k {
            if remaining == 0 {
                out.push(PartitionTuple { counts: counts.clone() });
            }
            return;
        }
        for n in (0..=remaining / r).rev() {
            counts.push(n as u32);
            walk(r + 1, k, remaining - n * r, counts, out);
            counts.pop();
        }
    }
    let mut out = Vec::new();
    walk(1, k, k, &mut Vec::with_capacity(k), &mut out);
    Ok(out)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `-k k! / prod_j ((-k j!)^(n_j) n_j!)`, exactly.
pub fn closed_form_coefficient(t: &PartitionTuple) -> BigRational {
    let k = t.k();
    let kk = BigInt::from(k);
    let numerator = -(kk.clone() * factorial(k));
    let denominator = t
        .counts
        .iter()
        .enumerate()
        .fold(BigInt::one(), |acc, (i, &n)| {
            let base = -(kk.clone() * factorial(i + 1));
            acc * num_traits::pow(base, n as usize) * factorial(n as usize)
        });
    BigRational::new(numerator, denominator)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormTerm {
    pub tuple: PartitionTuple,
    #[serde(with = "rational_string")]
    pub coefficient: BigRational,
}

pub fn closed_form_terms(k: usize) -> Result<Vec<ClosedFormTerm>> {
    Ok(enumerate_partitions(k)?
        .into_iter()
        .map(|tuple| ClosedFormTerm {
            coefficient: closed_form_coefficient(&tuple),
            tuple,
        })
        .collect())
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `S_k(f)` at `z0` via the partition expansion.
pub fn schwarzian_closed_form<F: JetSource + ?Sized>(f: &F, k: usize, z0: Complex64) -> Result<SchwarzianValue> {
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let (_, g) = pre_schwarzian(f, z0, order_budget(k))?;
    let mut derivs = vec![g];
    for _ in 1..k {
        let next = derivs.last().expect("nonempty").derive()?;
        derivs.push(next);
    }
    let mut total: Option<Jet> = None;
    for term in closed_form_terms(k)? {
        let mut product: Option<Jet> = None;
        for (j, &n) in term.tuple.counts().iter().enumerate() {
            if n == 0 {
                continue;
            }
            let factor = derivs[j].powi(n as i32)?;
            product = Some(match product {
                None => factor,
                Some(p) => p.mul(&factor)?,
            });
        }
        let product = product.expect("every tuple has a nonzero entry");
        let scaled = product.scale(Complex64::new(rational_to_f64(&term.coefficient), 0.0));
        total = Some(match total {
            None => scaled,
            Some(t) => t.add(&scaled)?,
        });
    }
    Ok(SchwarzianValue {
        jet: total.expect("at least one partition"),
        k,
        method: Method::ClosedForm,
    })
}

/// One monomial `a_mu prod_j g^(omega_j)` of the differential polynomial `P[g]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrahlTerm {
    pub tuple: PartitionTuple,
    #[serde(with = "rational_string")]
    pub a_mu: BigRational,
    pub s_mu: u32,
    pub omegas: Vec<u32>,
}

impl GrahlTerm {
    pub fn omega_sum(&self) -> u32 {
        self.omegas.iter().sum()
    }
}

/// `S_k = leading g^k + g^(ell) + P[g]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrahlDecomposition {
    pub k: usize,
    #[serde(with = "rational_string")]
    pub leading: BigRational,
    pub ell: usize,
    pub terms: Vec<GrahlTerm>,
}

/// Splits the partition expansion into the extremal terms and `P[g]`, and
/// checks every remaining monomial against Grahl's degree condition with
/// `ell = k - 1`: equality in `(k-1) sum omega + ell s = ell k`, together
/// with `2 <= s <= k-1` and `sum omega >= 1`.
pub fn grahl_decompose(k: usize) -> Result<GrahlDecomposition> {
    if k < 2 {
        return Err(Error::InvalidArgument("Grahl decomposition needs k >= 2".into()));
    }
    let ell = k - 1;
    let terms = closed_form_terms(k)?;
    let first = &terms[0];
    let last = &terms[terms.len() - 1];

    let kk = BigInt::from(k);
    let sign = if k % 2 == 1 { BigInt::one() } else { -BigInt::one() };
    let expected_leading = BigRational::new(sign, num_traits::pow(kk, k - 1));
    if first.coefficient != expected_leading {
        return Err(Error::GrahlCondition {
            tuple: first.tuple.counts.clone(),
            reason: format!("leading coefficient {} != {}", first.coefficient, expected_leading),
        });
    }
    if !last.coefficient.is_one() {
        return Err(Error::GrahlCondition {
            tuple: last.tuple.counts.clone(),
            reason: format!("coefficient of g^(k-1) is {}", last.coefficient),
        });
    }

    let mut out = Vec::new();
    for term in &terms[1..terms.len() - 1] {
        let counts = term.tuple.counts();
        let s_mu = term.tuple.parts();
        let omegas: Vec<u32> = counts
            .iter()
            .enumerate()
            .flat_map(|(r, &n)| std::iter::repeat_n(r as u32, n as usize))
            .collect();
        let grahl = GrahlTerm {
            tuple: term.tuple.clone(),
            a_mu: term.coefficient.clone(),
            s_mu,
            omegas,
        };
        check_grahl_term(&grahl, k, ell)?;
        out.push(grahl);
    }
    Ok(GrahlDecomposition {
        k,
        leading: first.coefficient.clone(),
        ell,
        terms: out,
    })
}

fn check_grahl_term(t: &GrahlTerm, k: usize, ell: usize) -> Result<()> {
    let fail = |reason: String| Error::GrahlCondition {
        tuple: t.tuple.counts.clone(),
        reason,
    };
    let lhs = (k as u64 - 1) * t.omega_sum() as u64 + ell as u64 * t.s_mu as u64;
    let rhs = (ell * k) as u64;
    if lhs != rhs {
        return Err(fail(format!("(k-1) sum omega + ell s = {lhs} != {rhs}")));
    }
    if t.s_mu < 2 || t.s_mu as usize > k - 1 {
        return Err(fail(format!("s = {} outside [2, {}]", t.s_mu, k - 1)));
    }
    if t.omega_sum() == 0 {
        return Err(fail("sum omega = 0".into()));
    }
    if t.a_mu.is_zero() {
        return Err(fail("zero coefficient".into()));
    }
    Ok(())
}

/// Order of the pole of `S_k(f)` at `z0`, zero at regular points.
pub fn pole_order_at<F: JetSource + ?Sized>(f: &F, k: usize, z0: Complex64) -> Result<u32> {
    match schwarzian_recursive(f, k, z0) {
        Ok(v) => Ok(v.pole_order()),
        Err(Error::OrderUnderflow) => Err(Error::InsufficientOrder {
            have: order_budget(k),
            need: order_budget(k) + 1,
        }),
        Err(e) => Err(e),
    }
}

/// Minimum grid size accepted by [`is_schwarzian_null`].
pub const NULL_TEST_MIN_POINTS: usize = 20;
pub const NULL_TEST_TOLERANCE: f64 = 1e-9;

/// Whether `S_k(f)` vanishes on `grid`, relative to the natural scale `max |g|^k`.
/// Points where `f'` vanishes or `S_k` has a pole are skipped.
pub fn is_schwarzian_null<F: JetSource + ?Sized>(f: &F, k: usize, grid: &[Complex64]) -> Result<bool> {
    if grid.len() < NULL_TEST_MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "null test needs at least {NULL_TEST_MIN_POINTS} grid points"
        )));
    }
    let mut max_s = 0.0f64;
    let mut max_g = 0.0f64;
    let mut valid = 0usize;
    for &z in grid {
        let Ok((_, g)) = pre_schwarzian(f, z, order_budget(k)) else {
            continue;
        };
        let Ok(gz) = g.value() else { continue };
        let Ok(s) = recurse(&g, k + 1, k) else { continue };
        let Ok(sz) = s.value() else { continue };
        if !sz.is_finite() || !gz.is_finite() {
            continue;
        }
        valid += 1;
        max_s = max_s.max(sz.norm());
        max_g = max_g.max(gz.norm());
    }
    if valid == 0 {
        return Err(Error::EmptyGrid);
    }
    Ok(max_s < NULL_TEST_TOLERANCE * (1.0 + max_g.powi(k as i32)))
}

/// Serializes rationals as `"p/q"` strings.
pub(crate) mod rational_string {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
