//! Truncated Laurent/Taylor expansions at a complex base point.
//!
//! A [`Jet`] stores `coeffs[i]` as the coefficient of `(z - base)^(lead + i)`.
//! Analytic jets use `lead == 0` and may start with zero coefficients; a pole
//! of order `m` is `lead == -m` with a nonzero leading coefficient. The last
//! known exponent is `lead + trunc_order`, and no operation ever claims to
//! know more than its operands did.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients at or below this magnitude count as zero when normalizing.
pub const SIGNIFICANCE: f64 = 1e-300;

/// Anything that can produce a jet of itself at a base point.
pub trait JetSource {
    /// Jet through relative order `order` at `z0`.
    fn jet_at(&self, z0: Complex64, order: usize) -> Result<Jet>;
}

impl<F> JetSource for F
where
    F: Fn(Complex64, usize) -> Result<Jet>,
{
    fn jet_at(&self, z0: Complex64, order: usize) -> Result<Jet> {
        self(z0, order)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transcendental {
    Exp,
    Log,
    /// Principal branch of `a^(p/q)`.
    PowRational(i64, i64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    base: Complex64,
    lead: i32,
    coeffs: Vec<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn is_tiny(c: Complex64) -> bool {
    c.norm() <= SIGNIFICANCE
}

impl Jet {
    /// Builds a jet from raw coefficients starting at exponent `lead`,
    /// normalizing the leading order.
    pub fn new(base: Complex64, lead: i32, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::OrderUnderflow);
        }
        Self::assemble(base, lead, coeffs)
    }

    pub fn constant(base: Complex64, value: Complex64, order: usize) -> Self {
        let mut coeffs = vec![zero(); order + 1];
        coeffs[0] = value;
        Jet { base, lead: 0, coeffs }
    }

    /// The identity function `z` expanded at `base`.
    pub fn variable(base: Complex64, order: usize) -> Self {
        let mut jet = Self::constant(base, base, order);
        if order >= 1 {
            jet.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        jet
    }

    pub fn zero(base: Complex64, order: usize) -> Self {
        Self::constant(base, zero(), order)
    }

    /// Jet of the polynomial `sum c_i (z - base)^i`, truncated at `order`.
    pub fn from_taylor(base: Complex64, taylor: &[Complex64], order: usize) -> Self {
        let mut coeffs = vec![zero(); order + 1];
        for (dst, src) in coeffs.iter_mut().zip(taylor) {
            *dst = *src;
        }
        Jet { base, lead: 0, coeffs }
    }

    fn assemble(base: Complex64, mut first: i32, mut coeffs: Vec<Complex64>) -> Result<Self> {
        let strip = coeffs
            .iter()
            .take_while(|c| is_tiny(**c))
            .count()
            .min(first.min(0).unsigned_abs() as usize);
        if strip > 0 {
            coeffs.drain(..strip);
            first += strip as i32;
        }
        if coeffs.is_empty() {
            return Err(Error::OrderUnderflow);
        }
        if first > 0 {
            let mut padded = vec![zero(); first as usize];
            padded.extend(coeffs);
            coeffs = padded;
            first = 0;
        }
        Ok(Jet { base, lead: first, coeffs })
    }

    pub fn base_point(&self) -> Complex64 {
        self.base
    }

    pub fn lead_order(&self) -> i32 {
        self.lead
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn trunc_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Largest exponent whose coefficient is known.
    pub fn last_exponent(&self) -> i32 {
        self.lead + self.trunc_order() as i32
    }

    /// Coefficient of `(z - base)^e`, zero below the leading order.
    pub fn coeff_at(&self, e: i32) -> Complex64 {
        if e < self.lead || e > self.last_exponent() {
            zero()
        } else {
            self.coeffs[(e - self.lead) as usize]
        }
    }

    /// Exponent of the first significant coefficient, if any.
    pub fn valuation(&self) -> Option<i32> {
        self.coeffs
            .iter()
            .position(|c| !is_tiny(*c))
            .map(|i| self.lead + i as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    pub fn pole_order(&self) -> u32 {
        self.lead.min(0).unsigned_abs()
    }

    /// Value at the base point, or `LaurentJet` at a pole.
    pub fn value(&self) -> Result<Complex64> {
        if self.lead < 0 {
            return Err(Error::LaurentJet(self.pole_order()));
        }
        Ok(self.coeffs[0])
    }

    /// `m!` times the coefficient of order `m`, i.e. the m-th derivative at the base point.
    pub fn nth_value(&self, m: usize) -> Result<Complex64> {
        if self.lead < 0 {
            return Err(Error::LaurentJet(self.pole_order()));
        }
        if m > self.trunc_order() {
            return Err(Error::InsufficientOrder {
                have: self.trunc_order(),
                need: m,
            });
        }
        let factorial: f64 = (1..=m).map(|i| i as f64).product();
        Ok(self.coeffs[m] * factorial)
    }

    /// Drops coefficients beyond relative order `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let mut out = self.clone();
        out.coeffs.truncate(order + 1);
        out
    }

    fn check_base(&self, other: &Jet) -> Result<()> {
        if self.base != other.base {
            return Err(Error::BasePointMismatch(self.base, other.base));
        }
        Ok(())
    }

    /// Significant part: `(valuation, coefficients from the valuation to the last exponent)`.
    fn significant(&self) -> Option<(i32, &[Complex64])> {
        let v = self.valuation()?;
        Some((v, &self.coeffs[(v - self.lead) as usize..]))
    }

    pub fn arith(op: ArithOp, a: &Jet, b: &Jet) -> Result<Jet> {
        match op {
            ArithOp::Add => a.add(b),
            ArithOp::Sub => a.sub(b),
            ArithOp::Mul => a.mul(b),
            ArithOp::Div => a.div(b),
        }
    }

    fn combine(&self, other: &Jet, sign: f64) -> Result<Jet> {
        self.check_base(other)?;
        let first = self.lead.min(other.lead);
        let last = self.last_exponent().min(other.last_exponent());
        let coeffs = (first..=last)
            .map(|e| self.coeff_at(e) + other.coeff_at(e) * sign)
            .collect();
        Self::assemble(self.base, first, coeffs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.combine(other, 1.0)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.combine(other, -1.0)
    }

    /// Zero function known through `last`.
    fn zero_through(base: Complex64, last: i32) -> Result<Jet> {
        if last < 0 {
            return Err(Error::OrderUnderflow);
        }
        Ok(Jet::zero(base, last as usize))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_base(other)?;
        let (sa, sb) = match (self.significant(), other.significant()) {
            (Some(a), Some(b)) => (a, b),
            (None, b) => {
                let vb = b.map_or(other.last_exponent() + 1, |(v, _)| v);
                return Self::zero_through(self.base, self.last_exponent() + vb);
            }
            (Some((va, _)), None) => {
                return Self::zero_through(self.base, other.last_exponent() + va);
            }
        };
        let ((va, a), (vb, b)) = (sa, sb);
        let n = a.len().min(b.len());
        let coeffs = (0..n)
            .map(|i| (0..=i).map(|j| a[j] * b[i - j]).sum())
            .collect();
        Self::assemble(self.base, va + vb, coeffs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(&self, other: &Jet) -> Result<Jet> {
        self.check_base(other)?;
        let (vb, b) = other.significant().ok_or(Error::DivisionByZero)?;
        let (va, a) = match self.significant() {
            Some(s) => s,
            None => return Self::zero_through(self.base, self.last_exponent() - vb),
        };
        let n = a.len().min(b.len());
        let mut q: Vec<Complex64> = Vec::with_capacity(n);
        for i in 0..n {
            let acc: Complex64 = (1..=i).map(|j| b[j] * q[i - j]).sum();
            q.push((a[i] - acc) / b[0]);
        }
        Self::assemble(self.base, va - vb, q)
    }

    pub fn recip(&self) -> Result<Jet> {
        let one = Jet::constant(self.base, Complex64::new(1.0, 0.0), self.trunc_order());
        one.div(self)
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        let coeffs = self.coeffs.iter().map(|x| x * c).collect();
        Self::assemble(self.base, self.lead, coeffs).unwrap_or_else(|_| {
            Jet::zero(self.base, self.last_exponent().max(0) as usize)
        })
    }

    pub fn neg(&self) -> Jet {
        Jet {
            base: self.base,
            lead: self.lead,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn add_scalar(&self, c: Complex64) -> Jet {
        let mut out = self.clone();
        if (self.lead..=self.last_exponent()).contains(&0) {
            out.coeffs[(-self.lead) as usize] += c;
        }
        out
    }

    /// Integer power by repeated squaring; negative exponents go through [`Jet::recip`].
    pub fn powi(&self, n: i32) -> Result<Jet> {
        if n == 0 {
            return Ok(Jet::constant(
                self.base,
                Complex64::new(1.0, 0.0),
                self.trunc_order(),
            ));
        }
        let mut base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc: Option<Jet> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base)?,
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc.expect("nonzero exponent"))
    }

    /// Formal derivative. Analytic jets lose one order; Laurent jets keep
    /// their coefficient count and shift the leading order down.
    pub fn derive(&self) -> Result<Jet> {
        if self.lead == 0 {
            if self.trunc_order() == 0 {
                return Err(Error::InsufficientOrder { have: 0, need: 1 });
            }
            let coeffs = self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect();
            return Ok(Jet {
                base: self.base,
                lead: 0,
                coeffs,
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * f64::from(self.lead + i as i32))
            .collect();
        Self::assemble(self.base, self.lead - 1, coeffs)
    }

    fn unit_parts(&self, op: &'static str) -> Result<(Complex64, &[Complex64])> {
        if self.lead != 0 || is_tiny(self.coeffs[0]) {
            return Err(Error::NonUnitJet { op });
        }
        Ok((self.coeffs[0], &self.coeffs))
    }

    pub fn transcend(&self, func: Transcendental) -> Result<Jet> {
        match func {
            Transcendental::Exp => self.exp(),
            Transcendental::Log => self.ln(),
            Transcendental::PowRational(p, q) => self.pow_rational(p, q),
        }
    }

    pub fn exp(&self) -> Result<Jet> {
        if self.lead != 0 {
            return Err(Error::LaurentJet(self.pole_order()));
        }
        let a = &self.coeffs;
        let mut b = Vec::with_capacity(a.len());
        b.push(a[0].exp());
        for n in 1..a.len() {
            let s: Complex64 = (1..=n).map(|j| a[j] * b[n - j] * j as f64).sum();
            b.push(s / n as f64);
        }
        Ok(Jet {
            base: self.base,
            lead: 0,
            coeffs: b,
        })
    }

    /// Principal logarithm anchored at the constant term.
    pub fn ln(&self) -> Result<Jet> {
        let (a0, a) = self.unit_parts("log")?;
        let mut b = Vec::with_capacity(a.len());
        b.push(a0.ln());
        for n in 1..a.len() {
            let s: Complex64 = (1..n).map(|j| b[j] * a[n - j] * j as f64).sum();
            b.push((a[n] - s / n as f64) / a0);
        }
        Ok(Jet {
            base: self.base,
            lead: 0,
            coeffs: b,
        })
    }

    /// Principal branch of `self^(p/q)`.
    pub fn pow_rational(&self, p: i64, q: i64) -> Result<Jet> {
        if q == 0 {
            return Err(Error::InvalidArgument("zero denominator in rational power".into()));
        }
        let (a0, a) = self.unit_parts("pow")?;
        let alpha = p as f64 / q as f64;
        let mut b = Vec::with_capacity(a.len());
        b.push((a0.ln() * alpha).exp());
        for n in 1..a.len() {
            let s: Complex64 = (1..=n)
                .map(|j| a[j] * b[n - j] * ((alpha + 1.0) * j as f64 - n as f64))
                .sum();
            b.push(s / (a0 * n as f64));
        }
        Ok(Jet {
            base: self.base,
            lead: 0,
            coeffs: b,
        })
    }

    /// Composes a scalar function with this jet, given the function's Taylor
    /// coefficients at this jet's constant term.
    pub fn compose_taylor(&self, taylor: &[Complex64]) -> Result<Jet> {
        if self.lead != 0 {
            return Err(Error::LaurentJet(self.pole_order()));
        }
        let order = self.trunc_order();
        if taylor.len() < order + 1 {
            return Err(Error::InsufficientOrder {
                have: taylor.len().saturating_sub(1),
                need: order,
            });
        }
        let mut delta = self.clone();
        delta.coeffs[0] = zero();
        let mut acc = Jet::constant(self.base, taylor[order], order);
        for m in (0..order).rev() {
            let mut coeffs = acc.mul(&delta)?.coeffs;
            coeffs.resize(order + 1, zero());
            coeffs[0] += taylor[m];
            acc = Jet {
                base: self.base,
                lead: 0,
                coeffs,
            };
        }
        Ok(acc)
    }

    /// Evaluates the truncated series at `z`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let t = z - self.base;
        let poly = self
            .coeffs
            .iter()
            .rev()
            .fold(zero(), |acc, c| acc * t + c);
        poly * t.powi(self.lead)
    }
}
