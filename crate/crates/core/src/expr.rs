//! Expression trees over a small grammar, evaluable to jets.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | base ('^' ['-'] integer)?
//! base   := number | 'z' | ident '(' expr ')' | '(' expr ')' | ident
//! ```
//!
//! Function identifiers are `exp`, `log`, `J0` and `Y0`; any other bare
//! identifier must be one of the parameter names handed to the parser.
//! A number may carry an `i` suffix to make it imaginary. `^` only takes
//! nonzero integer exponents.

use std::fmt;

use num_complex::Complex64;

use crate::bessel::{bessel_series, BesselKind};
use crate::error::{Error, Result};
use crate::jet::{Jet, JetSource};

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionExpr {
    Const(Complex64),
    Var,
    Param(String),
    Neg(Box<FunctionExpr>),
    Add(Box<FunctionExpr>, Box<FunctionExpr>),
    Sub(Box<FunctionExpr>, Box<FunctionExpr>),
    Mul(Box<FunctionExpr>, Box<FunctionExpr>),
    Div(Box<FunctionExpr>, Box<FunctionExpr>),
    Pow(Box<FunctionExpr>, i32),
    Exp(Box<FunctionExpr>),
    Log(Box<FunctionExpr>),
    Bessel(BesselKind, Box<FunctionExpr>),
}

impl FunctionExpr {
    /// Parses an expression with no free parameters.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_params(text, &[])
    }

    /// Parses an expression whose bare identifiers may name any of `params`.
    pub fn parse_with_params(text: &str, params: &[&str]) -> Result<Self> {
        let mut parser = Parser {
            src: text.as_bytes(),
            pos: 0,
            params,
        };
        let expr = parser.expr()?;
        parser.skip_ws();
        if parser.pos != parser.src.len() {
            return Err(parser.syntax("unexpected trailing input"));
        }
        Ok(expr)
    }

    pub fn constant(c: Complex64) -> Self {
        FunctionExpr::Const(c)
    }

    /// Replaces every occurrence of parameter `name` with a constant.
    pub fn bind(&self, name: &str, value: Complex64) -> Self {
        use FunctionExpr::*;
        let b = |e: &FunctionExpr| Box::new(e.bind(name, value));
        match self {
            Param(p) if p == name => Const(value),
            Const(_) | Var | Param(_) => self.clone(),
            Neg(a) => Neg(b(a)),
            Add(x, y) => Add(b(x), b(y)),
            Sub(x, y) => Sub(b(x), b(y)),
            Mul(x, y) => Mul(b(x), b(y)),
            Div(x, y) => Div(b(x), b(y)),
            Pow(x, n) => Pow(b(x), *n),
            Exp(a) => Exp(b(a)),
            Log(a) => Log(b(a)),
            Bessel(k, a) => Bessel(*k, b(a)),
        }
    }

    pub fn bind_all(&self, bindings: &[(&str, Complex64)]) -> Self {
        bindings
            .iter()
            .fold(self.clone(), |e, (name, value)| e.bind(name, *value))
    }

    /// Names of parameters that are still free.
    pub fn free_params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        use FunctionExpr::*;
        match self {
            Param(p) => out.push(p.clone()),
            Const(_) | Var => {}
            Neg(a) | Pow(a, _) | Exp(a) | Log(a) | Bessel(_, a) => a.collect_params(out),
            Add(x, y) | Sub(x, y) | Mul(x, y) | Div(x, y) => {
                x.collect_params(out);
                y.collect_params(out);
            }
        }
    }

    /// Whether the tree mentions the variable `z`.
    pub fn depends_on_z(&self) -> bool {
        use FunctionExpr::*;
        match self {
            Var => true,
            Const(_) | Param(_) => false,
            Neg(a) | Pow(a, _) | Exp(a) | Log(a) | Bessel(_, a) => a.depends_on_z(),
            Add(x, y) | Sub(x, y) | Mul(x, y) | Div(x, y) => x.depends_on_z() || y.depends_on_z(),
        }
    }

    /// Jet at `z0`. Analytic results are cut back to `order` when products
    /// of vanishing factors would know more terms than requested.
    pub fn jet_at(&self, z0: Complex64, order: usize) -> Result<Jet> {
        let jet = self.jet_raw(z0, order)?;
        Ok(if jet.lead_order() == 0 { jet.truncate(order) } else { jet })
    }

    fn jet_raw(&self, z0: Complex64, order: usize) -> Result<Jet> {
        use FunctionExpr::*;
        Ok(match self {
            Const(c) => Jet::constant(z0, *c, order),
            Var => Jet::variable(z0, order),
            Param(p) => return Err(Error::UnboundParameter(p.clone())),
            Neg(a) => a.jet_raw(z0, order)?.neg(),
            Add(x, y) => x.jet_raw(z0, order)?.add(&y.jet_raw(z0, order)?)?,
            Sub(x, y) => x.jet_raw(z0, order)?.sub(&y.jet_raw(z0, order)?)?,
            Mul(x, y) => x.jet_raw(z0, order)?.mul(&y.jet_raw(z0, order)?)?,
            Div(x, y) => x.jet_raw(z0, order)?.div(&y.jet_raw(z0, order)?)?,
            Pow(x, n) => x.jet_raw(z0, order)?.powi(*n)?,
            Exp(a) => a.jet_raw(z0, order)?.exp()?,
            Log(a) => a.jet_raw(z0, order)?.ln()?,
            Bessel(kind, a) => bessel_series(*kind, &a.jet_raw(z0, order)?)?,
        })
    }

    /// Pointwise value; fails at poles.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.jet_at(z, 0)?.value()
    }
}

impl JetSource for FunctionExpr {
    fn jet_at(&self, z0: Complex64, order: usize) -> Result<Jet> {
        FunctionExpr::jet_at(self, z0, order)
    }
}

fn fmt_real(x: f64) -> String {
    format!("{}", x)
}

impl fmt::Display for FunctionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FunctionExpr::*;
        match self {
            Const(c) => {
                if c.im == 0.0 && c.re >= 0.0 && c.re.is_sign_positive() {
                    write!(f, "{}", fmt_real(c.re))
                } else if c.re == 0.0 && c.re.is_sign_positive() && c.im >= 0.0 {
                    write!(f, "{}i", fmt_real(c.im))
                } else {
                    let re = if c.re < 0.0 {
                        format!("-{}", fmt_real(-c.re))
                    } else {
                        fmt_real(c.re)
                    };
                    let (sign, im) = if c.im < 0.0 { ('-', -c.im) } else { ('+', c.im) };
                    write!(f, "({} {} {}i)", re, sign, fmt_real(im))
                }
            }
            Var => write!(f, "z"),
            Param(p) => write!(f, "{}", p),
            Neg(a) => write!(f, "(-{})", a),
            Add(x, y) => write!(f, "({} + {})", x, y),
            Sub(x, y) => write!(f, "({} - {})", x, y),
            Mul(x, y) => write!(f, "({} * {})", x, y),
            Div(x, y) => write!(f, "({} / {})", x, y),
            Pow(x, n) => match **x {
                Const(_) | Var | Param(_) | Exp(_) | Log(_) | Bessel(..) => write!(f, "{}^{}", x, n),
                _ => write!(f, "({})^{}", x, n),
            },
            Exp(a) => write!(f, "exp({})", a),
            Log(a) => write!(f, "log({})", a),
            Bessel(kind, a) => write!(f, "{}({})", kind.name(), a),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    params: &'a [&'a str],
}

impl Parser<'_> {
    fn syntax(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, ch: u8) -> Result<()> {
        if self.eat(ch) {
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{}`", ch as char)))
        }
    }

    fn expr(&mut self) -> Result<FunctionExpr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = FunctionExpr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = FunctionExpr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<FunctionExpr> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = FunctionExpr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = FunctionExpr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<FunctionExpr> {
        if self.eat(b'-') {
            return Ok(FunctionExpr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.eat(b'^') {
            let at = self.pos;
            let exponent = self.integer()?;
            if exponent == 0 {
                return Err(Error::ZeroExponent { pos: at });
            }
            return Ok(FunctionExpr::Pow(Box::new(base), exponent));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i32> {
        let negative = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected an integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let value: i32 = digits.parse().map_err(|_| Error::Syntax {
            pos: start,
            msg: "exponent out of range".into(),
        })?;
        Ok(if negative { -value } else { value })
    }

    fn base(&mut self) -> Result<FunctionExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.syntax("unexpected character")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<FunctionExpr> {
        let start = self.pos;
        let mut seen_dot = false;
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b'0'..=b'9' => {}
                b'.' if !seen_dot => seen_dot = true,
                _ => break,
            }
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            pos: start,
            msg: format!("malformed number `{}`", text),
        })?;
        let imaginary = self.src.get(self.pos) == Some(&b'i')
            && !self
                .src
                .get(self.pos + 1)
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_');
        if imaginary {
            self.pos += 1;
            return Ok(FunctionExpr::Const(Complex64::new(0.0, value)));
        }
        Ok(FunctionExpr::Const(Complex64::new(value, 0.0)))
    }

    fn identifier(&mut self) -> Result<FunctionExpr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
        let call = |p: &mut Self| -> Result<Box<FunctionExpr>> {
            p.expect(b'(')?;
            let arg = p.expr()?;
            p.expect(b')')?;
            Ok(Box::new(arg))
        };
        match name {
            "z" => Ok(FunctionExpr::Var),
            "exp" => Ok(FunctionExpr::Exp(call(self)?)),
            "log" => Ok(FunctionExpr::Log(call(self)?)),
            "J0" => Ok(FunctionExpr::Bessel(BesselKind::J0, call(self)?)),
            "Y0" => Ok(FunctionExpr::Bessel(BesselKind::Y0, call(self)?)),
            p if self.params.contains(&p) => Ok(FunctionExpr::Param(p.to_string())),
            other => Err(Error::UnknownIdentifier {
                name: other.to_string(),
                pos: start,
            }),
        }
    }
}
