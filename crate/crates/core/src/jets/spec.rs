use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use super::{jet_compose, Jet, Scalar};
use crate::error::{GevreyError, Result};
use crate::numerics::{parse_rational, BigRat};

/// Catalog functions built from rational polynomials, `exp`, `sin`, `cos`
/// and `1/y` by composition, sums and products.
///
/// Grammar: `poly:c0,c1,...` (univariate, coefficients of `1, x, x², ...`),
/// `mvpoly:e1.e2:c,...` (monomial exponents, then coefficient),
/// `exp`, `sin`, `cos`, `recip`, `compose(A,B)` for `A∘B`, `sum(A,B)`,
/// `prod(A,B)`.
#[derive(Clone, Debug, PartialEq)]
pub enum FunctionSpec {
    Poly(Vec<BigRat>),
    MvPoly { dim: usize, terms: Vec<(Vec<u32>, BigRat)> },
    Exp,
    Sin,
    Cos,
    Recip,
    Compose(Box<FunctionSpec>, Box<FunctionSpec>),
    Sum(Box<FunctionSpec>, Box<FunctionSpec>),
    Prod(Box<FunctionSpec>, Box<FunctionSpec>),
}

impl FunctionSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let text: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { s: text.as_bytes(), pos: 0 };
        let spec = p.expr()?;
        if p.pos != p.s.len() {
            return Err(p.error("trailing input"));
        }
        spec.arity()?;
        Ok(spec)
    }

    pub fn compose(outer: FunctionSpec, inner: FunctionSpec) -> Self {
        FunctionSpec::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn sum(a: FunctionSpec, b: FunctionSpec) -> Self {
        FunctionSpec::Sum(Box::new(a), Box::new(b))
    }

    pub fn prod(a: FunctionSpec, b: FunctionSpec) -> Self {
        FunctionSpec::Prod(Box::new(a), Box::new(b))
    }

    pub fn poly_i64(coeffs: &[i64]) -> Self {
        FunctionSpec::Poly(coeffs.iter().map(|&c| BigRat::from_integer(c.into())).collect())
    }

    /// Number of variables, or `None` for constants.
    pub fn arity(&self) -> Result<Option<usize>> {
        use FunctionSpec::*;
        Ok(match self {
            Poly(c) => (c.len() > 1).then_some(1),
            MvPoly { dim, .. } => Some(*dim),
            Exp | Sin | Cos | Recip => Some(1),
            Compose(a, b) => {
                if let Some(d) = a.arity()? {
                    if d != 1 {
                        return Err(GevreyError::Parse(format!("outer function of compose must be univariate, has {d} variables")));
                    }
                }
                b.arity()?
            }
            Sum(a, b) | Prod(a, b) => match (a.arity()?, b.arity()?) {
                (Some(x), Some(y)) if x != y => {
                    return Err(GevreyError::DimensionMismatch { expected: x, got: y });
                }
                (x, y) => x.or(y),
            },
        })
    }

    /// Jet of the represented function at `base` in the field `T`.
    ///
    /// Fails with `Inexact` when `T` cannot hold a transcendental value.
    pub fn jet_in<T: Scalar>(&self, base: &[T], order: usize) -> Result<Jet<T>> {
        if base.is_empty() {
            return Err(GevreyError::InvalidParameter("base point must have at least one coordinate".into()));
        }
        if let Some(d) = self.arity()? {
            if d != base.len() {
                return Err(GevreyError::DimensionMismatch { expected: d, got: base.len() });
            }
        }
        self.eval(base, order)
    }

    fn eval<T: Scalar>(&self, base: &[T], order: usize) -> Result<Jet<T>> {
        use FunctionSpec::*;
        Ok(match self {
            Poly(c) => {
                let Some((last, rest)) = c.split_last() else {
                    return Ok(Jet::constant(T::zero(), base, order));
                };
                let x = Jet::variable(0, base, order);
                let mut acc = Jet::constant(T::from_rational(last), base, order);
                for ck in rest.iter().rev() {
                    acc = acc.mul(&x).add_constant(&T::from_rational(ck));
                }
                acc
            }
            MvPoly { terms, .. } => {
                let vars: Vec<Jet<T>> = (0..base.len()).map(|i| Jet::variable(i, base, order)).collect();
                let mut acc = Jet::constant(T::zero(), base, order);
                for (exps, c) in terms {
                    let mut m = Jet::constant(T::from_rational(c), base, order);
                    for (v, &e) in vars.iter().zip(exps) {
                        m = m.mul(&v.powi(e));
                    }
                    acc = acc.add(&m);
                }
                acc
            }
            Exp => Jet::variable(0, base, order).exp()?,
            Sin => Jet::variable(0, base, order).sin()?,
            Cos => Jet::variable(0, base, order).cos()?,
            Recip => Jet::variable(0, base, order).recip()?,
            Compose(a, b) => {
                let inner = b.eval(base, order)?;
                let outer = a.eval(&[inner.value().clone()], order)?;
                jet_compose(&outer, &inner)?
            }
            Sum(a, b) => a.eval(base, order)?.add(&b.eval(base, order)?),
            Prod(a, b) => a.eval(base, order)?.mul(&b.eval(base, order)?),
        })
    }

    /// Function value in `f64`.
    pub fn value_f64(&self, at: &[f64]) -> Result<f64> {
        Ok(*self.jet_in::<f64>(at, 0)?.value())
    }
}

impl FromStr for FunctionSpec {
    type Err = GevreyError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FunctionSpec::*;
        match self {
            Poly(c) => {
                write!(f, "poly:")?;
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
            MvPoly { terms, .. } => {
                write!(f, "mvpoly:")?;
                let parts: Vec<String> = terms
                    .iter()
                    .map(|(e, c)| {
                        let e: Vec<String> = e.iter().map(|x| x.to_string()).collect();
                        format!("{}:{}", e.join("."), c)
                    })
                    .collect();
                write!(f, "{}", parts.join(","))
            }
            Exp => write!(f, "exp"),
            Sin => write!(f, "sin"),
            Cos => write!(f, "cos"),
            Recip => write!(f, "recip"),
            Compose(a, b) => write!(f, "compose({a},{b})"),
            Sum(a, b) => write!(f, "sum({a},{b})"),
            Prod(a, b) => write!(f, "prod({a},{b})"),
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> GevreyError {
        GevreyError::Parse(format!("function spec: {what} at offset {}", self.pos))
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).expect("ascii")
    }

    /// Token up to the next `,` `(` `)` or end.
    fn token(&mut self) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(|c| !matches!(c, b',' | b'(' | b')')) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos]).expect("ascii")
    }

    fn next_is_number(&self) -> bool {
        matches!(self.s.get(self.pos + 1), Some(c) if c.is_ascii_digit() || matches!(c, b'-' | b'+' | b'.'))
    }

    fn next_is_monomial(&self) -> bool {
        let mut i = self.pos + 1;
        let start = i;
        while self.s.get(i).is_some_and(|c| c.is_ascii_digit() || *c == b'.') {
            i += 1;
        }
        i > start && self.s.get(i) == Some(&b':')
    }

    fn expr(&mut self) -> Result<FunctionSpec> {
        let name = self.ident().to_string();
        match name.as_str() {
            "poly" => {
                self.expect(b':')?;
                let mut coeffs = vec![parse_rational(self.token())?];
                while self.peek() == Some(b',') && self.next_is_number() {
                    self.pos += 1;
                    coeffs.push(parse_rational(self.token())?);
                }
                Ok(FunctionSpec::Poly(coeffs))
            }
            "mvpoly" => {
                self.expect(b':')?;
                let mut terms = vec![self.monomial()?];
                while self.peek() == Some(b',') && self.next_is_monomial() {
                    self.pos += 1;
                    terms.push(self.monomial()?);
                }
                let dim = terms[0].0.len();
                if terms.iter().any(|t| t.0.len() != dim) {
                    return Err(self.error("monomials of different dimension"));
                }
                terms.retain(|t| !t.1.is_zero());
                Ok(FunctionSpec::MvPoly { dim, terms })
            }
            "exp" => Ok(FunctionSpec::Exp),
            "sin" => Ok(FunctionSpec::Sin),
            "cos" => Ok(FunctionSpec::Cos),
            "recip" => Ok(FunctionSpec::Recip),
            "compose" | "sum" | "prod" => {
                self.expect(b'(')?;
                let a = self.expr()?;
                self.expect(b',')?;
                let b = self.expr()?;
                self.expect(b')')?;
                Ok(match name.as_str() {
                    "compose" => FunctionSpec::compose(a, b),
                    "sum" => FunctionSpec::sum(a, b),
                    _ => FunctionSpec::prod(a, b),
                })
            }
            "" => Err(self.error("expected a function name")),
            other => Err(self.error(&format!("unknown function '{other}'"))),
        }
    }

    fn monomial(&mut self) -> Result<(Vec<u32>, BigRat)> {
        let tok = self.token().to_string();
        let (exps, coef) = tok.split_once(':').ok_or_else(|| self.error("monomial needs 'exponents:coefficient'"))?;
        let exps = exps
            .split('.')
            .map(|e| e.parse::<u32>().map_err(|_| self.error("bad exponent")))
            .collect::<Result<Vec<_>>>()?;
        Ok((exps, parse_rational(coef)?))
    }
}

impl serde::Serialize for FunctionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for FunctionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        FunctionSpec::parse(&s).map_err(serde::de::Error::custom)
    }
}
