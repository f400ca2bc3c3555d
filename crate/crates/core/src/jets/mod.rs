//! Truncated multivariate Taylor jets.
//!
//! A jet of order `K` at a base point stores `∂^α f(base)/α!` for every
//! `|α| ≤ K`. Composition is Horner evaluation of the outer series at the
//! nonconstant part of the inner jet, so no Faà di Bruno sum is involved.

mod scalar;
mod spec;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{GevreyError, Result};
use crate::multiindex::MultiIndex;
use crate::numerics::{rational_to_f64, BigRat};

pub use scalar::{approx, Scalar};
pub use spec::FunctionSpec;

/// Monomial ordering and multiplication table for a `(d, K)` pair.
#[derive(Debug)]
pub struct Layout {
    dim: usize,
    order: usize,
    monomials: Vec<MultiIndex>,
    degrees: Vec<usize>,
    index: HashMap<MultiIndex, usize>,
    /// `(i, j, k)` with `monomials[i] + monomials[j] = monomials[k]`.
    products: Vec<(u32, u32, u32)>,
    /// `raise[a][k]`: index of `monomials[k] + e_a`, for `degrees[k] < order`.
    raise: Vec<Vec<u32>>,
}

impl Layout {
    fn build(dim: usize, order: usize) -> Self {
        let monomials: Vec<MultiIndex> = (0..=order).flat_map(|n| MultiIndex::of_order(dim, n)).collect();
        let degrees: Vec<usize> = monomials.iter().map(MultiIndex::order).collect();
        let index: HashMap<MultiIndex, usize> =
            monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut products = Vec::new();
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if degrees[i] + degrees[j] > order {
                    // Graded order: later monomials only grow in degree.
                    break;
                }
                let k = index[&(a + b)];
                products.push((i as u32, j as u32, k as u32));
            }
        }
        let raise = (0..dim)
            .map(|a| {
                let unit = MultiIndex::unit(dim, a);
                monomials.iter().zip(&degrees).take_while(|(_, &g)| g < order).map(|(m, _)| index[&(m + &unit)] as u32).collect()
            })
            .collect();
        Layout { dim, order, monomials, degrees, index, products, raise }
    }

    /// Shared layout for `(dim, order)`.
    pub fn get(dim: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard.entry((dim, order)).or_insert_with(|| Arc::new(Layout::build(dim, order))).clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.index.get(alpha).copied()
    }
}

#[derive(Clone, Debug)]
pub struct Jet<T: Scalar> {
    layout: Arc<Layout>,
    coeffs: Vec<T>,
    base: Vec<T>,
}

impl<T: Scalar> PartialEq for Jet<T> {
    fn eq(&self, other: &Self) -> bool {
        self.layout.dim == other.layout.dim
            && self.layout.order == other.layout.order
            && self.coeffs == other.coeffs
            && self.base == other.base
    }
}

impl<T: Scalar> Jet<T> {
    pub fn constant(value: T, base: &[T], order: usize) -> Self {
        let layout = Layout::get(base.len(), order);
        let mut coeffs = vec![T::zero(); layout.len()];
        coeffs[0] = value;
        Jet { layout, coeffs, base: base.to_vec() }
    }

    /// The coordinate function `x_i`.
    pub fn variable(i: usize, base: &[T], order: usize) -> Self {
        assert!(i < base.len(), "variable index out of range");
        let mut j = Self::constant(base[i].clone(), base, order);
        if order >= 1 {
            let k = j.layout.index_of(&MultiIndex::unit(base.len(), i)).expect("unit monomial");
            j.coeffs[k] = T::one();
        }
        j
    }

    /// Builds a jet from Taylor coefficients listed in layout order.
    pub fn from_coeffs(base: &[T], order: usize, coeffs: Vec<T>) -> Result<Self> {
        let layout = Layout::get(base.len(), order);
        if coeffs.len() != layout.len() {
            return Err(GevreyError::DimensionMismatch { expected: layout.len(), got: coeffs.len() });
        }
        Ok(Jet { layout, coeffs, base: base.to_vec() })
    }

    /// Univariate jet from coefficients `c_0..c_K`.
    pub fn univariate(base: T, coeffs: Vec<T>) -> Self {
        let order = coeffs.len().saturating_sub(1);
        Jet { layout: Layout::get(1, order), coeffs, base: vec![base] }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn base(&self) -> &[T] {
        &self.base
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn value(&self) -> &T {
        &self.coeffs[0]
    }

    /// Taylor coefficient at `α` (zero beyond the truncation order).
    pub fn coeff(&self, alpha: &MultiIndex) -> T {
        self.layout.index_of(alpha).map(|k| self.coeffs[k].clone()).unwrap_or_else(T::zero)
    }

    /// `∂^α f(base) = α! · coeff(α)`.
    pub fn partial(&self, alpha: &MultiIndex) -> Result<T> {
        if alpha.dim() != self.dim() {
            return Err(GevreyError::DimensionMismatch { expected: self.dim(), got: alpha.dim() });
        }
        if alpha.order() > self.order() {
            return Err(GevreyError::OrderExceedsTruncation { order: alpha.order(), truncation: self.order() });
        }
        let f = alpha.components().iter().fold(T::one(), |acc, &a| acc * factorial_scalar::<T>(a as u64));
        Ok(f * self.coeff(alpha))
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.dim(), other.dim(), "jet dimension mismatch");
        assert_eq!(self.order(), other.order(), "jet order mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() + b.clone()).collect();
        Jet { layout: self.layout.clone(), coeffs, base: self.base.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.clone() - b.clone()).collect();
        Jet { layout: self.layout.clone(), coeffs, base: self.base.clone() }
    }

    pub fn scale(&self, c: &T) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a.clone() * c.clone()).collect();
        Jet { layout: self.layout.clone(), coeffs, base: self.base.clone() }
    }

    pub fn add_constant(&self, c: &T) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].clone() + c.clone();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_compatible(other);
        let mut coeffs = vec![T::zero(); self.layout.len()];
        for &(i, j, k) in &self.layout.products {
            let (a, b) = (&self.coeffs[i as usize], &other.coeffs[j as usize]);
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let k = k as usize;
            coeffs[k] = std::mem::replace(&mut coeffs[k], T::zero()) + a.clone() * b.clone();
        }
        Jet { layout: self.layout.clone(), coeffs, base: self.base.clone() }
    }

    /// `self += a · b` truncated to the order of `self`; `a` and `b` may carry
    /// higher orders.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        assert!(a.dim() == self.dim() && b.dim() == self.dim(), "jet dimension mismatch");
        assert!(a.order() >= self.order() && b.order() >= self.order(), "factor order below target");
        for &(i, j, k) in &self.layout.products {
            let x = &a.coeffs[i as usize];
            if x.is_zero() {
                continue;
            }
            let y = &b.coeffs[j as usize];
            let k = k as usize;
            self.coeffs[k] = std::mem::replace(&mut self.coeffs[k], T::zero()) + x.clone() * y.clone();
        }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Jet::constant(T::one(), &self.base, self.order());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Jet of `∂_i f`, one order lower.
    pub fn derivative(&self, i: usize) -> Result<Self> {
        if i >= self.dim() {
            return Err(GevreyError::DimensionMismatch { expected: self.dim(), got: i + 1 });
        }
        if self.order() == 0 {
            return Err(GevreyError::OrderExceedsTruncation { order: 1, truncation: 0 });
        }
        let layout = Layout::get(self.dim(), self.order() - 1);
        let coeffs = self.layout.raise[i][..layout.len()]
            .iter()
            .map(|&up| {
                let up = up as usize;
                T::from_i64(self.layout.monomials[up][i] as i64) * self.coeffs[up].clone()
            })
            .collect();
        Ok(Jet { layout, coeffs, base: self.base.clone() })
    }

    /// Jet of `∂^β f`, `|β|` orders lower.
    pub fn derivative_multi(&self, beta: &MultiIndex) -> Result<Self> {
        let mut out = self.clone();
        for (i, &b) in beta.components().iter().enumerate() {
            for _ in 0..b {
                out = out.derivative(i)?;
            }
        }
        Ok(out)
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "truncate can only lower the order");
        let layout = Layout::get(self.dim(), order);
        let coeffs = self.coeffs[..layout.len()].to_vec();
        Jet { layout, coeffs, base: self.base.clone() }
    }

    /// `Σ_{|α| = n}` part of the jet.
    pub fn homogeneous(&self, n: usize) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.layout
            .monomials
            .iter()
            .zip(&self.coeffs)
            .zip(&self.layout.degrees)
            .filter(move |(_, &deg)| deg == n)
            .map(|(p, _)| p)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Jet<U> {
        Jet { layout: self.layout.clone(), coeffs: self.coeffs.iter().map(&f).collect(), base: self.base.iter().map(f).collect() }
    }

    pub fn to_complex(&self) -> Jet<Complex64> {
        self.map(T::to_c64)
    }

    /// Evaluates a univariate series `Σ f_n y^n` at `self - self(base)`.
    pub(crate) fn horner(&self, series: &[T]) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = T::zero();
        let mut acc = Jet::constant(series.last().cloned().unwrap_or_else(T::zero), &self.base, self.order());
        for c in series.iter().rev().skip(1) {
            acc = acc.mul(&h).add_constant(c);
        }
        acc
    }

    /// `1/f`; fails at a zero of `f`.
    pub fn recip(&self) -> Result<Self> {
        let y0 = self.value().clone();
        Ok(self.horner(&recip_series(&y0, self.order())?))
    }

    pub fn exp(&self) -> Result<Self> {
        Ok(self.horner(&exp_series(self.value(), self.order())?))
    }

    pub fn sin(&self) -> Result<Self> {
        Ok(self.horner(&sin_series(self.value(), self.order())?))
    }

    pub fn cos(&self) -> Result<Self> {
        Ok(self.horner(&cos_series(self.value(), self.order())?))
    }
}

fn factorial_scalar<T: Scalar>(n: u64) -> T {
    (1..=n as i64).fold(T::one(), |acc, k| acc * T::from_i64(k))
}

fn inexact(what: &'static str) -> GevreyError {
    GevreyError::Inexact(what)
}

/// `e^{y0} / n!`
pub(crate) fn exp_series<T: Scalar>(y0: &T, order: usize) -> Result<Vec<T>> {
    let e = y0.exp_opt().ok_or(inexact("exp"))?;
    let mut out = Vec::with_capacity(order + 1);
    let mut c = e;
    for n in 0..=order {
        if n > 0 {
            c = c / T::from_i64(n as i64);
        }
        out.push(c.clone());
    }
    Ok(out)
}

/// Taylor coefficients of `sin` (or `cos` if `shift = 1`) at `y0`.
fn trig_series<T: Scalar>(y0: &T, order: usize, shift: usize) -> Result<Vec<T>> {
    let s = y0.sin_opt().ok_or(inexact("sin"))?;
    let c = y0.cos_opt().ok_or(inexact("cos"))?;
    // n-th derivative of sin is sin, cos, -sin, -cos, ...
    let cycle = [s.clone(), c.clone(), -s, -c];
    let mut out = Vec::with_capacity(order + 1);
    let mut fact = T::one();
    for n in 0..=order {
        if n > 0 {
            fact = fact * T::from_i64(n as i64);
        }
        out.push(cycle[(n + shift) % 4].clone() / fact.clone());
    }
    Ok(out)
}

pub(crate) fn sin_series<T: Scalar>(y0: &T, order: usize) -> Result<Vec<T>> {
    trig_series(y0, order, 0)
}

pub(crate) fn cos_series<T: Scalar>(y0: &T, order: usize) -> Result<Vec<T>> {
    trig_series(y0, order, 1)
}

/// `(-1)^n / y0^{n+1}`
pub(crate) fn recip_series<T: Scalar>(y0: &T, order: usize) -> Result<Vec<T>> {
    if y0.is_zero() {
        return Err(GevreyError::Pole);
    }
    let inv = T::one() / y0.clone();
    let mut out = Vec::with_capacity(order + 1);
    let mut c = inv.clone();
    for _ in 0..=order {
        out.push(c.clone());
        c = -(c * inv.clone());
    }
    Ok(out)
}

/// Composition `f ∘ g` where `f` is univariate and based at `g(base)`.
pub fn jet_compose<T: Scalar>(f: &Jet<T>, g: &Jet<T>) -> Result<Jet<T>> {
    if f.dim() != 1 {
        return Err(GevreyError::DimensionMismatch { expected: 1, got: f.dim() });
    }
    if f.order() != g.order() {
        return Err(GevreyError::InvalidParameter(format!(
            "truncation orders differ: {} vs {}",
            f.order(),
            g.order()
        )));
    }
    let (fb, gv) = (&f.base[0], g.value());
    let same = if T::EXACT { fb == gv } else { (fb.clone() - gv.clone()).magnitude() <= 1e-12 * gv.magnitude().max(1.0) };
    if !same {
        return Err(GevreyError::BaseMismatch { outer: format!("{fb:?}"), inner: format!("{gv:?}") });
    }
    Ok(g.horner(&f.coeffs))
}

pub fn jet_partial<T: Scalar>(j: &Jet<T>, alpha: &MultiIndex) -> Result<T> {
    j.partial(alpha)
}

/// A jet in exact arithmetic when the spec and base allow it, else in `f64`.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyJet {
    Exact(Jet<BigRat>),
    Float(Jet<f64>),
}

/// A derivative value, exact when available.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(BigRat),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => rational_to_f64(r),
            Number::Float(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Exact(_))
    }
}

impl std::fmt::Display for Number {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Number::Exact(r) => write!(f, "{r}"),
            Number::Float(x) => write!(f, "{x:e}"),
        }
    }
}

impl AnyJet {
    pub fn partial(&self, alpha: &MultiIndex) -> Result<Number> {
        match self {
            AnyJet::Exact(j) => j.partial(alpha).map(Number::Exact),
            AnyJet::Float(j) => j.partial(alpha).map(Number::Float),
        }
    }

    pub fn to_f64(&self) -> Jet<f64> {
        match self {
            AnyJet::Exact(j) => j.map(rational_to_f64),
            AnyJet::Float(j) => j.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnyJet::Exact(_))
    }
}

/// Taylor jet of `spec` at `base` through order `order`.
///
/// Exact whenever every transcendental factor is evaluated at zero.
pub fn jet_of(spec: &FunctionSpec, base: &[BigRat], order: usize) -> Result<AnyJet> {
    match spec.jet_in::<BigRat>(base, order) {
        Ok(j) => Ok(AnyJet::Exact(j)),
        Err(GevreyError::Inexact(_)) => {
            let b: Vec<f64> = base.iter().map(rational_to_f64).collect();
            spec.jet_in::<f64>(&b, order).map(AnyJet::Float)
        }
        Err(e) => Err(e),
    }
}

/// `∂^α(f∘g)(at)` by composing jets; exact when both jets are.
pub fn composition_partial(f: &FunctionSpec, g: &FunctionSpec, alpha: &MultiIndex, at: &[BigRat]) -> Result<Number> {
    let n = alpha.order();
    match jet_of(g, at, n)? {
        AnyJet::Exact(gj) => match jet_of(f, &[gj.value().clone()], n)? {
            AnyJet::Exact(fj) => Ok(Number::Exact(jet_compose(&fj, &gj)?.partial(alpha)?)),
            AnyJet::Float(fj) => Ok(Number::Float(jet_compose(&fj, &gj.map(rational_to_f64))?.partial(alpha)?)),
        },
        AnyJet::Float(gj) => {
            let fj = f.jet_in::<f64>(&[*gj.value()], n)?;
            Ok(Number::Float(jet_compose(&fj, &gj)?.partial(alpha)?))
        }
    }
}

#[cfg(test)]
mod tests;
