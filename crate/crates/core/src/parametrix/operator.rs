use std::fmt;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{GevreyError, Result};
use crate::faadibruno::fdb_from_jets;
use crate::jets::{FunctionSpec, Jet};
use crate::multiindex::MultiIndex;
use crate::wavefront::Cone;

/// Largest supported operator order.
pub const MAX_ORDER: usize = 3;

/// One coefficient `a_α(x) = scale · spec(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub alpha: MultiIndex,
    pub scale: Complex64,
    pub spec: FunctionSpec,
}

/// `P(x, D) = Σ a_α(x) D^α` with `D = -i∂`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffOperator {
    dim: usize,
    order: usize,
    /// Sorted by `α`, one entry per `α`.
    coeffs: Vec<Coefficient>,
}

fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut prev = ' ';
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if c == '+' && depth == 0 && !matches!(prev, ',' | ':' | '*') && !cur.trim().is_empty() {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
        if !c.is_whitespace() {
            prev = c;
        }
    }
    out.push(cur);
    out
}

fn parse_d(s: &str) -> Result<Vec<u32>> {
    let bad = || GevreyError::Parse(format!("bad derivative '{s}'"));
    let rest = s.strip_prefix('D').ok_or_else(bad)?;
    if rest.is_empty() {
        return Ok(vec![1]);
    }
    let rest = rest.strip_prefix('^').ok_or_else(bad)?;
    if let Some(inner) = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        inner.split(',').map(|t| t.trim().parse::<u32>().map_err(|_| bad())).collect()
    } else {
        Ok(vec![rest.parse::<u32>().map_err(|_| bad())?])
    }
}

impl DiffOperator {
    pub fn new(dim: usize, coeffs: Vec<Coefficient>) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(GevreyError::InvalidParameter(format!("dimension must be 1 or 2, got {dim}")));
        }
        let mut merged: Vec<Coefficient> = Vec::new();
        for c in coeffs {
            if c.alpha.dim() != dim {
                return Err(GevreyError::DimensionMismatch { expected: dim, got: c.alpha.dim() });
            }
            if let Some(a) = c.spec.arity()? {
                if a != dim {
                    return Err(GevreyError::DimensionMismatch { expected: dim, got: a });
                }
            }
            if merged.iter().any(|m| m.alpha == c.alpha) {
                return Err(GevreyError::Parse(format!("repeated derivative D^{}", c.alpha)));
            }
            merged.push(c);
        }
        merged.sort_by(|a, b| a.alpha.cmp(&b.alpha));
        let order = merged
            .iter()
            .filter(|c| c.scale != Complex64::new(0.0, 0.0) && c.spec != FunctionSpec::poly_i64(&[0]))
            .map(|c| c.alpha.order())
            .max()
            .ok_or(GevreyError::Empty("operator"))?;
        if order == 0 {
            return Err(GevreyError::InvalidParameter("operator has order 0".into()));
        }
        if order > MAX_ORDER {
            return Err(GevreyError::Budget(format!("operator order {order} exceeds {MAX_ORDER}")));
        }
        Ok(Self { dim, order, coeffs: merged })
    }

    /// Grammar: terms joined by `+`; each term is `[i*|-i*]spec[*D|*D^k|*D^(a,b)]`
    /// or a bare derivative.
    pub fn parse(s: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for term in split_top_level(s) {
            let t: String = term.chars().filter(|c| !c.is_whitespace()).collect();
            if t.is_empty() {
                return Err(GevreyError::Parse(format!("empty term in '{s}'")));
            }
            let (mut scale, mut body) = (Complex64::new(1.0, 0.0), t.as_str());
            if let Some(r) = body.strip_prefix("i*") {
                (scale, body) = (Complex64::new(0.0, 1.0), r);
            } else if let Some(r) = body.strip_prefix("-i*") {
                (scale, body) = (Complex64::new(0.0, -1.0), r);
            }
            let (spec, d) = if body.starts_with('D') {
                (FunctionSpec::poly_i64(&[1]), Some(body))
            } else {
                match body.rfind("*D") {
                    Some(k) if !body[k..].contains(')') || body[k..].starts_with("*D^(") => (FunctionSpec::parse(&body[..k])?, Some(&body[k + 1..])),
                    _ => (FunctionSpec::parse(body)?, None),
                }
            };
            raw.push((scale, spec, d.map(parse_d).transpose()?));
        }
        let dim = raw.iter().filter_map(|(_, _, d)| d.as_ref().map(Vec::len)).max().unwrap_or(1);
        let coeffs = raw
            .into_iter()
            .map(|(scale, spec, d)| {
                let alpha = match d {
                    Some(v) if v.len() == dim => MultiIndex::new(v),
                    Some(v) => return Err(GevreyError::DimensionMismatch { expected: dim, got: v.len() }),
                    None => MultiIndex::zero(dim),
                };
                Ok(Coefficient { alpha, scale, spec })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coeffs
    }

    /// Indices of the coefficients with `|α| = m`.
    pub fn principal_indices(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&i| self.coeffs[i].alpha.order() == self.order).collect()
    }

    /// Whether every coefficient is a constant polynomial.
    pub fn has_constant_coefficients(&self) -> bool {
        self.coeffs.iter().all(|c| matches!(&c.spec, FunctionSpec::Poly(p) if p.len() <= 1))
    }

    /// Whether `∂^deriv a_coeff` is identically zero, judged from polynomial degrees.
    pub fn derivative_vanishes(&self, coeff: usize, deriv: &MultiIndex) -> bool {
        if deriv.is_zero() {
            return false;
        }
        match &self.coeffs[coeff].spec {
            FunctionSpec::Poly(c) => c.len() <= 1 || deriv.components()[1..].iter().any(|&k| k > 0) || deriv[0] as usize >= c.len(),
            FunctionSpec::MvPoly { terms, .. } => terms.iter().all(|(e, _)| e.iter().zip(deriv.components()).any(|(a, b)| a < b)),
            _ => false,
        }
    }

    /// Jets of every `a_α` at `x`, in coefficient order.
    pub fn coefficient_jets(&self, x: &[f64], order: usize) -> Result<Vec<Jet<Complex64>>> {
        if x.len() != self.dim {
            return Err(GevreyError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        self.coeffs
            .iter()
            .map(|c| {
                let j = c.spec.jet_in::<f64>(x, order)?;
                Ok(j.map(|v| Complex64::new(*v, 0.0)).scale(&c.scale))
            })
            .collect()
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if c.scale == Complex64::new(0.0, 1.0) {
                f.write_str("i*")?;
            } else if c.scale == Complex64::new(0.0, -1.0) {
                f.write_str("-i*")?;
            }
            write!(f, "{}", c.spec)?;
            if !c.alpha.is_zero() {
                if self.dim == 1 {
                    write!(f, "*D^{}", c.alpha[0])?;
                } else {
                    write!(f, "*D^({},{})", c.alpha[0], c.alpha[1])?;
                }
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for DiffOperator {
    type Err = GevreyError;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// `(-i)^n`.
pub(crate) fn minus_i_pow(n: usize) -> Complex64 {
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0)][n % 4]
}

pub(crate) fn xi_pow(xi: &[f64], alpha: &MultiIndex) -> f64 {
    xi.iter().zip(alpha.components()).map(|(x, &a)| x.powi(a as i32)).product()
}

/// `D^p` of a jet, `|p|` orders lower.
pub(crate) fn d_jet(j: &Jet<Complex64>, p: &MultiIndex) -> Result<Jet<Complex64>> {
    Ok(j.derivative_multi(p)?.scale(&minus_i_pow(p.order())))
}

/// `P_m(·, ξ)` as a jet from coefficient jets.
pub(crate) fn principal_jet(p: &DiffOperator, a: &[Jet<Complex64>], xi: &[f64]) -> Jet<Complex64> {
    let mut acc = Jet::constant(Complex64::new(0.0, 0.0), a[0].base(), a[0].order());
    for i in p.principal_indices() {
        acc = acc.add(&a[i].scale(&Complex64::new(xi_pow(xi, &p.coeffs[i].alpha), 0.0)));
    }
    acc
}

/// `P_m(x, ξ) = Σ_{|α|=m} a_α(x) ξ^α`.
pub fn principal_symbol(p: &DiffOperator, x: &[f64], xi: &[f64]) -> Result<Complex64> {
    if xi.len() != p.dim {
        return Err(GevreyError::DimensionMismatch { expected: p.dim, got: xi.len() });
    }
    let a = p.coefficient_jets(x, 0)?;
    Ok(*principal_jet(p, &a, xi).value())
}

/// Axis-aligned box `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(GevreyError::InvalidParameter("box needs lo ≤ hi componentwise".into()));
        }
        Ok(Self { lo, hi })
    }

    /// `n` points per axis including both ends, row-major.
    pub fn grid(&self, n: usize) -> Vec<Vec<f64>> {
        let axis = |a: usize| -> Vec<f64> {
            (0..n).map(|k| if n == 1 { self.lo[a] } else { self.lo[a] + (self.hi[a] - self.lo[a]) * k as f64 / (n - 1) as f64 }).collect()
        };
        match self.lo.len() {
            1 => axis(0).into_iter().map(|x| vec![x]).collect(),
            _ => {
                let (xs, ys) = (axis(0), axis(1));
                xs.iter().flat_map(|&x| ys.iter().map(move |&y| vec![x, y])).collect()
            }
        }
    }
}

/// Unit directions spanning the cone, center and edges included.
pub fn cone_directions(cone: &Cone, samples: usize) -> Vec<Vec<f64>> {
    if cone.direction.len() == 1 {
        return vec![cone.direction.clone()];
    }
    let n = if samples % 2 == 0 { samples + 1 } else { samples.max(1) };
    let t0 = cone.direction[1].atan2(cone.direction[0]);
    (0..n)
        .map(|k| {
            let t = if n == 1 { t0 } else { t0 - cone.half_angle + 2.0 * cone.half_angle * k as f64 / (n - 1) as f64 };
            vec![t.cos(), t.sin()]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Ellipticity {
    Bounds { c1: f64, c2: f64 },
    CharHit { x: Vec<f64>, xi: Vec<f64> },
}

/// Below this `|P_m(x, ω)|` on the unit sphere a sample counts as characteristic.
pub const CHAR_TOLERANCE: f64 = 1e-12;

/// Sampled min and max of `|P_m(x, ω)|` over `K × (cone ∩ S^{d-1})`.
pub fn ellipticity_bounds(p: &DiffOperator, k: &BoxRegion, cone: &Cone, samples: usize) -> Result<Ellipticity> {
    if samples < 16 {
        return Err(GevreyError::InvalidParameter(format!("need at least 16 samples, got {samples}")));
    }
    if k.lo.len() != p.dim || cone.direction.len() != p.dim {
        return Err(GevreyError::DimensionMismatch { expected: p.dim, got: k.lo.len() });
    }
    let dirs = cone_directions(cone, samples);
    let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
    let mut witness = (Vec::new(), Vec::new());
    for x in k.grid(samples) {
        let a = p.coefficient_jets(&x, 0)?;
        for w in &dirs {
            let v = principal_jet(p, &a, w).value().norm();
            if v < c1 {
                c1 = v;
                witness = (x.clone(), w.clone());
            }
            c2 = c2.max(v);
        }
    }
    Ok(if c1 < CHAR_TOLERANCE { Ellipticity::CharHit { x: witness.0, xi: witness.1 } } else { Ellipticity::Bounds { c1, c2 } })
}

/// `D^α(1/P_m)(x, ξ)` through the Faà di Bruno sum over decompositions of `α`.
pub fn inv_pm_derivative(p: &DiffOperator, alpha: &MultiIndex, x: &[f64], xi: &[f64]) -> Result<Complex64> {
    let n = alpha.order();
    let a = p.coefficient_jets(x, n)?;
    let pm = principal_jet(p, &a, xi);
    let y0 = *pm.value();
    if y0.norm() < CHAR_TOLERANCE * xi.iter().map(|v| v * v).sum::<f64>().sqrt().powi(p.order as i32) {
        return Err(GevreyError::Characteristic { x: x.to_vec(), xi: xi.to_vec() });
    }
    // Taylor coefficients of 1/y at y0: (-1)^j / y0^{j+1}
    let mut f = Vec::with_capacity(n + 1);
    let mut c = Complex64::new(1.0, 0.0) / y0;
    for _ in 0..=n {
        f.push(c);
        c = -c / y0;
    }
    let (v, _) = fdb_from_jets(&f, &pm, alpha)?;
    Ok(v * minus_i_pow(n))
}

/// One summand `scale · ∂^deriv a_{coeff}` of a transpose coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransposeTerm {
    pub coeff: usize,
    pub deriv: MultiIndex,
    pub scale: Complex64,
}

/// `P^T(x, D) = Σ b_β(x) D^β` with each `b_β` a combination of derivatives
/// of the coefficients of `P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transpose {
    pub op: DiffOperator,
    /// `(β, terms of b_β)`, sorted by `β`.
    pub coeffs: Vec<(MultiIndex, Vec<TransposeTerm>)>,
}

/// `b_β = Σ_{α ≥ β} (-1)^{|α|} C(α, β) D^{α-β} a_α`, from `(-D)^α (a_α v)`.
pub fn transpose(p: &DiffOperator) -> Transpose {
    let mut out: Vec<(MultiIndex, Vec<TransposeTerm>)> = Vec::new();
    for beta in MultiIndex::up_to_order(p.dim, p.order) {
        let mut terms = Vec::new();
        for (i, c) in p.coeffs.iter().enumerate() {
            if let Some(diff) = c.alpha.checked_sub(&beta).filter(|diff| !p.derivative_vanishes(i, diff)) {
                let sign = if c.alpha.order() % 2 == 0 { 1.0 } else { -1.0 };
                let bin = c.alpha.binomial(&beta).to_f64().unwrap_or(f64::NAN);
                terms.push(TransposeTerm {
                    coeff: i,
                    scale: minus_i_pow(diff.order()) * sign * bin,
                    deriv: diff,
                });
            }
        }
        if !terms.is_empty() {
            out.push((beta, terms));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Transpose { op: p.clone(), coeffs: out }
}

impl Transpose {
    /// Jets of the `b_β` at the base of `a`, `m` orders below the input jets.
    pub fn coefficient_jets(&self, a: &[Jet<Complex64>]) -> Result<Vec<(MultiIndex, Jet<Complex64>)>> {
        let m = self.op.order;
        let order = a[0].order().checked_sub(m).ok_or(GevreyError::OrderExceedsTruncation { order: m, truncation: a[0].order() })?;
        self.coeffs
            .iter()
            .map(|(beta, terms)| {
                let mut acc = Jet::constant(Complex64::new(0.0, 0.0), a[0].base(), order);
                for t in terms {
                    let d = a[t.coeff].derivative_multi(&t.deriv)?.truncate(order);
                    acc = acc.add(&d.scale(&t.scale));
                }
                Ok((beta.clone(), acc))
            })
            .collect()
    }

    /// `P^T v` at the base point of the jet `v`, which needs order `≥ m`.
    pub fn apply_at(&self, v: &Jet<Complex64>) -> Result<Complex64> {
        let m = self.op.order;
        let x: Vec<f64> = v.base().iter().map(|z| z.re).collect();
        let a = self.op.coefficient_jets(&x, m)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (beta, b) in self.coefficient_jets(&a)? {
            acc += b.value() * d_jet(v, &beta)?.value();
        }
        Ok(acc)
    }
}

/// `P v` at the base point of the jet `v`.
pub fn apply_operator_at(p: &DiffOperator, v: &Jet<Complex64>) -> Result<Complex64> {
    let x: Vec<f64> = v.base().iter().map(|z| z.re).collect();
    let a = p.coefficient_jets(&x, 0)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (c, aj) in p.coeffs.iter().zip(&a) {
        acc += aj.value() * d_jet(v, &c.alpha)?.value();
    }
    Ok(acc)
}

/// A catalog operator with a compact set and cone off `Char(P)`.
#[derive(Clone, Debug)]
pub struct CatalogOperator {
    pub name: &'static str,
    pub op: DiffOperator,
    pub region: BoxRegion,
    pub cone: Cone,
}

const CATALOG: &[(&str, &str, &[f64], &[f64], &[f64], f64)] = &[
    ("d", "D", &[-1.0], &[1.0], &[1.0], 0.5),
    ("d-plus-sin", "D + sin", &[-1.0], &[1.0], &[1.0], 0.5),
    ("d2", "D^2", &[-1.0], &[1.0], &[1.0], 0.5),
    ("variable-d2", "poly:1,0,1*D^2", &[-1.0], &[1.0], &[-1.0], 0.5),
    ("d2-sin-d-1", "D^2 + sin*D + poly:1", &[-1.0], &[1.0], &[1.0], 0.5),
    ("cubic", "poly:2,1*D^3 + cos*D + poly:1", &[-1.0], &[1.0], &[1.0], 0.5),
    ("kink", "poly:0,1*D + i*poly:1", &[0.25], &[1.0], &[1.0], 0.5),
    ("laplacian", "D^(2,0) + D^(0,2)", &[-1.0, -1.0], &[1.0, 1.0], &[1.0, 0.0], 0.5),
    ("wave", "D^(2,0) + poly:-1*D^(0,2)", &[-1.0, -1.0], &[1.0, 1.0], &[1.0, 0.0], std::f64::consts::FRAC_PI_8),
    ("variable-2d", "D^(2,0) + mvpoly:0.0:1,0.2:1*D^(0,2) + mvpoly:1.0:1*D^(1,0)", &[-1.0, -1.0], &[1.0, 1.0], &[0.6, 0.8], 0.5),
];

/// Lower end of the catalog cones in `|ξ|`.
pub const CATALOG_XI_MIN: f64 = 100.0;

pub fn operator_catalog() -> Vec<CatalogOperator> {
    CATALOG
        .iter()
        .map(|&(name, op, lo, hi, dir, half)| CatalogOperator {
            name,
            op: DiffOperator::parse(op).expect("catalog operator"),
            region: BoxRegion::new(lo.to_vec(), hi.to_vec()).expect("catalog box"),
            cone: Cone::new(dir, half, CATALOG_XI_MIN).expect("catalog cone"),
        })
        .collect()
}

pub fn catalog_operator(name: &str) -> Result<CatalogOperator> {
    operator_catalog()
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| GevreyError::Parse(format!("unknown catalog operator '{name}'")))
}

/// `count` frequencies in the cone: directions sweep the cone and radii grow
/// geometrically from `xi_min` to `8 xi_min`.
pub fn xi_samples(cone: &Cone, count: usize) -> Vec<Vec<f64>> {
    let d = cone.direction.len();
    (0..count)
        .map(|k| {
            let f = if count > 1 { k as f64 / (count - 1) as f64 } else { 0.0 };
            let r = cone.xi_min * 8f64.powf(f);
            let dir = if d == 1 {
                cone.direction.clone()
            } else {
                let t0 = cone.direction[1].atan2(cone.direction[0]);
                // golden-ratio stride decorrelates angle from radius
                let g = (k as f64 * 0.618_033_988_749_895).fract();
                let t = t0 + cone.half_angle * (2.0 * g - 1.0);
                vec![t.cos(), t.sin()]
            };
            dir.into_iter().map(|v| v * r).collect()
        })
        .collect()
}
