use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::operator::{d_jet, minus_i_pow, principal_jet, transpose, xi_pow, DiffOperator, Transpose};
use crate::error::{GevreyError, Result};
use crate::jets::Jet;
use crate::multiindex::{enumerate_decompositions, MultiIndex};

/// `∂^deriv a_coeff`, with `coeff` indexing `DiffOperator::coefficients`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub coeff: usize,
    pub deriv: MultiIndex,
}

/// `scalar · Π atoms · ξ^xi / P_m^pm_power`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolTerm {
    pub scalar: Complex64,
    pub atoms: Vec<Atom>,
    pub xi: MultiIndex,
    pub pm_power: u32,
}

impl SymbolTerm {
    /// Homogeneity degree in `ξ`.
    pub fn degree(&self, m: usize) -> i64 {
        self.xi.order() as i64 - (m as i64) * self.pm_power as i64
    }

    fn times(&self, other: &SymbolTerm) -> SymbolTerm {
        let mut atoms = [self.atoms.clone(), other.atoms.clone()].concat();
        atoms.sort();
        let xi = MultiIndex::new(self.xi.components().iter().zip(other.xi.components()).map(|(a, b)| a + b).collect());
        SymbolTerm { scalar: self.scalar * other.scalar, atoms, xi, pm_power: self.pm_power + other.pm_power }
    }

    fn same_monomial(&self, other: &SymbolTerm) -> bool {
        self.atoms == other.atoms && self.xi == other.xi && self.pm_power == other.pm_power
    }
}

/// Finite sum of `SymbolTerm`s with like terms merged.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymbolSum {
    pub terms: Vec<SymbolTerm>,
}

impl SymbolSum {
    fn push(&mut self, t: SymbolTerm) {
        if let Some(s) = self.terms.iter_mut().find(|s| s.same_monomial(&t)) {
            s.scalar += t.scalar;
        } else {
            self.terms.push(t);
        }
    }

    fn extend(&mut self, other: SymbolSum) {
        for t in other.terms {
            self.push(t);
        }
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|t| t.scalar.norm() > 1e-14);
        self.terms.sort_by(|a, b| (&a.atoms, &a.xi, a.pm_power).partial_cmp(&(&b.atoms, &b.xi, b.pm_power)).expect("total order"));
        self
    }

    fn times(&self, other: &SymbolSum) -> SymbolSum {
        let mut out = SymbolSum::default();
        for a in &self.terms {
            for b in &other.terms {
                out.push(a.times(b));
            }
        }
        out
    }

    fn scaled(mut self, c: Complex64) -> Self {
        for t in &mut self.terms {
            t.scalar *= c;
        }
        self
    }

    /// Distinct homogeneity degrees present.
    pub fn degrees(&self, m: usize) -> Vec<i64> {
        let mut d: Vec<i64> = self.terms.iter().map(|t| t.degree(m)).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value at `(x, ξ)`; `a` holds coefficient jets of order at least the
    /// largest atom derivative.
    pub fn eval(&self, a: &[Jet<Complex64>], pm: Complex64, xi: &[f64]) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let mut v = t.scalar * xi_pow(xi, &t.xi) / pm.powu(t.pm_power);
            for at in &t.atoms {
                v *= a[at.coeff].partial(&at.deriv)?;
            }
            acc += v;
        }
        Ok(acc)
    }
}

fn atom_sum(scalar: Complex64, coeff: usize, deriv: MultiIndex, xi: MultiIndex) -> SymbolTerm {
    SymbolTerm { scalar, atoms: vec![Atom { coeff, deriv }], xi, pm_power: 0 }
}

fn to_f64(n: &crate::numerics::BigNat) -> f64 {
    n.to_f64().unwrap_or(f64::NAN)
}

/// `D^γ(1/P_m)` summed over decompositions of `γ`.
pub fn inv_pm_symbol(p: &DiffOperator, gamma: &MultiIndex) -> Result<SymbolSum> {
    let d = p.dim();
    let one = SymbolTerm { scalar: Complex64::new(1.0, 0.0), atoms: vec![], xi: MultiIndex::zero(d), pm_power: 1 };
    if gamma.is_zero() {
        return Ok(SymbolSum { terms: vec![one] });
    }
    let principal = p.principal_indices();
    // D^q P_m = (-i)^{|q|} Σ ∂^q a_i ξ^{α_i}
    let dpm = |q: &MultiIndex| SymbolSum {
        terms: principal
            .iter()
            .filter(|&&i| !p.derivative_vanishes(i, q))
            .map(|&i| atom_sum(minus_i_pow(q.order()), i, q.clone(), p.coefficients()[i].alpha.clone()))
            .collect(),
    };
    let gamma_fact = to_f64(&gamma.factorial());
    let mut out = SymbolSum::default();
    for dec in enumerate_decompositions(gamma)? {
        let jtot = dec.total_multiplicity();
        let sign = if jtot % 2 == 0 { 1.0 } else { -1.0 };
        let mut term = SymbolSum {
            terms: vec![SymbolTerm {
                scalar: Complex64::new(gamma_fact * sign * to_f64(&crate::numerics::factorial(jtot as u64)), 0.0),
                atoms: vec![],
                xi: MultiIndex::zero(d),
                pm_power: jtot + 1,
            }],
        };
        for (part, &mult) in dec.parts.iter().zip(&dec.multiplicities) {
            let base = dpm(part).scaled(Complex64::new(1.0 / to_f64(&part.factorial()), 0.0));
            for _ in 0..mult {
                term = term.times(&base);
            }
            term = term.scaled(Complex64::new(1.0 / to_f64(&crate::numerics::factorial(mult as u64)), 0.0));
        }
        out.extend(term);
    }
    Ok(out.prune())
}

/// `R_j = Σ_{|δ| ≤ j} c_{δ,j} D^δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionOperator {
    pub j: usize,
    /// `(δ, c_{δ,j})`, sorted by `δ`, empty symbols dropped.
    pub coeffs: Vec<(MultiIndex, SymbolSum)>,
}

/// Reduction operators `R_1..R_m` together with the transpose they came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub op: DiffOperator,
    pub transpose: Transpose,
    pub operators: Vec<ReductionOperator>,
}

impl Reduction {
    pub fn m(&self) -> usize {
        self.op.order()
    }

    pub fn get(&self, j: usize) -> &ReductionOperator {
        &self.operators[j - 1]
    }
}

/// Expands `e^{ixξ} P^T (w e^{-ixξ}/P_m)` and sorts the terms by
/// homogeneity: the degree-0 part must be the identity, and `-R_j` collects
/// degree `-j`.
pub fn build_reduction_operators(p: &DiffOperator) -> Result<Reduction> {
    let m = p.order();
    let d = p.dim();
    let tr = transpose(p);
    let mut identity = SymbolSum::default();
    let mut parts: Vec<Vec<(MultiIndex, SymbolSum)>> = vec![Vec::new(); m];
    let mut inv_cache: Vec<(MultiIndex, SymbolSum)> = Vec::new();
    for (alpha, b_terms) in &tr.coeffs {
        let b = SymbolSum {
            terms: b_terms.iter().map(|t| atom_sum(t.scale, t.coeff, t.deriv.clone(), MultiIndex::zero(d))).collect(),
        };
        for beta in alpha.lower_set() {
            let amb = alpha.checked_sub(&beta).expect("β ≤ α");
            let j = m + beta.order() - alpha.order();
            let sign = if amb.order() % 2 == 0 { 1.0 } else { -1.0 };
            let xi_part = SymbolTerm { scalar: Complex64::new(sign * to_f64(&alpha.binomial(&beta)), 0.0), atoms: vec![], xi: amb, pm_power: 0 };
            for gamma in beta.lower_set() {
                let delta = beta.checked_sub(&gamma).expect("γ ≤ β");
                let inv = match inv_cache.iter().find(|(g, _)| *g == gamma) {
                    Some((_, s)) => s.clone(),
                    None => {
                        let s = inv_pm_symbol(p, &gamma)?;
                        inv_cache.push((gamma.clone(), s.clone()));
                        s
                    }
                };
                let c = to_f64(&beta.binomial(&gamma));
                let term = b.times(&SymbolSum { terms: vec![xi_part.clone()] }).times(&inv).scaled(Complex64::new(c, 0.0));
                if j == 0 {
                    identity.extend(term);
                } else {
                    let slot = &mut parts[j - 1];
                    let neg = term.scaled(Complex64::new(-1.0, 0.0));
                    match slot.iter_mut().find(|(dl, _)| *dl == delta) {
                        Some((_, s)) => s.extend(neg),
                        None => slot.push((delta, neg)),
                    }
                }
            }
        }
    }
    check_identity(p, identity.prune())?;
    let mut operators = Vec::with_capacity(m);
    for (k, slot) in parts.into_iter().enumerate() {
        let j = k + 1;
        let mut coeffs: Vec<(MultiIndex, SymbolSum)> = slot.into_iter().map(|(dl, s)| (dl, s.prune())).filter(|(_, s)| !s.is_empty()).collect();
        coeffs.sort_by(|a, b| a.0.cmp(&b.0));
        for (dl, s) in &coeffs {
            if dl.order() > j || s.degrees(m) != vec![-(j as i64)] {
                return Err(GevreyError::Consistency(format!("R_{j} term D^{dl} has degrees {:?}", s.degrees(m))));
            }
        }
        operators.push(ReductionOperator { j, coeffs });
    }
    Ok(Reduction { op: p.clone(), transpose: tr, operators })
}

/// The degree-0 part must read `Σ_{|α|=m} a_α ξ^α / P_m`.
fn check_identity(p: &DiffOperator, s: SymbolSum) -> Result<()> {
    let mut expected: Vec<SymbolTerm> = p
        .principal_indices()
        .into_iter()
        .map(|i| SymbolTerm {
            scalar: Complex64::new(1.0, 0.0),
            atoms: vec![Atom { coeff: i, deriv: MultiIndex::zero(p.dim()) }],
            xi: p.coefficients()[i].alpha.clone(),
            pm_power: 1,
        })
        .collect();
    expected.sort_by(|a, b| (&a.atoms, &a.xi).partial_cmp(&(&b.atoms, &b.xi)).expect("total order"));
    let ok = s.terms.len() == expected.len()
        && s.terms.iter().zip(&expected).all(|(a, b)| a.same_monomial(b) && (a.scalar - b.scalar).norm() < 1e-12);
    if ok {
        Ok(())
    } else {
        Err(GevreyError::Consistency(format!("degree-0 part is not the identity: {} terms", s.terms.len())))
    }
}

/// Jets of every `c_{δ,j}` in `x` at a fixed `ξ`.
#[derive(Clone, Debug)]
pub struct ReductionJets {
    pub xi: Vec<f64>,
    /// `per_j[j-1] = [(δ, c_{δ,j} jet)]`.
    pub per_j: Vec<Vec<(MultiIndex, Jet<Complex64>)>>,
}

/// Numeric `c_{δ,j}` jets of the given order, built from coefficient jets
/// without going through the symbolic expansion.
pub fn reduction_jets(red: &Reduction, x: &[f64], xi: &[f64], order: usize) -> Result<ReductionJets> {
    let p = &red.op;
    let m = p.order();
    let a = p.coefficient_jets(x, order + m)?;
    let pm = principal_jet(p, &a, xi);
    if pm.value().norm() < super::operator::CHAR_TOLERANCE * xi.iter().map(|v| v * v).sum::<f64>().sqrt().powi(m as i32) {
        return Err(GevreyError::Characteristic { x: x.to_vec(), xi: xi.to_vec() });
    }
    let inv = pm.recip()?;
    let b = red.transpose.coefficient_jets(&a)?;
    let mut per_j: Vec<Vec<(MultiIndex, Jet<Complex64>)>> = red
        .operators
        .iter()
        .map(|r| r.coeffs.iter().map(|(dl, _)| (dl.clone(), Jet::constant(Complex64::new(0.0, 0.0), x_c(x).as_slice(), order))).collect())
        .collect();
    for (alpha, b_jet) in &b {
        for beta in alpha.lower_set() {
            let amb = alpha.checked_sub(&beta).expect("β ≤ α");
            let j = m + beta.order() - alpha.order();
            if j == 0 {
                continue;
            }
            let sign = if amb.order() % 2 == 0 { 1.0 } else { -1.0 };
            let xi_f = sign * to_f64(&alpha.binomial(&beta)) * xi_pow(xi, &amb);
            for gamma in beta.lower_set() {
                let delta = beta.checked_sub(&gamma).expect("γ ≤ β");
                let Some(slot) = per_j[j - 1].iter_mut().find(|(dl, _)| *dl == delta) else {
                    continue;
                };
                let dinv = d_jet(&inv, &gamma)?.truncate(order);
                let c = -xi_f * to_f64(&beta.binomial(&gamma));
                slot.1 = slot.1.add(&b_jet.mul(&dinv).scale(&Complex64::new(c, 0.0)));
            }
        }
    }
    Ok(ReductionJets { xi: xi.to_vec(), per_j })
}

fn x_c(x: &[f64]) -> Vec<Complex64> {
    x.iter().map(|&v| Complex64::new(v, 0.0)).collect()
}

impl ReductionJets {
    /// `R_j f`, `j` orders below `f`.
    pub fn apply(&self, j: usize, f: &Jet<Complex64>) -> Result<Jet<Complex64>> {
        let out_order = f.order().checked_sub(j).ok_or(GevreyError::OrderExceedsTruncation { order: j, truncation: f.order() })?;
        let mut acc = Jet::constant(Complex64::new(0.0, 0.0), f.base(), out_order);
        for (delta, c) in &self.per_j[j - 1] {
            acc.add_product(c, &d_jet(f, delta)?);
        }
        Ok(acc)
    }

    /// `[R_1 f, ..., R_m f]`, sharing the derivatives of `f`.
    pub fn apply_each(&self, f: &Jet<Complex64>) -> Result<Vec<Jet<Complex64>>> {
        let mut cache: Vec<(&MultiIndex, Jet<Complex64>)> = Vec::new();
        let mut out = Vec::with_capacity(self.per_j.len());
        for (k, slots) in self.per_j.iter().enumerate() {
            let j = k + 1;
            let o = f.order().checked_sub(j).ok_or(GevreyError::OrderExceedsTruncation { order: j, truncation: f.order() })?;
            let mut acc = Jet::constant(Complex64::new(0.0, 0.0), f.base(), o);
            for (delta, c) in slots {
                let pos = match cache.iter().position(|(d, _)| *d == delta) {
                    Some(p) => p,
                    None => {
                        cache.push((delta, d_jet(f, delta)?));
                        cache.len() - 1
                    }
                };
                acc.add_product(c, &cache[pos].1);
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// `R f = Σ_j R_j f`, `m` orders below `f`.
    pub fn apply_full(&self, f: &Jet<Complex64>) -> Result<Jet<Complex64>> {
        let m = self.per_j.len();
        let out = f.order().checked_sub(m).ok_or(GevreyError::OrderExceedsTruncation { order: m, truncation: f.order() })?;
        let mut acc = Jet::constant(Complex64::new(0.0, 0.0), f.base(), out);
        for j in 1..=m {
            acc = acc.add(&self.apply(j, f)?.truncate(out));
        }
        Ok(acc)
    }
}
