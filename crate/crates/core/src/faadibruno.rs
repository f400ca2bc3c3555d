//! Generalized Faà di Bruno evaluation and the quantitative superposition
//! bounds for the classes `E_{τ,σ}`.

use serde::{Deserialize, Serialize};

use crate::error::{GevreyError, Result};
use crate::jets::{FunctionSpec, Jet, Number, Scalar};
use crate::multiindex::{for_each_decomposition, integer_partitions, Decomposition, MultiIndex};
use crate::numerics::{log_factorial, log_sum_exp, rational_to_f64, BigRat, LogMagnitude};
use crate::sequences::DefiningSequence;

/// Largest `|α|` accepted by [`fdb_derivative`] in dimension `d`.
pub fn order_limit(dim: usize) -> Option<usize> {
    match dim {
        1 | 2 => Some(8),
        3 => Some(6),
        _ => None,
    }
}

fn check_limit(alpha: &MultiIndex) -> Result<()> {
    let d = alpha.dim();
    match order_limit(d) {
        Some(limit) if alpha.order() <= limit => Ok(()),
        limit => Err(GevreyError::OrderLimit { order: alpha.order(), limit: limit.unwrap_or(0), dim: d }),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdbTerm {
    pub decomposition: Decomposition,
    /// Contribution to `∂^α(f∘g)`, including the `α!` prefactor.
    pub value: Number,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdbValue {
    pub value: Number,
    pub terms: Vec<FdbTerm>,
}

/// `∂^α(f∘g)` from the Taylor coefficients of `f` at `g(x)` and the jet of `g`.
///
/// `f_coeffs[n] = f^{(n)}(g(x))/n!` for `n ≤ |α|`. Terms are summed in the
/// canonical decomposition order.
pub fn fdb_from_jets<T: Scalar>(f_coeffs: &[T], g: &Jet<T>, alpha: &MultiIndex) -> Result<(T, Vec<(Decomposition, T)>)> {
    let n = alpha.order();
    if f_coeffs.len() <= n || g.order() < n {
        return Err(GevreyError::OrderExceedsTruncation { order: n, truncation: g.order().min(f_coeffs.len().saturating_sub(1)) });
    }
    if alpha.is_zero() {
        return Ok((f_coeffs[0].clone(), vec![]));
    }
    let alpha_fact = scalar_factorial::<T>(&alpha.factorial_parts());
    let mut total = T::zero();
    let mut terms = Vec::new();
    for_each_decomposition(alpha, |d| {
        let m = d.total_multiplicity() as usize;
        // f^{(m)} = m! f_m
        let mut t = f_coeffs[m].clone() * scalar_factorial::<T>(&[m as u64]);
        for (p, &mk) in d.parts.iter().zip(&d.multiplicities) {
            let gp = g.coeff(p);
            let mut pw = T::one();
            for _ in 0..mk {
                pw = pw * gp.clone();
            }
            t = t * pw / scalar_factorial::<T>(&[mk as u64]);
        }
        t = t * alpha_fact.clone();
        total = std::mem::replace(&mut total, T::zero()) + t.clone();
        terms.push((d.clone(), t));
    })?;
    Ok((total, terms))
}

fn scalar_factorial<T: Scalar>(ns: &[u64]) -> T {
    let mut acc = T::one();
    for &n in ns {
        for k in 2..=n {
            acc = acc * T::from_i64(k as i64);
        }
    }
    acc
}

/// `∂^α(f∘g)(at)` by the generalized Faà di Bruno sum.
///
/// Exact on rational data; falls back to `f64` when a transcendental value
/// is needed. For `α = 0` the value is `f(g(at))`.
pub fn fdb_derivative(f: &FunctionSpec, g: &FunctionSpec, alpha: &MultiIndex, at: &[BigRat]) -> Result<FdbValue> {
    if let Some(d) = f.arity()? {
        if d != 1 {
            return Err(GevreyError::DimensionMismatch { expected: 1, got: d });
        }
    }
    if alpha.dim() != at.len() {
        return Err(GevreyError::DimensionMismatch { expected: at.len(), got: alpha.dim() });
    }
    check_limit(alpha)?;
    let n = alpha.order();
    match fdb_in::<BigRat>(f, g, alpha, at, n) {
        Ok((v, terms)) => Ok(FdbValue {
            value: Number::Exact(v),
            terms: terms.into_iter().map(|(d, t)| FdbTerm { decomposition: d, value: Number::Exact(t) }).collect(),
        }),
        Err(GevreyError::Inexact(_)) => {
            let at: Vec<f64> = at.iter().map(rational_to_f64).collect();
            let (v, terms) = fdb_in::<f64>(f, g, alpha, &at, n)?;
            Ok(FdbValue {
                value: Number::Float(v),
                terms: terms.into_iter().map(|(d, t)| FdbTerm { decomposition: d, value: Number::Float(t) }).collect(),
            })
        }
        Err(e) => Err(e),
    }
}

type FdbParts<T> = (T, Vec<(Decomposition, T)>);

fn fdb_in<T: Scalar>(f: &FunctionSpec, g: &FunctionSpec, alpha: &MultiIndex, at: &[T], n: usize) -> Result<FdbParts<T>> {
    let gj = g.jet_in::<T>(at, n)?;
    let fj = f.jet_in::<T>(&[gj.value().clone()], n)?;
    fdb_from_jets(fj.coeffs(), &gj, alpha)
}

/// `ln` of `(M_j/j!) Π (M_{k_i}/k_i!) / (M_k/k!)` with `k = Σ k_i`.
pub fn lemma23_ratio(seq: &DefiningSequence, j: u64, parts: &[u64]) -> Result<LogMagnitude> {
    if j == 0 || parts.len() as u64 != j || parts.contains(&0) {
        return Err(GevreyError::InvalidParameter(format!(
            "need j >= 1 positive parts, got j = {j} and {} parts",
            parts.len()
        )));
    }
    let k: u64 = parts.iter().sum();
    let num = seq.log_m_over_factorial(j) + parts.iter().map(|&p| seq.log_m_over_factorial(p)).sum::<f64>();
    Ok(LogMagnitude::from_log(num - seq.log_m_over_factorial(k)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma23Fit {
    pub tau: f64,
    pub sigma: f64,
    pub k_max: u64,
    /// Minimal constant on the searched range.
    pub c: f64,
    pub log_c: f64,
    pub witness_k: u64,
    pub witness_parts: Vec<u64>,
    pub witness_log_ratio: f64,
    /// `(k, ln C_k)` where `C_k` is the constant needed at that `k` alone.
    pub per_k: Vec<(u64, f64)>,
}

/// Minimal `C` with `ratio ≤ C^{k^σ}` over every partition of every `k ≤ k_max`.
pub fn lemma23_constant_search(seq: &DefiningSequence, k_max: u64) -> Result<Lemma23Fit> {
    if k_max < 2 {
        return Err(GevreyError::InvalidParameter("k_max must be >= 2".into()));
    }
    let mut best = (f64::NEG_INFINITY, 0u64, vec![], 0.0);
    let mut per_k = Vec::new();
    for k in 1..=k_max {
        let mut best_k = f64::NEG_INFINITY;
        for parts in integer_partitions(k as usize) {
            let parts: Vec<u64> = parts.into_iter().map(|p| p as u64).collect();
            let r = lemma23_ratio(seq, parts.len() as u64, &parts)?.log();
            let need = r / (k as f64).powf(seq.sigma);
            best_k = best_k.max(need);
            if need > best.0 {
                best = (need, k, parts, r);
            }
        }
        per_k.push((k, best_k));
    }
    let log_c = best.0.max(0.0);
    Ok(Lemma23Fit {
        tau: seq.tau,
        sigma: seq.sigma,
        k_max,
        c: log_c.exp(),
        log_c,
        witness_k: best.1,
        witness_parts: best.2,
        witness_log_ratio: best.3,
        per_k,
    })
}

/// Seminorm data of the composition hypothesis: `|∂^p g| ≤ A h^{|p|^σ} M_{|p|}`
/// and `|f^{(m)}| ≤ A h'^{m^σ} M_m` on the relevant compact sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionBoundInput {
    pub tau: f64,
    pub sigma: f64,
    pub h: f64,
    pub h_prime: f64,
    pub a: f64,
}

impl CompositionBoundInput {
    pub fn new(tau: f64, sigma: f64, h: f64, h_prime: f64, a: f64) -> Result<Self> {
        let inp = Self { tau, sigma, h, h_prime, a };
        inp.validate()?;
        Ok(inp)
    }

    pub fn validate(&self) -> Result<DefiningSequence> {
        for (name, v) in [("h", self.h), ("h_prime", self.h_prime), ("A", self.a)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(GevreyError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.sigma == 1.0 {
            if self.tau < 1.0 {
                return Err(GevreyError::InvalidParameter("sigma = 1 requires tau >= 1".into()));
            }
            return DefiningSequence::with_boundary(self.tau, self.sigma);
        }
        DefiningSequence::new(self.tau, self.sigma)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionBound {
    pub log_bound: LogMagnitude,
    /// `ln C₂` with `C₂ = max(A,1) · C₁² · C_L`.
    pub log_c2: f64,
    /// `ln C₁`, `C₁ = max(h, h', 1)`.
    pub log_c1: f64,
    /// `ln C_L`, the partition-ratio constant fitted over `k ≤ |α|`.
    pub log_c_lemma: f64,
    /// `ln Σ_π m!/(m_1!···m_s!)` over the decompositions of `α`.
    pub log_multiplicity_sum: f64,
}

/// Certified bound `C₂^{|α|^σ+1} |α|^{τ|α|^σ} Σ_π m!/Π m_k!` on `|∂^α(f∘g)|`.
///
/// The multiplicity sum runs over the multi-index decompositions of `α`;
/// it equals `2^{|α|-1}` in one dimension and exceeds it for `d > 1`.
pub fn superposition_log_bound(inp: &CompositionBoundInput, alpha: &MultiIndex) -> Result<SuperpositionBound> {
    let seq = inp.validate()?;
    let n = alpha.order();
    if n == 0 {
        return Err(GevreyError::ZeroMultiIndex);
    }
    let log_c1 = inp.h.max(inp.h_prime).max(1.0).ln();
    let log_c_lemma = if n >= 2 { lemma23_constant_search(&seq, n as u64)?.log_c } else { 0.0 };
    let log_c2 = inp.a.max(1.0).ln() + 2.0 * log_c1 + log_c_lemma;
    let log_multiplicity_sum = log_multiplicity_sum(alpha)?;
    let nf = n as f64;
    let e = nf.powf(inp.sigma);
    let log_bound = log_c2 * (e + 1.0) + inp.tau * e * nf.ln() + log_multiplicity_sum;
    Ok(SuperpositionBound { log_bound: LogMagnitude::from_log(log_bound), log_c2, log_c1, log_c_lemma, log_multiplicity_sum })
}

/// `ln Σ_π m!/(m_1!···m_s!)`.
pub fn log_multiplicity_sum(alpha: &MultiIndex) -> Result<f64> {
    let mut logs = Vec::new();
    for_each_decomposition(alpha, |d| {
        let m = d.total_multiplicity();
        let l = log_factorial(m as u64).log() - d.multiplicities.iter().map(|&k| log_factorial(k as u64).log()).sum::<f64>();
        logs.push(l);
    })?;
    Ok(log_sum_exp(&logs))
}

/// Term-by-term bound: `α! Σ_π F_m Π (1/m_k!) (A h^{|p_k|^σ} M_{|p_k|} / p_k!)^{m_k}`
/// with `ln F_m` supplied by `log_outer(m)`.
pub fn chain_log_bound(
    seq: &DefiningSequence,
    a: f64,
    h: f64,
    alpha: &MultiIndex,
    log_outer: impl Fn(u64) -> f64,
) -> Result<LogMagnitude> {
    if alpha.is_zero() {
        return Ok(LogMagnitude::from_log(log_outer(0)));
    }
    let log_alpha_fact: f64 = alpha.components().iter().map(|&c| log_factorial(c as u64).log()).sum();
    let mut logs = Vec::new();
    for_each_decomposition(alpha, |d| {
        let mut t = log_outer(d.total_multiplicity() as u64);
        for (p, &mk) in d.parts.iter().zip(&d.multiplicities) {
            let np = p.order() as u64;
            let pf: f64 = p.components().iter().map(|&c| log_factorial(c as u64).log()).sum();
            let gp = a.ln() + h.ln() * (np as f64).powf(seq.sigma) + seq.log_m(np) - pf;
            t += mk as f64 * gp - log_factorial(mk as u64).log();
        }
        logs.push(t);
    })?;
    Ok(LogMagnitude::from_log(log_alpha_fact + log_sum_exp(&logs)))
}

/// Certified bound on `|∂^α(1/φ)|` given `|∂^p φ| ≤ A h^{|p|^σ} M_{|p|}` and `|φ| ≥ min_abs`.
///
/// The outer function `y ↦ 1/y` contributes `m!/min_abs^{m+1}`.
pub fn reciprocal_log_bound(inp: &CompositionBoundInput, alpha: &MultiIndex, min_abs: f64) -> Result<LogMagnitude> {
    if !(min_abs > 0.0) || !min_abs.is_finite() {
        return Err(GevreyError::InvalidParameter(format!("min_abs must be positive, got {min_abs}")));
    }
    let seq = inp.validate()?;
    let lm = min_abs.ln();
    chain_log_bound(&seq, inp.a, inp.h, alpha, |m| log_factorial(m).log() - (m as f64 + 1.0) * lm)
}

impl MultiIndex {
    /// Components as `u64`, for factorial products.
    pub(crate) fn factorial_parts(&self) -> Vec<u64> {
        self.components().iter().map(|&c| c as u64).collect()
    }
}

#[cfg(test)]
mod tests;
