//! Multi-indices and their decompositions into parts with multiplicities.
//!
//! A decomposition of `α` is `α = m_1 p_1 + ... + m_s p_s` with distinct
//! nonzero parts `p_1 < ... < p_s` (lexicographic) and positive
//! multiplicities. These are exactly the index sets of the multivariate
//! Faà di Bruno sum.

use std::fmt;
use std::ops::{Add, Index, Sub};

use num_bigint::BigUint;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GevreyError, Result};
use crate::numerics::{factorial, multinomial, BigNat};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        assert!(!components.is_empty(), "multi-index needs d >= 1");
        Self(components)
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![0; dim])
    }

    /// The unit multi-index `e_i`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α|`
    pub fn order(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.le(self) {
            return None;
        }
        Some(MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, k: u32) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| a * k).collect())
    }

    /// `α! = α_1! ··· α_d!`
    pub fn factorial(&self) -> BigNat {
        self.0.iter().map(|&a| factorial(a as u64)).product()
    }

    /// `binom(α, β) = Π binom(α_i, β_i)`.
    pub fn binomial(&self, beta: &MultiIndex) -> BigNat {
        self.0
            .iter()
            .zip(&beta.0)
            .map(|(&a, &b)| crate::numerics::binomial(a as u64, b as u64))
            .product()
    }

    /// All `β ≤ α` in lexicographic order.
    pub fn lower_set(&self) -> Vec<MultiIndex> {
        let mut out = vec![];
        let mut cur = vec![0u32; self.dim()];
        loop {
            out.push(MultiIndex(cur.clone()));
            let mut i = self.dim();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < self.0[i] {
                    cur[i] += 1;
                    for c in cur.iter_mut().skip(i + 1) {
                        *c = 0;
                    }
                    break;
                }
            }
        }
    }

    /// All multi-indices of dimension `dim` with `|β| == n`, lexicographic.
    pub fn of_order(dim: usize, n: usize) -> Vec<MultiIndex> {
        fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == dim {
                prefix.push(left);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in 0..=left {
                prefix.push(a);
                rec(dim, left - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = vec![];
        rec(dim, n as u32, &mut Vec::with_capacity(dim), &mut out);
        out
    }

    /// All multi-indices with `|β| ≤ n`, grouped by order.
    pub fn up_to_order(dim: usize, n: usize) -> Vec<MultiIndex> {
        (0..=n).flat_map(|k| Self::of_order(dim, k)).collect()
    }

    pub fn parse(s: &str) -> Result<MultiIndex> {
        let parts: std::result::Result<Vec<u32>, _> =
            s.split(',').map(|t| t.trim().parse::<u32>()).collect();
        match parts {
            Ok(v) if !v.is_empty() => Ok(MultiIndex(v)),
            _ => Err(GevreyError::Parse(format!("bad multi-index '{s}'"))),
        }
    }
}

impl Index<usize> for MultiIndex {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), rhs.dim());
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &MultiIndex {
    type Output = MultiIndex;
    fn sub(self, rhs: &MultiIndex) -> MultiIndex {
        self.checked_sub(rhs).expect("multi-index subtraction underflow")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Strictly increasing in the lexicographic order.
    pub parts: Vec<MultiIndex>,
    pub multiplicities: Vec<u32>,
    pub target: MultiIndex,
}

impl Decomposition {
    pub fn s(&self) -> usize {
        self.parts.len()
    }

    /// Total multiplicity `m = Σ m_k`.
    pub fn total_multiplicity(&self) -> u32 {
        self.multiplicities.iter().sum()
    }

    pub fn reconstruct(&self) -> MultiIndex {
        let mut acc = MultiIndex::zero(self.target.dim());
        for (p, &m) in self.parts.iter().zip(&self.multiplicities) {
            acc = &acc + &p.scale(m);
        }
        acc
    }

    /// `m! / (m_1! ··· m_s!)`
    pub fn multiplicity_multinomial(&self) -> BigNat {
        let ms: Vec<u64> = self.multiplicities.iter().map(|&m| m as u64).collect();
        multinomial(&ms).expect("nonempty decomposition")
    }
}

/// Streams every decomposition of `alpha` to `visit`, in canonical order.
///
/// Parts are chosen largest-first by recursive descent over the candidate
/// list (all nonzero `β ≤ α`, lexicographic), pruning on the remaining
/// budget; each emitted decomposition lists its parts in increasing order.
pub fn for_each_decomposition<F: FnMut(&Decomposition)>(alpha: &MultiIndex, mut visit: F) -> Result<()> {
    if alpha.is_zero() {
        return Err(GevreyError::ZeroMultiIndex);
    }
    let candidates: Vec<MultiIndex> = alpha.lower_set().into_iter().filter(|b| !b.is_zero()).collect();
    let mut parts: Vec<(usize, u32)> = Vec::new();
    descend(alpha, &candidates, candidates.len(), alpha.clone(), &mut parts, &mut visit);
    Ok(())
}

fn descend<F: FnMut(&Decomposition)>(
    alpha: &MultiIndex,
    candidates: &[MultiIndex],
    limit: usize,
    remaining: MultiIndex,
    chosen: &mut Vec<(usize, u32)>,
    visit: &mut F,
) {
    if remaining.is_zero() {
        let mut parts = Vec::with_capacity(chosen.len());
        let mut mults = Vec::with_capacity(chosen.len());
        for &(idx, m) in chosen.iter().rev() {
            parts.push(candidates[idx].clone());
            mults.push(m);
        }
        visit(&Decomposition { parts, multiplicities: mults, target: alpha.clone() });
        return;
    }
    // Parts are taken in decreasing candidate index so each set is seen once.
    for idx in (0..limit).rev() {
        let part = &candidates[idx];
        if !part.le(&remaining) {
            continue;
        }
        let mut rem = remaining.clone();
        let mut m = 0u32;
        while let Some(next) = rem.checked_sub(part) {
            rem = next;
            m += 1;
            chosen.push((idx, m));
            descend(alpha, candidates, idx, rem.clone(), chosen, visit);
            chosen.pop();
        }
    }
}

pub fn enumerate_decompositions(alpha: &MultiIndex) -> Result<Vec<Decomposition>> {
    let mut out = Vec::new();
    for_each_decomposition(alpha, |d| out.push(d.clone()))?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    #[serde(with = "crate::numerics::decimal_string")]
    pub count: BigNat,
    #[serde(with = "crate::numerics::decimal_string")]
    pub bound: BigNat,
    pub ok: bool,
}

/// Number of decompositions against the `(1 + |α|)^{d+2}` bound.
pub fn decomposition_census(alpha: &MultiIndex) -> Result<Census> {
    let mut count = 0u64;
    for_each_decomposition(alpha, |_| count += 1)?;
    let count = BigNat::from(count);
    let bound: BigNat = BigUint::from(1 + alpha.order() as u64).pow(alpha.dim() as u32 + 2);
    let ok = count <= bound;
    Ok(Census { count, bound, ok })
}

/// Σ m!/(m_1!···m_n!) over all `(m_1..m_n)` with `Σ k m_k = n`.
///
/// Uses the zero-padded multiplicity vectors (one slot per part size), so
/// it ranges over integer partitions of `n`. Equals `2^{n-1}`.
pub fn composition_multinomial_sum(n: usize) -> Result<BigNat> {
    if n == 0 {
        return Err(GevreyError::InvalidParameter("n must be >= 1".into()));
    }
    let mut total = BigNat::zero();
    let mut mult = vec![0u64; n];
    partitions_by_multiplicity(n, n, &mut mult, &mut |m| {
        total += multinomial(m).expect("n >= 1");
    });
    Ok(total)
}

/// Visits every multiplicity vector `m` (length `n`, `m[k-1]` = count of
/// part `k`) with `Σ k m[k-1] = remaining`, parts not exceeding `max_part`.
pub(crate) fn partitions_by_multiplicity<F: FnMut(&[u64])>(
    remaining: usize,
    max_part: usize,
    mult: &mut Vec<u64>,
    visit: &mut F,
) {
    if remaining == 0 {
        visit(mult);
        return;
    }
    if max_part == 0 {
        return;
    }
    // Either skip this part size or use it m >= 1 times.
    partitions_by_multiplicity(remaining, max_part - 1, mult, visit);
    let mut used = 0;
    while used + max_part <= remaining {
        used += max_part;
        mult[max_part - 1] += 1;
        partitions_by_multiplicity(remaining - used, max_part - 1, mult, visit);
    }
    mult[max_part - 1] = 0;
}

/// Integer partitions of `n` as nonincreasing lists.
pub fn integer_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for p in (1..=n.min(max)).rev() {
            prefix.push(p);
            rec(n - p, p, prefix, out);
            prefix.pop();
        }
    }
    let mut out = vec![];
    rec(n, n, &mut vec![], &mut out);
    out
}

pub fn two_pow(n: usize) -> BigNat {
    BigNat::one() << n
}
