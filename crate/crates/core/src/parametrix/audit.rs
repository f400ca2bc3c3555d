use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::neumann::{check_budget, sums_range_at, word_weight, TestFn, Word};
use super::operator::{principal_jet, principal_symbol, DiffOperator};
use super::symbol::{reduction_jets, Reduction};
use crate::error::{GevreyError, Result};
use crate::multiindex::MultiIndex;
use crate::wavefront::{catalog_field, wf_scan, CatalogField, ScanParams};

pub const MAX_BETA: usize = 6;

/// `(A, h)` with `L_b ≤ ln A + b^σ ln h + τ b^σ ln b` for every sampled `b`.
/// `h` is `None` when every `b ≥ 1` entry vanishes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexFit {
    /// `ln` of the measured sup per order; `-inf` for exact zeros.
    #[serde(with = "crate::numerics::extended_real::vec")]
    pub log_sup: Vec<f64>,
    pub a: f64,
    pub h: Option<f64>,
}

pub fn fit_index_bound(log_sup: &[f64], tau: f64, sigma: f64) -> IndexFit {
    let l0 = log_sup.first().copied().unwrap_or(f64::NEG_INFINITY);
    let base = if l0.is_finite() { l0 } else { log_sup.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max) };
    let ln_h = log_sup
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| v.is_finite())
        .map(|(b, v)| {
            let bs = (b as f64).powf(sigma);
            (v - base - tau * bs * (b as f64).ln()) / bs
        })
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.max(s))));
    IndexFit { log_sup: log_sup.to_vec(), a: base.exp(), h: ln_h.map(f64::exp) }
}

fn log_or_neg_inf(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Derivative bounds for one `c_{δ,j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientBound {
    pub j: usize,
    pub delta: MultiIndex,
    /// Over `b = |β|`: `sup |ξ|^j |D^β c_{δ,j}|`.
    pub fit: IndexFit,
}

/// Word bound data: `L(N) = ln sup |ξ|^{N-m} |D^β R_{j_1}...R_{j_k} φ|` over the
/// words of `e_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordBound {
    pub n_values: Vec<usize>,
    #[serde(with = "crate::numerics::extended_real::vec")]
    pub log_sup: Vec<f64>,
    /// `L(N) - τ(N+M)^σ ln(N+M)`.
    #[serde(with = "crate::numerics::extended_real::vec")]
    pub reduced: Vec<f64>,
    pub a: f64,
    pub h: f64,
}

/// Index bookkeeping over the Leibniz expansion of `D^β` applied to one word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeibnizReport {
    pub word: Word,
    pub beta_order: usize,
    pub terms: u64,
    /// Terms using only top-order `D^α` from each `R_j`.
    pub top_order_terms: u64,
    /// `a_0 ≤ |β|` and `a_i ≤ Σ_{t≤i} j_t + |β|` on every term.
    pub prefix_bounds_hold: bool,
    /// `Σ a_i ≤ S_k + |β|` on every term, with equality exactly on the
    /// top-order terms.
    pub total_bound_holds: bool,
}

/// Expands `D^β(R_{j_1}...R_{j_k} φ)` with all `|α| ≤ j` for each factor and
/// checks the derivative counts `a_i = |γ_i|`.
pub fn leibniz_bookkeeping(word: &[u8], beta: &MultiIndex) -> LeibnizReport {
    struct Acc {
        terms: u64,
        top: u64,
        prefix_ok: bool,
        total_ok: bool,
    }
    fn go(word: &[u8], i: usize, cur: &MultiIndex, a: &mut Vec<usize>, all_top: bool, b: usize, acc: &mut Acc) {
        if i == word.len() {
            a.push(cur.order());
            acc.terms += 1;
            let total: usize = a.iter().sum();
            let s = word_weight(word);
            let prefix_ok = a[0] <= b && (1..=word.len()).all(|k| a[k] <= word_weight(&word[..k]) + b);
            acc.prefix_ok &= prefix_ok;
            acc.total_ok &= if all_top { total == s + b } else { total < s + b };
            acc.top += all_top as u64;
            a.pop();
            return;
        }
        let j = word[i] as usize;
        for alpha in MultiIndex::up_to_order(cur.dim(), j) {
            for gamma in cur.lower_set() {
                let rest = cur.checked_sub(&gamma).expect("γ ≤ β");
                let next = MultiIndex::new(rest.components().iter().zip(alpha.components()).map(|(x, y)| x + y).collect());
                a.push(gamma.order());
                go(word, i + 1, &next, a, all_top && alpha.order() == j, b, acc);
                a.pop();
            }
        }
    }
    let mut acc = Acc { terms: 0, top: 0, prefix_ok: true, total_ok: true };
    go(word, 0, beta, &mut Vec::new(), true, beta.order(), &mut acc);
    LeibnizReport {
        word: word.to_vec(),
        beta_order: beta.order(),
        terms: acc.terms,
        top_order_terms: acc.top,
        prefix_bounds_hold: acc.prefix_ok,
        total_bound_holds: acc.total_ok,
    }
}

/// Largest weight for which the Leibniz expansion is run exhaustively.
pub const LEIBNIZ_MAX_WEIGHT: usize = 5;
pub const LEIBNIZ_MAX_BETA: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundAudit {
    pub n: usize,
    pub tau: f64,
    pub sigma: f64,
    pub distribution_order: usize,
    pub beta_max: usize,
    pub coefficient_bounds: Vec<CoefficientBound>,
    /// `sup |D^p P_m| / |ξ|^m` over `|p|`.
    pub principal_bound: IndexFit,
    /// `min |P_m| / |ξ|^m`.
    pub principal_lower: f64,
    /// `sup |ξ|^m |D^α(1/P_m)|` over `|α|`.
    pub reciprocal_bound: IndexFit,
    /// Largest `| |c(x, λξ)| λ^j - |c(x, ξ)| |` relative to `|c(x, ξ)|`, `λ ∈ {2,4,8}`.
    pub homogeneity_error: f64,
    pub word_bound: WordBound,
    pub leibniz: Vec<LeibnizReport>,
    pub leibniz_ok: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn bound_audit(
    red: &Reduction,
    phi: &TestFn<'_>,
    n: usize,
    beta_max: usize,
    tau: f64,
    sigma: f64,
    distribution_order: usize,
    x_points: &[Vec<f64>],
    xi_samples: &[Vec<f64>],
) -> Result<BoundAudit> {
    check_budget(red, n, x_points.len())?;
    if beta_max > MAX_BETA {
        return Err(GevreyError::Budget(format!("|β| ≤ {MAX_BETA} required, got {beta_max}")));
    }
    if !(tau > 0.0) || !(sigma >= 1.0) {
        return Err(GevreyError::InvalidParameter(format!("need τ > 0 and σ ≥ 1, got ({tau}, {sigma})")));
    }
    let m = red.m();
    let p = &red.op;
    let d = p.dim();
    let cells: Vec<(usize, usize)> = (0..xi_samples.len()).flat_map(|s| (0..x_points.len()).map(move |k| (s, k))).collect();
    let betas: Vec<Vec<MultiIndex>> = (0..=beta_max).map(|b| MultiIndex::of_order(d, b)).collect();
    let slots: Vec<(usize, MultiIndex)> = red.operators.iter().flat_map(|r| r.coeffs.iter().map(move |(dl, _)| (r.j, dl.clone()))).collect();

    struct Local {
        coeff: Vec<Vec<f64>>,
        pm: Vec<f64>,
        pm_min: f64,
        inv: Vec<f64>,
        hom: f64,
        words: Vec<f64>,
    }
    let n_values: Vec<usize> = (m..=n).collect();
    let locals: Vec<Local> = cells
        .par_iter()
        .map(|&(s, k)| -> Result<Local> {
            let (x, xi) = (&x_points[k], &xi_samples[s]);
            let r = norm(xi);
            let rj = reduction_jets(red, x, xi, n + beta_max)?;
            let mut coeff = vec![vec![0.0f64; beta_max + 1]; slots.len()];
            for (t, (j, dl)) in slots.iter().enumerate() {
                let c = &rj.per_j[j - 1].iter().find(|(e, _)| e == dl).expect("slot").1;
                for (b, bs) in betas.iter().enumerate() {
                    for beta in bs {
                        coeff[t][b] = coeff[t][b].max(c.partial(beta)?.norm() * r.powi(*j as i32));
                    }
                }
            }
            let a = p.coefficient_jets(x, beta_max)?;
            let pmj = principal_jet(p, &a, xi);
            let inv = pmj.recip()?;
            let scale = r.powi(m as i32);
            let mut pm = vec![0.0f64; beta_max + 1];
            let mut invv = vec![0.0f64; beta_max + 1];
            for (b, bs) in betas.iter().enumerate() {
                for beta in bs {
                    pm[b] = pm[b].max(pmj.partial(beta)?.norm() / scale);
                    invv[b] = invv[b].max(inv.partial(beta)?.norm() * scale);
                }
            }
            let pm_min = pmj.value().norm() / scale;
            let mut hom = 0.0f64;
            let base = reduction_jets(red, x, xi, 0)?;
            for lam in [2.0, 4.0, 8.0] {
                let xs: Vec<f64> = xi.iter().map(|v| v * lam).collect();
                let scaled = reduction_jets(red, x, &xs, 0)?;
                for (j, (b0, b1)) in base.per_j.iter().zip(&scaled.per_j).enumerate() {
                    for ((_, c0), (_, c1)) in b0.iter().zip(b1) {
                        let (v0, v1) = (c0.value().norm(), c1.value().norm() * lam.powi(j as i32 + 1));
                        if v0 > 0.0 {
                            hom = hom.max((v1 - v0).abs() / v0);
                        }
                    }
                }
            }
            let mut words = vec![0.0f64; n_values.len()];
            let phi_jet = phi(x, n + beta_max)?;
            sums_range_at(&rj, &phi_jet, m, (n, n), beta_max, &mut |word, jet| {
                if word.is_empty() {
                    return;
                }
                let s_all = word_weight(word);
                let j = word[0] as usize;
                let mut sup = 0.0f64;
                for bs in &betas {
                    for beta in bs {
                        if let Ok(v) = jet.partial(beta) {
                            sup = sup.max(v.norm());
                        }
                    }
                }
                // word ∈ e_{N'} for S - j + m ≤ N' ≤ S + m - 1
                for (i, &nn) in n_values.iter().enumerate() {
                    if s_all + m > nn + j && nn < s_all + m {
                        words[i] = words[i].max(sup * r.powi((nn - m) as i32));
                    }
                }
            })?;
            Ok(Local { coeff, pm, pm_min, inv: invv, hom, words })
        })
        .collect::<Result<_>>()?;

    let fold_max = |f: &dyn Fn(&Local) -> &Vec<f64>, len: usize| -> Vec<f64> {
        let mut out = vec![0.0f64; len];
        for l in &locals {
            for (o, v) in out.iter_mut().zip(f(l)) {
                *o = o.max(*v);
            }
        }
        out.into_iter().map(log_or_neg_inf).collect()
    };
    let coefficient_bounds = slots
        .iter()
        .enumerate()
        .map(|(t, (j, dl))| CoefficientBound { j: *j, delta: dl.clone(), fit: fit_index_bound(&fold_max(&|l| &l.coeff[t], beta_max + 1), tau, sigma) })
        .collect();
    let principal_bound = fit_index_bound(&fold_max(&|l| &l.pm, beta_max + 1), tau, sigma);
    let reciprocal_bound = fit_index_bound(&fold_max(&|l| &l.inv, beta_max + 1), tau, sigma);
    let principal_lower = locals.iter().map(|l| l.pm_min).fold(f64::INFINITY, f64::min);
    let homogeneity_error = locals.iter().map(|l| l.hom).fold(0.0, f64::max);
    let log_sup = fold_max(&|l| &l.words, n_values.len());

    let mm = distribution_order as f64;
    let reduced: Vec<f64> = n_values.iter().zip(&log_sup).map(|(&nn, l)| {
        let t = nn as f64 + mm;
        l - if t > 0.0 { tau * t.powf(sigma) * t.ln() } else { 0.0 }
    }).collect();
    let n0 = (m as f64).powf(sigma);
    let ln_h = n_values
        .iter()
        .zip(&reduced)
        .skip(1)
        .filter(|(_, q)| q.is_finite())
        .map(|(&nn, q)| (q - reduced[0]) / ((nn as f64).powf(sigma) - n0))
        .fold(f64::NEG_INFINITY, f64::max);
    let ln_h = if ln_h.is_finite() { ln_h } else { 0.0 };
    let word_bound = WordBound { n_values, log_sup, a: (reduced[0] - n0 * ln_h).exp(), h: ln_h.exp(), reduced };

    let mut leibniz = Vec::new();
    let (_, e_small) = super::neumann::enumerate_words(m, n.min(LEIBNIZ_MAX_WEIGHT));
    for w in &e_small {
        for b in 0..=beta_max.min(LEIBNIZ_MAX_BETA) {
            for beta in MultiIndex::of_order(d, b) {
                leibniz.push(leibniz_bookkeeping(w, &beta));
            }
        }
    }
    let leibniz_ok = leibniz.iter().all(|r| r.prefix_bounds_hold && r.total_bound_holds);
    Ok(BoundAudit {
        n,
        tau,
        sigma,
        distribution_order,
        beta_max,
        coefficient_bounds,
        principal_bound,
        principal_lower,
        reciprocal_bound,
        homogeneity_error,
        word_bound,
        leibniz,
        leibniz_ok,
    })
}

/// One singular scan entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularEntry {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    pub characteristic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmokeIndex {
    pub tau: f64,
    pub sigma: f64,
    pub singular: Vec<SingularEntry>,
    /// Every singular entry lies in `Char(P)`.
    pub inclusion_holds: bool,
}

/// Propagation check on `u = max(x, 0)`, which solves `(x D + i) u = 0`:
/// every flagged singular direction must be characteristic. Run at `τ` and
/// at `2^{σ-1} τ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationSmoke {
    pub operator: String,
    pub field: String,
    pub points: Vec<Vec<f64>>,
    pub indices: Vec<SmokeIndex>,
}

pub const SMOKE_OPERATOR: &str = "poly:0,1*D + i*poly:1";

pub fn propagation_smoke(tau: f64, sigma: f64) -> Result<PropagationSmoke> {
    let p = DiffOperator::parse(SMOKE_OPERATOR)?;
    let u = catalog_field(CatalogField::Kink, CatalogField::Kink.default_size())?;
    let points = vec![vec![-0.5], vec![0.0], vec![0.5]];
    let mut indices = Vec::new();
    for t in [tau, 2f64.powf(sigma - 1.0) * tau] {
        let scan = wf_scan(&u, &points, 2, t, sigma, &ScanParams::default())?;
        let mut singular = Vec::new();
        for e in &scan {
            if let Some(v) = &e.verdict {
                if !v.regular {
                    let pm = principal_symbol(&p, &e.point, &e.direction)?;
                    singular.push(SingularEntry { point: e.point.clone(), direction: e.direction.clone(), characteristic: pm.norm() < super::operator::CHAR_TOLERANCE });
                }
            }
        }
        let inclusion_holds = singular.iter().all(|s| s.characteristic);
        indices.push(SmokeIndex { tau: t, sigma, singular, inclusion_holds });
    }
    Ok(PropagationSmoke { operator: p.to_string(), field: CatalogField::Kink.name().into(), points, indices })
}
