use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::symbol::{reduction_jets, Reduction, ReductionJets};
use crate::error::{GevreyError, Result};
use crate::jets::Jet;

pub const MAX_N: usize = 12;
pub const MAX_POINTS: usize = 1024;

/// A test function given by its complex jet at a point.
pub type TestFn<'a> = dyn Fn(&[f64], usize) -> Result<Jet<Complex64>> + Sync + 'a;

/// A word `(j_1, ..., j_k)` acting as `R_{j_1} ... R_{j_k}`.
pub type Word = Vec<u8>;

pub fn word_weight(w: &[u8]) -> usize {
    w.iter().map(|&j| j as usize).sum()
}

/// `K_1 = {k : 0 ≤ mk ≤ N-m}` and `K_2 = {k : N-m < mk ≤ N}`.
pub fn index_sets(m: usize, n: usize) -> (Vec<usize>, Vec<usize>) {
    let k1 = (0..).take_while(|k| m * k + m <= n).collect();
    let k2 = (0..=n / m).filter(|k| m * k + m > n && m * k <= n).collect();
    (k1, k2)
}

/// Words of `w_N` (weight `≤ N-m`) and `e_N` (`j·s` with `s` in `w_N` and
/// weight above `N-m`), both in depth-first order with letters prepended.
pub fn enumerate_words(m: usize, n: usize) -> (Vec<Word>, Vec<Word>) {
    fn visit(s: &Word, m: usize, limit: usize, w: &mut Vec<Word>, e: &mut Vec<Word>) {
        w.push(s.clone());
        for j in 1..=m as u8 {
            let mut t = Vec::with_capacity(s.len() + 1);
            t.push(j);
            t.extend_from_slice(s);
            if word_weight(&t) <= limit {
                visit(&t, m, limit, w, e);
            } else {
                e.push(t);
            }
        }
    }
    let (mut w, mut e) = (Vec::new(), Vec::new());
    if n >= m {
        visit(&Vec::new(), m, n - m, &mut w, &mut e);
    }
    (w, e)
}

/// Numbers of words in `w_N` and `e_N` from `c(s) = Σ_{j ≤ min(m,s)} c(s-j)`.
pub fn word_counts(m: usize, n: usize) -> (u64, u64) {
    if n < m {
        return (0, 0);
    }
    let mut c = vec![1u64];
    for s in 1..=n {
        c.push((1..=m.min(s)).map(|j| c[s - j]).sum());
    }
    let w = c[..=n - m].iter().sum();
    let e = (n - m + 1..=n).map(|s| (s - (n - m)..=m.min(s)).map(|j| c[s - j]).sum::<u64>()).sum();
    (w, e)
}

/// Least-squares `ln count ≈ ln A + N ln C`, with `A` raised so that
/// `count ≤ A C^N` for every sample.
pub fn fit_word_growth(samples: &[(usize, u64)]) -> (f64, f64) {
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0 as f64).collect();
    let ys: Vec<f64> = samples.iter().map(|s| (s.1 as f64).ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx } else { 0.0 };
    let ln_a = xs.iter().zip(&ys).map(|(x, y)| y - slope * x).fold(f64::NEG_INFINITY, f64::max);
    (ln_a.exp(), slope.exp())
}

/// `w_N` and `e_N` sampled on `x_points × xi_samples`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NeumannSums {
    pub m: usize,
    pub n: usize,
    pub k1: Vec<usize>,
    pub k2: Vec<usize>,
    pub w_words: Vec<Word>,
    pub e_words: Vec<Word>,
    pub x_points: Vec<Vec<f64>>,
    pub xi_samples: Vec<Vec<f64>>,
    /// `w[s][k]` at `xi_samples[s]`, `x_points[k]`.
    pub w: Vec<Vec<Complex64>>,
    pub e: Vec<Vec<Complex64>>,
    /// `w_N` jets of order `m`, kept for the identity check.
    #[serde(skip)]
    w_jets: Vec<Vec<Jet<Complex64>>>,
}

/// Per-point sums: `w` of order `m + extra`, `e` of order `extra`.
pub(crate) struct PointSums {
    pub w: Jet<Complex64>,
    pub e: Jet<Complex64>,
}

/// Depth-first accumulation matching `enumerate_words`, for every
/// `N ∈ [n_lo, n_hi]` at once: a word of weight `S` with first letter `j`
/// lies in `w_N` for `N ≥ S + m` and in `e_N` for `S - j + m ≤ N < S + m`.
/// `visit` sees every word with its jet.
pub(crate) fn sums_range_at(
    rj: &ReductionJets,
    phi: &Jet<Complex64>,
    m: usize,
    (n_lo, n_hi): (usize, usize),
    extra: usize,
    visit: &mut dyn FnMut(&[u8], &Jet<Complex64>),
) -> Result<Vec<PointSums>> {
    struct Ctx<'a> {
        rj: &'a ReductionJets,
        m: usize,
        lo: usize,
        hi: usize,
        extra: usize,
        out: Vec<PointSums>,
    }
    fn record(c: &mut Ctx<'_>, word: &[u8], f: &Jet<Complex64>) {
        let s = word_weight(word);
        for n in c.lo.max(s + c.m)..=c.hi {
            let o = &mut c.out[n - c.lo];
            o.w = o.w.add(&f.truncate(c.m + c.extra));
        }
        if let Some(&j) = word.first() {
            for n in c.lo.max(s + c.m - j as usize)..=c.hi.min(s + c.m - 1) {
                let o = &mut c.out[n - c.lo];
                o.e = o.e.add(&f.truncate(c.extra));
            }
        }
    }
    fn go(c: &mut Ctx<'_>, word: &mut Vec<u8>, f: &Jet<Complex64>, visit: &mut dyn FnMut(&[u8], &Jet<Complex64>)) -> Result<()> {
        visit(word, f);
        record(c, word, f);
        let weight = word_weight(word);
        for (k, g) in c.rj.apply_each(f)?.into_iter().enumerate() {
            let j = k + 1;
            word.insert(0, j as u8);
            if weight + j + c.m <= c.hi {
                go(c, word, &g, visit)?;
            } else {
                visit(word, &g);
                record(c, word, &g);
            }
            word.remove(0);
        }
        Ok(())
    }
    if n_lo < m || n_hi < n_lo {
        return Err(GevreyError::InvalidParameter(format!("need m ≤ N_lo ≤ N_hi, got m = {m}, [{n_lo}, {n_hi}]")));
    }
    if phi.order() < n_hi + extra {
        return Err(GevreyError::OrderExceedsTruncation { order: n_hi + extra, truncation: phi.order() });
    }
    let phi = phi.truncate(n_hi + extra);
    let zero = Complex64::new(0.0, 0.0);
    let out = (n_lo..=n_hi)
        .map(|_| PointSums { w: Jet::constant(zero, phi.base(), m + extra), e: Jet::constant(zero, phi.base(), extra) })
        .collect();
    let mut c = Ctx { rj, m, lo: n_lo, hi: n_hi, extra, out };
    go(&mut c, &mut Vec::new(), &phi, visit)?;
    Ok(c.out)
}

pub(crate) fn check_budget(red: &Reduction, n: usize, points: usize) -> Result<()> {
    let m = red.m();
    if n < m {
        return Err(GevreyError::InvalidParameter(format!("N = {n} is below the order m = {m}")));
    }
    if n > MAX_N {
        return Err(GevreyError::Budget(format!("N = {n} exceeds {MAX_N}")));
    }
    if points > MAX_POINTS {
        return Err(GevreyError::Budget(format!("{points} grid points exceed {MAX_POINTS}")));
    }
    Ok(())
}

pub fn neumann_sums(red: &Reduction, phi: &TestFn<'_>, n: usize, x_points: &[Vec<f64>], xi_samples: &[Vec<f64>]) -> Result<NeumannSums> {
    Ok(neumann_sums_range(red, phi, (n, n), x_points, xi_samples)?.pop().expect("one N"))
}

/// `neumann_sums` for every `N` in `[n_lo, n_hi]` from one pass over the words.
pub fn neumann_sums_range(red: &Reduction, phi: &TestFn<'_>, (n_lo, n_hi): (usize, usize), x_points: &[Vec<f64>], xi_samples: &[Vec<f64>]) -> Result<Vec<NeumannSums>> {
    check_budget(red, n_lo, x_points.len())?;
    check_budget(red, n_hi, x_points.len())?;
    let m = red.m();
    let cells: Vec<(usize, usize)> = (0..xi_samples.len()).flat_map(|s| (0..x_points.len()).map(move |k| (s, k))).collect();
    let results: Vec<Vec<PointSums>> = cells
        .par_iter()
        .map(|&(s, k)| {
            let x = &x_points[k];
            let rj = reduction_jets(red, x, &xi_samples[s], n_hi)?;
            sums_range_at(&rj, &phi(x, n_hi)?, m, (n_lo, n_hi), 0, &mut |_, _| {})
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<NeumannSums> = (n_lo..=n_hi)
        .map(|n| {
            let (w_words, e_words) = enumerate_words(m, n);
            let (k1, k2) = index_sets(m, n);
            let rows = vec![Vec::with_capacity(x_points.len()); xi_samples.len()];
            NeumannSums {
                m,
                n,
                k1,
                k2,
                w_words,
                e_words,
                x_points: x_points.to_vec(),
                xi_samples: xi_samples.to_vec(),
                w: rows.clone(),
                e: rows,
                w_jets: vec![Vec::with_capacity(x_points.len()); xi_samples.len()],
            }
        })
        .collect();
    for ((s, _), per_n) in cells.into_iter().zip(results) {
        for (sums, r) in out.iter_mut().zip(per_n) {
            sums.w[s].push(*r.w.value());
            sums.e[s].push(*r.e.value());
            sums.w_jets[s].push(r.w);
        }
    }
    Ok(out)
}

/// Max over the samples of `|(I - R) w_N - (φ - e_N)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub max_abs: f64,
    /// Largest `|w_N|`, `|R w_N|`, `|φ|` or `|e_N|` met, for scale.
    pub scale: f64,
}

pub fn residual_identity_check(red: &Reduction, sums: &NeumannSums, phi: &TestFn<'_>) -> Result<Residual> {
    Ok(residual_identity_check_all(red, std::slice::from_ref(sums), phi)?.pop().expect("one N"))
}

/// `residual_identity_check` for several sums on the same samples, sharing
/// the `R_j` jets.
pub fn residual_identity_check_all(red: &Reduction, all: &[NeumannSums], phi: &TestFn<'_>) -> Result<Vec<Residual>> {
    let Some(first) = all.first() else {
        return Ok(Vec::new());
    };
    if all.iter().any(|s| s.x_points != first.x_points || s.xi_samples != first.xi_samples) {
        return Err(GevreyError::InvalidParameter("sums must share their samples".into()));
    }
    let cells: Vec<(usize, usize)> = (0..first.xi_samples.len()).flat_map(|s| (0..first.x_points.len()).map(move |k| (s, k))).collect();
    let per: Vec<Vec<(f64, f64)>> = cells
        .par_iter()
        .map(|&(s, k)| {
            let x = &first.x_points[k];
            let rj = reduction_jets(red, x, &first.xi_samples[s], red.m())?;
            let f = *phi(x, 0)?.value();
            all.iter()
                .map(|sums| {
                    let w = &sums.w_jets[s][k];
                    let rw = *rj.apply_full(w)?.value();
                    let (wv, ev) = (*w.value(), sums.e[s][k]);
                    let r = (wv - rw) - (f - ev);
                    Ok((r.norm(), wv.norm().max(rw.norm()).max(f.norm()).max(ev.norm())))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Residual { max_abs: 0.0, scale: 0.0 }; all.len()];
    for row in per {
        for (o, (r, sc)) in out.iter_mut().zip(row) {
            o.max_abs = o.max_abs.max(r);
            o.scale = o.scale.max(sc);
        }
    }
    Ok(out)
}
