//! Seminorms on derivative-growth data and recovery of `(τ, σ, h)` from it.

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GevreyError, Result};
use crate::jets::FunctionSpec;
use crate::multiindex::MultiIndex;
use crate::numerics::{binomial, log_factorial, LogMagnitude};
use crate::sequences::STIRLING_COMPARISON_C;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthSource {
    MeasuredOnGrid,
    Synthetic,
    ClosedForm,
}

/// `entries[n]` is the log of `sup_K |∂^α φ|` maximized over `|α| = n`.
///
/// Zero derivatives are allowed (log `-inf`); `+inf` and NaN are not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeGrowthData {
    pub entries: Vec<LogMagnitude>,
    pub source: GrowthSource,
}

impl DerivativeGrowthData {
    pub fn new(entries: Vec<LogMagnitude>, source: GrowthSource) -> Result<Self> {
        if entries.is_empty() {
            return Err(GevreyError::Empty("derivative growth data"));
        }
        if let Some(n) = entries.iter().position(|e| e.log().is_nan() || e.log() == f64::INFINITY) {
            return Err(GevreyError::InvalidParameter(format!("order {n}: magnitude must be finite")));
        }
        Ok(Self { entries, source })
    }

    /// `ln A + n^σ ln h + τ n^σ ln n` for `n ≤ n_max`.
    pub fn synthetic(tau: f64, sigma: f64, h: f64, a: f64, n_max: usize) -> Self {
        let entries = (0..=n_max).map(|n| LogMagnitude::from_log(envelope(a.ln(), h.ln(), tau, sigma, n))).collect();
        Self { entries, source: GrowthSource::Synthetic }
    }

    pub fn n_max(&self) -> usize {
        self.entries.len() - 1
    }

    /// Parses rows `n,log_sup_abs_derivative`; a header row and `#` comments are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split(',').map(str::trim);
            let (Some(n), Some(v), None) = (it.next(), it.next(), it.next()) else {
                return Err(GevreyError::Parse(format!("line {}: expected 'n,log_sup_abs_derivative'", lineno + 1)));
            };
            let Ok(n) = n.parse::<usize>() else {
                if rows.is_empty() && lineno == 0 {
                    continue;
                }
                return Err(GevreyError::Parse(format!("line {}: bad order '{n}'", lineno + 1)));
            };
            let v: f64 = match v {
                "-inf" | "-Infinity" => f64::NEG_INFINITY,
                _ => v.parse().map_err(|_| GevreyError::Parse(format!("line {}: bad value '{v}'", lineno + 1)))?,
            };
            rows.push((n, v));
        }
        rows.sort_by_key(|r| r.0);
        for (i, r) in rows.iter().enumerate() {
            if r.0 != i {
                return Err(GevreyError::Parse(format!("orders must be contiguous from 0; missing {i}")));
            }
        }
        Self::new(rows.into_iter().map(|r| LogMagnitude::from_log(r.1)).collect(), GrowthSource::MeasuredOnGrid)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,log_sup_abs_derivative\n");
        for (n, e) in self.entries.iter().enumerate() {
            if e.is_zero() {
                s.push_str(&format!("{n},-inf\n"));
            } else {
                s.push_str(&format!("{n},{:.17e}\n", e.log()));
            }
        }
        s
    }

    fn finite(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().enumerate().filter(|(_, e)| !e.is_zero()).map(|(n, e)| (n, e.log()))
    }
}

fn envelope(log_a: f64, log_h: f64, tau: f64, sigma: f64, n: usize) -> f64 {
    let x = n as f64;
    let e = x.powf(sigma);
    let l = if n <= 1 { 0.0 } else { x.ln() };
    log_a + e * log_h + tau * e * l
}

/// `max_n [L_n - n^σ ln h - τ n^σ ln n]`.
pub fn seminorm_log(data: &DerivativeGrowthData, tau: f64, sigma: f64, h: f64) -> Result<LogMagnitude> {
    if !(h > 0.0) {
        return Err(GevreyError::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let v = data
        .finite()
        .map(|(n, l)| l - envelope(0.0, h.ln(), tau, sigma, n))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(LogMagnitude::from_log(v))
}

/// Same as [`seminorm_log`] with `[n^σ]!^{τ/σ}` in place of `M_n`.
pub fn seminorm_log_factorial_form(data: &DerivativeGrowthData, tau: f64, sigma: f64, h: f64) -> Result<LogMagnitude> {
    if !(h > 0.0) {
        return Err(GevreyError::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let v = data
        .finite()
        .map(|(n, l)| l - (n as f64).powf(sigma) * h.ln() - factorial_form_log(tau, sigma, n))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(LogMagnitude::from_log(v))
}

fn factorial_form_log(tau: f64, sigma: f64, n: usize) -> f64 {
    tau / sigma * log_factorial((n as f64).powf(sigma).floor() as u64).log()
}

/// Set of `h > 0` with finite seminorm, as resolved by the data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HInterval {
    pub empty: bool,
    /// Infimum of admissible `h` (0 when every `h > 0` works).
    pub h_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceGap {
    pub form_21: HInterval,
    pub form_22: HInterval,
    /// Bound on `|ln h_22 - ln h_21|` implied by the Stirling comparison.
    pub log_constant: f64,
    pub consistent: bool,
}

/// Admissible `h` for the two seminorm forms.
///
/// The data determine `ln h_min` as the largest normalized growth
/// `(L_n - weight_n)/n^σ` over the upper half of the orders. The interval
/// is reported empty when that normalized growth is still strictly
/// increasing without slowing down at the end of the data.
pub fn seminorm_equivalence_gap(data: &DerivativeGrowthData, tau: f64, sigma: f64) -> Result<EquivalenceGap> {
    if !(sigma >= 1.0) || !(tau > 0.0) {
        return Err(GevreyError::InvalidParameter(format!("need tau > 0, sigma >= 1; got ({tau}, {sigma})")));
    }
    let w21 = |n: usize| envelope(0.0, 0.0, tau, sigma, n);
    let w22 = |n: usize| factorial_form_log(tau, sigma, n);
    let form_21 = admissible_h(data, sigma, w21);
    let form_22 = admissible_h(data, sigma, w22);
    let lo = (data.n_max() / 2).max(2);
    let log_constant = tau / sigma
        + (lo..=data.n_max().max(lo))
            .map(|n| {
                let x = n as f64;
                let l = x.ln();
                (STIRLING_COMPARISON_C * sigma * l + tau / (2.0 * sigma) * (2.0 * std::f64::consts::PI).ln() + tau / 2.0 * l)
                    / x.powf(sigma)
            })
            .fold(0.0, f64::max);
    let consistent = match (form_21.empty, form_22.empty) {
        (true, true) => true,
        (false, false) if form_21.h_min == 0.0 || form_22.h_min == 0.0 => form_21.h_min == form_22.h_min,
        (false, false) => (form_22.h_min.ln() - form_21.h_min.ln()).abs() <= log_constant + 1e-12,
        _ => false,
    };
    Ok(EquivalenceGap { form_21, form_22, log_constant, consistent })
}

fn admissible_h(data: &DerivativeGrowthData, sigma: f64, weight: impl Fn(usize) -> f64) -> HInterval {
    let n_max = data.n_max();
    let lo = (n_max / 2).max(1);
    let t: Vec<f64> = (lo..=n_max)
        .map(|n| {
            let l = data.entries[n].log();
            if l == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                (l - weight(n)) / (n as f64).powf(sigma)
            }
        })
        .collect();
    let max = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return HInterval { empty: false, h_min: 0.0 };
    }
    let inc: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let growing = inc.len() >= 2 && inc.iter().all(|&d| d > 0.0) && inc[inc.len() - 1] > 0.4 * inc[0];
    HInterval { empty: growing, h_min: if growing { f64::INFINITY } else { max.exp() } }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityFit {
    pub tau_hat: f64,
    pub sigma_hat: f64,
    pub h_hat: f64,
    pub a_hat: f64,
    pub log_h_hat: f64,
    pub log_a_hat: f64,
    /// `(n, L_n - fit_n)` before the amplitude shift.
    pub residuals: Vec<(usize, f64)>,
    pub residual_norm: f64,
    pub admissible: bool,
    /// Set when every derivative of positive order vanishes.
    pub degenerate: bool,
    /// Residual norm for every σ tried.
    pub sigma_scores: Vec<(f64, f64)>,
}

/// Relative tolerance on tail residuals for admissibility.
pub const FIT_TOLERANCE: f64 = 0.05;

/// Least-squares fit of `L_n ≈ ln A + n^σ ln h + τ n^σ ln n` with `τ ≥ 0`,
/// selecting `σ` from the grid by smallest residual norm.
///
/// The reported amplitude is raised so that the envelope covers every data
/// point. The fit is admissible when residuals on the upper half of the
/// orders stay below `FIT_TOLERANCE` times the data scale.
pub fn fit_regularity(data: &DerivativeGrowthData, sigma_grid: &[f64]) -> Result<RegularityFit> {
    fit_regularity_with_tolerance(data, sigma_grid, FIT_TOLERANCE)
}

/// `fit_regularity` with an explicit admissibility tolerance.
pub fn fit_regularity_with_tolerance(data: &DerivativeGrowthData, sigma_grid: &[f64], tolerance: f64) -> Result<RegularityFit> {
    if !(tolerance > 0.0) {
        return Err(GevreyError::InvalidParameter(format!("tolerance must be positive, got {tolerance}")));
    }
    if data.n_max() < 8 {
        return Err(GevreyError::InvalidParameter(format!("need n_max >= 8, got {}", data.n_max())));
    }
    if sigma_grid.is_empty() {
        return Err(GevreyError::Empty("sigma grid"));
    }
    if let Some(&s) = sigma_grid.iter().find(|&&s| !(s > 1.0)) {
        return Err(GevreyError::SigmaNotAboveOne(s));
    }
    let pts: Vec<(usize, f64)> = data.finite().collect();
    if pts.iter().all(|&(n, _)| n == 0) {
        let log_a = pts.first().map_or(f64::NEG_INFINITY, |p| p.1);
        return Ok(RegularityFit {
            tau_hat: 0.0,
            sigma_hat: sigma_grid[0],
            h_hat: 0.0,
            a_hat: log_a.exp(),
            log_h_hat: f64::NEG_INFINITY,
            log_a_hat: log_a,
            residuals: vec![],
            residual_norm: 0.0,
            admissible: true,
            degenerate: true,
            sigma_scores: vec![],
        });
    }
    if pts.len() < 4 {
        return Err(GevreyError::Degenerate(format!("{} nonzero orders; need at least 4", pts.len())));
    }
    let fits: Vec<(f64, [f64; 3], f64)> = sigma_grid
        .par_iter()
        .map(|&s| {
            let coef = fit_one(&pts, s);
            let rn = residuals(&pts, s, &coef).iter().map(|r| r.1 * r.1).sum::<f64>().sqrt();
            (s, coef, rn)
        })
        .collect();
    let best = fits
        .iter()
        .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap().then(a.0.partial_cmp(&b.0).unwrap()))
        .expect("nonempty grid");
    let (sigma, coef, rn) = (best.0, best.1, best.2);
    let res = residuals(&pts, sigma, &coef);
    let shift = res.iter().map(|r| r.1).fold(0.0, f64::max);
    let scale = pts.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
    let half = data.n_max() / 2;
    let admissible = res.iter().filter(|r| r.0 >= half).all(|r| r.1 <= tolerance * scale);
    let log_a = coef[0] + shift;
    Ok(RegularityFit {
        tau_hat: coef[2],
        sigma_hat: sigma,
        h_hat: coef[1].exp(),
        a_hat: log_a.exp(),
        log_h_hat: coef[1],
        log_a_hat: log_a,
        residuals: res,
        residual_norm: rn,
        admissible,
        degenerate: false,
        sigma_scores: fits.iter().map(|f| (f.0, f.2)).collect(),
    })
}

fn basis(n: usize, sigma: f64) -> [f64; 3] {
    let x = n as f64;
    let e = x.powf(sigma);
    [1.0, e, if n <= 1 { 0.0 } else { e * x.ln() }]
}

fn residuals(pts: &[(usize, f64)], sigma: f64, c: &[f64; 3]) -> Vec<(usize, f64)> {
    pts.iter()
        .map(|&(n, y)| {
            let b = basis(n, sigma);
            (n, y - (c[0] * b[0] + c[1] * b[1] + c[2] * b[2]))
        })
        .collect()
}

/// Least squares with `c[2] ≥ 0`: unconstrained first, then the boundary.
fn fit_one(pts: &[(usize, f64)], sigma: f64) -> [f64; 3] {
    let rows: Vec<([f64; 3], f64)> = pts.iter().map(|&(n, y)| (basis(n, sigma), y)).collect();
    if let Some(c) = least_squares::<3>(&rows) {
        if c[2] >= 0.0 {
            return c;
        }
    }
    let c = least_squares::<2>(&rows).unwrap_or([0.0; 2]);
    [c[0], c[1], 0.0]
}

/// Solves the normal equations on the first `K` basis columns.
fn least_squares<const K: usize>(rows: &[([f64; 3], f64)]) -> Option<[f64; K]> {
    // Column scaling keeps the normal matrix well conditioned.
    let mut scale = [0.0f64; K];
    for (b, _) in rows {
        for k in 0..K {
            scale[k] = scale[k].max(b[k].abs());
        }
    }
    if scale.iter().any(|&s| s == 0.0) {
        return None;
    }
    let mut m = [[0.0f64; K]; K];
    let mut v = [0.0f64; K];
    for (b, y) in rows {
        for i in 0..K {
            let bi = b[i] / scale[i];
            v[i] += bi * y;
            for j in 0..K {
                m[i][j] += bi * b[j] / scale[j];
            }
        }
    }
    let x = solve(m, v)?;
    let mut out = [0.0; K];
    for k in 0..K {
        out[k] = x[k] / scale[k];
    }
    Some(out)
}

/// Gaussian elimination with partial pivoting.
fn solve<const K: usize>(mut m: [[f64; K]; K], mut v: [f64; K]) -> Option<[f64; K]> {
    for col in 0..K {
        let piv = (col..K).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        v.swap(col, piv);
        for r in col + 1..K {
            let f = m[r][col] / m[col][col];
            for c in col..K {
                m[r][c] -= f * m[col][c];
            }
            v[r] -= f * v[col];
        }
    }
    let mut x = [0.0; K];
    for r in (0..K).rev() {
        let s: f64 = (r + 1..K).map(|c| m[r][c] * x[c]).sum();
        x[r] = (v[r] - s) / m[r][r];
    }
    x.iter().all(|z| z.is_finite()).then_some(x)
}

/// Whether `‖φ‖_{τ,σ,h} ≤ A` on the data.
pub fn is_admissible(data: &DerivativeGrowthData, tau: f64, sigma: f64, h: f64, a: f64) -> Result<bool> {
    Ok(seminorm_log(data, tau, sigma, h)?.log() <= a.ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Norm {
    Sup,
    /// Discrete L² with the given cell volume.
    L2 { cell_volume: f64 },
}

/// Derivative growth of a catalog function from float jets at grid points.
pub fn measure_growth(spec: &FunctionSpec, points: &[Vec<f64>], n_max: usize, norm: Norm) -> Result<DerivativeGrowthData> {
    let d = points.first().ok_or(GevreyError::Empty("grid"))?.len();
    let jets = points
        .par_iter()
        .map(|p| spec.jet_in::<f64>(p, n_max))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut best = 0.0f64;
        for alpha in MultiIndex::of_order(d, n) {
            let vals = jets.iter().map(|j| j.partial(&alpha).map(f64::abs));
            let v = match norm {
                Norm::Sup => vals.collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max),
                Norm::L2 { cell_volume } => (vals.collect::<Result<Vec<_>>>()?.iter().map(|x| x * x).sum::<f64>() * cell_volume).sqrt(),
            };
            best = best.max(v);
        }
        entries.push(LogMagnitude::from_real(best)?);
    }
    DerivativeGrowthData::new(entries, GrowthSource::ClosedForm)
}

/// Derivative growth from uniform 1D samples by centered differences.
///
/// Order `n` uses the stencil `Σ_j (-1)^j C(n,j) f(x + (n - 2j) s m) / (2 s m)^n`
/// at `m = 1` and `m = 2`. Orders are kept while the two estimates of the
/// sup agree to 3%, which puts the Richardson estimate of the truncation
/// error of the finer one below 1%. The first failing order ends the range.
pub fn measure_growth_fd(samples: &[f64], spacing: f64, n_max: usize) -> Result<DerivativeGrowthData> {
    if !(spacing > 0.0) {
        return Err(GevreyError::InvalidParameter("spacing must be positive".into()));
    }
    if samples.len() < 16 {
        return Err(GevreyError::InvalidParameter("need at least 16 samples".into()));
    }
    let sup_at = |n: usize, m: usize| -> Option<f64> {
        let reach = n * 2 * m;
        if samples.len() <= 2 * reach {
            return None;
        }
        let coef: Vec<f64> = (0..=n)
            .map(|j| {
                let b = binomial(n as u64, j as u64).to_f64().expect("small binomial");
                if j % 2 == 0 { b } else { -b }
            })
            .collect();
        let h = (2 * m) as f64 * spacing;
        let denom = h.powi(n as i32);
        let mut sup = 0.0f64;
        for i in reach..samples.len() - reach {
            let mut acc = 0.0;
            for (j, c) in coef.iter().enumerate() {
                let off = (n as isize - 2 * j as isize) * m as isize;
                acc += c * samples[(i as isize + off) as usize];
            }
            sup = sup.max((acc / denom).abs());
        }
        Some(sup)
    };
    let mut entries = Vec::new();
    for n in 0..=n_max {
        let (Some(fine), Some(coarse)) = (sup_at(n, 1), sup_at(n, 2)) else { break };
        if n > 0 && (fine - coarse).abs() > 0.03 * fine.max(coarse) {
            break;
        }
        entries.push(LogMagnitude::from_real(fine)?);
    }
    DerivativeGrowthData::new(entries, GrowthSource::MeasuredOnGrid)
}

#[cfg(test)]
mod tests;
