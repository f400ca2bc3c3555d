//! The defining sequences `M_p = p^{τ p^σ}` and audits of their
//! log-convexity, non-quasianalyticity and almost-increasing properties.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GevreyError, Result};
use crate::numerics::{log_factorial, LogFactorialCursor, LogMagnitude};

/// Bound on the Stirling comparison residual, as a multiple of `σ ln p`.
///
/// Fitted once over τ ∈ {0.25, 0.5, 1, 2}, σ ∈ {1.25, 1.5, 2, 3}, p ≤ 200
/// (observed maximum 1.5814 at τ = 2, σ = 1.25) and rounded up.
pub const STIRLING_COMPARISON_C: f64 = 1.6;

/// Relative slack used when comparing log-domain quantities.
const LOG_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefiningSequence {
    pub tau: f64,
    pub sigma: f64,
}

impl DefiningSequence {
    pub fn new(tau: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 1.0) || !sigma.is_finite() {
            return Err(GevreyError::SigmaNotAboveOne(sigma));
        }
        Self::with_boundary(tau, sigma)
    }

    /// Accepts the Gevrey boundary `σ = 1`; only some operations allow it.
    pub fn with_boundary(tau: f64, sigma: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(GevreyError::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        if !(sigma >= 1.0) || !sigma.is_finite() {
            return Err(GevreyError::InvalidParameter(format!("sigma must be >= 1, got {sigma}")));
        }
        Ok(Self { tau, sigma })
    }

    /// `ln M_p = τ p^σ ln p` (and `M_0 = 1`).
    #[inline]
    pub fn log_m(&self, p: u64) -> f64 {
        if p <= 1 {
            return 0.0;
        }
        let x = p as f64;
        self.tau * x.powf(self.sigma) * x.ln()
    }

    pub fn eval_log_m(&self, p: u64) -> LogMagnitude {
        LogMagnitude::from_log(self.log_m(p))
    }

    /// `ln(M_p / p!)`
    pub fn log_m_over_factorial(&self, p: u64) -> f64 {
        self.log_m(p) - log_factorial(p).log()
    }

    /// The sequence with `τ` replaced by `τ 2^{σ-1}`.
    pub fn doubled(&self) -> Self {
        Self { tau: self.tau * 2f64.powf(self.sigma - 1.0), sigma: self.sigma }
    }
}

pub fn eval_log_m(seq: &DefiningSequence, p: u64) -> LogMagnitude {
    seq.eval_log_m(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    /// Natural log of the minimal constant valid on the scanned range.
    pub log_value: f64,
    /// Index (or index pair) at which the constant is attained.
    pub argmax: Vec<u64>,
}

impl FittedConstant {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceAuditReport {
    pub tau: f64,
    pub sigma: f64,
    pub p_max: u64,
    pub m1_ok: bool,
    pub m1_failures: Vec<u64>,
    pub ratio_bound_ok: bool,
    pub ratio_bound_failures: Vec<u64>,
    /// `(P, Σ_{p=1}^P M_{p-1}/M_p)`
    pub m3prime_partial_sums: Vec<(u64, f64)>,
    /// First `p` whose increment `M_{p-1}/M_p` is below `1e-12`, if any.
    pub m3prime_increment_below_1e12_at: Option<u64>,
    /// First index from which `(M_p/p!)^{1/p}` is nondecreasing on the range.
    pub almost_increasing_from: u64,
    /// `⌊(1/τ)^{1/(σ-1)}⌋`: beyond it `p^{τ p^{σ-1} - 1}` increases strictly.
    pub almost_increasing_threshold: u64,
    pub fitted_c_m2bar: f64,
    pub fitted_c_m2bar_argmax: (u64, u64),
    /// `(q, ln C_q)`; the constants themselves overflow quickly.
    pub fitted_log_cq_m2prime: Vec<(u64, f64)>,
    pub stirling_ratio_log_residuals: Vec<(u64, f64)>,
    pub stirling_bound_ok: bool,
}

/// Audits the sequence on `1 ≤ p ≤ p_max`.
pub fn audit_sequence(seq: &DefiningSequence, p_max: u64) -> Result<SequenceAuditReport> {
    if !(seq.sigma > 1.0) {
        return Err(GevreyError::SigmaNotAboveOne(seq.sigma));
    }
    if p_max < 3 {
        return Err(GevreyError::InvalidParameter("p_max must be >= 3".into()));
    }
    let logs: Vec<f64> = (0..=p_max + 1).map(|p| seq.log_m(p)).collect();

    let m1_failures: Vec<u64> = (1..=p_max)
        .filter(|&p| {
            let (a, b, c) = (logs[p as usize - 1], logs[p as usize], logs[p as usize + 1]);
            2.0 * b > a + c + LOG_TOL * c.abs().max(1.0)
        })
        .collect();

    let ratio_bound_failures: Vec<u64> = (1..=p_max)
        .filter(|&p| {
            let lhs = logs[p as usize - 1] - logs[p as usize];
            let rhs = -seq.tau * ((p - 1) as f64).powf(seq.sigma - 1.0) * (2.0 * p as f64).ln();
            lhs > rhs + LOG_TOL * rhs.abs().max(1.0)
        })
        .collect();

    let mut partial = 0.0f64;
    let mut m3prime_partial_sums = Vec::with_capacity(p_max as usize);
    let mut first_small = None;
    for p in 1..=p_max {
        let inc = (logs[p as usize - 1] - logs[p as usize]).exp();
        if first_small.is_none() && inc < 1e-12 {
            first_small = Some(p);
        }
        partial += inc;
        m3prime_partial_sums.push((p, partial));
    }

    let root: Vec<f64> = (1..=p_max).map(|p| seq.log_m_over_factorial(p) / p as f64).collect();
    let mut almost_increasing_from = p_max;
    for i in (0..root.len().saturating_sub(1)).rev() {
        if root[i] <= root[i + 1] + LOG_TOL * root[i + 1].abs().max(1.0) {
            almost_increasing_from = i as u64 + 1;
        } else {
            break;
        }
    }
    let almost_increasing_threshold = (1.0 / seq.tau).powf(1.0 / (seq.sigma - 1.0)).floor() as u64;

    let (fitted_c_m2bar, fitted_c_m2bar_argmax) = fit_m2bar(seq, p_max);
    let q_max = 10.min(p_max - 1);
    let fitted_log_cq_m2prime: Vec<(u64, f64)> =
        (1..=q_max).map(|q| (q, fit_m2prime(seq, q, p_max).log_value)).collect();

    let stirling_ratio_log_residuals = stirling_residuals(seq, p_max);
    let stirling_bound_ok = stirling_ratio_log_residuals
        .iter()
        .all(|&(p, r)| r.abs() <= STIRLING_COMPARISON_C * seq.sigma * (p as f64).ln());

    Ok(SequenceAuditReport {
        tau: seq.tau,
        sigma: seq.sigma,
        p_max,
        m1_ok: m1_failures.is_empty(),
        m1_failures,
        ratio_bound_ok: ratio_bound_failures.is_empty(),
        ratio_bound_failures,
        m3prime_partial_sums,
        m3prime_increment_below_1e12_at: first_small,
        almost_increasing_from,
        almost_increasing_threshold,
        fitted_c_m2bar: fitted_c_m2bar.value(),
        fitted_c_m2bar_argmax: (fitted_c_m2bar_argmax.0, fitted_c_m2bar_argmax.1),
        fitted_log_cq_m2prime,
        stirling_ratio_log_residuals,
        stirling_bound_ok,
    })
}

/// Per-pair exponent for `M_{p+q} ≤ C^{p^σ+q^σ} M'_p M'_q`, `M'` the doubled sequence.
pub fn m2bar_exponent(seq: &DefiningSequence, p: u64, q: u64) -> f64 {
    let dbl = seq.doubled();
    let num = seq.log_m(p + q) - dbl.log_m(p) - dbl.log_m(q);
    num / ((p as f64).powf(seq.sigma) + (q as f64).powf(seq.sigma))
}

/// Minimal `C` for `M_{p+q} ≤ C^{p^σ+q^σ} M'_p M'_q` over `p + q ≤ p_max`.
pub fn fit_m2bar(seq: &DefiningSequence, p_max: u64) -> (FittedConstant, (u64, u64)) {
    let best = (0..=p_max)
        .into_par_iter()
        .map(|p| {
            let mut best = (f64::NEG_INFINITY, (0, 0));
            for q in 0..=(p_max - p) {
                if p + q == 0 {
                    continue;
                }
                let v = m2bar_exponent(seq, p, q);
                if v > best.0 {
                    best = (v, (p, q));
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, (0, 0)), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    (FittedConstant { log_value: best.0, argmax: vec![best.1 .0, best.1 .1] }, best.1)
}

/// Minimal `C_q` for `M_{p+q} ≤ C_q^{p^σ} M_p` over `1 ≤ p ≤ p_max - q`.
pub fn fit_m2prime(seq: &DefiningSequence, q: u64, p_max: u64) -> FittedConstant {
    let mut best = (f64::NEG_INFINITY, 0);
    for p in 1..=p_max.saturating_sub(q).max(1) {
        let v = (seq.log_m(p + q) - seq.log_m(p)) / (p as f64).powf(seq.sigma);
        if v > best.0 {
            best = (v, p);
        }
    }
    FittedConstant { log_value: best.0, argmax: vec![best.1] }
}

/// `ln([⌊p^σ⌋]!^{τ/σ}) - ln((2π)^{τ/(2σ)} p^{τ/2} e^{-τ p^σ/σ} M_p)` for `2 ≤ p ≤ p_max`.
pub fn stirling_residuals(seq: &DefiningSequence, p_max: u64) -> Vec<(u64, f64)> {
    let (tau, sigma) = (seq.tau, seq.sigma);
    let mut cursor = LogFactorialCursor::new();
    let mut out = Vec::with_capacity(p_max as usize);
    for p in 2..=p_max {
        let x = p as f64;
        let n = x.powf(sigma).floor() as u64;
        let lhs = tau / sigma * cursor.advance_to(n);
        let rhs = tau / (2.0 * sigma) * (2.0 * std::f64::consts::PI).ln() + tau / 2.0 * x.ln()
            - tau * x.powf(sigma) / sigma
            + seq.log_m(p);
        out.push((p, lhs - rhs));
    }
    out
}

/// `ln( Π (M_{k_i}/k_i!) / (M_k/k!) )`, `k = Σ parts`.
pub fn almost_increasing_pair_bound(seq: &DefiningSequence, parts: &[u64]) -> Result<LogMagnitude> {
    if parts.is_empty() || parts.contains(&0) {
        return Err(GevreyError::InvalidParameter("parts must be nonempty positive naturals".into()));
    }
    let k: u64 = parts.iter().sum();
    let num: f64 = parts.iter().map(|&ki| seq.log_m_over_factorial(ki)).sum();
    Ok(LogMagnitude::from_log(num - seq.log_m_over_factorial(k)))
}

/// Re-indexes a decay profile by `N → ⌈N^σ⌉`.
///
/// Output entry `N` is the input read at index `⌈N^σ⌉`; missing indices are
/// filled by linear interpolation of the log values between the nearest
/// available neighbours. Output stops at the first `N` whose target lies
/// beyond the input range.
pub fn enumerate_transform(decay: &[(u64, LogMagnitude)], sigma: f64) -> Result<Vec<(u64, LogMagnitude)>> {
    if decay.is_empty() {
        return Err(GevreyError::Empty("decay profile"));
    }
    if !(sigma >= 1.0) {
        return Err(GevreyError::InvalidParameter(format!("sigma must be >= 1, got {sigma}")));
    }
    let mut sorted = decay.to_vec();
    sorted.sort_by_key(|e| e.0);
    let n_max = sorted.last().unwrap().0;
    let n_min = sorted[0].0;
    let mut out = vec![];
    for n in 0u64.. {
        let raw = (n as f64).powf(sigma);
        let target = if (raw - raw.round()).abs() < 1e-9 { raw.round() } else { raw.ceil() } as u64;
        if target > n_max {
            break;
        }
        if target < n_min {
            continue;
        }
        out.push((n, read_interpolated(&sorted, target)));
    }
    Ok(out)
}

fn read_interpolated(sorted: &[(u64, LogMagnitude)], t: u64) -> LogMagnitude {
    match sorted.binary_search_by_key(&t, |e| e.0) {
        Ok(i) => sorted[i].1,
        Err(i) => {
            let (lo, hi) = (sorted[i - 1], sorted[i]);
            if !lo.1.is_finite() || !hi.1.is_finite() {
                return lo.1.max(hi.1);
            }
            let w = (t - lo.0) as f64 / (hi.0 - lo.0) as f64;
            LogMagnitude::from_log(lo.1.log() * (1.0 - w) + hi.1.log() * w)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TAU_GRID: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
    pub(crate) const SIGMA_GRID: [f64; 4] = [1.25, 1.5, 2.0, 3.0];

    fn s12() -> DefiningSequence {
        DefiningSequence::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        let s = s12();
        assert!((s.eval_log_m(2).log() - 16f64.ln()).abs() < 1e-12);
        assert!((s.eval_log_m(2).log() - 2.77259).abs() < 1e-5);
        assert_eq!(s.eval_log_m(1).log(), 0.0);
        assert_eq!(s.eval_log_m(0).log(), 0.0);
        assert!((s.eval_log_m(3).log() - 19683f64.ln()).abs() < 1e-12);
        assert!((s.eval_log_m(3).log() - 9.88751).abs() < 1e-5);
    }

    #[test]
    fn rejects_sigma_at_most_one() {
        assert!(DefiningSequence::new(1.0, 1.0).is_err());
        assert!(DefiningSequence::new(0.0, 2.0).is_err());
        let boundary = DefiningSequence::with_boundary(1.0, 1.0).unwrap();
        assert!(audit_sequence(&boundary, 10).is_err());
    }

    #[test]
    fn audit_examples_tau1_sigma2() {
        let r = audit_sequence(&s12(), 40).unwrap();
        assert!(r.m1_ok);
        assert!(r.ratio_bound_ok);
        // 1 + 1/16 + 16/19683 + 19683/4^16
        let expect = 1.0 + 0.0625 + 16.0 / 19683.0 + 19683.0 / 4f64.powi(16);
        assert!((r.m3prime_partial_sums[3].1 - expect).abs() < 1e-12);
        assert!((r.m3prime_partial_sums[3].1 - 1.06331).abs() < 1e-5);
        let incs: Vec<f64> = r
            .m3prime_partial_sums
            .windows(2)
            .map(|w| w[1].1 - w[0].1)
            .take(3)
            .collect();
        assert!(incs.windows(2).all(|w| w[1] < w[0]));
        assert!(r.fitted_c_m2bar >= 4.0 - 1e-12);
        assert_eq!(r.fitted_log_cq_m2prime[0].0, 1);
        assert!((r.fitted_log_cq_m2prime[0].1 - 16f64.ln()).abs() < 1e-12);
        assert!(r.stirling_bound_ok);
    }

    #[test]
    fn ratio_bound_at_p2() {
        let s = s12();
        let lhs = (s.log_m(1) - s.log_m(2)).exp();
        assert!((lhs - 1.0 / 16.0).abs() < 1e-15);
        assert!(lhs <= 0.25);
    }

    #[test]
    fn m1_on_grid() {
        for &t in &TAU_GRID {
            for &sg in &SIGMA_GRID {
                let s = DefiningSequence::new(t, sg).unwrap();
                for p in 1..=200u64 {
                    assert!(2.0 * s.log_m(p) <= s.log_m(p - 1) + s.log_m(p + 1) + 1e-9, "({t},{sg}) p={p}");
                }
            }
        }
    }

    #[test]
    fn almost_increasing_threshold_property() {
        for &t in &TAU_GRID {
            for &sg in &SIGMA_GRID {
                let thr = (1.0 / t).powf(1.0 / (sg - 1.0));
                let f = |p: f64| (t * p.powf(sg - 1.0) - 1.0) * p.ln();
                let start = (thr.floor() as u64 + 1).max(1);
                for p in start..200u64 {
                    if (p as f64) <= thr {
                        continue;
                    }
                    assert!(f(p as f64) < f((p + 1) as f64), "({t},{sg}) p={p}");
                }
            }
        }
    }

    #[test]
    fn fitted_constants_monotone_in_range() {
        let s = DefiningSequence::new(0.5, 1.5).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for p_max in [5u64, 10, 20, 40] {
            let (c, _) = fit_m2bar(&s, p_max);
            assert!(c.log_value >= prev);
            prev = c.log_value;
        }
        let r = audit_sequence(&s, 40).unwrap();
        assert!(r.fitted_log_cq_m2prime.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn m2bar_constant_for_sigma_two_is_four() {
        // Exponent equals 2 ln 2 on the whole diagonal and is below it elsewhere.
        let s = s12();
        let (c, _) = fit_m2bar(&s, 60);
        assert!((c.value() - 4.0).abs() < 1e-9, "C = {}", c.value());
        for p in 1..30 {
            assert!((m2bar_exponent(&s, p, p) - 2f64.ln() * 2.0).abs() < 1e-12);
            assert!(m2bar_exponent(&s, p, p + 1) < 4f64.ln());
        }
    }

    #[test]
    fn stirling_constant_covers_grid() {
        let mut worst = 0.0f64;
        for &t in &TAU_GRID {
            for &sg in &SIGMA_GRID {
                let s = DefiningSequence::new(t, sg).unwrap();
                for (p, r) in stirling_residuals(&s, 200) {
                    worst = worst.max(r.abs() / (sg * (p as f64).ln()));
                }
            }
        }
        assert!(worst <= STIRLING_COMPARISON_C, "worst = {worst}");
    }

    #[test]
    fn pair_bound_examples() {
        let s = s12();
        assert_eq!(almost_increasing_pair_bound(&s, &[5]).unwrap().log(), 0.0);
        let r = almost_increasing_pair_bound(&s, &[2, 2]).unwrap().to_real();
        assert!((r - 64.0 * 24.0 / 4f64.powi(16)).abs() < 1e-18);
        assert!((r / 3.58e-7 - 1.0).abs() < 1e-2);
        for &t in &[1.0, 2.0] {
            for &sg in &SIGMA_GRID {
                let s = DefiningSequence::new(t, sg).unwrap();
                for k in 1..30 {
                    let ones = vec![1u64; k];
                    assert!(almost_increasing_pair_bound(&s, &ones).unwrap().log() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn enumerate_transform_examples() {
        let decay: Vec<(u64, LogMagnitude)> = (0..=20).map(|n| (n, LogMagnitude::from_log(n as f64 * 0.5))).collect();
        let same = enumerate_transform(&decay, 1.0).unwrap();
        assert_eq!(same, decay);
        let sq = enumerate_transform(&decay, 2.0).unwrap();
        assert_eq!(sq[3], (3, decay[9].1));
        assert_eq!(sq.len(), 5);
        assert!(sq.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(enumerate_transform(&[], 2.0).is_err());
    }

    #[test]
    fn enumerate_transform_interpolates_gaps() {
        let decay = vec![(0, LogMagnitude::from_log(0.0)), (4, LogMagnitude::from_log(4.0)), (10, LogMagnitude::from_log(1.0))];
        let out = enumerate_transform(&decay, 1.5).unwrap();
        // N = 2 → ⌈2^1.5⌉ = 3 → interpolate 0..4
        assert_eq!(out[2].0, 2);
        assert!((out[2].1.log() - 3.0).abs() < 1e-12);
    }
}
