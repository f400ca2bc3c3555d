use serde::Serialize;

use gevrey_core::parametrix::{
    bound_audit, build_reduction_operators, ellipticity_bounds, fit_word_growth, neumann_sums_range, residual_identity_check_all,
    word_counts, xi_samples, BoundAudit, BoxRegion, Ellipticity, Residual,
};
use gevrey_core::wavefront::{make_cutoff, Cone, GridSpec};
use gevrey_core::{DiffOperator, MultiIndex};

use super::Output;
use crate::args::ParametrixArgs;
use crate::config::Tolerances;
use crate::CliError;

/// Directions sampled on the cone when bounding `|P_m|`.
const ELLIPTICITY_SAMPLES: usize = 65;

#[derive(Serialize)]
struct CoefficientSummary {
    j: usize,
    delta: MultiIndex,
    terms: usize,
    degrees: Vec<i64>,
}

#[derive(Serialize)]
struct Homogeneity {
    terms: usize,
    /// Terms whose degree differs from `-j`.
    exceptions: usize,
}

#[derive(Serialize)]
struct SumSummary {
    n: usize,
    k1: Vec<usize>,
    k2: Vec<usize>,
    w_words: usize,
    e_words: usize,
    residual: Residual,
    pass: bool,
}

#[derive(Serialize)]
struct WordGrowth {
    /// `(N, |w_N|, |e_N|)`
    counts: Vec<(usize, u64, u64)>,
    a: f64,
    c: f64,
    within_envelope: bool,
}

#[derive(Serialize)]
struct ParametrixReport {
    operator: String,
    dim: usize,
    order: usize,
    cone: Cone,
    cutoff_center: Vec<f64>,
    r_plateau: f64,
    r_support: f64,
    region: BoxRegion,
    x_points: usize,
    xi_samples: usize,
    ellipticity: Ellipticity,
    reduction: Vec<CoefficientSummary>,
    homogeneity: Homogeneity,
    sums: Vec<SumSummary>,
    identity_ok: bool,
    word_growth: WordGrowth,
    bound_audit: BoundAudit,
}

fn split(v: &[f64], d: usize, what: &str) -> Result<(Vec<f64>, f64, f64), CliError> {
    if v.len() != d + 2 {
        return Err(CliError::Invalid(format!("--{what} needs {} numbers for a {d}-dimensional operator, got {}", d + 2, v.len())));
    }
    Ok((v[..d].to_vec(), v[d], v[d + 1]))
}

pub(crate) fn parametrix(a: &ParametrixArgs, tol: &Tolerances) -> Result<Output, CliError> {
    let op = DiffOperator::parse(&a.op)?;
    let (d, m) = (op.dim(), op.order());
    if a.n < m {
        return Err(CliError::Invalid(format!("--N must be at least the order {m}")));
    }
    let (dir, half, xi_min) = split(&a.cone, d, "cone")?;
    if !(xi_min > 0.0) {
        return Err(CliError::Invalid(format!("the cone must stay away from xi = 0, got xi_min = {xi_min}")));
    }
    let cone = Cone::new(&dir, half, xi_min)?;
    let (x0, rp, rs) = split(&a.phi, d, "phi")?;
    let lo = x0.iter().cloned().fold(f64::INFINITY, f64::min) - 1.5 * rs;
    let hi = x0.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.5 * rs;
    let grid = GridSpec::cube(d, if d == 1 { 1024 } else { 128 }, lo, hi)?;
    let cutoff = make_cutoff(&x0, rp, rs, &grid, a.tau, a.sigma)?;
    let phi = |x: &[f64], o: usize| Ok(cutoff.jet_at(x, o)?.to_complex());

    let region = BoxRegion::new(x0.iter().map(|c| c - rs).collect(), x0.iter().map(|c| c + rs).collect())?;
    let ellipticity = ellipticity_bounds(&op, &region, &cone, ELLIPTICITY_SAMPLES)?;
    if let Ellipticity::CharHit { x, xi } = &ellipticity {
        return Err(CliError::Invalid(format!("cone meets the characteristic set at x = {x:?}, xi = {xi:?}")));
    }

    let red = build_reduction_operators(&op)?;
    let mut reduction = Vec::new();
    let (mut terms, mut exceptions) = (0, 0);
    for r in &red.operators {
        for (delta, sum) in &r.coeffs {
            let degrees = sum.degrees(m);
            terms += degrees.len();
            exceptions += degrees.iter().filter(|&&g| g != -(r.j as i64)).count();
            reduction.push(CoefficientSummary { j: r.j, delta: delta.clone(), terms: degrees.len(), degrees });
        }
    }

    let xs = region.grid(a.points.unwrap_or(if d == 1 { 256 } else { 16 }));
    let xis = xi_samples(&cone, a.xi_count);
    let all = neumann_sums_range(&red, &phi, (m, a.n), &xs, &xis)?;
    let residuals = residual_identity_check_all(&red, &all, &phi)?;
    let sums: Vec<SumSummary> = all
        .iter()
        .zip(residuals)
        .map(|(s, r)| SumSummary {
            n: s.n,
            k1: s.k1.clone(),
            k2: s.k2.clone(),
            w_words: s.w_words.len(),
            e_words: s.e_words.len(),
            residual: r,
            pass: r.max_abs <= tol.tol_identity,
        })
        .collect();
    let identity_ok = sums.iter().all(|s| s.pass);

    let counts: Vec<(usize, u64, u64)> = (m..=a.n).map(|n| {
        let (w, e) = word_counts(m, n);
        (n, w, e)
    }).collect();
    let samples: Vec<(usize, u64)> = counts.iter().map(|&(n, w, _)| (n, w)).collect();
    let (ga, gc) = fit_word_growth(&samples);
    let within_envelope = samples.iter().all(|&(n, w)| w as f64 <= ga * gc.powi(n as i32) * (1.0 + tol.tol_exact));

    let audit_xs = region.grid(a.audit_points.unwrap_or(if d == 1 { 9 } else { 5 }));
    let audit_xis = xi_samples(&cone, a.audit_xi);
    let audit = bound_audit(&red, &phi, a.n, a.beta_max, a.tau, a.sigma, a.distribution_order, &audit_xs, &audit_xis)?;

    let rows: Vec<String> = audit.word_bound.n_values.iter().zip(&audit.word_bound.log_sup).map(|(n, l)| format!("{n},{l}")).collect();
    let report = ParametrixReport {
        operator: op.to_string(),
        dim: d,
        order: m,
        cone,
        cutoff_center: x0,
        r_plateau: rp,
        r_support: rs,
        region,
        x_points: xs.len(),
        xi_samples: xis.len(),
        ellipticity,
        reduction,
        homogeneity: Homogeneity { terms, exceptions },
        sums,
        identity_ok,
        word_growth: WordGrowth { counts, a: ga, c: gc, within_envelope },
        bound_audit: audit,
    };
    Ok(Output::new(&report, a.out.as_ref()).with_csv(a.csv.as_ref(), "n,log_sup", rows))
}
