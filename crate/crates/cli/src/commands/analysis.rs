use num_traits::ToPrimitive;
use serde::Serialize;

use gevrey_core::faadibruno::{fdb_derivative, lemma23_constant_search, Lemma23Fit};
use gevrey_core::jets::{composition_partial, FunctionSpec, Number};
use gevrey_core::multiindex::{decomposition_census, for_each_decomposition, Census, Decomposition};
use gevrey_core::numerics::parse_rational;
use gevrey_core::regularity::{fit_regularity_with_tolerance, DerivativeGrowthData, RegularityFit};
use gevrey_core::sequences::{audit_sequence, DefiningSequence};
use gevrey_core::{GevreyError, MultiIndex};

use super::{read, to_value, NumberView, Output};
use crate::args::{DecompArgs, FdbArgs, FitArgs, Lemma23Args, SeqAuditArgs};
use crate::config::Tolerances;
use crate::CliError;

/// Most decompositions `decomp` will list.
pub const MAX_LISTED: u64 = 1_000_000;

pub(crate) fn seq_audit(a: &SeqAuditArgs) -> Result<Output, CliError> {
    let seq = DefiningSequence::new(a.tau, a.sigma)?;
    let report = audit_sequence(&seq, a.pmax)?;
    let rows = report
        .m3prime_partial_sums
        .iter()
        .map(|&(p, s)| format!("{p},{},{s}", seq.log_m(p)))
        .collect::<Vec<_>>();
    Ok(Output::new(&report, a.out.as_ref()).with_csv(a.csv.as_ref(), "p,log_m,m3prime_partial_sum", rows))
}

#[derive(Serialize)]
struct DecompHeader<'a> {
    alpha: &'a MultiIndex,
    census: &'a Census,
    listed: bool,
}

pub(crate) fn decomp(a: &DecompArgs) -> Result<Output, CliError> {
    let alpha = MultiIndex::new(a.alpha.clone());
    let census = decomposition_census(&alpha)?;
    let mut out = Output::new(&DecompHeader { alpha: &alpha, census: &census, listed: !a.census }, a.out.as_ref());
    if a.census {
        out.records = Some(vec![to_value(&census)]);
        return Ok(out);
    }
    if census.count.to_u64().is_none_or(|c| c > MAX_LISTED) {
        return Err(GevreyError::Budget(format!("{} decompositions exceed the listing limit {MAX_LISTED}; use --census", census.count)).into());
    }
    let mut records = Vec::new();
    for_each_decomposition(&alpha, |d: &Decomposition| records.push(to_value(d)))?;
    out.records = Some(records);
    Ok(out)
}

#[derive(Serialize)]
struct FdbTermView {
    decomposition: Decomposition,
    value: NumberView,
}

#[derive(Serialize)]
struct JetCheck {
    oracle: NumberView,
    abs_error: f64,
    pass: bool,
}

#[derive(Serialize)]
struct FdbReport {
    f: String,
    g: String,
    alpha: MultiIndex,
    at: Vec<String>,
    value: NumberView,
    terms: Vec<FdbTermView>,
    jet_check: Option<JetCheck>,
}

fn spec(s: &str) -> Result<FunctionSpec, CliError> {
    Ok(FunctionSpec::parse(s)?)
}

pub(crate) fn fdb(a: &FdbArgs, tol: &Tolerances) -> Result<Output, CliError> {
    let (f, g) = (spec(&a.f)?, spec(&a.g)?);
    let alpha = MultiIndex::new(a.alpha.clone());
    let at = a.at.iter().map(|s| parse_rational(s.trim())).collect::<Result<Vec<_>, _>>()?;
    if at.len() != alpha.dim() {
        return Err(CliError::Invalid(format!("--at has {} coordinates but --alpha has {}", at.len(), alpha.dim())));
    }
    let v = fdb_derivative(&f, &g, &alpha, &at)?;
    let jet_check = if a.check_jet {
        let oracle = composition_partial(&f, &g, &alpha, &at)?;
        let (x, y) = (v.value.to_f64(), oracle.to_f64());
        let pass = match (&v.value, &oracle) {
            (Number::Exact(p), Number::Exact(q)) => p == q,
            _ => (x - y).abs() <= tol.tol_oracle * y.abs().max(1.0),
        };
        Some(JetCheck { oracle: NumberView::from(&oracle), abs_error: (x - y).abs(), pass })
    } else {
        None
    };
    let report = FdbReport {
        f: f.to_string(),
        g: g.to_string(),
        alpha,
        at: at.iter().map(|r| r.to_string()).collect(),
        value: NumberView::from(&v.value),
        terms: v.terms.iter().map(|t| FdbTermView { decomposition: t.decomposition.clone(), value: NumberView::from(&t.value) }).collect(),
        jet_check,
    };
    Ok(Output::new(&report, a.out.as_ref()))
}

pub(crate) fn lemma23(a: &Lemma23Args) -> Result<Output, CliError> {
    let seq = DefiningSequence::new(a.tau, a.sigma)?;
    let fit: Lemma23Fit = lemma23_constant_search(&seq, a.kmax)?;
    let rows = fit.per_k.iter().map(|(k, l)| format!("{k},{l}")).collect::<Vec<_>>();
    Ok(Output::new(&fit, a.out.as_ref()).with_csv(a.csv.as_ref(), "k,log_c_k", rows))
}

#[derive(Serialize)]
struct FitReport {
    n_max: usize,
    sigma_grid: Vec<f64>,
    fit: RegularityFit,
}

pub(crate) fn fit(a: &FitArgs, tol: &Tolerances) -> Result<Output, CliError> {
    let data = DerivativeGrowthData::from_csv(&read(&a.data)?)?;
    let fit = fit_regularity_with_tolerance(&data, &a.sigma_grid, tol.fit_margin)?;
    let rows = fit.residuals.iter().map(|(n, r)| format!("{n},{r}")).collect::<Vec<_>>();
    let report = FitReport { n_max: data.n_max(), sigma_grid: a.sigma_grid.clone(), fit };
    Ok(Output::new(&report, a.out.as_ref()).with_csv(a.csv.as_ref(), "n,residual", rows))
}
