mod analysis;
mod parametrix;
mod wavefront;

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::args::{Cli, Command};
use crate::config::Tolerances;
use crate::CliError;

pub(crate) struct Output {
    pub result: Value,
    /// JSON lines after the report header.
    pub records: Option<Vec<Value>>,
    /// Where the report goes; stdout when `None`.
    pub report_path: Option<PathBuf>,
    pub files: Vec<(PathBuf, String)>,
}

impl Output {
    pub fn new<T: Serialize>(result: &T, report_path: Option<&PathBuf>) -> Self {
        Output { result: to_value(result), records: None, report_path: report_path.cloned(), files: Vec::new() }
    }

    pub fn with_csv(mut self, path: Option<&PathBuf>, header: &str, rows: impl IntoIterator<Item = String>) -> Self {
        if let Some(p) = path {
            let mut text = String::from(header);
            text.push('\n');
            for r in rows {
                text.push_str(&r);
                text.push('\n');
            }
            self.files.push((p.clone(), text));
        }
        self
    }
}

pub(crate) fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn tolerances(cli: &Cli) -> Tolerances {
    let g = &cli.global;
    Tolerances { tol_identity: g.tol_identity, tol_exact: g.tol_exact, tol_oracle: g.tol_oracle, fit_margin: g.fit_margin }
}

pub(crate) fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    let tol = tolerances(cli);
    for (name, v) in [("tol-identity", tol.tol_identity), ("tol-exact", tol.tol_exact), ("tol-oracle", tol.tol_oracle), ("fit-margin", tol.fit_margin)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(CliError::Invalid(format!("--{name} must be positive, got {v}")));
        }
    }
    match &cli.command {
        Command::SeqAudit(a) => analysis::seq_audit(a),
        Command::Decomp(a) => analysis::decomp(a),
        Command::Fdb(a) => analysis::fdb(a, &tol),
        Command::Lemma23(a) => analysis::lemma23(a),
        Command::Fit(a) => analysis::fit(a, &tol),
        Command::WfScan(a) => wavefront::wf_scan(a),
        Command::Parametrix(a) => parametrix::parametrix(a, &tol),
        Command::Catalog(a) => wavefront::catalog(a),
    }
}

/// `{ "exact": "p/q" | null, "value": f64 }`
#[derive(Clone, Debug, PartialEq, Serialize)]
pub(crate) struct NumberView {
    pub exact: Option<String>,
    pub value: f64,
}

impl From<&gevrey_core::jets::Number> for NumberView {
    fn from(n: &gevrey_core::jets::Number) -> Self {
        use gevrey_core::jets::Number;
        NumberView {
            exact: match n {
                Number::Exact(r) => Some(r.to_string()),
                Number::Float(_) => None,
            },
            value: n.to_f64(),
        }
    }
}
