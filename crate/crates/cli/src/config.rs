use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::{Cli, Command, GlobalArgs};

/// Bumped whenever a report field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// JSON Schema of the report envelope and of each command's result.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_identity: f64,
    pub tol_exact: f64,
    pub tol_oracle: f64,
    pub fit_margin: f64,
}

/// Everything needed to repeat a run. The worker count is left out: it never
/// changes a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    /// Flag name to path.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub version: String,
}

fn path_string(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn params<T: Serialize>(args: &T) -> BTreeMap<String, Value> {
    match serde_json::to_value(args).expect("arguments serialize") {
        Value::Object(map) => map.into_iter().collect(),
        _ => BTreeMap::new(),
    }
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Self {
        let mut inputs = BTreeMap::new();
        let mut outputs = BTreeMap::new();
        let mut out = |k: &str, p: &Option<std::path::PathBuf>| {
            if let Some(p) = p {
                outputs.insert(k.to_string(), path_string(p));
            }
        };
        let parameters = match &cli.command {
            Command::SeqAudit(a) => {
                out("out", &a.out);
                out("csv", &a.csv);
                params(a)
            }
            Command::Decomp(a) => {
                out("out", &a.out);
                params(a)
            }
            Command::Fdb(a) => {
                out("out", &a.out);
                params(a)
            }
            Command::Lemma23(a) => {
                out("out", &a.out);
                out("csv", &a.csv);
                params(a)
            }
            Command::Fit(a) => {
                out("out", &a.out);
                out("csv", &a.csv);
                inputs.insert("data".into(), path_string(&a.data));
                params(a)
            }
            Command::WfScan(a) => {
                out("out", &a.out);
                out("csv", &a.csv);
                inputs.insert("field".into(), path_string(&a.field));
                if !a.points.starts_with("grid") {
                    inputs.insert("points".into(), a.points.clone());
                }
                params(a)
            }
            Command::Parametrix(a) => {
                out("out", &a.out);
                out("csv", &a.csv);
                params(a)
            }
            Command::Catalog(a) => {
                out("out", &Some(a.out.clone()));
                params(a)
            }
        };
        let GlobalArgs { seed, tol_identity, tol_exact, tol_oracle, fit_margin, .. } = cli.global.clone();
        RunConfig {
            command: cli.command.name().to_string(),
            parameters,
            inputs,
            outputs,
            seed,
            tolerances: Tolerances { tol_identity, tol_exact, tol_oracle, fit_margin },
            version: format!("gevrey {}", env!("CARGO_PKG_VERSION")),
        }
    }

    /// Command line that repeats the run.
    pub fn argv(&self) -> Vec<String> {
        let mut v = vec!["gevrey".to_string(), self.command.clone()];
        let scalar = |x: &Value| match x {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        for (k, x) in &self.parameters {
            match x {
                Value::Null | Value::Bool(false) => {}
                Value::Bool(true) => v.push(format!("--{k}")),
                Value::Array(items) => {
                    v.push(format!("--{k}"));
                    v.push(items.iter().map(scalar).collect::<Vec<_>>().join(","));
                }
                other => {
                    v.push(format!("--{k}"));
                    v.push(scalar(other));
                }
            }
        }
        for (k, p) in self.inputs.iter().chain(&self.outputs) {
            if self.parameters.contains_key(k) {
                continue;
            }
            v.push(format!("--{k}"));
            v.push(p.clone());
        }
        let t = &self.tolerances;
        for (k, x) in [("seed", self.seed as f64), ("tol-identity", t.tol_identity), ("tol-exact", t.tol_exact), ("tol-oracle", t.tol_oracle), ("fit-margin", t.fit_margin)] {
            v.push(format!("--{k}"));
            v.push(if k == "seed" { self.seed.to_string() } else { x.to_string() });
        }
        v
    }
}

/// The document every command writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub result: Value,
}
