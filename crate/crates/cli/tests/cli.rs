use std::path::Path;

use gevrey_cli::{run, Report, EXIT_INVALID, EXIT_IO, EXIT_OK, REPORT_SCHEMA};
use gevrey_core::regularity::DerivativeGrowthData;
use gevrey_core::GridField;
use serde_json::Value;

fn gevrey(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("gevrey").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn ok_report(args: &[&str]) -> Report {
    let (code, out, err) = gevrey(args);
    assert_eq!(code, EXIT_OK, "{args:?}: {err}");
    serde_json::from_str(out.lines().next().filter(|l| l.starts_with('{') && l.ends_with('}')).unwrap_or(&out)).unwrap()
}

fn schema_errors(doc: &Value) -> Vec<String> {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    v.iter_errors(doc).map(|e| e.to_string()).collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn seq_audit_example() {
    let r = ok_report(&["seq-audit", "--tau", "1", "--sigma", "2", "--pmax", "40"]);
    assert_eq!(r.result["m1_ok"], Value::Bool(true));
    assert_eq!(r.config.command, "seq-audit");
    assert_eq!(r.config.parameters["pmax"], Value::from(40));
}

#[test]
fn fdb_example() {
    let r = ok_report(&["fdb", "--f", "poly:0,0,1", "--g", "poly:0,0,0,1", "--alpha", "2", "--at", "1", "--check-jet"]);
    assert_eq!(r.result["value"]["exact"], Value::from("30"));
    assert_eq!(r.result["jet_check"]["pass"], Value::Bool(true));
    let r = ok_report(&["fdb", "--f", "sin", "--g", "mvpoly:1.0:1,0.1:2", "--alpha", "2,1", "--at", "1/3,-1/2", "--check-jet"]);
    assert!(r.result["value"]["exact"].is_null());
    assert_eq!(r.result["jet_check"]["pass"], Value::Bool(true));
}

#[test]
fn unknown_flag_exits_one_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let (code, stdout, stderr) = gevrey(&["seq-audit", "--tau", "1", "--sigma", "2", "--frobnicate", "--out", p(&out)]);
    assert_eq!(code, EXIT_INVALID);
    assert!(stdout.is_empty() && !stderr.is_empty());
    assert!(!out.exists());
    let (code, stdout, _) = gevrey(&["no-such-command"]);
    assert_eq!((code, stdout.is_empty()), (EXIT_INVALID, true));
}

#[test]
fn failed_validation_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let (code, stdout, _) = gevrey(&["seq-audit", "--tau", "1", "--sigma", "0.5", "--out", p(&out)]);
    assert_eq!(code, EXIT_INVALID);
    assert!(stdout.is_empty() && !out.exists());
    let (code, _, err) = gevrey(&["seq-audit", "--tau", "1", "--sigma", "2", "--tol-identity", "0"]);
    assert_eq!(code, EXIT_INVALID, "{err}");
}

#[test]
fn help_lists_every_command() {
    let (code, out, _) = gevrey(&["--help"]);
    assert_eq!(code, EXIT_OK);
    for c in ["seq-audit", "decomp", "fdb", "lemma23", "fit", "wf-scan", "parametrix", "catalog"] {
        assert!(out.contains(c), "{c}");
        let (code, sub, _) = gevrey(&[c, "--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(sub.contains("--threads") && sub.contains("--seed"), "{c}");
    }
}

#[test]
fn io_errors_exit_two() {
    let (code, out, err) = gevrey(&["fit", "--data", "/nonexistent/growth.csv"]);
    assert_eq!(code, EXIT_IO, "{err}");
    assert!(out.is_empty());
    let (code, _, _) = gevrey(&["wf-scan", "--field", "/nonexistent/u.gf", "--tau", "1", "--sigma", "2"]);
    assert_eq!(code, EXIT_IO);
}

#[test]
fn malformed_gridfield_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.gf");
    std::fs::write(&f, "GRIDFIELD 1 1 4 0 0.25 real\n1 2 3\n").unwrap();
    let (code, _, err) = gevrey(&["wf-scan", "--field", p(&f), "--tau", "1", "--sigma", "2"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("GRIDFIELD"), "{err}");
}

#[test]
fn catalog_fields_are_valid() {
    let dir = tempfile::tempdir().unwrap();
    let r = ok_report(&["catalog", "--out", p(dir.path()), "--n", "256", "--n2d", "64"]);
    let files = r.result["files"].as_array().unwrap();
    assert!(files.len() >= 4);
    for f in files {
        let text = std::fs::read_to_string(f["file"].as_str().unwrap()).unwrap();
        assert!(text.starts_with("GRIDFIELD 1 "));
        let u = GridField::parse(&text).unwrap();
        assert_eq!(u.to_text(), text);
    }
    let step = GridField::parse(&std::fs::read_to_string(dir.path().join("step2d.gf")).unwrap()).unwrap();
    for (k, z) in step.samples.iter().enumerate() {
        let x = step.grid.point(k)[0];
        if x < 0.0 {
            assert_eq!(z.re, 0.0);
        } else if x > 0.0 {
            assert_eq!(z.re, 1.0);
        }
    }
    // the kink is piecewise linear, so centered differences are exact away from 0
    assert!(r.result["kink_ode_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn wf_scan_of_delta() {
    let dir = tempfile::tempdir().unwrap();
    ok_report(&["catalog", "--out", p(dir.path()), "--n2d", "64"]);
    let csv = dir.path().join("profiles.csv");
    let field = dir.path().join("delta.gf");
    let r = ok_report(&["wf-scan", "--field", p(&field), "--tau", "1", "--sigma", "2", "--csv", p(&csv)]);
    let entries = r.result["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 6);
    for e in entries {
        let x = e["point"][0].as_f64().unwrap();
        assert_eq!(e["verdict"]["regular"].as_bool().unwrap(), x != 0.0, "{e}");
    }
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("point_index,direction_index,n,log_value\n"));
    assert_eq!(rows.lines().count(), 1 + 6 * 17);

    let pts = dir.path().join("pts.txt");
    std::fs::write(&pts, "# x\n0\n0.75\n").unwrap();
    let r = ok_report(&["wf-scan", "--field", p(&field), "--points", p(&pts), "--tau", "1", "--sigma", "2"]);
    assert_eq!(r.result["summary"]["singular"], Value::from(2));
    assert_eq!(r.config.inputs["points"], p(&pts));
}

#[test]
fn fit_recovers_sigma_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("growth.csv");
    std::fs::write(&data, DerivativeGrowthData::synthetic(1.0, 2.0, 1.0, 1.0, 24).to_csv()).unwrap();
    let r = ok_report(&["fit", "--data", p(&data), "--sigma-grid", "1.5,2,2.5,3"]);
    assert_eq!(r.result["fit"]["sigma_hat"].as_f64(), Some(2.0));
    assert_eq!(r.config.inputs["data"], p(&data));
}

#[test]
fn parametrix_report() {
    let r = ok_report(&["parametrix", "--op", "D^2 + sin*D + poly:1", "--N", "6", "--cone", "1,0.5,100", "--phi", "0,0.3,0.9", "--points", "32", "--xi-count", "5"]);
    assert_eq!(r.result["identity_ok"], Value::Bool(true));
    assert_eq!(r.result["homogeneity"]["exceptions"], Value::from(0));
    assert_eq!(r.result["sums"].as_array().unwrap().len(), 5);
    let (code, _, err) = gevrey(&["parametrix", "--op", "poly:0,1*D", "--N", "4", "--cone", "1,0.5,10", "--phi", "0,0.3,0.9"]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("characteristic"), "{err}");
    let (code, _, _) = gevrey(&["parametrix", "--op", "D^(2,0) + D^(0,2)", "--cone", "1,0.5,100", "--phi", "0,0.3,0.9"]);
    assert_eq!(code, EXIT_INVALID);
}

#[test]
fn reports_match_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("growth.csv");
    std::fs::write(&data, DerivativeGrowthData::synthetic(0.5, 1.5, 2.0, 1.0, 12).to_csv()).unwrap();
    let cat = dir.path().join("cat");
    let runs: Vec<Vec<String>> = vec![
        vec!["seq-audit", "--tau", "0.5", "--sigma", "1.5", "--pmax", "30"],
        vec!["decomp", "--alpha", "2,2"],
        vec!["decomp", "--alpha", "4", "--census"],
        vec!["fdb", "--f", "exp", "--g", "poly:0,1,1", "--alpha", "3", "--at", "0"],
        vec!["lemma23", "--tau", "1", "--sigma", "2", "--kmax", "6"],
        vec!["fit", "--data", p(&data)],
        vec!["catalog", "--out", p(&cat), "--n", "128", "--n2d", "32"],
        vec!["parametrix", "--op", "D", "--N", "3", "--cone", "1,0.5,50", "--phi", "0,0.3,0.9", "--points", "8", "--xi-count", "3"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    for args in &runs {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, out, err) = gevrey(&a);
        assert_eq!(code, EXIT_OK, "{args:?}: {err}");
        let head: Value = serde_json::from_str(if args[0] == "decomp" { out.lines().next().unwrap() } else { &out }).unwrap();
        assert_eq!(schema_errors(&head), Vec::<String>::new(), "{args:?}");
    }
    let field = cat.join("kink.gf");
    let (_, out, _) = gevrey(&["wf-scan", "--field", p(&field), "--tau", "1", "--sigma", "2"]);
    assert_eq!(schema_errors(&serde_json::from_str(&out).unwrap()), Vec::<String>::new());
    let mut bad: Value = serde_json::from_str(&out).unwrap();
    bad["schema_version"] = Value::from(2);
    assert!(!schema_errors(&bad).is_empty());
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let base = ["lemma23", "--tau", "0.5", "--sigma", "1.5", "--kmax", "8"];
    let (c1, _, _) = gevrey(&[&base[..], &["--out", p(&a), "--threads", "1"]].concat());
    let (c2, _, _) = gevrey(&[&base[..], &["--out", p(&b), "--threads", "3"]].concat());
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    let (ta, tb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta.replace(p(&a), "OUT"), tb.replace(p(&b), "OUT"));
}

#[test]
fn report_alone_repeats_the_run() {
    let r = ok_report(&["fdb", "--f", "recip", "--g", "poly:2,1", "--alpha", "4", "--at", "-1/2", "--check-jet", "--seed", "7", "--tol-oracle", "1e-10"]);
    assert_eq!(r.config.seed, 7);
    let argv = r.config.argv();
    let (code, out, err) = gevrey(&argv[1..].iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code, EXIT_OK, "{argv:?}: {err}");
    let again: Report = serde_json::from_str(&out).unwrap();
    assert_eq!(again, r);
}
