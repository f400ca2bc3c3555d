use serde::Serialize;

use gevrey_core::wavefront::{catalog_field, resolve_params, wf_scan_with_profiles, CatalogField, ScanEntry, ScanParams};
use gevrey_core::GridField;

use super::{read, Output};
use crate::args::{CatalogArgs, WfScanArgs};
use crate::CliError;

/// `K` points per axis at `origin + extent (i + 1) / (K + 1)`.
fn interior_grid(u: &GridField, k: usize) -> Vec<Vec<f64>> {
    let g = &u.grid;
    let axis = |a: usize| -> Vec<f64> {
        let extent = g.sizes[a] as f64 * g.spacing[a];
        (0..k).map(|i| g.origin[a] + extent * (i + 1) as f64 / (k + 1) as f64).collect()
    };
    let mut pts: Vec<Vec<f64>> = vec![vec![]];
    for a in 0..g.dim() {
        let xs = axis(a);
        pts = pts.into_iter().flat_map(|p| xs.iter().map(move |&x| [p.clone(), vec![x]].concat())).collect();
    }
    pts
}

fn parse_points(spec: &str, u: &GridField) -> Result<Vec<Vec<f64>>, CliError> {
    if let Some(rest) = spec.strip_prefix("grid") {
        let k = match rest.strip_prefix(':') {
            None if rest.is_empty() => 3,
            Some(n) => n.parse::<usize>().map_err(|_| CliError::Invalid(format!("bad point grid '{spec}'")))?,
            None => return Err(CliError::Invalid(format!("bad point grid '{spec}'"))),
        };
        if k == 0 {
            return Err(CliError::Invalid("point grid needs at least one point per axis".into()));
        }
        return Ok(interior_grid(u, k));
    }
    let text = read(std::path::Path::new(spec))?;
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let p = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Invalid(format!("{spec}:{}: {e}", i + 1)))?;
        if p.len() != u.dim() {
            return Err(CliError::Invalid(format!("{spec}:{}: expected {} coordinates, got {}", i + 1, u.dim(), p.len())));
        }
        pts.push(p);
    }
    if pts.is_empty() {
        return Err(CliError::Invalid(format!("{spec}: no points")));
    }
    Ok(pts)
}

#[derive(Serialize)]
struct FieldSummary {
    dim: usize,
    sizes: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    complex: bool,
}

#[derive(Serialize)]
struct Resolved {
    r_plateau: f64,
    r_support: f64,
    half_angle: f64,
    xi_min: f64,
    n_max: usize,
    directions: usize,
}

#[derive(Serialize)]
struct ScanSummary {
    entries: usize,
    singular: usize,
    regular: usize,
    errors: usize,
    enumeration_agreements: usize,
}

#[derive(Serialize)]
struct ScanReport {
    field: FieldSummary,
    resolved: Resolved,
    points: Vec<Vec<f64>>,
    summary: ScanSummary,
    entries: Vec<ScanEntry>,
}

pub(crate) fn wf_scan(a: &WfScanArgs) -> Result<Output, CliError> {
    let u = GridField::parse(&read(&a.field)?)?;
    let points = parse_points(&a.points, &u)?;
    let params = ScanParams { r_plateau: a.r_plateau, r_support: a.r_support, half_angle: a.half_angle, xi_min: a.xi_min, n_max: a.n_max };
    let (rp, rs, half, xi_min) = resolve_params(&u, a.dirs, a.tau, a.sigma, &params)?;
    let scanned = wf_scan_with_profiles(&u, &points, a.dirs, a.tau, a.sigma, &params)?;
    let per_point = scanned.len() / points.len();
    let mut rows = Vec::new();
    for (k, (_, profile)) in scanned.iter().enumerate() {
        if let Some(p) = profile {
            for (n, v) in p.entries.iter().enumerate() {
                rows.push(format!("{},{},{n},{}", k / per_point, k % per_point, v.log()));
            }
        }
    }
    let entries: Vec<ScanEntry> = scanned.into_iter().map(|(e, _)| e).collect();
    let verdicts = entries.iter().filter_map(|e| e.verdict.as_ref());
    let singular = verdicts.clone().filter(|v| !v.regular).count();
    let summary = ScanSummary {
        entries: entries.len(),
        singular,
        regular: verdicts.count() - singular,
        errors: entries.iter().filter(|e| e.error.is_some()).count(),
        enumeration_agreements: entries.iter().filter(|e| e.enumeration_agrees == Some(true)).count(),
    };
    let g = &u.grid;
    let report = ScanReport {
        field: FieldSummary { dim: g.dim(), sizes: g.sizes.clone(), origin: g.origin.clone(), spacing: g.spacing.clone(), complex: u.complex },
        resolved: Resolved { r_plateau: rp, r_support: rs, half_angle: half, xi_min, n_max: a.n_max, directions: per_point },
        points,
        summary,
        entries,
    };
    Ok(Output::new(&report, a.out.as_ref()).with_csv(a.csv.as_ref(), "point_index,direction_index,n,log_value", rows))
}

#[derive(Serialize)]
struct CatalogFile {
    name: String,
    file: String,
    header: String,
    dim: usize,
    sizes: Vec<usize>,
}

#[derive(Serialize)]
struct CatalogReport {
    files: Vec<CatalogFile>,
    /// Largest `|x u' - u|` of the kink field with centered differences,
    /// away from the kink.
    kink_ode_residual: f64,
}

fn kink_residual(u: &GridField) -> f64 {
    let h = u.grid.spacing[0];
    let n = u.grid.sizes[0];
    (1..n - 1)
        .filter(|&i| u.grid.point(i)[0].abs() > 1.5 * h)
        .map(|i| {
            let x = u.grid.point(i)[0];
            let du = (u.samples[i + 1].re - u.samples[i - 1].re) / (2.0 * h);
            (x * du - u.samples[i].re).abs()
        })
        .fold(0.0, f64::max)
}

pub(crate) fn catalog(a: &CatalogArgs) -> Result<Output, CliError> {
    let mut files = Vec::new();
    let mut listed = Vec::new();
    let mut kink_ode_residual = f64::NAN;
    for field in CatalogField::ALL {
        let n = if field.dim() == 1 { a.n } else { a.n2d };
        let u = catalog_field(field, n)?;
        if field == CatalogField::Kink {
            kink_ode_residual = kink_residual(&u);
        }
        let text = u.to_text();
        let path = a.out.join(format!("{}.gf", field.name()));
        listed.push(CatalogFile {
            name: field.name().into(),
            file: path.to_string_lossy().into_owned(),
            header: text.lines().next().unwrap_or("").to_string(),
            dim: u.grid.dim(),
            sizes: u.grid.sizes.clone(),
        });
        files.push((path, text));
    }
    let mut out = Output::new(&CatalogReport { files: listed, kink_ode_residual }, None);
    out.files = files;
    Ok(out)
}
