//! Numerical wave-front tests: a cutoff around `x₀`, the transform of `φu`,
//! and the decay of `|ξ|^N |φ̂u(ξ)|` over a cone against `h^{N^σ} N^{τN^σ}`.

mod catalog;
mod cutoff;
mod field;
mod profile;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use catalog::{catalog_field, CatalogField};
pub use cutoff::{default_radii, make_cutoff, smooth_step, Cutoff, MIN_BAND_CELLS};
pub use field::{GridField, GridSpec};
pub use profile::{
    bound_holds, directional_decay_profile, enumeration_audit, enumeration_equivalence_audit, profile_from_spectrum,
    spectrum, Bin, wf_point_test, Cone, DecayProfile, EnumerationAudit, Spectrum, WavefrontVerdict, MIN_USABLE,
    SATURATION_FRACTION,
};

use crate::error::{GevreyError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    /// Defaults to half the support constant of the class.
    pub r_plateau: Option<f64>,
    pub r_support: Option<f64>,
    /// Defaults to half the fan spacing.
    pub half_angle: Option<f64>,
    /// Defaults to four frequency bins.
    pub xi_min: Option<f64>,
    pub n_max: usize,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self { r_plateau: None, r_support: None, half_angle: None, xi_min: None, n_max: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub point: Vec<f64>,
    pub direction_index: usize,
    pub direction: Vec<f64>,
    pub verdict: Option<WavefrontVerdict>,
    /// Whether the enumerated bound family gives the same verdict.
    pub enumeration_agrees: Option<bool>,
    pub error: Option<String>,
}

/// Unit directions of the fan: `±1` in one dimension, `count` equally spaced
/// angles from `e₁` in two.
pub fn direction_fan(dim: usize, count: usize) -> Result<Vec<Vec<f64>>> {
    match dim {
        1 => Ok(vec![vec![1.0], vec![-1.0]]),
        2 if count >= 4 => Ok((0..count)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        2 => Err(GevreyError::InvalidParameter(format!("need at least 4 directions, got {count}"))),
        _ => Err(GevreyError::InvalidParameter(format!("unsupported dimension {dim}"))),
    }
}

/// Resolved `(r_plateau, r_support, half_angle, xi_min)`.
pub fn resolve_params(u: &GridField, directions: usize, tau: f64, sigma: f64, params: &ScanParams) -> Result<(f64, f64, f64, f64)> {
    let (rp, rs) = match (params.r_plateau, params.r_support) {
        (Some(p), Some(s)) => (p, s),
        (p, s) => {
            let (dp, ds) = default_radii(tau, sigma)?;
            (p.unwrap_or(dp), s.unwrap_or(ds))
        }
    };
    let half = params.half_angle.unwrap_or(match u.dim() {
        1 => std::f64::consts::FRAC_PI_4,
        _ => std::f64::consts::PI / directions as f64,
    });
    let g = &u.grid;
    let bin = (0..g.dim()).map(|a| 1.0 / (g.sizes[a] as f64 * g.spacing[a])).fold(f64::INFINITY, f64::min);
    Ok((rp, rs, half, params.xi_min.unwrap_or(4.0 * bin)))
}

/// Verdicts over `points × fan`, point-major. Failures are recorded per
/// entry and the scan continues.
pub fn wf_scan(u: &GridField, points: &[Vec<f64>], directions: usize, tau: f64, sigma: f64, params: &ScanParams) -> Result<Vec<ScanEntry>> {
    Ok(wf_scan_with_profiles(u, points, directions, tau, sigma, params)?.into_iter().map(|(e, _)| e).collect())
}

/// `wf_scan` keeping the decay profile behind each verdict.
pub fn wf_scan_with_profiles(
    u: &GridField,
    points: &[Vec<f64>],
    directions: usize,
    tau: f64,
    sigma: f64,
    params: &ScanParams,
) -> Result<Vec<(ScanEntry, Option<DecayProfile>)>> {
    let fan = direction_fan(u.dim(), directions)?;
    let (rp, rs, half, xi_min) = resolve_params(u, directions, tau, sigma, params)?;
    let cones = fan.iter().map(|d| Cone::new(d, half, xi_min)).collect::<Result<Vec<_>>>()?;
    let per_point: Vec<Vec<(ScanEntry, Option<DecayProfile>)>> = points
        .par_iter()
        .map(|x0| {
            let spec = make_cutoff(x0, rp, rs, &u.grid, tau, sigma).and_then(|phi| spectrum(u, &phi));
            cones
                .iter()
                .enumerate()
                .map(|(i, cone)| {
                    let profile = spec.as_ref().map_err(Clone::clone).and_then(|s| profile_from_spectrum(s, cone, params.n_max));
                    let result = profile
                        .as_ref()
                        .map_err(Clone::clone)
                        .and_then(|p| Ok((wf_point_test(p, tau, sigma)?, enumeration_audit(p, tau, sigma)?.agree)));
                    let (verdict, enumeration_agrees, error) = match result {
                        Ok((v, agree)) => (Some(v), Some(agree), None),
                        Err(e) => (None, None, Some(e.to_string())),
                    };
                    let entry = ScanEntry {
                        point: x0.clone(),
                        direction_index: i,
                        direction: cone.direction.clone(),
                        verdict,
                        enumeration_agrees,
                        error,
                    };
                    (entry, profile.ok())
                })
                .collect()
        })
        .collect();
    Ok(per_point.into_iter().flatten().collect())
}
