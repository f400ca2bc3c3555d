use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::cutoff::Cutoff;
use super::field::GridField;
use crate::error::{GevreyError, Result};
use crate::numerics::{log_factorial, LogMagnitude};

/// An argmax at or beyond this fraction of the largest cone radius marks `N`
/// as saturated by the grid.
pub const SATURATION_FRACTION: f64 = 0.8;
/// Fewest usable orders for a verdict.
pub const MIN_USABLE: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub direction: Vec<f64>,
    pub half_angle: f64,
    pub xi_min: f64,
}

impl Cone {
    pub fn new(direction: &[f64], half_angle: f64, xi_min: f64) -> Result<Self> {
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(GevreyError::InvalidParameter("cone direction must be nonzero".into()));
        }
        if !(half_angle > 0.0 && half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(GevreyError::InvalidParameter(format!("half angle {half_angle} not in (0, π/2)")));
        }
        if !(xi_min >= 0.0) {
            return Err(GevreyError::InvalidParameter("xi_min must be nonnegative".into()));
        }
        Ok(Self { direction: direction.iter().map(|x| x / norm).collect(), half_angle, xi_min })
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        self.contains_at(xi, xi.iter().map(|x| x * x).sum::<f64>().sqrt(), self.half_angle.cos())
    }

    fn contains_at(&self, xi: &[f64], r: f64, cos_half: f64) -> bool {
        r >= self.xi_min && r > 0.0 && xi.iter().zip(&self.direction).map(|(a, b)| a * b).sum::<f64>() >= cos_half * r
    }
}

/// Frequency bins of `φ̂u`, transform `∫ v(x) e^{-2πi x·ξ} dx`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub center: Vec<f64>,
    pub cutoff_id: String,
    /// Nyquist frequency of the coarsest axis.
    pub nyquist: f64,
    /// Lowest nonzero frequency step over all axes.
    pub bin_width: f64,
    /// Every non-Nyquist, nonzero bin.
    pub bins: Vec<Bin>,
}

#[derive(Clone, Copy, Debug)]
pub struct Bin {
    /// Unused trailing components are zero.
    pub xi: [f64; 2],
    pub radius: f64,
    pub log_mag: f64,
}

fn freq(k: usize, n: usize, h: f64) -> Option<f64> {
    let len = n as f64 * h;
    if 2 * k == n {
        None
    } else if 2 * k < n {
        Some(k as f64 / len)
    } else {
        Some((k as f64 - n as f64) / len)
    }
}

/// Multiplies in space, then transforms.
pub fn spectrum(u: &GridField, phi: &Cutoff) -> Result<Spectrum> {
    let g = &u.grid;
    if g != &phi.profile.grid {
        return Err(GevreyError::GridField("cutoff and field grids differ".into()));
    }
    let mut v: Vec<Complex64> = u.samples.iter().zip(&phi.profile.samples).map(|(a, b)| a * b.re).collect();
    let mut planner = FftPlanner::<f64>::new();
    match g.dim() {
        1 => planner.plan_fft_forward(g.sizes[0]).process(&mut v),
        _ => {
            let (n1, n2) = (g.sizes[0], g.sizes[1]);
            let rows = planner.plan_fft_forward(n2);
            for row in v.chunks_mut(n2) {
                rows.process(row);
            }
            let cols = planner.plan_fft_forward(n1);
            let mut col = vec![Complex64::new(0.0, 0.0); n1];
            for j in 0..n2 {
                for i in 0..n1 {
                    col[i] = v[i * n2 + j];
                }
                cols.process(&mut col);
                for i in 0..n1 {
                    v[i * n2 + j] = col[i];
                }
            }
        }
    }
    let scale = g.cell_volume();
    let mut bins = Vec::with_capacity(v.len());
    'bins: for (k, z) in v.iter().enumerate() {
        let mut xi = [0.0; 2];
        let mut r = k;
        for a in (0..g.dim()).rev() {
            match freq(r % g.sizes[a], g.sizes[a], g.spacing[a]) {
                Some(f) => xi[a] = f,
                None => continue 'bins,
            }
            r /= g.sizes[a];
        }
        let radius = xi[0].hypot(xi[1]);
        if radius > 0.0 {
            bins.push(Bin { xi, radius, log_mag: (z.norm() * scale).ln() });
        }
    }
    let nyquist = (0..g.dim()).map(|a| 0.5 / g.spacing[a]).fold(f64::INFINITY, f64::min);
    let bin_width = (0..g.dim()).map(|a| 1.0 / (g.sizes[a] as f64 * g.spacing[a])).fold(f64::INFINITY, f64::min);
    let cutoff_id = format!("x0={:?} r=({}, {})", phi.center, phi.r_plateau, phi.r_support);
    Ok(Spectrum { center: phi.center.clone(), cutoff_id, nyquist, bin_width, bins })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    /// `entries[N] = ln sup_{ξ ∈ Γ} |ξ|^N |φ̂u(ξ)|`.
    pub entries: Vec<LogMagnitude>,
    pub n_max: usize,
    pub cone: Option<Cone>,
    pub cutoff_id: String,
    pub center: Option<Vec<f64>>,
    /// `|ξ|` of the maximizing bin for each `N`; empty for synthetic profiles.
    pub argmax_radius: Vec<f64>,
    pub cone_max_radius: Option<f64>,
    pub nyquist: Option<f64>,
}

impl DecayProfile {
    /// A profile with no grid behind it; every order counts as usable.
    pub fn synthetic(entries: Vec<LogMagnitude>) -> Result<Self> {
        if entries.is_empty() {
            return Err(GevreyError::Empty("profile"));
        }
        Ok(Self {
            n_max: entries.len() - 1,
            entries,
            cone: None,
            cutoff_id: "synthetic".into(),
            center: None,
            argmax_radius: Vec::new(),
            cone_max_radius: None,
            nyquist: None,
        })
    }

    /// `ln A + N^σ ln h + τ N^σ ln N` for `N = 0..=n_max`.
    pub fn envelope(tau: f64, sigma: f64, a: f64, h: f64, n_max: usize) -> Result<Self> {
        let e = (0..=n_max)
            .map(|n| {
                let nf = n as f64;
                let ns = nf.powf(sigma);
                let t = if n == 0 { 0.0 } else { tau * ns * nf.ln() };
                LogMagnitude::from_log(a.ln() + ns * h.ln() + t)
            })
            .collect();
        Self::synthetic(e)
    }

    /// First `N` whose maximizing bin sits in the outer band of the cone.
    pub fn saturated_at(&self) -> Option<usize> {
        let rmax = self.cone_max_radius?;
        self.argmax_radius.iter().position(|&r| r >= SATURATION_FRACTION * rmax)
    }

    /// Length of the prefix `0..usable` free of grid saturation.
    pub fn usable(&self) -> usize {
        self.saturated_at().unwrap_or(self.entries.len())
    }
}

pub fn profile_from_spectrum(s: &Spectrum, cone: &Cone, n_max: usize) -> Result<DecayProfile> {
    if cone.direction.len() != s.center.len() {
        return Err(GevreyError::DimensionMismatch { expected: s.center.len(), got: cone.direction.len() });
    }
    let xi_floor = 4.0 * s.bin_width;
    if cone.xi_min < xi_floor * (1.0 - 1e-12) {
        return Err(GevreyError::InvalidParameter(format!("xi_min {} below the leakage band {xi_floor}", cone.xi_min)));
    }
    let d = s.center.len();
    let cos_half = cone.half_angle.cos();
    let members: Vec<(f64, f64)> = s
        .bins
        .iter()
        .filter(|b| cone.contains_at(&b.xi[..d], b.radius, cos_half))
        .map(|b| (b.radius, b.log_mag))
        .collect();
    if members.is_empty() {
        return Err(GevreyError::EmptyCone);
    }
    let rmax = members.iter().map(|m| m.0).fold(0.0, f64::max);
    let mut entries = Vec::with_capacity(n_max + 1);
    let mut argmax = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for &(r, l) in &members {
            let val = n as f64 * r.ln() + l;
            if val > best.0 {
                best = (val, r);
            }
        }
        entries.push(LogMagnitude::from_log(best.0));
        argmax.push(best.1);
    }
    Ok(DecayProfile {
        entries,
        n_max,
        cone: Some(cone.clone()),
        cutoff_id: s.cutoff_id.clone(),
        center: Some(s.center.clone()),
        argmax_radius: argmax,
        cone_max_radius: Some(rmax),
        nyquist: Some(s.nyquist),
    })
}

pub fn directional_decay_profile(u: &GridField, phi: &Cutoff, cone: &Cone, n_max: usize) -> Result<DecayProfile> {
    profile_from_spectrum(&spectrum(u, phi)?, cone, n_max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavefrontVerdict {
    pub point: Option<Vec<f64>>,
    pub direction: Option<Vec<f64>>,
    pub tau: f64,
    pub sigma: f64,
    pub regular: bool,
    pub a: Option<f64>,
    pub h: Option<f64>,
    pub nyquist: Option<f64>,
    /// Orders `0..usable_n` entered the test.
    pub usable_n: usize,
    pub saturated_at: Option<usize>,
    /// Order at which the normalized slope peaks.
    pub sup_at: Option<usize>,
}

/// Outcome of the sup-attained test on a normalized slope sequence.
struct Gate {
    regular: bool,
    sup: f64,
    at: usize,
}

/// `s[k]` belongs to order `k + 1`. Regular iff the sup over the usable range
/// is reached before its last order, up to `tol`.
fn gate(s: &[f64], tol: f64) -> Gate {
    let (at, sup) = s.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let last = *s.last().unwrap();
    let before = s[..s.len() - 1].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Gate { regular: last <= before + tol, sup, at: at + 1 }
}

fn check_len(p: &DecayProfile) -> Result<()> {
    if p.entries.len() < MIN_USABLE {
        return Err(GevreyError::ProfileTooShort(p.entries.len()));
    }
    Ok(())
}

/// Tests `P(N) ≤ ln A + N^σ ln h + τ N^σ ln N` on the usable range through
/// `s(N) = (P(N) - P(0) - τ N^σ ln N) / N^σ`.
pub fn wf_point_test(profile: &DecayProfile, tau: f64, sigma: f64) -> Result<WavefrontVerdict> {
    check_len(profile)?;
    if !(tau > 0.0) || !(sigma >= 1.0) {
        return Err(GevreyError::InvalidParameter(format!("need τ > 0 and σ ≥ 1, got ({tau}, {sigma})")));
    }
    let usable = profile.usable();
    let mut v = WavefrontVerdict {
        point: profile.center.clone(),
        direction: profile.cone.as_ref().map(|c| c.direction.clone()),
        tau,
        sigma,
        regular: false,
        a: None,
        h: None,
        nyquist: profile.nyquist,
        usable_n: usable,
        saturated_at: profile.saturated_at(),
        sup_at: None,
    };
    let p = &profile.entries;
    if p.iter().all(|e| e.is_zero()) {
        v.regular = true;
        v.a = Some(0.0);
        v.h = Some(1.0);
        return Ok(v);
    }
    if usable < MIN_USABLE || p[0].is_zero() {
        return Ok(v);
    }
    let p0 = p[0].log();
    let s: Vec<f64> = (1..usable)
        .map(|n| {
            let nf = n as f64;
            let ns = nf.powf(sigma);
            (p[n].log() - p0 - tau * ns * nf.ln()) / ns
        })
        .collect();
    let g = gate(&s, 1e-9 * (1.0 + s.iter().fold(0.0f64, |m, x| m.max(x.abs()))));
    v.sup_at = Some(g.at);
    if g.regular {
        v.regular = true;
        v.a = Some(p0.exp());
        v.h = Some(g.sup.exp());
    }
    Ok(v)
}

/// Whether the given `(A, h)` bound the profile on its usable range.
pub fn bound_holds(profile: &DecayProfile, tau: f64, sigma: f64, a: f64, h: f64) -> bool {
    let env = DecayProfile::envelope(tau, sigma, a, h, profile.n_max).expect("nonempty");
    (0..profile.usable()).all(|n| profile.entries[n].log() <= env.entries[n].log() + 1e-9 * (1.0 + env.entries[n].log().abs()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationAudit {
    pub direct_regular: bool,
    pub sequence_regular: bool,
    pub agree: bool,
    pub h1: Option<f64>,
}

/// Runs the `N^σ`-indexed test and the enumerated form
/// `|ξ|^{⌊K^{1/σ}⌋} |φ̂u| ≤ A₁ h₁^K K!^{τ/σ}` on the same profile.
///
/// For fixed `N = ⌊K^{1/σ}⌋` the binding `K` is `⌈N^σ⌉`. The enumerated
/// slope `(P(N) - P(0) - (τ/σ) ln K!) / K` carries rounding of `K` and a
/// Stirling term of relative size `(ln K + 2) / K`; increments below that are
/// treated as level.
pub fn enumeration_audit(profile: &DecayProfile, tau: f64, sigma: f64) -> Result<EnumerationAudit> {
    let direct = wf_point_test(profile, tau, sigma)?;
    let usable = profile.usable();
    let p = &profile.entries;
    let (sequence_regular, h1) = if p.iter().all(|e| e.is_zero()) {
        (true, Some(1.0))
    } else if usable < MIN_USABLE || p[0].is_zero() {
        (false, None)
    } else {
        let ks: Vec<u64> = (1..usable).map(|n| ((n as f64).powf(sigma) - 1e-9).ceil() as u64).collect();
        let s: Vec<f64> = ks
            .iter()
            .enumerate()
            .map(|(i, &k)| (p[i + 1].log() - p[0].log() - tau / sigma * log_factorial(k).log()) / k as f64)
            .collect();
        let k_last = *ks.last().unwrap() as f64;
        let scale = tau / sigma + s.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let g = gate(&s, scale * (k_last.ln() + 2.0) / k_last);
        (g.regular, g.regular.then(|| g.sup.exp()))
    };
    Ok(EnumerationAudit {
        direct_regular: direct.regular,
        sequence_regular,
        agree: direct.regular == sequence_regular,
        h1,
    })
}

/// Whether both bound families accept or reject together.
pub fn enumeration_equivalence_audit(profile: &DecayProfile, tau: f64, sigma: f64) -> Result<bool> {
    Ok(enumeration_audit(profile, tau, sigma)?.agree)
}
