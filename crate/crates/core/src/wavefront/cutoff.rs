use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use super::field::{GridField, GridSpec};
use crate::error::{GevreyError, Result};
use crate::jets::{FunctionSpec, Jet};
use crate::multiindex::MultiIndex;
use crate::numerics::LogMagnitude;
use crate::regularity::{DerivativeGrowthData, GrowthSource};

/// Minimum number of grid cells across the transition band.
pub const MIN_BAND_CELLS: f64 = 8.0;

/// Radial cutoff `φ = χ * ψ`, equal to 1 on the plateau ball and 0 outside
/// the support ball.
#[derive(Clone, Debug)]
pub struct Cutoff {
    pub center: Vec<f64>,
    pub r_plateau: f64,
    pub r_support: f64,
    pub profile: GridField,
}

/// `d = Σ_{p≥1} (2(p+1))^{-τ p^{σ-1}}`; the cutoff built from a mollifier on
/// `B_{d/2}` and the indicator of `B_d` has plateau `d/2` and support `3d/2`.
pub fn default_radii(tau: f64, sigma: f64) -> Result<(f64, f64)> {
    if !(tau > 0.0) || !(sigma > 1.0) {
        return Err(GevreyError::InvalidParameter(format!("need τ > 0 and σ > 1, got ({tau}, {sigma})")));
    }
    let mut d = 0.0;
    for p in 1..=50_000_000u64 {
        let pf = p as f64;
        let term = (-tau * pf.powf(sigma - 1.0) * (2.0 * (pf + 1.0)).ln()).exp();
        d += term;
        if term < 1e-17 * d {
            return Ok((d / 2.0, 1.5 * d));
        }
    }
    Err(GevreyError::Budget(format!("support constant series for ({tau}, {sigma}) converges too slowly")))
}

fn psi(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

const PANEL_NODES: usize = 20;
const TABLE: usize = 2048;

fn gl_nodes() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(PANEL_NODES))
}

fn integrate_panel(a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    gl_nodes().iter().map(|&(x, w)| w * psi(mid + half * x)).sum::<f64>() * half
}

/// `∫_{-1}^{t_k} ψ` at `t_k = -1 + 2k/TABLE`, accumulated panel by panel.
fn psi_table() -> &'static [f64] {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| {
        let h = 2.0 / TABLE as f64;
        let mut out = vec![0.0; TABLE + 1];
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for k in 0..TABLE {
            let x = integrate_panel(-1.0 + k as f64 * h, -1.0 + (k + 1) as f64 * h);
            let t = sum + x;
            comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
            sum = t;
            out[k + 1] = sum + comp;
        }
        out
    })
}

/// Smooth step rising from 0 at `t = -1` to 1 at `t = 1`, the normalized
/// primitive of `ψ(s) = exp(-1/(1 - s²))`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= -1.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let table = psi_table();
    let z = table[TABLE];
    let h = 2.0 / TABLE as f64;
    let pos = (t + 1.0) / h;
    let k = (pos.round() as usize).min(TABLE);
    let tk = -1.0 + k as f64 * h;
    let tail = if t >= tk { integrate_panel(tk, t) } else { -integrate_panel(t, tk) };
    if k <= TABLE / 2 {
        (table[k] + tail) / z
    } else {
        // measure from the right end so values near 1 keep full precision
        1.0 - ((z - table[k]) - tail) / z
    }
}

fn psi_mass() -> f64 {
    psi_table()[TABLE]
}

impl Cutoff {
    fn mid_and_width(&self) -> (f64, f64) {
        (0.5 * (self.r_plateau + self.r_support), 0.5 * (self.r_support - self.r_plateau))
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        let (mid, eps) = self.mid_and_width();
        1.0 - smooth_step((dist(x, &self.center) - mid) / eps)
    }

    /// Float jet of `φ` at `x`.
    pub fn jet_at(&self, x: &[f64], order: usize) -> Result<Jet<f64>> {
        let d = self.center.len();
        let (mid, eps) = self.mid_and_width();
        let r = dist(x, &self.center);
        let t0 = (r - mid) / eps;
        if t0.abs() >= 1.0 || r == 0.0 {
            return Ok(Jet::constant(self.value_at(x), x, order));
        }
        // r as a jet: sqrt of Σ (x_a - c_a)^2
        let mut r2 = Jet::constant(0.0, x, order);
        for a in 0..d {
            let v = Jet::variable(a, x, order).add_constant(&-self.center[a]);
            r2 = r2.add(&v.mul(&v));
        }
        let r_jet = r2.horner(&sqrt_series(*r2.value(), order));
        let t = r_jet.add_constant(&-mid).scale(&(1.0 / eps));
        // 1 - S(t) with S' = ψ / Z
        static PSI: std::sync::OnceLock<FunctionSpec> = std::sync::OnceLock::new();
        let psi_jet = PSI
            .get_or_init(|| FunctionSpec::parse("compose(exp,compose(recip,poly:-1,0,1))").expect("static spec"))
            .jet_in::<f64>(&[t0], order.saturating_sub(1))?;
        let z = psi_mass();
        let mut series = vec![1.0 - smooth_step(t0)];
        for n in 1..=order {
            series.push(-psi_jet.coeffs()[n - 1] / (n as f64 * z));
        }
        Ok(t.horner(&series))
    }

    /// Sup over grid points of `max_{|α|=n} |∂^α φ|`, for `n ≤ n_max`, from
    /// jets at every `stride`-th band point along each axis.
    pub fn derivative_growth(&self, n_max: usize, stride: usize) -> Result<DerivativeGrowthData> {
        let grid = &self.profile.grid;
        let d = grid.dim();
        let idx: Vec<MultiIndex> = (0..=n_max).flat_map(|n| MultiIndex::of_order(d, n)).collect();
        let mut best = vec![0.0f64; n_max + 1];
        best[0] = 1.0;
        for k in 0..grid.len() {
            let p = grid.point(k);
            let on_stride = {
                let mut r = k;
                let mut ok = true;
                for a in (0..d).rev() {
                    ok &= (r % grid.sizes[a]) % stride.max(1) == 0;
                    r /= grid.sizes[a];
                }
                ok
            };
            let r = dist(&p, &self.center);
            if !on_stride || r <= self.r_plateau || r >= self.r_support {
                continue;
            }
            let j = self.jet_at(&p, n_max)?;
            for alpha in &idx {
                let v = j.partial(alpha)?.abs();
                let n = alpha.order();
                best[n] = best[n].max(v);
            }
        }
        let entries = best.into_iter().map(LogMagnitude::from_real).collect::<Result<Vec<_>>>()?;
        DerivativeGrowthData::new(entries, GrowthSource::MeasuredOnGrid)
    }
}

fn sqrt_series(y0: f64, order: usize) -> Vec<f64> {
    // sqrt(y0 + h) = sqrt(y0) Σ C(1/2, n) (h / y0)^n
    let mut out = Vec::with_capacity(order + 1);
    let mut c = y0.sqrt();
    for n in 0..=order {
        out.push(c);
        c *= (0.5 - n as f64) / ((n + 1) as f64 * y0);
    }
    out
}

pub(crate) fn dist(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Builds the cutoff at `x0` on `grid`.
///
/// `(τ, σ)` only validate the class; the construction is Gevrey of order 2,
/// which lies in every class with `σ > 1`.
pub fn make_cutoff(x0: &[f64], r_plateau: f64, r_support: f64, grid: &GridSpec, tau: f64, sigma: f64) -> Result<Cutoff> {
    if x0.len() != grid.dim() {
        return Err(GevreyError::DimensionMismatch { expected: grid.dim(), got: x0.len() });
    }
    if !(tau > 0.0) || !(sigma > 1.0) {
        return Err(GevreyError::InvalidParameter(format!("need τ > 0 and σ > 1, got ({tau}, {sigma})")));
    }
    if !(r_plateau > 0.0) || !(r_plateau < r_support) {
        return Err(GevreyError::InvalidParameter(format!("need 0 < r_plateau < r_support, got {r_plateau}, {r_support}")));
    }
    let h = grid.spacing.iter().cloned().fold(0.0, f64::max);
    let cells = (r_support - r_plateau) / h;
    if cells < MIN_BAND_CELLS {
        return Err(GevreyError::UnderResolved { cells });
    }
    if !grid.contains_ball(x0, r_support) {
        return Err(GevreyError::InvalidParameter("cutoff support leaves the grid".into()));
    }
    let mut cut = Cutoff {
        center: x0.to_vec(),
        r_plateau,
        r_support,
        profile: GridField::new(grid.clone(), vec![Complex64::new(0.0, 0.0); grid.len()], false)?,
    };
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|k| Complex64::new(cut.value_at(&grid.point(k)), 0.0))
        .collect();
    cut.profile.samples = values;
    Ok(cut)
}
