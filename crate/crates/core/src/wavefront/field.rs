use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{GevreyError, Result};

/// Uniform grid geometry, without samples.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub sizes: Vec<usize>,
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
}

impl GridSpec {
    pub fn new(sizes: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Result<Self> {
        let d = sizes.len();
        if !(1..=2).contains(&d) {
            return Err(GevreyError::GridField(format!("dimension must be 1 or 2, got {d}")));
        }
        if origin.len() != d || spacing.len() != d {
            return Err(GevreyError::GridField("origin and spacing must match the dimension".into()));
        }
        if let Some(n) = sizes.iter().find(|&&n| n < 16) {
            return Err(GevreyError::GridField(format!("axis size {n} < 16")));
        }
        if spacing.iter().any(|&h| !(h > 0.0) || !h.is_finite()) || origin.iter().any(|o| !o.is_finite()) {
            return Err(GevreyError::GridField("spacing must be positive and origin finite".into()));
        }
        Ok(Self { sizes, origin, spacing })
    }

    /// `n` points per axis covering `[lo, hi)`.
    pub fn cube(dim: usize, n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![n; dim], vec![lo; dim], vec![(hi - lo) / n as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Coordinates of the sample with flat (row-major) index `k`.
    pub fn point(&self, k: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim()];
        let mut r = k;
        for a in (0..self.dim()).rev() {
            idx[a] = r % self.sizes[a];
            r /= self.sizes[a];
        }
        idx.iter().enumerate().map(|(a, &i)| self.origin[a] + i as f64 * self.spacing[a]).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    /// Whether the closed ball `B(x, r)` lies inside the sampled box.
    pub fn contains_ball(&self, x: &[f64], r: f64) -> bool {
        (0..self.dim()).all(|a| {
            let lo = self.origin[a];
            let hi = lo + (self.sizes[a] - 1) as f64 * self.spacing[a];
            x[a] - r >= lo && x[a] + r <= hi
        })
    }
}

/// Samples of a field on a uniform grid, row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub grid: GridSpec,
    pub samples: Vec<Complex64>,
    pub complex: bool,
}

impl GridField {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>, complex: bool) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(GevreyError::GridField(format!("{} samples for {} grid points", samples.len(), grid.len())));
        }
        Ok(Self { grid, samples, complex })
    }

    pub fn from_real(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), false)
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let samples = grid.points().map(|p| Complex64::new(f(&p), 0.0)).collect();
        Self { grid, samples, complex: false }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// `GRIDFIELD 1 <d> <n1[,n2]> <origin...> <spacing...> <real|complex>`, then
    /// one line per row of samples. Floats use the shortest round-trip form.
    pub fn to_text(&self) -> String {
        let g = &self.grid;
        let sizes: Vec<String> = g.sizes.iter().map(|n| n.to_string()).collect();
        let mut out = format!("GRIDFIELD 1 {} {}", g.dim(), sizes.join(","));
        for v in g.origin.iter().chain(&g.spacing) {
            write!(out, " {}", fmt_f64(*v)).unwrap();
        }
        out.push_str(if self.complex { " complex\n" } else { " real\n" });
        let row = *g.sizes.last().unwrap();
        for chunk in self.samples.chunks(row) {
            let items: Vec<String> = chunk
                .iter()
                .map(|z| if self.complex { format!("{},{}", fmt_f64(z.re), fmt_f64(z.im)) } else { fmt_f64(z.re) })
                .collect();
            out.push_str(&items.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: &str| GevreyError::GridField(m.to_string());
        let (header, body) = text.split_once('\n').unwrap_or((text, ""));
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() < 4 || h[0] != "GRIDFIELD" {
            return Err(bad("missing GRIDFIELD header"));
        }
        if h[1] != "1" {
            return Err(bad(&format!("unsupported version {}", h[1])));
        }
        let d: usize = h[2].parse().map_err(|_| bad("bad dimension"))?;
        if !(1..=2).contains(&d) || h.len() != 4 + 2 * d + 1 {
            return Err(bad("header field count does not match the dimension"));
        }
        let sizes: Vec<usize> = h[3].split(',').map(|s| s.parse().map_err(|_| bad("bad size"))).collect::<Result<_>>()?;
        if sizes.len() != d {
            return Err(bad("size list does not match the dimension"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(&format!("bad number '{s}'")));
        let origin = h[4..4 + d].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
        let spacing = h[4 + d..4 + 2 * d].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
        let complex = match h[4 + 2 * d] {
            "real" => false,
            "complex" => true,
            other => return Err(bad(&format!("sample kind must be real or complex, got '{other}'"))),
        };
        let grid = GridSpec::new(sizes, origin, spacing)?;
        let mut samples = Vec::with_capacity(grid.len());
        for tok in body.split_whitespace() {
            let z = if complex {
                let (re, im) = tok.split_once(',').ok_or_else(|| bad("complex sample must be re,im"))?;
                Complex64::new(num(re)?, num(im)?)
            } else {
                Complex64::new(num(tok)?, 0.0)
            };
            samples.push(z);
        }
        Self::new(grid, samples, complex)
    }
}

fn fmt_f64(v: f64) -> String {
    // `{}` on f64 is the shortest representation that parses back exactly.
    format!("{v}")
}
