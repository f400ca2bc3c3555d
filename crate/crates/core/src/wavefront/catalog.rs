use serde::{Deserialize, Serialize};

use super::field::{GridField, GridSpec};
use crate::error::{GevreyError, Result};

/// Test fields on `[-1, 1)^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatalogField {
    /// Unit mass at the origin.
    Delta,
    /// `exp(-1/(1 - (x/0.6)^2))`.
    Bump,
    /// `x₊`, solving `x u' - u = 0`.
    Kink,
    /// `H(x₁)` with value 1/2 on `x₁ = 0`.
    Step2d,
    /// Radial bump of radius 0.6.
    Bump2d,
}

impl CatalogField {
    pub const ALL: [CatalogField; 5] = [Self::Delta, Self::Bump, Self::Kink, Self::Step2d, Self::Bump2d];

    pub fn name(self) -> &'static str {
        match self {
            Self::Delta => "delta",
            Self::Bump => "bump",
            Self::Kink => "kink",
            Self::Step2d => "step2d",
            Self::Bump2d => "bump2d",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| GevreyError::Parse(format!("unknown catalog field '{s}'")))
    }

    pub fn dim(self) -> usize {
        match self {
            Self::Step2d | Self::Bump2d => 2,
            _ => 1,
        }
    }

    pub fn default_size(self) -> usize {
        1024
    }
}

fn bump(r: f64) -> f64 {
    let s = r / 0.6;
    if s.abs() >= 1.0 { 0.0 } else { (-1.0 / (1.0 - s * s)).exp() }
}

/// Samples `field` with `n` points per axis; `n` must be even.
pub fn catalog_field(field: CatalogField, n: usize) -> Result<GridField> {
    if n % 2 != 0 {
        return Err(GevreyError::InvalidParameter(format!("grid size {n} must be even")));
    }
    let grid = GridSpec::cube(field.dim(), n, -1.0, 1.0)?;
    let h = grid.spacing[0];
    Ok(match field {
        CatalogField::Delta => {
            let mut v = vec![0.0; n];
            v[n / 2] = 1.0 / h;
            GridField::from_real(grid, v)?
        }
        CatalogField::Bump => GridField::from_fn(grid, |x| bump(x[0])),
        CatalogField::Kink => GridField::from_fn(grid, |x| x[0].max(0.0)),
        CatalogField::Step2d => GridField::from_fn(grid, |x| if x[0] > 0.0 { 1.0 } else if x[0] == 0.0 { 0.5 } else { 0.0 }),
        CatalogField::Bump2d => GridField::from_fn(grid, |x| bump(x[0].hypot(x[1]))),
    })
}
