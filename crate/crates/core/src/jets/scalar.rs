use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex64;
use num_traits::{Num, Zero};

use crate::numerics::{rational_to_f64, BigRat};

/// Coefficient field for jets.
///
/// Transcendental functions return `None` when the value cannot be
/// represented exactly in the field.
pub trait Scalar: Num + Clone + Debug + PartialEq + Neg<Output = Self> + Send + Sync + 'static {
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;
    fn from_rational(r: &BigRat) -> Self;
    fn exp_opt(&self) -> Option<Self>;
    fn sin_opt(&self) -> Option<Self>;
    fn cos_opt(&self) -> Option<Self>;
    fn to_c64(&self) -> Complex64;
    fn magnitude(&self) -> f64;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
}

impl Scalar for BigRat {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        BigRat::from_integer(n.into())
    }
    fn from_rational(r: &BigRat) -> Self {
        r.clone()
    }
    fn exp_opt(&self) -> Option<Self> {
        self.is_zero().then(|| Self::from_i64(1))
    }
    fn sin_opt(&self) -> Option<Self> {
        self.is_zero().then(|| Self::from_i64(0))
    }
    fn cos_opt(&self) -> Option<Self> {
        self.is_zero().then(|| Self::from_i64(1))
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
    fn magnitude(&self) -> f64 {
        rational_to_f64(self).abs()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_rational(r: &BigRat) -> Self {
        rational_to_f64(r)
    }
    fn exp_opt(&self) -> Option<Self> {
        Some(self.exp())
    }
    fn sin_opt(&self) -> Option<Self> {
        Some(self.sin())
    }
    fn cos_opt(&self) -> Option<Self> {
        Some(self.cos())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn from_rational(r: &BigRat) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }
    fn exp_opt(&self) -> Option<Self> {
        Some(self.exp())
    }
    fn sin_opt(&self) -> Option<Self> {
        Some(self.sin())
    }
    fn cos_opt(&self) -> Option<Self> {
        Some(self.cos())
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// `x` as an `f64`, for diagnostics.
pub fn approx<T: Scalar>(x: &T) -> f64 {
    let c = x.to_c64();
    if c.im == 0.0 {
        c.re
    } else {
        c.norm()
    }
}

