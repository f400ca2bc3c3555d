//! Exact combinatorial arithmetic and log-domain magnitudes.
//!
//! Quantities such as `p^{τ p^σ}` overflow `f64` for modest `p`, so every
//! magnitude in the crate travels as a [`LogMagnitude`]. Factorials,
//! multinomials and jet coefficients that must be exact use `num-bigint`
//! and `num-rational`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul};
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GevreyError, Result};

pub type BigNat = BigUint;
pub type BigRat = BigRational;

/// A nonnegative real stored by its natural logarithm.
///
/// `log_value = -inf` represents zero. Products are sums of logs; sums of
/// magnitudes use log-sum-exp. There is no subtraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogMagnitude {
    #[serde(with = "extended_real")]
    log_value: f64,
}

impl LogMagnitude {
    pub const ZERO: LogMagnitude = LogMagnitude { log_value: f64::NEG_INFINITY };
    pub const ONE: LogMagnitude = LogMagnitude { log_value: 0.0 };

    pub fn from_log(log_value: f64) -> Self {
        debug_assert!(!log_value.is_nan());
        Self { log_value }
    }

    pub fn from_real(x: f64) -> Result<Self> {
        if x.is_nan() || x < 0.0 {
            return Err(GevreyError::InvalidParameter(format!(
                "LogMagnitude::from_real requires x >= 0, got {x}"
            )));
        }
        Ok(Self { log_value: x.ln() })
    }

    #[inline]
    pub fn log(self) -> f64 {
        self.log_value
    }

    pub fn to_real(self) -> f64 {
        self.log_value.exp()
    }

    pub fn is_zero(self) -> bool {
        self.log_value == f64::NEG_INFINITY
    }

    pub fn is_finite(self) -> bool {
        self.log_value.is_finite()
    }

    /// `self^e` for a real exponent `e >= 0`.
    pub fn powf(self, e: f64) -> Self {
        if self.is_zero() {
            return if e == 0.0 { Self::ONE } else { Self::ZERO };
        }
        Self::from_log(self.log_value * e)
    }

    /// Sum of the represented values, stabilised by log-sum-exp.
    pub fn add(self, other: Self) -> Self {
        let (hi, lo) = if self.log_value >= other.log_value {
            (self.log_value, other.log_value)
        } else {
            (other.log_value, self.log_value)
        };
        if hi == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self::from_log(hi + (lo - hi).exp().ln_1p())
    }

    pub fn sum<I: IntoIterator<Item = LogMagnitude>>(items: I) -> Self {
        let values: Vec<f64> = items.into_iter().map(|m| m.log_value).collect();
        Self::from_log(log_sum_exp(&values))
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Mul for LogMagnitude {
    type Output = LogMagnitude;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self::from_log(self.log_value + rhs.log_value)
    }
}

impl Div for LogMagnitude {
    type Output = LogMagnitude;
    fn div(self, rhs: Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self::from_log(self.log_value - rhs.log_value)
    }
}

impl PartialOrd for LogMagnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.log_value.partial_cmp(&other.log_value)
    }
}

impl fmt::Display for LogMagnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.log_value)
    }
}

/// Serializes big naturals as decimal strings.
pub mod decimal_string {
    use super::BigNat;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigNat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigNat, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// JSON has no infinities; `-inf` round-trips as `null`.
pub(crate) mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v == f64::NEG_INFINITY {
            s.serialize_none()
        } else {
            Err(serde::ser::Error::custom("non-finite log magnitude"))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }

    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for x in v {
                if x.is_finite() {
                    seq.serialize_element(&Some(*x))?;
                } else if *x == f64::NEG_INFINITY {
                    seq.serialize_element(&None::<f64>)?;
                } else {
                    return Err(serde::ser::Error::custom("non-finite log magnitude"));
                }
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            Ok(Vec::<Option<f64>>::deserialize(d)?.into_iter().map(|x| x.unwrap_or(f64::NEG_INFINITY)).collect())
        }
    }
}

/// `ln Σ exp(x_i)`; returns `-inf` for an empty slice or all `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    hi + values.iter().map(|v| (v - hi).exp()).sum::<f64>().ln()
}

const LOG_FACTORIAL_CACHE: usize = 1 << 16;

fn log_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LOG_FACTORIAL_CACHE + 1);
        let mut acc = CompensatedSum::default();
        t.push(0.0);
        for k in 1..=LOG_FACTORIAL_CACHE {
            acc.add((k as f64).ln());
            t.push(acc.value());
        }
        t
    })
}

/// `ln(n!)` by exact summation of `ln k` (cached up to 2^16).
pub fn log_factorial(n: u64) -> LogMagnitude {
    let table = log_factorial_table();
    let n = n as usize;
    if n <= LOG_FACTORIAL_CACHE {
        return LogMagnitude::from_log(table[n]);
    }
    let mut acc = CompensatedSum::from(table[LOG_FACTORIAL_CACHE]);
    for k in (LOG_FACTORIAL_CACHE + 1)..=n {
        acc.add((k as f64).ln());
    }
    LogMagnitude::from_log(acc.value())
}

/// Neumaier summation.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn from(x: f64) -> Self {
        Self { sum: x, comp: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Running `ln(n!)` for callers that walk `n` upward far past the cache.
#[derive(Debug, Clone, Default)]
pub struct LogFactorialCursor {
    n: u64,
    acc: CompensatedSum,
}

impl LogFactorialCursor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance_to(&mut self, n: u64) -> f64 {
        assert!(n >= self.n, "cursor only moves forward");
        while self.n < n {
            self.n += 1;
            self.acc.add((self.n as f64).ln());
        }
        self.acc.value()
    }
}

pub fn factorial(n: u64) -> BigNat {
    (1..=n).fold(BigNat::one(), |acc, k| acc * BigNat::from(k))
}

pub fn binomial(n: u64, k: u64) -> BigNat {
    if k > n {
        return BigNat::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigNat::one();
    for i in 0..k {
        acc = acc * BigNat::from(n - i) / BigNat::from(i + 1);
    }
    acc
}

/// `|a|! / (a_1! ... a_m!)`, computed as a product of binomials.
pub fn multinomial(a: &[u64]) -> Result<BigNat> {
    if a.is_empty() {
        return Err(GevreyError::Empty("multinomial needs at least one block"));
    }
    let mut total = 0u64;
    let mut acc = BigNat::one();
    for &ak in a {
        total += ak;
        acc *= binomial(total, ak);
    }
    Ok(acc)
}

/// `ln n! - (n ln n - n + ½ ln(2πn))`; lies in `(0, 1/(12n))`.
pub fn stirling_log_residual(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(GevreyError::InvalidParameter("stirling residual needs n >= 1".into()));
    }
    let x = n as f64;
    let main = x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln();
    Ok(log_factorial(n).log() - main)
}

/// Parses `3`, `-1/2`, `0.125`, `2.5e-3` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRat> {
    use num_bigint::BigInt;
    let s = s.trim();
    let err = || GevreyError::Parse(format!("not a rational number: '{s}'"));
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| err())?;
        let d: BigInt = den.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRat::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut n: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| err())? };
    if neg {
        n = -n;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    Ok(if scale >= 0 {
        BigRat::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRat::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

pub fn rational_to_f64(r: &BigRat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}
