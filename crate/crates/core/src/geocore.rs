//! Geometric real numbers R(G) and their arithmetic.
//!
//! A [`GeoNum`] stores the natural logarithm of a positive real. All of the
//! geometric operations are the image of ordinary arithmetic under `ln`:
//!
//! | geometric       | on logs            |
//! |-----------------|--------------------|
//! | `a ⊕ b` (a·b)   | `la + lb`          |
//! | `a ⊖ b` (a/b)   | `la - lb`          |
//! | `a ⊙ b`         | `la * lb`          |
//! | `a ⊘ b`         | `la / lb`          |
//! | `\|a\|^G`       | `\|la\|`           |
//!
//! The raw value `exp(log)` is only materialized at I/O boundaries; sequences
//! such as `e^{k^m}` overflow any direct representation long before their
//! logs become interesting.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for comparing logs.
pub const LOG_EQ_TOL: f64 = 1e-12;

/// An element of R(G), stored by its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
#[repr(transparent)]
pub struct GeoNum {
    log: f64,
}

impl GeoNum {
    /// Geometric zero `0_G`: the value 1.
    pub const ZERO: GeoNum = GeoNum { log: 0.0 };
    /// Geometric one `1_G`: the value e.
    pub const ONE: GeoNum = GeoNum { log: 1.0 };

    pub fn from_log(log: f64) -> Result<Self> {
        if log.is_finite() {
            Ok(GeoNum { log })
        } else {
            Err(Error::NotGeometric(format!("log {log} is not finite")))
        }
    }

    /// Builds a geometric number from its raw positive value.
    pub fn from_value(value: f64) -> Result<Self> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NotGeometric(format!("value {value} is not a finite positive real")));
        }
        Self::from_log(value.ln())
    }

    #[inline]
    pub fn log(self) -> f64 {
        self.log
    }

    /// The represented positive real. Overflows to `inf` for large logs.
    pub fn value(self) -> f64 {
        self.log.exp()
    }

    pub fn approx_eq(self, other: GeoNum, tol: f64) -> bool {
        (self.log - other.log).abs() <= tol
    }

    /// Total order on R(G), which is the order of the logs.
    pub fn total_cmp(&self, other: &GeoNum) -> Ordering {
        self.log.total_cmp(&other.log)
    }

    pub fn is_zero(self) -> bool {
        self.log == 0.0
    }

    fn checked(log: f64, what: &str) -> Result<Self> {
        if log.is_finite() {
            Ok(GeoNum { log })
        } else {
            Err(Error::Range(format!("{what} overflowed (log {log})")))
        }
    }
}

impl TryFrom<f64> for GeoNum {
    type Error = Error;
    fn try_from(log: f64) -> Result<Self> {
        GeoNum::from_log(log)
    }
}

impl From<GeoNum> for f64 {
    fn from(g: GeoNum) -> f64 {
        g.log
    }
}

impl fmt::Display for GeoNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e^{}", self.log)
    }
}

/// `a ⊕ b = a·b`.
pub fn geo_add(a: GeoNum, b: GeoNum) -> Result<GeoNum> {
    GeoNum::checked(a.log + b.log, "geometric addition")
}

/// `a ⊖ b = a/b`.
pub fn geo_sub(a: GeoNum, b: GeoNum) -> Result<GeoNum> {
    GeoNum::checked(a.log - b.log, "geometric subtraction")
}

/// `a ⊙ b = e^{ln a · ln b}`.
pub fn geo_mul(a: GeoNum, b: GeoNum) -> Result<GeoNum> {
    GeoNum::checked(a.log * b.log, "geometric multiplication")
}

/// `a ⊘ b = e^{ln a / ln b}`; undefined for `b = 0_G`.
pub fn geo_div(a: GeoNum, b: GeoNum) -> Result<GeoNum> {
    if b.log == 0.0 {
        return Err(Error::Domain("geometric division by 0_G".into()));
    }
    GeoNum::checked(a.log / b.log, "geometric division")
}

/// `|a|^G = e^{|ln a|}`; always at least `0_G`.
pub fn geo_abs(a: GeoNum) -> GeoNum {
    GeoNum { log: a.log.abs() }
}

/// `a^{n_G} = a ⊙ … ⊙ a` (n factors), with `a^{0_G} = e`.
pub fn geo_int_pow(a: GeoNum, n: u32) -> Result<GeoNum> {
    if n == 0 {
        return Ok(GeoNum::ONE);
    }
    if n > 64 {
        let exp = i32::try_from(n).map_err(|_| Error::Range(format!("exponent {n} too large")))?;
        return GeoNum::checked(a.log.powi(exp), "geometric power");
    }
    // left fold, so small powers are bit-identical to chained geo_mul
    let mut log = a.log;
    for _ in 1..n {
        log *= a.log;
        if !log.is_finite() {
            break;
        }
    }
    GeoNum::checked(log, "geometric power")
}

/// Geometric sum `_G∑ xs`: the product of the values, computed as a
/// compensated sum of logs. The empty sum is `0_G`.
pub fn geo_sum(xs: &[GeoNum]) -> Result<GeoNum> {
    let mut acc = NeumaierSum::default();
    for x in xs {
        acc.add(x.log);
    }
    GeoNum::checked(acc.total(), "geometric sum")
}

/// Neumaier (improved Kahan–Babuška) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated prefix sums: `out[0] = 0`, `out[i] = xs[0] + … + xs[i-1]`.
pub fn prefix_sums(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len() + 1);
    let mut acc = NeumaierSum::default();
    out.push(0.0);
    for &x in xs {
        acc.add(x);
        out.push(acc.total());
    }
    out
}
