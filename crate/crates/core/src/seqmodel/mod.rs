//! Finite truncations of geometric sequences, λ weight sequences and their
//! windows `I_n = [n − λ_n + 1, n]`, and exponent sequences `p = (p_k)`.
//!
//! Indexing is 1-based in every public accessor, matching sums that start at
//! `i = 1`. Storage is a plain `Vec`, so slices handed out are 0-based.

mod family;
mod io;

use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geocore::GeoNum;

pub use family::{generate, Family, SpikeHeight, SpikeSet};
pub use io::{ingest, ingest_str, parse_lambda, parse_p, read_lambda, read_p, serialize_log, SeqFormat};

/// Where a sequence came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "kebab-case")]
pub enum Provenance {
    Ingested(String),
    Generated(String),
    Derived(String),
    Inline,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Ingested(p) => write!(f, "ingested:{p}"),
            Provenance::Generated(g) => write!(f, "generated:{g}"),
            Provenance::Derived(d) => write!(f, "derived:{d}"),
            Provenance::Inline => f.write_str("inline"),
        }
    }
}

/// A non-empty finite truncation `(x_1, …, x_N)` of a geometric sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoSeq {
    terms: Vec<GeoNum>,
    source: Provenance,
}

impl GeoSeq {
    pub fn new(terms: Vec<GeoNum>, source: Provenance) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::TooShort { len: 0, needed: 1 });
        }
        Ok(GeoSeq { terms, source })
    }

    /// Builds a sequence from logs; rejects non-finite entries.
    pub fn from_logs<I: IntoIterator<Item = f64>>(logs: I) -> Result<Self> {
        let terms = logs.into_iter().map(GeoNum::from_log).collect::<Result<Vec<_>>>()?;
        GeoSeq::new(terms, Provenance::Inline)
    }

    pub fn with_source(mut self, source: Provenance) -> Self {
        self.source = source;
        self
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[GeoNum] {
        &self.terms
    }

    pub fn source(&self) -> &Provenance {
        &self.source
    }

    /// Term `x_i`, 1-based.
    pub fn term(&self, i: usize) -> Result<GeoNum> {
        if i == 0 || i > self.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.len() });
        }
        Ok(self.terms[i - 1])
    }

    pub fn logs(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.log()).collect()
    }

    /// First `n` terms.
    pub fn truncate(&self, n: usize) -> Result<GeoSeq> {
        if n == 0 || n > self.len() {
            return Err(Error::TooShort { len: self.len(), needed: n.max(1) });
        }
        Ok(GeoSeq { terms: self.terms[..n].to_vec(), source: self.source.clone() })
    }

    /// Coordinatewise `α ⊙ x`.
    pub fn scale(&self, alpha: GeoNum) -> Result<GeoSeq> {
        self.map_logs(|l| l * alpha.log(), "scale")
    }

    /// Coordinatewise `α_k ⊙ x_k`.
    pub fn scale_each(&self, alphas: &[GeoNum]) -> Result<GeoSeq> {
        if alphas.len() < self.len() {
            return Err(Error::TooShort { len: alphas.len(), needed: self.len() });
        }
        let logs = self.terms.iter().zip(alphas).map(|(x, a)| x.log() * a.log());
        Ok(GeoSeq::from_logs(logs)?.with_source(Provenance::Derived("scale-each".into())))
    }

    /// Coordinatewise `x ⊕ y` over the common length.
    pub fn add(&self, other: &GeoSeq) -> Result<GeoSeq> {
        let logs = self.terms.iter().zip(&other.terms).map(|(a, b)| a.log() + b.log());
        Ok(GeoSeq::from_logs(logs)
            .map_err(|_| Error::Range("sequence addition overflowed".into()))?
            .with_source(Provenance::Derived("add".into())))
    }

    /// Coordinatewise `⊖x`.
    pub fn negate(&self) -> GeoSeq {
        GeoSeq {
            terms: self.terms.iter().map(|t| GeoNum::from_log(-t.log()).unwrap()).collect(),
            source: Provenance::Derived("negate".into()),
        }
    }

    fn map_logs(&self, f: impl Fn(f64) -> f64, what: &str) -> Result<GeoSeq> {
        let logs = self.terms.iter().map(|t| f(t.log()));
        Ok(GeoSeq::from_logs(logs)
            .map_err(|_| Error::Range(format!("{what} overflowed")))?
            .with_source(Provenance::Derived(what.into())))
    }
}

/// Built-in λ sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaKind {
    /// `λ_n = n` (the Cesàro case).
    N,
    /// `λ_n = 1` (unit windows; bounded).
    Const1,
    /// `λ_n = ⌈n/2⌉`.
    Half,
    /// `λ_n = ⌈√n⌉`.
    Sqrt,
}

impl LambdaKind {
    pub fn build(self, len: usize) -> LambdaSeq {
        let values: Vec<f64> = (1..=len)
            .map(|n| match self {
                LambdaKind::N => n as f64,
                LambdaKind::Const1 => 1.0,
                LambdaKind::Half => n.div_ceil(2) as f64,
                LambdaKind::Sqrt => (n as f64).sqrt().ceil(),
            })
            .collect();
        let unbounded = self != LambdaKind::Const1;
        LambdaSeq::new(values, unbounded).expect("built-in lambda sequences are valid")
    }

    pub fn name(self) -> &'static str {
        match self {
            LambdaKind::N => "n",
            LambdaKind::Const1 => "const1",
            LambdaKind::Half => "half",
            LambdaKind::Sqrt => "sqrt",
        }
    }

    pub fn parse(s: &str) -> Option<LambdaKind> {
        match s {
            "n" => Some(LambdaKind::N),
            "const1" => Some(LambdaKind::Const1),
            "half" => Some(LambdaKind::Half),
            "sqrt" => Some(LambdaKind::Sqrt),
            _ => None,
        }
    }
}

/// A truncated λ sequence: `λ_1 = 1`, non-decreasing, `λ_{n+1} ≤ λ_n + 1`.
///
/// Whether `λ_n → ∞` cannot be decided from a truncation, so the sequence
/// carries the generator's (or file's) declaration instead.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSeq {
    values: Vec<f64>,
    unbounded: bool,
}

impl LambdaSeq {
    pub fn new(values: Vec<f64>, unbounded: bool) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidLambda { index: 1, reason: "empty sequence".into() });
        }
        for (i, &v) in values.iter().enumerate() {
            let index = i + 1;
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidLambda {
                    index,
                    reason: format!("{v} is not a finite positive real"),
                });
            }
            if i == 0 && v != 1.0 {
                return Err(Error::InvalidLambda { index, reason: format!("λ_1 = {v}, expected 1") });
            }
            if i > 0 {
                let prev = values[i - 1];
                if v < prev {
                    return Err(Error::InvalidLambda { index, reason: format!("decreasing: {v} < {prev}") });
                }
                if v > prev + 1.0 {
                    return Err(Error::InvalidLambda {
                        index,
                        reason: format!("growth bound violated: {v} > {prev} + 1"),
                    });
                }
            }
        }
        Ok(LambdaSeq { values, unbounded })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn declared_unbounded(&self) -> bool {
        self.unbounded
    }

    /// `λ_n`, 1-based.
    pub fn get(&self, n: usize) -> Result<f64> {
        if n == 0 || n > self.len() {
            return Err(Error::IndexOutOfRange { index: n, len: self.len() });
        }
        Ok(self.values[n - 1])
    }

    /// The index set `I_n = {⌈n − λ_n + 1⌉, …, n}`.
    ///
    /// The start is clipped to 1; validated sequences always satisfy
    /// `λ_n ≤ n`, so clipping only guards against rounding.
    pub fn window(&self, n: usize) -> Result<RangeInclusive<usize>> {
        let lam = self.get(n)?;
        let start = (n as f64 - lam + 1.0).ceil().max(1.0) as usize;
        Ok(start..=n)
    }

    /// `min λ_n / n` over the trailing `tail_fraction` of the truncation.
    pub fn tail_min_ratio(&self, tail_fraction: f64) -> f64 {
        let len = self.len();
        let tail = ((len as f64 * tail_fraction).ceil() as usize).clamp(1, len);
        (len - tail + 1..=len).map(|n| self.values[n - 1] / n as f64).fold(f64::INFINITY, f64::min)
    }
}

/// How the n-th mean is formed: Cesàro (`1/n` over `1..=n`) or de la
/// Vallée-Poussin (`1/λ_n` over `I_n`).
#[derive(Debug, Clone, PartialEq)]
pub enum Averaging {
    Cesaro,
    VallePoussin(LambdaSeq),
}

/// One averaging window: 1-based inclusive index range and normalizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub start: usize,
    pub end: usize,
    pub norm: f64,
}

impl Averaging {
    /// Number of means available for a sequence of length `len`.
    pub fn admissible(&self, len: usize) -> usize {
        match self {
            Averaging::Cesaro => len,
            Averaging::VallePoussin(lam) => len.min(lam.len()),
        }
    }

    pub fn window(&self, n: usize) -> Result<Window> {
        match self {
            Averaging::Cesaro => {
                if n == 0 {
                    return Err(Error::IndexOutOfRange { index: 0, len: 0 });
                }
                Ok(Window { start: 1, end: n, norm: n as f64 })
            }
            Averaging::VallePoussin(lam) => {
                let r = lam.window(n)?;
                Ok(Window { start: *r.start(), end: *r.end(), norm: lam.get(n)? })
            }
        }
    }

    /// All windows for `n = 1..=admissible(len)`.
    pub fn windows(&self, len: usize) -> Vec<Window> {
        (1..=self.admissible(len)).map(|n| self.window(n).expect("n is admissible")).collect()
    }

    pub fn describe(&self) -> String {
        match self {
            Averaging::Cesaro => "cesaro".into(),
            Averaging::VallePoussin(lam) => format!("lambda(len={})", lam.len()),
        }
    }
}

/// Exponent sequence `p = (p_k)`: bounded, strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub enum PSeq {
    Constant(f64),
    Values(Vec<f64>),
}

impl PSeq {
    pub fn constant(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidExponent { index: 1, reason: format!("{p} is not positive") });
        }
        Ok(PSeq::Constant(p))
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidExponent { index: 1, reason: "empty sequence".into() });
        }
        for (i, &p) in values.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidExponent {
                    index: i + 1,
                    reason: format!("{p} is not a finite positive real"),
                });
            }
        }
        Ok(PSeq::Values(values))
    }

    /// `p_k`, 1-based.
    pub fn get(&self, k: usize) -> Result<f64> {
        match self {
            PSeq::Constant(p) => Ok(*p),
            PSeq::Values(v) => {
                if k == 0 || k > v.len() {
                    Err(Error::IndexOutOfRange { index: k, len: v.len() })
                } else {
                    Ok(v[k - 1])
                }
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            PSeq::Constant(p) => *p,
            PSeq::Values(v) => v.iter().copied().fold(f64::MIN, f64::max),
        }
    }

    /// `H = max(1, sup p_k)`.
    pub fn h(&self) -> f64 {
        self.sup().max(1.0)
    }

    /// The common value when every `p_k` is equal.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            PSeq::Constant(p) => Some(*p),
            PSeq::Values(v) => v.iter().all(|&p| p == v[0]).then_some(v[0]),
        }
    }

    pub fn covers(&self, len: usize) -> bool {
        match self {
            PSeq::Constant(_) => true,
            PSeq::Values(v) => v.len() >= len,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cesaro_window_is_prefix() {
        let lam = LambdaKind::N.build(10);
        assert_eq!(lam.window(7).unwrap(), 1..=7);
    }

    #[test]
    fn unit_window() {
        let lam = LambdaKind::Const1.build(10);
        assert_eq!(lam.window(5).unwrap(), 5..=5);
        assert!(!lam.declared_unbounded());
    }

    #[test]
    fn fractional_lambda_window() {
        let lam = LambdaSeq::new(vec![1.0, 2.0, 2.5, 3.5, 4.0], true).unwrap();
        // ⌈4 − 3.5 + 1⌉ = ⌈1.5⌉ = 2
        assert_eq!(lam.window(4).unwrap(), 2..=4);
    }

    #[test]
    fn window_out_of_range() {
        let lam = LambdaKind::N.build(3);
        assert!(matches!(lam.window(0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(lam.window(4), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn lambda_validation_reports_first_offender() {
        let e = LambdaSeq::new(vec![2.0, 2.0], true).unwrap_err();
        assert!(matches!(e, Error::InvalidLambda { index: 1, .. }));
        let e = LambdaSeq::new(vec![1.0, 2.0, 1.5, 0.5], true).unwrap_err();
        assert!(matches!(e, Error::InvalidLambda { index: 3, .. }));
        let e = LambdaSeq::new(vec![1.0, 2.0, 3.5], true).unwrap_err();
        assert!(matches!(e, Error::InvalidLambda { index: 3, .. }));
        assert!(LambdaSeq::new(vec![1.0, f64::NAN], true).is_err());
    }

    #[test]
    fn builtin_lambdas_are_valid() {
        for kind in [LambdaKind::N, LambdaKind::Const1, LambdaKind::Half, LambdaKind::Sqrt] {
            let lam = kind.build(1000);
            assert!(LambdaSeq::new(lam.values().to_vec(), true).is_ok());
        }
        assert_eq!(LambdaKind::Half.build(4).values(), &[1.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn tail_min_ratio() {
        assert_eq!(LambdaKind::N.build(100).tail_min_ratio(0.2), 1.0);
        assert!(LambdaKind::Half.build(100).tail_min_ratio(0.2) >= 0.5);
        assert!(LambdaKind::Sqrt.build(10_000).tail_min_ratio(0.2) < 0.02);
    }

    #[test]
    fn pseq() {
        let p = PSeq::from_values(vec![0.5, 2.0, 1.0]).unwrap();
        assert_eq!(p.sup(), 2.0);
        assert_eq!(p.h(), 2.0);
        assert_eq!(p.get(2).unwrap(), 2.0);
        assert!(p.get(4).is_err());
        assert_eq!(p.as_constant(), None);
        assert_eq!(PSeq::constant(0.5).unwrap().h(), 1.0);
        assert!(PSeq::from_values(vec![1.0, 0.0]).is_err());
        assert!(PSeq::constant(-1.0).is_err());
    }

    #[test]
    fn sequence_ops() {
        let x = GeoSeq::from_logs([1.0, -2.0, 3.0]).unwrap();
        let y = GeoSeq::from_logs([0.5, 0.5, 0.5]).unwrap();
        assert_eq!(x.add(&y).unwrap().logs(), vec![1.5, -1.5, 3.5]);
        assert_eq!(x.negate().logs(), vec![-1.0, 2.0, -3.0]);
        assert_eq!(x.scale(GeoNum::from_log(2.0).unwrap()).unwrap().logs(), vec![2.0, -4.0, 6.0]);
        assert_eq!(x.term(1).unwrap().log(), 1.0);
        assert!(x.term(0).is_err());
        assert!(GeoSeq::from_logs([]).is_err());
    }

    fn lambda_strategy() -> impl Strategy<Value = LambdaSeq> {
        prop::collection::vec(0.0f64..=1.0, 0..200).prop_map(|incs| {
            let mut v = vec![1.0];
            for inc in incs {
                let last = *v.last().unwrap();
                v.push(last + inc);
            }
            LambdaSeq::new(v, true).unwrap()
        })
    }

    proptest! {
        #[test]
        fn window_contains_n_and_fits_lambda(lam in lambda_strategy()) {
            for n in 1..=lam.len() {
                let w = lam.window(n).unwrap();
                prop_assert!(w.contains(&n));
                let size = (w.end() - w.start() + 1) as f64;
                prop_assert!(size >= 1.0);
                prop_assert!(size <= lam.get(n).unwrap() + 1e-12);
            }
        }
    }
}
