//! Finite-truncation decision rules shared by the space tests.
//!
//! Every rule looks at the trailing `tail_fraction` of a series and answers
//! yes, no, or inconclusive (too few points to say anything).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fewest tail points on which a verdict is issued.
pub const MIN_TAIL_POINTS: usize = 8;

/// Fewest dyadic blocks on which a summability verdict is issued.
pub const MIN_DYADIC_BLOCKS: usize = 4;

/// Slack on the plateau comparison, for series that are exactly flat.
const PLATEAU_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Verdict::Yes
    }

    pub fn is_no(self) -> bool {
        self == Verdict::No
    }

    /// Combines verdicts that must all hold.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::No, _) | (_, Verdict::No) => Verdict::No,
            (Verdict::Yes, Verdict::Yes) => Verdict::Yes,
            _ => Verdict::Inconclusive,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

pub fn check_tail_fraction(tail_fraction: f64) -> Result<()> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail fraction must lie in (0, 1], got {tail_fraction}"
        )));
    }
    Ok(())
}

pub fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be finite and ≥ 0, got {tol}")));
    }
    Ok(())
}

/// 0-based index where the tail of a `len`-long series starts; the tail is
/// the last `⌈tail_fraction · len⌉` points.
pub fn tail_start(len: usize, tail_fraction: f64) -> usize {
    let tail = ((len as f64 * tail_fraction).ceil() as usize).min(len);
    len - tail
}

/// Median (mean of the middle pair for even length). `NaN` for empty input.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (_, &mut hi, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if v.len() % 2 == 1 {
        hi
    } else {
        let lo = v[..mid].iter().copied().max_by(f64::total_cmp).expect("mid > 0");
        lo + (hi - lo) / 2.0
    }
}

/// Result of a boundedness check on a non-negative series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plateau {
    pub verdict: Verdict,
    /// `sup` over the whole truncation.
    pub sup: f64,
    pub head_sup: f64,
    pub tail_sup: f64,
}

/// Bounded iff the tail never climbs above the head's maximum by more than a
/// relative `tol`. A series growing without bound keeps setting new maxima in
/// its tail; a bounded one has settled by then.
pub fn plateau(values: &[f64], tol: f64, tail_fraction: f64) -> Plateau {
    let start = tail_start(values.len(), tail_fraction);
    let head_sup = values[..start].iter().copied().fold(0.0, f64::max);
    let tail_sup = values[start..].iter().copied().fold(0.0, f64::max);
    let sup = head_sup.max(tail_sup);
    let verdict = if values.len() - start < MIN_TAIL_POINTS || start == 0 {
        Verdict::Inconclusive
    } else if !sup.is_finite() {
        Verdict::No
    } else {
        Verdict::from_bool(tail_sup <= head_sup * (1.0 + tol) + PLATEAU_SLACK)
    };
    Plateau { verdict, sup, head_sup, tail_sup }
}

/// Result of a summability check on a non-negative series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summability {
    pub verdict: Verdict,
    /// Partial sum over the whole truncation.
    pub partial_sum: f64,
    /// Sum over the last dyadic block `(2^{j−1}, 2^j]` (or the final partial
    /// block).
    pub last_block: f64,
}

/// `(n, S_n)` at `n = 1, 2, 4, …` and at the last index.
pub fn dyadic_checkpoints(terms: &[f64]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut s = crate::geocore::NeumaierSum::default();
    let mut next = 1usize;
    for (i, &t) in terms.iter().enumerate() {
        s.add(t);
        let n = i + 1;
        if n == next || n == terms.len() {
            out.push((n, s.total()));
            while next <= n {
                next *= 2;
            }
        }
    }
    out
}

/// Partial sums are compared at the checkpoints `2^j` and at the end. The
/// series is judged summable iff the last block contributes at most `tol` and
/// the last three block sums are non-increasing (up to a relative `1e−9`).
/// A harmonic-like tail adds a constant per dyadic block and fails the first
/// condition; any growing tail fails the second.
pub fn summability(terms: &[f64], tol: f64) -> Summability {
    let checkpoints = dyadic_checkpoints(terms);
    let partial_sum = checkpoints.last().map_or(0.0, |c| c.1);
    let blocks: Vec<f64> = checkpoints.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let last_block = blocks.last().copied().unwrap_or(partial_sum);
    let verdict = if !partial_sum.is_finite() {
        Verdict::No
    } else if blocks.len() < MIN_DYADIC_BLOCKS {
        Verdict::Inconclusive
    } else {
        // The final block may be partial, so compare the full ones before it.
        let full = &blocks[..blocks.len() - 1];
        let k = full.len();
        let settling = full[k - 3..].windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-300);
        Verdict::from_bool(last_block <= tol && full[k - 1] <= tol && settling)
    };
    Summability { verdict, partial_sum, last_block }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&[]).is_nan());
    }

    #[test]
    fn tails() {
        assert_eq!(tail_start(10, 0.2), 8);
        assert_eq!(tail_start(10, 1.0), 0);
        assert_eq!(tail_start(7, 0.5), 3);
        assert!(check_tail_fraction(0.0).is_err());
        assert!(check_tail_fraction(1.5).is_err());
    }

    #[test]
    fn plateau_rules() {
        let flat = vec![2.0; 100];
        assert_eq!(plateau(&flat, 0.0, 0.2).verdict, Verdict::Yes);
        let approach: Vec<f64> = (1..=1000).map(|k| 1.0 - 1.0 / k as f64).collect();
        assert_eq!(plateau(&approach, 1e-2, 0.2).verdict, Verdict::Yes);
        let grow: Vec<f64> = (1..=1000).map(|k| (k as f64).ln()).collect();
        assert_eq!(plateau(&grow, 1e-2, 0.2).verdict, Verdict::No);
        assert_eq!(plateau(&grow[..5], 1e-2, 0.2).verdict, Verdict::Inconclusive);
    }

    #[test]
    fn summability_rules() {
        let harmonic: Vec<f64> = (1..=10_000).map(|k| 1.0 / k as f64).collect();
        assert_eq!(summability(&harmonic, 1e-2).verdict, Verdict::No);
        let squares: Vec<f64> = (1..=10_000).map(|k| 1.0 / (k * k) as f64).collect();
        let s = summability(&squares, 1e-2);
        assert_eq!(s.verdict, Verdict::Yes);
        assert!((s.partial_sum - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-3);
        let linear: Vec<f64> = vec![1e-6; 10_000];
        assert_eq!(summability(&linear, 1e-2).verdict, Verdict::No);
        assert_eq!(summability(&[1.0, 0.5], 1e-2).verdict, Verdict::Inconclusive);
        assert_eq!(summability(&vec![0.0; 100], 0.0).verdict, Verdict::Yes);
    }

    #[test]
    fn verdict_algebra() {
        use Verdict::*;
        assert_eq!(Yes.and(Yes), Yes);
        assert_eq!(Yes.and(No), No);
        assert_eq!(Inconclusive.and(No), No);
        assert_eq!(Inconclusive.and(Yes), Inconclusive);
        assert_eq!(serde_json::to_string(&Inconclusive).unwrap(), "\"inconclusive\"");
    }

    proptest! {
        #[test]
        fn median_splits_the_sample(v in prop::collection::vec(-1e6f64..1e6, 1..200)) {
            let m = median(&v);
            let below = v.iter().filter(|&&x| x <= m).count();
            let above = v.iter().filter(|&&x| x >= m).count();
            prop_assert!(2 * below >= v.len() && 2 * above >= v.len());
        }
    }
}
