//! The spaces `V^λ_p(Δ_G^m)` and `V^λ_∞(Δ_G^m)`, the u-padding operator, the
//! growth bounds for `uV^λ_∞(Δ_G^m)`, and α-dual tests.
//!
//! A member `a` of the α-dual of `uV^λ_∞(Δ_G^m)` is characterized by
//! `Σ_k (λ_k)^m |log a_k| < ∞`; pairings are `Σ_k |log a_k · log x_k|`.

use serde::Serialize;

use crate::convergence::{delta_logs, means_of, MeanKind, Tolerances};
use crate::error::{Error, Result};
use crate::geocore::{GeoNum, NeumaierSum};
use crate::seqmodel::{Averaging, GeoSeq, LambdaSeq, PSeq, Provenance};
use crate::verdict::{plateau, summability, Verdict};

/// Replaces the first `m` terms by `0_G`.
pub fn u_transform(x: &GeoSeq, m: u32) -> Result<GeoSeq> {
    let m = m as usize;
    if x.len() <= m {
        return Err(Error::TooShort { len: x.len(), needed: m + 1 });
    }
    let mut terms = x.terms().to_vec();
    terms[..m].fill(GeoNum::ZERO);
    GeoSeq::new(terms, Provenance::Derived(format!("u_{m} of {}", x.source())))
}

/// `x_k = 0_G` for `k ≤ m` and `log x_k = (λ_k)^m` beyond.
pub fn canonical_sequence(lam: &LambdaSeq, m: u32) -> Result<GeoSeq> {
    let terms = lam
        .values()
        .iter()
        .enumerate()
        .map(|(i, l)| if i < m as usize { Ok(GeoNum::ZERO) } else { GeoNum::from_log(l.powi(m as i32)) })
        .collect::<Result<Vec<_>>>()?;
    GeoSeq::new(terms, Provenance::Derived(format!("canonical lambda^{m}")))
}

#[derive(Debug, Clone, PartialEq)]
pub enum VLambdaVariant {
    /// `Σ_n |t_n|^{p_n} < ∞`.
    P(PSeq),
    /// `sup_n |t_n| < ∞`.
    Sup,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VLambdaMembership {
    pub verdict: Verdict,
    /// `sup_n |t_n|` (both variants).
    pub sup: f64,
    /// `Σ_n |t_n|^{p_n}` over the truncation (p variant).
    pub partial_sum: Option<f64>,
    /// Contribution of the last dyadic block (p variant).
    pub last_block: Option<f64>,
}

/// Membership in `V^λ_p(Δ_G^m)` or `V^λ_∞(Δ_G^m)`; `t_n` is the signed
/// `(V,λ)` mean of `log Δ_G^m x` about `0_G`.
pub fn vlambda_membership(
    x: &GeoSeq,
    m: u32,
    lam: &LambdaSeq,
    variant: &VLambdaVariant,
    tols: Tolerances,
) -> Result<VLambdaMembership> {
    tols.validate()?;
    let d = delta_logs(x, m)?;
    let means: Vec<f64> = means_of(&d, &Averaging::VallePoussin(lam.clone()), 0.0, MeanKind::Signed)
        .into_iter()
        .map(f64::abs)
        .collect();
    let sup = means.iter().copied().fold(0.0, f64::max);
    match variant {
        VLambdaVariant::Sup => {
            let pl = plateau(&means, tols.tol, tols.tail_fraction);
            Ok(VLambdaMembership { verdict: pl.verdict, sup, partial_sum: None, last_block: None })
        }
        VLambdaVariant::P(p) => {
            if !p.covers(means.len()) {
                return Err(Error::InvalidExponent {
                    index: means.len(),
                    reason: format!("p must cover {} means", means.len()),
                });
            }
            let terms = means
                .iter()
                .enumerate()
                .map(|(i, t)| p.get(i + 1).map(|pn| t.powf(pn)))
                .collect::<Result<Vec<_>>>()?;
            let s = summability(&terms, tols.tol);
            Ok(VLambdaMembership {
                verdict: s.verdict,
                sup,
                partial_sum: Some(s.partial_sum),
                last_block: Some(s.last_block),
            })
        }
    }
}

/// Largest deviation of `Σ_{k≤n} log Δ^m (u x)_k + log Δ^{m−1} (u x)_{n+1}`
/// from zero over all `n`; the sum telescopes because `Δ^{m−1} (u x)_1 = 0_G`.
pub fn telescoping_residual(x: &GeoSeq, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidParameter("telescoping needs m ≥ 1".into()));
    }
    let y = u_transform(x, m)?;
    let d = delta_logs(&y, m)?;
    let d1 = delta_logs(&y, m - 1)?;
    let mut s = NeumaierSum::default();
    let mut worst: f64 = 0.0;
    for n in 0..d.len() {
        s.add(d[n]);
        worst = worst.max((s.total() + d1[n + 1]).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    /// `sup_k |log Δ_G^{m−1} (u x)_k| / λ_k`.
    pub sup_delta_ratio: f64,
    /// `sup_k |log (u x)_k| / (λ_k)^m`.
    pub sup_level_ratio: f64,
    pub delta_trends_up: bool,
    pub level_trends_up: bool,
}

/// Checks the growth bounds implied by `u x ∈ uV^λ_∞(Δ_G^m)`. Refuses when
/// `u x` is not a member on the truncation.
///
/// The bounds rest on `λ_n` being comparable to `n`; for slowly growing λ a
/// member may legitimately trend upward here.
pub fn lemma_growth_check(x: &GeoSeq, m: u32, lam: &LambdaSeq, tols: Tolerances) -> Result<GrowthReport> {
    if m == 0 {
        return Err(Error::InvalidParameter("growth bounds need m ≥ 1".into()));
    }
    let y = u_transform(x, m)?;
    let member = vlambda_membership(&y, m, lam, &VLambdaVariant::Sup, tols)?;
    if !member.verdict.is_yes() {
        return Err(Error::Precondition(format!(
            "u(x) is not in V^λ_∞(Δ^{m}) on the truncation (verdict {})",
            member.verdict
        )));
    }
    let d1 = delta_logs(&y, m - 1)?;
    let n = d1.len().min(lam.len());
    let delta_ratio: Vec<f64> = (0..n).map(|k| d1[k].abs() / lam.values()[k]).collect();
    let n = y.len().min(lam.len());
    let level_ratio: Vec<f64> =
        (0..n).map(|k| y.terms()[k].log().abs() / lam.values()[k].powi(m as i32)).collect();
    let pd = plateau(&delta_ratio, tols.tol, tols.tail_fraction);
    let pl = plateau(&level_ratio, tols.tol, tols.tail_fraction);
    Ok(GrowthReport {
        sup_delta_ratio: pd.sup,
        sup_level_ratio: pl.sup,
        delta_trends_up: pd.verdict.is_no(),
        level_trends_up: pl.verdict.is_no(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaDualMembership {
    pub verdict: Verdict,
    /// `Σ_k (λ_k)^m |log a_k|` over the truncation.
    pub weighted_sum: f64,
    pub last_block: f64,
}

fn weighted_terms(a: &GeoSeq, lam: &LambdaSeq, m: u32) -> Result<Vec<f64>> {
    if lam.len() < a.len() {
        return Err(Error::Precondition(format!("λ has {} terms, a has {}", lam.len(), a.len())));
    }
    Ok(a.terms().iter().zip(lam.values()).map(|(t, l)| l.powi(m as i32) * t.log().abs()).collect())
}

/// `a ∈ [uV^λ_∞(Δ_G^m)]^α` iff `Σ_k (λ_k)^m |log a_k|` converges, judged on
/// dyadic blocks of the partial sums.
pub fn alpha_dual_membership(a: &GeoSeq, lam: &LambdaSeq, m: u32, tol: f64) -> Result<AlphaDualMembership> {
    crate::verdict::check_tol(tol)?;
    let s = summability(&weighted_terms(a, lam, m)?, tol);
    Ok(AlphaDualMembership { verdict: s.verdict, weighted_sum: s.partial_sum, last_block: s.last_block })
}

fn pairing_terms(a: &GeoSeq, x: &GeoSeq, n: usize, signed: bool) -> Result<Vec<f64>> {
    let avail = a.len().min(x.len());
    if n > avail {
        return Err(Error::TooShort { len: avail, needed: n });
    }
    Ok(a.terms()[..n]
        .iter()
        .zip(&x.terms()[..n])
        .map(|(p, q)| {
            let v = p.log() * q.log();
            if signed {
                v
            } else {
                v.abs()
            }
        })
        .collect())
}

fn running(terms: &[f64]) -> Result<Vec<GeoNum>> {
    let mut s = NeumaierSum::default();
    terms
        .iter()
        .map(|t| {
            s.add(*t);
            GeoNum::from_log(s.total())
        })
        .collect()
}

/// Partial sums of `⊕_k |a_k ⊙ x_k|^G` for `N' = 1..=n`.
pub fn pairing_sum(a: &GeoSeq, x: &GeoSeq, n: usize) -> Result<Vec<GeoNum>> {
    running(&pairing_terms(a, x, n, false)?)
}

/// Partial sums of `⊕_k a_k ⊙ x_k` without the modulus: a convergence probe
/// for β-type pairings. No characterization is attached to it.
pub fn pairing_sum_signed(a: &GeoSeq, x: &GeoSeq, n: usize) -> Result<Vec<GeoNum>> {
    running(&pairing_terms(a, x, n, true)?)
}

/// Verdict on finiteness of `Σ_k |log a_k · log x_k|`.
pub fn pairing_verdict(a: &GeoSeq, x: &GeoSeq, tol: f64) -> Result<Verdict> {
    let n = a.len().min(x.len());
    Ok(summability(&pairing_terms(a, x, n, false)?, tol).verdict)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingBound {
    /// `Σ_k |log a_k · log x_k|`.
    pub pairing: f64,
    /// `sup_k |log x_k| / (λ_k)^m · Σ_k (λ_k)^m |log a_k|`.
    pub bound: f64,
    pub holds: bool,
}

/// Evaluates both sides of `Σ |a_k x_k| ≤ sup_k(|x_k| / λ_k^m) · Σ λ_k^m |a_k|`
/// on logs over the common length.
pub fn pairing_bound(a: &GeoSeq, x: &GeoSeq, lam: &LambdaSeq, m: u32) -> Result<PairingBound> {
    let n = a.len().min(x.len()).min(lam.len());
    let a = a.truncate(n)?;
    let pairing = pairing_terms(&a, x, n, false)?.iter().fold(NeumaierSum::default(), |mut s, t| {
        s.add(*t);
        s
    });
    let w = weighted_terms(&a, lam, m)?;
    let mut ws = NeumaierSum::default();
    w.iter().for_each(|t| ws.add(*t));
    let sup = x.terms()[..n]
        .iter()
        .zip(lam.values())
        .map(|(t, l)| t.log().abs() / l.powi(m as i32))
        .fold(0.0, f64::max);
    let (pairing, bound) = (pairing.total(), sup * ws.total());
    Ok(PairingBound { pairing, bound, holds: pairing <= bound * (1.0 + 1e-12) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UEquivalence {
    pub samples: usize,
    /// `(verdict for x, verdict for u x)` per sample.
    pub verdicts: Vec<(Verdict, Verdict)>,
    /// Indices where the two verdicts differ.
    pub flips: Vec<usize>,
    /// Largest gap between the pairing difference and the fixed head
    /// `Σ_{k≤m} |log a_k · log x_k|`.
    pub max_head_mismatch: f64,
}

/// Compares pairing verdicts of `a` against each `x` and against `u x`.
pub fn alpha_dual_u_equivalence(a: &GeoSeq, m: u32, samples: &[GeoSeq], tol: f64) -> Result<UEquivalence> {
    let mut out = UEquivalence {
        samples: samples.len(),
        verdicts: Vec::with_capacity(samples.len()),
        flips: Vec::new(),
        max_head_mismatch: 0.0,
    };
    for (i, x) in samples.iter().enumerate() {
        let ux = u_transform(x, m)?;
        let (vx, vu) = (pairing_verdict(a, x, tol)?, pairing_verdict(a, &ux, tol)?);
        if vx != vu {
            out.flips.push(i);
        }
        out.verdicts.push((vx, vu));
        let n = a.len().min(x.len());
        let cx = pairing_sum(a, x, n)?;
        let cu = pairing_sum(a, &ux, n)?;
        let head: f64 = pairing_terms(a, x, m as usize, false)?.iter().sum();
        let gap = (cx[n - 1].log() - cu[n - 1].log() - head).abs();
        let scale = 1.0 + cx[n - 1].log().abs();
        out.max_head_mismatch = out.max_head_mismatch.max(gap / scale);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqmodel::{generate, LambdaKind};
    use proptest::prelude::*;

    fn logs(v: &[f64]) -> GeoSeq {
        GeoSeq::from_logs(v.iter().copied()).unwrap()
    }

    fn t() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn padding() {
        let x = logs(&[5.0, 7.0, 3.0, 4.0]);
        let u = u_transform(&x, 2).unwrap();
        assert_eq!(u.logs(), vec![0.0, 0.0, 3.0, 4.0]);
        assert_eq!(u_transform(&u, 2).unwrap().logs(), u.logs());
        assert_eq!(u_transform(&x, 0).unwrap().logs(), x.logs());
        assert!(u_transform(&x, 4).is_err());
    }

    #[test]
    fn trivial_sequence_is_in_both() {
        let x = logs(&[0.0; 300]);
        let lam = LambdaKind::N.build(300);
        for v in [VLambdaVariant::Sup, VLambdaVariant::P(PSeq::constant(1.0).unwrap())] {
            assert_eq!(vlambda_membership(&x, 2, &lam, &v, t()).unwrap().verdict, Verdict::Yes);
        }
        let g = lemma_growth_check(&x, 2, &lam, t()).unwrap();
        assert_eq!((g.sup_delta_ratio, g.sup_level_ratio), (0.0, 0.0));
    }

    #[test]
    fn summable_means() {
        let n = 4096;
        let p1 = VLambdaVariant::P(PSeq::constant(1.0).unwrap());
        // unit windows: the means are the terms 1/k² themselves
        let x = logs(&(1..=n).map(|k| 1.0 / (k * k) as f64).collect::<Vec<_>>());
        let r = vlambda_membership(&x, 0, &LambdaKind::Const1.build(n), &p1, t()).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        // Cesàro windows: d_1 = 1, d_k = 1/k − 1/(k−1) gives prefix sums 1/n
        // and means 1/n²
        let d: Vec<f64> =
            (1..=n).map(|k| if k == 1 { 1.0 } else { 1.0 / k as f64 - 1.0 / (k - 1) as f64 }).collect();
        let r = vlambda_membership(&logs(&d), 0, &LambdaKind::N.build(n), &p1, t()).unwrap();
        assert_eq!(r.verdict, Verdict::Yes);
        assert!((r.partial_sum.unwrap() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-3);
        // Cesàro means of 1/k² decay like 1/n, so their sum diverges
        let r = vlambda_membership(&x, 0, &LambdaKind::N.build(n), &p1, t()).unwrap();
        assert_eq!(r.verdict, Verdict::No);
    }

    #[test]
    fn polynomial_beyond_order_is_unbounded() {
        let x = generate(&"log-polynomial:m=3".parse().unwrap(), 2000).unwrap();
        let lam = LambdaKind::N.build(2000);
        assert_eq!(vlambda_membership(&x, 2, &lam, &VLambdaVariant::Sup, t()).unwrap().verdict, Verdict::No);
        assert_eq!(vlambda_membership(&x, 3, &lam, &VLambdaVariant::Sup, t()).unwrap().verdict, Verdict::Yes);
    }

    #[test]
    fn growth_for_exponential_sequence() {
        let n = 1000;
        let x = logs(&(1..=n).map(|k| k as f64).collect::<Vec<_>>());
        let g = lemma_growth_check(&x, 1, &LambdaKind::N.build(n), t()).unwrap();
        assert_eq!(g.sup_level_ratio, 1.0);
        assert!(!g.delta_trends_up && !g.level_trends_up);
    }

    #[test]
    fn growth_bounds_need_lambda_comparable_to_n() {
        let n = 1000;
        let lam = LambdaKind::Const1.build(n);
        let x = canonical_sequence(&LambdaKind::N.build(n), 1).unwrap();
        let g = lemma_growth_check(&x, 1, &lam, t()).unwrap();
        assert!(g.delta_trends_up);
        let bad = logs(&(1..=n).map(|k| (k * k) as f64).collect::<Vec<_>>());
        assert!(matches!(
            lemma_growth_check(&bad, 1, &LambdaKind::N.build(n), t()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn dual_examples() {
        let n = 8192;
        let m = 2;
        let lam = LambdaKind::N.build(n);
        let w = |k: usize| lam.values()[k - 1].powi(m as i32);
        let good = logs(&(1..=n).map(|k| 1.0 / (w(k) * (k * k) as f64)).collect::<Vec<_>>());
        assert_eq!(alpha_dual_membership(&good, &lam, m, 1e-2).unwrap().verdict, Verdict::Yes);
        let bad = logs(&(1..=n).map(|k| 1.0 / w(k)).collect::<Vec<_>>());
        let r = alpha_dual_membership(&bad, &lam, m, 1e-2).unwrap();
        assert_eq!(r.verdict, Verdict::No);
        // every weighted term is 1, so the partial sums grow linearly
        assert!((r.weighted_sum - n as f64).abs() < 1e-6 * n as f64);
        let harmonic = logs(&(1..=n).map(|k| 1.0 / (w(k) * k as f64)).collect::<Vec<_>>());
        assert_eq!(alpha_dual_membership(&harmonic, &lam, m, 1e-2).unwrap().verdict, Verdict::No);
        let zero = logs(&vec![0.0; n]);
        assert_eq!(alpha_dual_membership(&zero, &lam, m, 1e-2).unwrap().verdict, Verdict::Yes);

        let canon = canonical_sequence(&lam, m).unwrap();
        assert_eq!(pairing_verdict(&good, &canon, 1e-2).unwrap(), Verdict::Yes);
        assert_eq!(pairing_verdict(&bad, &canon, 1e-2).unwrap(), Verdict::No);
        let b = pairing_bound(&good, &canon, &lam, m).unwrap();
        assert!(b.holds);
        assert!(pairing_sum(&zero, &canon, n).unwrap().iter().all(|g| g.is_zero()));
    }

    #[test]
    fn canonical_sequence_is_in_padded_space() {
        for kind in [LambdaKind::N, LambdaKind::Const1] {
            for m in 1..=3 {
                let lam = kind.build(2000);
                let x = canonical_sequence(&lam, m).unwrap();
                assert_eq!(u_transform(&x, m).unwrap().logs(), x.logs());
                let r = vlambda_membership(&x, m, &lam, &VLambdaVariant::Sup, t()).unwrap();
                assert_eq!(r.verdict, Verdict::Yes, "{kind:?} m={m}");
            }
        }
    }

    #[test]
    fn head_invariance() {
        let n = 2048;
        let good = logs(&(1..=n).map(|k| 1.0 / (k as f64).powi(4)).collect::<Vec<_>>());
        let samples: Vec<GeoSeq> =
            ["geometric-constant:c=3", "log-oscillatory:m=0", "log-polynomial:m=1,scale=0.5"]
                .iter()
                .map(|s| generate(&s.parse().unwrap(), n).unwrap())
                .collect();
        let r = alpha_dual_u_equivalence(&good, 1, &samples, 1e-2).unwrap();
        assert!(r.flips.is_empty());
        assert!(r.max_head_mismatch < 1e-12);
    }

    proptest! {
        #[test]
        fn telescopes_under_padding(l in prop::collection::vec(-5.0f64..5.0, 20..80), m in 1u32..5) {
            prop_assert!(telescoping_residual(&logs(&l), m).unwrap() <= 1e-10);
        }

        #[test]
        fn pairing_curve_non_decreasing(a in prop::collection::vec(-3.0f64..3.0, 30), x in prop::collection::vec(-3.0f64..3.0, 30)) {
            let c = pairing_sum(&logs(&a), &logs(&x), 30).unwrap();
            prop_assert!(c.windows(2).all(|w| w[1].log() >= w[0].log()));
        }
    }
}
