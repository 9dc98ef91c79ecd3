//! Cesàro and de la Vallée-Poussin means of Δ_G^m x, the summability spaces
//! `(C,1)`, `[C,1]`, `(V,λ)`, `[V,λ]`, `l∞` over Δ_G^m, their norms, and
//! statistical / λ-statistical convergence.
//!
//! With `d = log Δ_G^m x` and center `L`, the n-th mean has log
//! `(1/λ_n) Σ_{i∈I_n} (d_i − log L)` (signed) or the same with `|·|`
//! (absolute). Cesàro is the window `1..=n` with normalizer `n`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diffops::diff_recursive;
use crate::error::{Error, Result};
use crate::geocore::{prefix_sums, GeoNum, NeumaierSum};
use crate::seqmodel::{Averaging, GeoSeq, LambdaSeq};
use crate::verdict::{check_tail_fraction, check_tol, median, plateau, tail_start, Verdict, MIN_TAIL_POINTS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanKind {
    Signed,
    Absolute,
}

/// Decision parameters common to every membership test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol: f64,
    pub tail_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol: 1e-2, tail_fraction: 0.2 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        check_tol(self.tol)?;
        check_tail_fraction(self.tail_fraction)
    }
}

/// Logs of Δ_G^m x.
pub fn delta_logs(x: &GeoSeq, m: u32) -> Result<Vec<f64>> {
    Ok(diff_recursive(x, m)?.logs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanSeries {
    pub values: Vec<GeoNum>,
    pub kind: MeanKind,
    pub averaging: String,
}

pub fn mean_series(
    x: &GeoSeq,
    m: u32,
    avg: &Averaging,
    center: GeoNum,
    kind: MeanKind,
) -> Result<MeanSeries> {
    let d = delta_logs(x, m)?;
    let values = means_of(&d, avg, center.log(), kind)
        .into_iter()
        .map(GeoNum::from_log)
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanSeries { values, kind, averaging: avg.describe() })
}

/// Mean logs for `n = 1..=avg.admissible(d.len())`.
pub(crate) fn means_of(d: &[f64], avg: &Averaging, center: f64, kind: MeanKind) -> Vec<f64> {
    let dev: Vec<f64> = match kind {
        MeanKind::Signed => d.iter().map(|v| v - center).collect(),
        MeanKind::Absolute => d.iter().map(|v| (v - center).abs()).collect(),
    };
    let p = prefix_sums(&dev);
    avg.windows(d.len()).iter().map(|w| (p[w.end] - p[w.start - 1]) / w.norm).collect()
}

/// A limit read off the tail of a series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    #[serde(rename = "L")]
    pub limit: GeoNum,
    pub converged: Verdict,
    /// `max |v − log L|` over the tail.
    pub residual: f64,
    pub tail_points: usize,
}

/// `L` is the median of the tail logs; converged iff every tail point is
/// within `tol` of it.
pub fn estimate_limit(logs: &[f64], tol: f64, tail_fraction: f64) -> Result<LimitEstimate> {
    check_tol(tol)?;
    check_tail_fraction(tail_fraction)?;
    if logs.is_empty() {
        return Err(Error::TooShort { len: 0, needed: 1 });
    }
    let tail = &logs[tail_start(logs.len(), tail_fraction)..];
    let l = median(tail);
    let residual = tail.iter().map(|v| (v - l).abs()).fold(0.0, f64::max);
    let converged = if tail.len() < MIN_TAIL_POINTS {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(residual <= tol)
    };
    Ok(LimitEstimate { limit: GeoNum::from_log(l)?, converged, residual, tail_points: tail.len() })
}

/// The sequence spaces over Δ_G^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Space {
    /// `(C,1)_G(Δ_G^m)`
    C1,
    /// `[C,1]_G(Δ_G^m)`
    AbsC1,
    /// `(V,λ)_G(Δ_G^m)`
    VL,
    /// `[V,λ]_G(Δ_G^m)`
    AbsVL,
    /// `l∞^G(Δ_G^m)`
    LInf,
}

impl Space {
    pub const ALL: [Space; 5] = [Space::C1, Space::AbsC1, Space::VL, Space::AbsVL, Space::LInf];

    pub fn name(self) -> &'static str {
        match self {
            Space::C1 => "C1",
            Space::AbsC1 => "absC1",
            Space::VL => "VL",
            Space::AbsVL => "absVL",
            Space::LInf => "linf",
        }
    }

    pub fn needs_lambda(self) -> bool {
        matches!(self, Space::VL | Space::AbsVL)
    }

    fn kind(self) -> MeanKind {
        match self {
            Space::AbsC1 | Space::AbsVL => MeanKind::Absolute,
            _ => MeanKind::Signed,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Space> {
        Space::ALL
            .into_iter()
            .find(|sp| sp.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown space `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Membership {
    pub space: Space,
    pub verdict: Verdict,
    /// Limit and residual of the tested mean series (summability spaces).
    pub limit: Option<LimitEstimate>,
    /// `sup_k |log Δ_G^m x_k|` (the `l∞` case).
    pub sup: Option<f64>,
}

fn averaging_for(space: Space, lam: Option<&LambdaSeq>) -> Result<Averaging> {
    if space.needs_lambda() {
        let lam = lam.ok_or_else(|| Error::InvalidParameter(format!("space {space} needs a λ sequence")))?;
        Ok(Averaging::VallePoussin(lam.clone()))
    } else {
        Ok(Averaging::Cesaro)
    }
}

/// Candidate limits, tried in order: the tail median of `d`, the tail median
/// of the window averages `Σ_{I_n} d_i / |I_n|`, and `0_G`. Every summability
/// test uses the same candidates, so a smaller residual in an absolute space
/// carries over to its signed counterpart.
fn limit_candidates(d: &[f64], avg: &Averaging, tail_fraction: f64) -> Vec<f64> {
    let a = avg.admissible(d.len());
    let ts = tail_start(a, tail_fraction);
    let p = prefix_sums(d);
    let window_avgs: Vec<f64> = (ts + 1..=a)
        .map(|n| {
            let w = avg.window(n).expect("n is admissible");
            (p[w.end] - p[w.start - 1]) / (w.end - w.start + 1) as f64
        })
        .collect();
    vec![median(&d[ts..a]), median(&window_avgs), 0.0]
}

/// Membership of `x` in `space` over Δ_G^m at truncation `len(x)`.
///
/// Summability spaces pick, among the candidate limits, the one that makes
/// the required mean series closest to `0_G` over the tail; the verdict is
/// yes iff that residual is within `tol`. The `l∞` case checks that
/// `|log Δ_G^m x_k|` has stopped growing (see [`plateau`]).
pub fn space_membership(
    x: &GeoSeq,
    m: u32,
    space: Space,
    lam: Option<&LambdaSeq>,
    tols: Tolerances,
) -> Result<Membership> {
    tols.validate()?;
    let d = delta_logs(x, m)?;
    membership_of_deltas(&d, space, lam, tols)
}

pub(crate) fn membership_of_deltas(
    d: &[f64],
    space: Space,
    lam: Option<&LambdaSeq>,
    tols: Tolerances,
) -> Result<Membership> {
    if space == Space::LInf {
        let mags: Vec<f64> = d.iter().map(|v| v.abs()).collect();
        let p = plateau(&mags, tols.tol, tols.tail_fraction);
        return Ok(Membership { space, verdict: p.verdict, limit: None, sup: Some(p.sup) });
    }
    let avg = averaging_for(space, lam)?;
    let a = avg.admissible(d.len());
    let ts = tail_start(a, tols.tail_fraction);
    let mut best: Option<(f64, f64)> = None;
    for c in limit_candidates(d, &avg, tols.tail_fraction) {
        let means = means_of(d, &avg, c, space.kind());
        let r = means[ts..].iter().map(|v| v.abs()).fold(0.0, f64::max);
        if best.is_none_or(|(_, br)| r < br) {
            best = Some((c, r));
        }
    }
    let (l, residual) = best.expect("at least one candidate");
    let tail_points = a - ts;
    let verdict = if tail_points < MIN_TAIL_POINTS {
        Verdict::Inconclusive
    } else {
        Verdict::from_bool(residual <= tols.tol)
    };
    let limit = LimitEstimate { limit: GeoNum::from_log(l)?, converged: verdict, residual, tail_points };
    Ok(Membership { space, verdict, limit: Some(limit), sup: None })
}

/// `‖x‖` with log `Σ_{i≤m} |log x_i| + sup_n |t_n|`, where `t_n` is the
/// signed mean of `d` (magnitude taken afterwards) or the absolute mean.
pub fn delta_norm(x: &GeoSeq, m: u32, avg: &Averaging, kind: MeanKind) -> Result<GeoNum> {
    let d = delta_logs(x, m)?;
    let mut head = NeumaierSum::default();
    for t in &x.terms()[..m as usize] {
        head.add(t.log().abs());
    }
    let sup = means_of(&d, avg, 0.0, kind).into_iter().map(f64::abs).fold(0.0, f64::max);
    GeoNum::from_log(head.total() + sup)
}

/// Density of `{k ∈ I_n : |d_k − log L| ≥ log ε}` relative to the window
/// normalizer, for each admissible `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub epsilon: GeoNum,
    /// `(n, density)`; `n` is 1-based.
    pub points: Vec<(usize, f64)>,
}

impl DensityCurve {
    pub fn density_at(&self, n: usize) -> Option<f64> {
        self.points.get(n.checked_sub(1)?).map(|p| p.1)
    }
}

fn check_eps(eps: GeoNum) -> Result<()> {
    if eps.log() <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "ε must exceed 0_G (log ε > 0), got log ε = {}",
            eps.log()
        )));
    }
    Ok(())
}

pub(crate) fn densities_of(d: &[f64], limit: f64, eps: f64, avg: &Averaging) -> Vec<f64> {
    let mut counts = Vec::with_capacity(d.len() + 1);
    counts.push(0usize);
    let mut c = 0usize;
    for v in d {
        if (v - limit).abs() >= eps {
            c += 1;
        }
        counts.push(c);
    }
    avg.windows(d.len()).iter().map(|w| (counts[w.end] - counts[w.start - 1]) as f64 / w.norm).collect()
}

pub fn stat_density_curve(
    x: &GeoSeq,
    m: u32,
    limit: GeoNum,
    eps: GeoNum,
    avg: &Averaging,
) -> Result<DensityCurve> {
    check_eps(eps)?;
    let d = delta_logs(x, m)?;
    let points = densities_of(&d, limit.log(), eps.log(), avg)
        .into_iter()
        .enumerate()
        .map(|(i, v)| (i + 1, v))
        .collect();
    Ok(DensityCurve { epsilon: eps, points })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsDensity {
    pub log_eps: f64,
    /// Largest density over the tail of `n`.
    pub tail_max: f64,
    /// Density at the last admissible `n`.
    pub last: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatConvergence {
    pub verdict: Verdict,
    #[serde(rename = "L")]
    pub limit: GeoNum,
    pub per_eps: Vec<EpsDensity>,
}

/// The default ε grid, by log: `0.1, 0.2, 0.5, 1, 2`.
pub fn default_eps_grid() -> Vec<GeoNum> {
    [0.1, 0.2, 0.5, 1.0, 2.0].iter().map(|&l| GeoNum::from_log(l).expect("finite")).collect()
}

/// Tail median of `d`, refined to the median of the tail points lying within
/// the smallest ε of it, so a density-zero set of wild values cannot drag it.
fn stat_limit(d: &[f64], a: usize, eps_min: f64, tail_fraction: f64) -> f64 {
    let tail = &d[tail_start(a, tail_fraction)..a];
    let rough = median(tail);
    let near: Vec<f64> = tail.iter().copied().filter(|v| (v - rough).abs() < eps_min).collect();
    if near.is_empty() {
        rough
    } else {
        median(&near)
    }
}

/// Statistical (Cesàro windows) or λ-statistical convergence of Δ_G^m x:
/// yes iff for every ε of the grid the density stays within `tol` over the
/// tail.
pub fn stat_convergence(
    x: &GeoSeq,
    m: u32,
    avg: &Averaging,
    eps_grid: &[GeoNum],
    tols: Tolerances,
) -> Result<StatConvergence> {
    tols.validate()?;
    let d = delta_logs(x, m)?;
    stat_of_deltas(&d, avg, eps_grid, tols)
}

pub(crate) fn stat_of_deltas(
    d: &[f64],
    avg: &Averaging,
    eps_grid: &[GeoNum],
    tols: Tolerances,
) -> Result<StatConvergence> {
    if eps_grid.is_empty() {
        return Err(Error::InvalidParameter("empty ε grid".into()));
    }
    for &e in eps_grid {
        check_eps(e)?;
    }
    let a = avg.admissible(d.len());
    let eps_min = eps_grid.iter().map(|e| e.log()).fold(f64::INFINITY, f64::min);
    let limit = stat_limit(d, a, eps_min, tols.tail_fraction);
    let ts = tail_start(a, tols.tail_fraction);
    let mut verdict = if a - ts < MIN_TAIL_POINTS { Verdict::Inconclusive } else { Verdict::Yes };
    let mut per_eps = Vec::with_capacity(eps_grid.len());
    for e in eps_grid {
        let dens = densities_of(d, limit, e.log(), avg);
        let tail_max = dens[ts..].iter().copied().fold(0.0, f64::max);
        if tail_max > tols.tol && verdict == Verdict::Yes {
            verdict = Verdict::No;
        }
        per_eps.push(EpsDensity { log_eps: e.log(), tail_max, last: dens[a - 1] });
    }
    Ok(StatConvergence { verdict, limit: GeoNum::from_log(limit)?, per_eps })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetReport {
    /// `min λ_n / n` over the tail of the truncation.
    pub observed_ratio: f64,
    pub samples: usize,
    pub s_members: usize,
    pub s_lambda_members: usize,
    /// Samples that are S-convergent but not S_λ-convergent at `tol`.
    pub implication_failures: Vec<usize>,
    /// Samples that are S-convergent at `tol` but not S_λ-convergent at
    /// `tol / min_ratio`, the tolerance the density bound transfers to.
    pub transferred_failures: Vec<usize>,
    /// Points where `density_λ(n) · λ_n > density_C(n) · n`, which the
    /// inclusion `I_n ⊆ {1..n}` forbids.
    pub pointwise_violations: usize,
}

/// Audits `S ⊆ S_λ` over `samples` when `λ_n / n ≥ min_ratio > 0` on the tail.
pub fn check_s_subset_slambda(
    samples: &[GeoSeq],
    m: u32,
    lam: &LambdaSeq,
    min_ratio: f64,
    eps_grid: &[GeoNum],
    tols: Tolerances,
) -> Result<SubsetReport> {
    tols.validate()?;
    if !(min_ratio > 0.0 && min_ratio.is_finite()) {
        return Err(Error::InvalidParameter(format!("min_ratio must be positive, got {min_ratio}")));
    }
    let observed_ratio = lam.tail_min_ratio(tols.tail_fraction);
    if observed_ratio < min_ratio {
        return Err(Error::Precondition(format!(
            "λ_n / n drops to {observed_ratio:.3e} on the tail, below the required {min_ratio}"
        )));
    }
    let cesaro = Averaging::Cesaro;
    let vp = Averaging::VallePoussin(lam.clone());
    let transferred = Tolerances { tol: tols.tol / min_ratio, ..tols };
    let mut report = SubsetReport {
        observed_ratio,
        samples: samples.len(),
        s_members: 0,
        s_lambda_members: 0,
        implication_failures: Vec::new(),
        transferred_failures: Vec::new(),
        pointwise_violations: 0,
    };
    for (i, x) in samples.iter().enumerate() {
        let d = delta_logs(x, m)?;
        if lam.len() < d.len() {
            return Err(Error::Precondition(format!(
                "λ has {} terms but sample {i} needs {}",
                lam.len(),
                d.len()
            )));
        }
        let s = stat_of_deltas(&d, &cesaro, eps_grid, tols)?;
        let sl = stat_of_deltas(&d, &vp, eps_grid, tols)?;
        let sl_t = stat_of_deltas(&d, &vp, eps_grid, transferred)?;
        report.s_members += s.verdict.is_yes() as usize;
        report.s_lambda_members += sl.verdict.is_yes() as usize;
        if s.verdict.is_yes() && !sl.verdict.is_yes() {
            report.implication_failures.push(i);
        }
        if s.verdict.is_yes() && !sl_t.verdict.is_yes() {
            report.transferred_failures.push(i);
        }
        for e in eps_grid {
            let dc = densities_of(&d, s.limit.log(), e.log(), &cesaro);
            let dl = densities_of(&d, s.limit.log(), e.log(), &vp);
            for (n, (c, l)) in dc.iter().zip(&dl).enumerate() {
                let n = n + 1;
                if l * lam.values()[n - 1] > c * n as f64 * (1.0 + 1e-12) {
                    report.pointwise_violations += 1;
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqmodel::{generate, LambdaKind};
    use proptest::prelude::*;

    fn gen(spec: &str, n: usize) -> GeoSeq {
        generate(&spec.parse().unwrap(), n).unwrap()
    }

    fn lam(kind: LambdaKind, n: usize) -> LambdaSeq {
        kind.build(n)
    }

    #[test]
    fn exact_cancellation() {
        let x = gen("geometric-constant:c=1.5", 50);
        let d = delta_logs(&x, 1).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
        let x = GeoSeq::from_logs((1..=50).map(|k| 3.0 * k as f64)).unwrap();
        let c = GeoNum::from_log(-3.0).unwrap();
        for kind in [MeanKind::Signed, MeanKind::Absolute] {
            let s = mean_series(&x, 1, &Averaging::Cesaro, c, kind).unwrap();
            assert!(s.values.iter().all(|v| v.log() == 0.0));
        }
    }

    #[test]
    fn oscillating_means_closed_form() {
        let x = gen("log-oscillatory:m=0", 200);
        let s = mean_series(&x, 0, &Averaging::Cesaro, GeoNum::ZERO, MeanKind::Signed).unwrap();
        for (i, v) in s.values.iter().enumerate() {
            let n = (i + 1) as f64;
            let expect = if (i + 1) % 2 == 1 { -1.0 / n } else { 0.0 };
            assert!((v.log() - expect).abs() < 1e-14, "n={n}: {}", v.log());
        }
        let a = mean_series(&x, 0, &Averaging::Cesaro, GeoNum::ZERO, MeanKind::Absolute).unwrap();
        assert!(a.values.iter().all(|v| (v.log() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn limit_estimates() {
        let c = estimate_limit(&[2.0; 40], 1e-9, 0.2).unwrap();
        assert_eq!((c.limit.log(), c.converged, c.residual), (2.0, Verdict::Yes, 0.0));
        let osc: Vec<f64> = (1..=100).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(estimate_limit(&osc, 0.9, 0.2).unwrap().converged, Verdict::No);
        let inv: Vec<f64> = (1..=10_000).map(|n| 1.0 / n as f64).collect();
        let e = estimate_limit(&inv, 1e-2, 0.2).unwrap();
        assert_eq!(e.converged, Verdict::Yes);
        // tail is n = 8001..=10000; the largest deviation sits at n = 8001
        let oracle = 1.0 / 8001.0 - e.limit.log();
        assert!((e.residual - oracle).abs() < 1e-15);
        assert!(e.limit.log().abs() < 1.0 / 8000.0);
        assert_eq!(estimate_limit(&[1.0; 5], 1e-2, 0.2).unwrap().converged, Verdict::Inconclusive);
        assert!(estimate_limit(&[], 1e-2, 0.2).is_err());
    }

    #[test]
    fn constant_family_is_everywhere() {
        let x = gen("geometric-constant:c=0.7", 2000);
        let l = lam(LambdaKind::Sqrt, 2000);
        for space in Space::ALL {
            let r = space_membership(&x, 1, space, Some(&l), Tolerances::default()).unwrap();
            assert_eq!(r.verdict, Verdict::Yes, "{space}");
            if let Some(est) = r.limit {
                assert!(est.limit.is_zero());
            }
        }
    }

    #[test]
    fn oscillation_separates_signed_from_absolute() {
        let x = gen("log-oscillatory:m=1", 10_000);
        let t = Tolerances::default();
        let c1 = space_membership(&x, 1, Space::C1, None, t).unwrap();
        assert_eq!(c1.verdict, Verdict::Yes);
        assert!(c1.limit.unwrap().limit.log().abs() < 1e-2);
        assert_eq!(space_membership(&x, 1, Space::AbsC1, None, t).unwrap().verdict, Verdict::No);
    }

    #[test]
    fn lambda_n_reduces_to_cesaro() {
        let n = 3000;
        let l = lam(LambdaKind::N, n);
        for spec in
            ["log-oscillatory:m=0", "log-polynomial:m=1,scale=0.001", "sparse-spike:set=squares,height=1"]
        {
            let x = gen(spec, n);
            for (a, b) in [(Space::C1, Space::VL), (Space::AbsC1, Space::AbsVL)] {
                let ra = space_membership(&x, 0, a, None, Tolerances::default()).unwrap();
                let rb = space_membership(&x, 0, b, Some(&l), Tolerances::default()).unwrap();
                assert_eq!(ra.verdict, rb.verdict);
                assert_eq!(ra.limit.unwrap().residual, rb.limit.unwrap().residual);
            }
        }
    }

    #[test]
    fn vl_needs_lambda() {
        let x = gen("geometric-constant", 20);
        assert!(space_membership(&x, 0, Space::VL, None, Tolerances::default()).is_err());
    }

    #[test]
    fn norm_of_trivial_sequence_is_zero() {
        let x = GeoSeq::from_logs(vec![0.0; 30]).unwrap();
        for kind in [MeanKind::Signed, MeanKind::Absolute] {
            assert!(delta_norm(&x, 2, &Averaging::Cesaro, kind).unwrap().is_zero());
        }
    }

    #[test]
    fn spike_density_oracle() {
        let x = gen("sparse-spike:set=squares,height=1", 100);
        let eps = GeoNum::from_log(0.5).unwrap();
        let c = stat_density_curve(&x, 0, GeoNum::ZERO, eps, &Averaging::Cesaro).unwrap();
        let brute = (1..=100usize).filter(|k| (1..=10).any(|j| j * j == *k)).count();
        assert_eq!(brute, 10);
        assert_eq!(c.density_at(100), Some(0.10));
        let flat = gen("geometric-constant:c=2", 40);
        let z =
            stat_density_curve(&flat, 0, GeoNum::from_log(2.0).unwrap(), eps, &Averaging::Cesaro).unwrap();
        assert!(z.points.iter().all(|p| p.1 == 0.0));
        assert!(stat_density_curve(&x, 0, GeoNum::ZERO, GeoNum::ZERO, &Averaging::Cesaro).is_err());
    }

    #[test]
    fn threshold_ties_count() {
        let x = GeoSeq::from_logs([0.5, 0.25, 0.5]).unwrap();
        let eps = GeoNum::from_log(0.5).unwrap();
        let c = stat_density_curve(&x, 0, GeoNum::ZERO, eps, &Averaging::Cesaro).unwrap();
        assert_eq!(c.density_at(3), Some(2.0 / 3.0));
    }

    #[test]
    fn growing_spikes_are_statistical_but_not_strongly_summable() {
        let x = gen("sparse-spike:set=squares,height=sqrt", 100_000);
        let t = Tolerances::default();
        let l = lam(LambdaKind::N, 100_000);
        let s = stat_convergence(&x, 0, &Averaging::VallePoussin(l.clone()), &default_eps_grid(), t).unwrap();
        assert_eq!(s.verdict, Verdict::Yes);
        assert!(s.limit.is_zero());
        assert_eq!(space_membership(&x, 0, Space::AbsVL, Some(&l), t).unwrap().verdict, Verdict::No);
        assert_eq!(space_membership(&x, 0, Space::LInf, None, t).unwrap().verdict, Verdict::No);
    }

    #[test]
    fn s_subset_guard() {
        let n = 4000;
        let x = vec![gen("sparse-spike:set=squares,height=2", n), gen("log-oscillatory:m=0", n)];
        let t = Tolerances { tol: 5e-2, tail_fraction: 0.2 };
        let eps = default_eps_grid();
        let r = check_s_subset_slambda(&x, 0, &lam(LambdaKind::N, n), 1.0, &eps, t).unwrap();
        assert_eq!((r.s_members, r.s_lambda_members), (1, 1));
        assert!(r.implication_failures.is_empty());
        let r = check_s_subset_slambda(&x, 0, &lam(LambdaKind::Half, n), 0.5, &eps, t).unwrap();
        assert!(r.implication_failures.is_empty() && r.transferred_failures.is_empty());
        assert_eq!(r.pointwise_violations, 0);
        let refused = check_s_subset_slambda(&x, 0, &lam(LambdaKind::Sqrt, n), 0.1, &eps, t);
        assert!(matches!(refused, Err(Error::Precondition(_))));
    }

    fn bounded_logs() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, 40..200)
    }

    proptest! {
        #[test]
        fn norm_axioms(l1 in bounded_logs(), a in -4.0f64..4.0, m in 0u32..3, sq in any::<bool>()) {
            let x = GeoSeq::from_logs(l1.clone()).unwrap();
            let y = GeoSeq::from_logs(l1.iter().map(|v| (v * 1.3).sin())).unwrap();
            let avg = if sq { Averaging::VallePoussin(LambdaKind::Sqrt.build(l1.len())) } else { Averaging::Cesaro };
            for kind in [MeanKind::Signed, MeanKind::Absolute] {
                let nx = delta_norm(&x, m, &avg, kind).unwrap().log();
                let ny = delta_norm(&y, m, &avg, kind).unwrap().log();
                let nxy = delta_norm(&x.add(&y).unwrap(), m, &avg, kind).unwrap().log();
                prop_assert!(nx >= 0.0);
                prop_assert!(nxy <= nx + ny + 1e-10);
                let ax = delta_norm(&x.scale(GeoNum::from_log(a).unwrap()).unwrap(), m, &avg, kind)
                    .unwrap()
                    .log();
                prop_assert!((ax - a.abs() * nx).abs() <= 1e-10 * (1.0 + nx));
            }
        }

        #[test]
        fn inclusion_absolute_in_signed(l in bounded_logs(), tol in 1e-3f64..1.0, m in 0u32..3) {
            let x = GeoSeq::from_logs(l.clone()).unwrap();
            let t = Tolerances { tol, tail_fraction: 0.3 };
            let lam = LambdaKind::Sqrt.build(l.len());
            for (small, big) in [(Space::AbsC1, Space::C1), (Space::AbsVL, Space::VL)] {
                let s = space_membership(&x, m, small, Some(&lam), t).unwrap();
                let b = space_membership(&x, m, big, Some(&lam), t).unwrap();
                prop_assert!(b.limit.unwrap().residual <= s.limit.unwrap().residual);
                prop_assert!(!(s.verdict.is_yes() && !b.verdict.is_yes()));
            }
        }

        #[test]
        fn density_antitone_in_eps(l in bounded_logs(), e1 in 0.01f64..2.0, de in 0.0f64..2.0, center in -1.0f64..1.0) {
            let x = GeoSeq::from_logs(l.clone()).unwrap();
            let avg = Averaging::VallePoussin(LambdaKind::Half.build(l.len()));
            let c = GeoNum::from_log(center).unwrap();
            let lo = stat_density_curve(&x, 0, c, GeoNum::from_log(e1).unwrap(), &avg).unwrap();
            let hi = stat_density_curve(&x, 0, c, GeoNum::from_log(e1 + de).unwrap(), &avg).unwrap();
            for (a, b) in lo.points.iter().zip(&hi.points) {
                prop_assert!(b.1 <= a.1);
                prop_assert!((0.0..=1.0).contains(&a.1));
            }
        }

        // Exact finite-n forms of the two density inequalities: the absolute
        // mean dominates log ε times the density, and for |d − L| ≤ B it is at
        // most B times the density plus log ε.
        #[test]
        fn density_sandwiches_absolute_mean(l in bounded_logs(), eps in 0.05f64..2.0, center in -1.0f64..1.0) {
            let avg = Averaging::VallePoussin(LambdaKind::Sqrt.build(l.len()));
            let dens = densities_of(&l, center, eps, &avg);
            let means = means_of(&l, &avg, center, MeanKind::Absolute);
            let b = l.iter().map(|v| (v - center).abs()).fold(0.0, f64::max);
            for (dn, mn) in dens.iter().zip(&means) {
                prop_assert!(eps * dn <= mn + 1e-12);
                prop_assert!(*mn <= b * dn + eps + 1e-12);
            }
        }
    }
}
