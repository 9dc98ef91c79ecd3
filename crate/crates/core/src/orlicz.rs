//! Orlicz functions and the modular spaces `[V,λ,M,p]^G(Δ_G^m)` with their
//! `0` and `∞` variants, the paranorm `g`, the Δ₂ probe and solidity.
//!
//! M acts on logs: for a geometric modulus `a`, `log M(a) = M(log a)`.
//! Division by ρ divides logs by `log ρ`, and the exponent `(p_k)^G` is the
//! classical power on the log. So the modular series at `n` has log
//! `(1/λ_n) Σ_{k∈I_n} M(|d_k − log L| / log ρ)^{p_k}` with `d = log Δ_G^m x`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::convergence::{delta_logs, MeanKind, MeanSeries, Tolerances};
use crate::error::{Error, Result};
use crate::geocore::GeoNum;
use crate::seqmodel::{Averaging, GeoSeq, LambdaSeq, PSeq};
use crate::verdict::{median, plateau, tail_start, Plateau, Verdict, MIN_TAIL_POINTS};

/// Built-in Orlicz functions. JSON form: `{"family":"power","q":2}`,
/// `{"family":"expm1"}`, `{"family":"pwl","knots":[[0,0],[1,1],…]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum OrliczFn {
    /// `t^q`, `q ≥ 1`.
    Power { q: f64 },
    /// `e^t − 1`.
    Expm1,
    /// Piecewise linear through the knots, extended linearly past the last.
    Pwl { knots: Vec<(f64, f64)> },
}

impl OrliczFn {
    pub fn validate(&self) -> Result<()> {
        match self {
            OrliczFn::Power { q } => {
                if !(q.is_finite() && *q >= 1.0) {
                    return Err(Error::InvalidOrlicz(format!("power needs q ≥ 1, got {q}")));
                }
            }
            OrliczFn::Expm1 => {}
            OrliczFn::Pwl { knots } => {
                let bad = |why: String| Err(Error::InvalidOrlicz(format!("pwl: {why}")));
                if knots.len() < 2 {
                    return bad("needs at least two knots".into());
                }
                if knots[0] != (0.0, 0.0) {
                    return bad(format!("first knot must be (0, 0), got {:?}", knots[0]));
                }
                if knots.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite()) {
                    return bad("non-finite knot".into());
                }
                let mut prev_slope = 0.0;
                for (i, w) in knots.windows(2).enumerate() {
                    let (dt, dv) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
                    if dt <= 0.0 {
                        return bad(format!("knot {} does not increase t", i + 2));
                    }
                    let slope = dv / dt;
                    if slope < prev_slope {
                        return bad(format!("slope drops at knot {} (not convex)", i + 2));
                    }
                    prev_slope = slope;
                }
                if prev_slope <= 0.0 {
                    return bad("last segment is flat, so M does not tend to infinity".into());
                }
            }
        }
        Ok(())
    }

    /// Parses and validates the JSON form.
    pub fn from_json(s: &str) -> Result<OrliczFn> {
        let f: OrliczFn = serde_json::from_str(s).map_err(|e| Error::InvalidOrlicz(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    /// Accepts inline JSON or a path to a file holding it.
    pub fn from_arg(arg: &str) -> Result<OrliczFn> {
        if arg.trim_start().starts_with('{') {
            OrliczFn::from_json(arg)
        } else {
            OrliczFn::from_json(&fs::read_to_string(Path::new(arg))?)
        }
    }

    /// `M(t)` for `t ≥ 0`; may return `+∞` on overflow.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            OrliczFn::Power { q } => {
                if *q == 1.0 {
                    t
                } else if *q == 2.0 {
                    t * t
                } else {
                    t.powf(*q)
                }
            }
            OrliczFn::Expm1 => t.exp_m1(),
            OrliczFn::Pwl { knots } => {
                let i = knots.partition_point(|k| k.0 <= t).clamp(1, knots.len() - 1);
                let (a, b) = (knots[i - 1], knots[i]);
                a.1 + (t - a.0) * (b.1 - a.1) / (b.0 - a.0)
            }
        }
    }

    /// Checks `M(0) = 0`, monotonicity and midpoint convexity on `grid`.
    pub fn check_shape(&self, grid: &[f64]) -> Result<()> {
        if self.eval(0.0) != 0.0 {
            return Err(Error::InvalidOrlicz("M(0) ≠ 0".into()));
        }
        let mut g: Vec<f64> = grid.to_vec();
        g.sort_by(f64::total_cmp);
        for w in g.windows(2) {
            let (a, b) = (self.eval(w[0]), self.eval(w[1]));
            if b.is_finite() && b < a {
                return Err(Error::InvalidOrlicz(format!("decreases between {} and {}", w[0], w[1])));
            }
            let mid = self.eval((w[0] + w[1]) / 2.0);
            if b.is_finite() && mid > (a + b) / 2.0 * (1.0 + 1e-12) + 1e-300 {
                return Err(Error::InvalidOrlicz(format!("not convex on [{}, {}]", w[0], w[1])));
            }
        }
        Ok(())
    }
}

/// `M ⊙ a` for a geometric modulus `a` (log ≥ 0): result log is `M(a.log)`.
pub fn geo_orlicz_apply(func: &OrliczFn, a: GeoNum) -> Result<GeoNum> {
    if a.log() < 0.0 {
        return Err(Error::Domain(format!(
            "Orlicz functions take geometric moduli (log ≥ 0), got log {}",
            a.log()
        )));
    }
    let v = func.eval(a.log());
    if !v.is_finite() {
        return Err(Error::Range(format!("M({}) overflows", a.log())));
    }
    GeoNum::from_log(v)
}

/// `(m, λ, M, p)`: everything that fixes an Orlicz space except ρ and L.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczParams {
    pub m: u32,
    pub lam: LambdaSeq,
    pub func: OrliczFn,
    pub p: PSeq,
}

impl OrliczParams {
    pub fn new(m: u32, lam: LambdaSeq, func: OrliczFn, p: PSeq) -> Result<Self> {
        func.validate()?;
        Ok(OrliczParams { m, lam, func, p })
    }

    /// `H = max(1, sup p_k)`.
    pub fn h(&self) -> f64 {
        self.p.h()
    }

    fn averaging(&self) -> Averaging {
        Averaging::VallePoussin(self.lam.clone())
    }

    fn exponents(&self, len: usize) -> Result<Vec<f64>> {
        if !self.p.covers(len) {
            return Err(Error::InvalidExponent {
                index: len,
                reason: format!("p must cover {len} terms of Δ^{} x", self.m),
            });
        }
        (1..=len).map(|k| self.p.get(k)).collect()
    }
}

/// `log ρ` values searched for a witness: `2^j`, `j = −20..=20`.
pub fn rho_grid() -> Vec<f64> {
    (-20..=20).map(|j| 2f64.powi(j)).collect()
}

fn check_log_rho(log_rho: f64) -> Result<()> {
    if !(log_rho > 0.0 && log_rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("need ρ > 1 (log ρ > 0), got log ρ = {log_rho}")));
    }
    Ok(())
}

/// Modular series for the magnitudes `dev` at `log ρ`; `+∞` marks a window
/// holding an overflowed term.
fn series_raw(dev: &[f64], func: &OrliczFn, p: &[f64], log_rho: f64, avg: &Averaging) -> Vec<f64> {
    let mut finite = Vec::with_capacity(dev.len() + 1);
    let mut infinite = Vec::with_capacity(dev.len() + 1);
    let (mut s, mut c) = (crate::geocore::NeumaierSum::default(), 0usize);
    finite.push(0.0);
    infinite.push(0usize);
    for (v, pk) in dev.iter().zip(p) {
        let u = func.eval(v / log_rho);
        let u = if *pk == 1.0 { u } else { u.powf(*pk) };
        if u.is_finite() {
            s.add(u);
        } else {
            c += 1;
        }
        finite.push(s.total());
        infinite.push(c);
    }
    avg.windows(dev.len())
        .iter()
        .map(|w| {
            if infinite[w.end] > infinite[w.start - 1] {
                f64::INFINITY
            } else {
                (finite[w.end] - finite[w.start - 1]) / w.norm
            }
        })
        .collect()
}

fn deviations(x: &GeoSeq, m: u32, center: f64) -> Result<Vec<f64>> {
    Ok(delta_logs(x, m)?.iter().map(|d| (d - center).abs()).collect())
}

/// The modular series at `log ρ` around `L`.
pub fn modular_series(x: &GeoSeq, params: &OrliczParams, log_rho: f64, center: GeoNum) -> Result<MeanSeries> {
    check_log_rho(log_rho)?;
    let dev = deviations(x, params.m, center.log())?;
    let p = params.exponents(dev.len())?;
    let values = series_raw(&dev, &params.func, &p, log_rho, &params.averaging())
        .into_iter()
        .map(|v| {
            GeoNum::from_log(v).map_err(|_| Error::Range(format!("modular overflows at log ρ = {log_rho}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeanSeries { values, kind: MeanKind::Absolute, averaging: params.averaging().describe() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrliczVariant {
    /// `[V,λ,M,p]^G`: some L.
    L,
    /// `[V,λ,M,p]^G_0`: L = 0_G.
    Zero,
    /// `[V,λ,M,p]^G_∞`: bounded series.
    Inf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrliczMembership {
    pub variant: OrliczVariant,
    pub verdict: Verdict,
    /// First grid `log ρ` at which the test passed (or, for a failed `∞`
    /// test, the one whose series was examined).
    pub log_rho: Option<f64>,
    #[serde(rename = "L")]
    pub limit: Option<GeoNum>,
    /// Tail maximum of the normalized series (`L`/`0`) at `log_rho`.
    pub residual: Option<f64>,
    /// `sup_n` of the series log at `log_rho` (`∞` variant).
    pub sup: Option<f64>,
    pub note: Option<String>,
}

/// Tail maximum of `series_n / ref_n`, where `ref_n` is the series of unit
/// deviations at the same ρ. Normalizing removes the trivial decay of every
/// bounded sequence's series as `log ρ → ∞`, leaving only decay in `n`.
fn normalized_tail(series: &[f64], reference: &[f64], start: usize) -> f64 {
    series[start..]
        .iter()
        .zip(&reference[start..])
        .map(|(&s, &r)| {
            if r > 0.0 {
                s / r
            } else if s == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Membership in `[V,λ,M,p]^G(Δ_G^m)` and its `0`/`∞` variants, searching
/// `log ρ` over [`rho_grid`] in increasing order.
///
/// `L`/`0`: member iff at some ρ the series, normalized by the series of
/// unit deviations, stays within `tol` over the tail. `∞`: member iff at some
/// ρ the series passes the [`plateau`] test.
pub fn space_membership_orlicz(
    x: &GeoSeq,
    params: &OrliczParams,
    variant: OrliczVariant,
    tols: Tolerances,
) -> Result<OrliczMembership> {
    tols.validate()?;
    let d = delta_logs(x, params.m)?;
    let avg = params.averaging();
    let a = avg.admissible(d.len());
    let ts = tail_start(a, tols.tail_fraction);
    let center = match variant {
        OrliczVariant::L => median(&d[ts..a]),
        _ => 0.0,
    };
    let dev: Vec<f64> = d.iter().map(|v| (v - center).abs()).collect();
    let p = params.exponents(dev.len())?;
    let limit = (variant == OrliczVariant::L).then(|| GeoNum::from_log(center)).transpose()?;
    let mut out = OrliczMembership {
        variant,
        verdict: Verdict::No,
        log_rho: None,
        limit,
        residual: None,
        sup: None,
        note: None,
    };
    if a - ts < MIN_TAIL_POINTS {
        out.verdict = Verdict::Inconclusive;
        return Ok(out);
    }
    if variant == OrliczVariant::Inf {
        let mut first: Option<(f64, Plateau)> = None;
        for lr in rho_grid() {
            let s = series_raw(&dev, &params.func, &p, lr, &avg);
            if s.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let pl = plateau(&s, tols.tol, tols.tail_fraction);
            if pl.verdict.is_yes() {
                out.verdict = Verdict::Yes;
                out.log_rho = Some(lr);
                out.sup = Some(pl.sup);
                return Ok(out);
            }
            first.get_or_insert((lr, pl));
        }
        match first {
            Some((lr, pl)) => {
                out.verdict = pl.verdict;
                out.log_rho = Some(lr);
                out.sup = Some(pl.sup);
            }
            None => out.note = Some("series overflowed at every grid ρ".into()),
        }
        return Ok(out);
    }
    let unit = vec![1.0; dev.len()];
    let mut best: Option<(f64, f64)> = None;
    for lr in rho_grid() {
        let s = series_raw(&dev, &params.func, &p, lr, &avg);
        let r = series_raw(&unit, &params.func, &p, lr, &avg);
        let res = normalized_tail(&s, &r, ts);
        if res.is_nan() {
            continue;
        }
        if res <= tols.tol {
            out.verdict = Verdict::Yes;
            out.log_rho = Some(lr);
            out.residual = Some(res);
            return Ok(out);
        }
        if best.is_none_or(|(_, b)| res < b) {
            best = Some((lr, res));
        }
    }
    if let Some((lr, res)) = best {
        out.log_rho = Some(lr);
        out.residual = Some(res);
    }
    out.note = Some(format!("no witness for log ρ in [2^-20, 2^20] at tol {}", tols.tol));
    Ok(out)
}

/// Outcome of the paranorm bisection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Paranorm {
    /// `g(x)`; absent when not attained on the grid or when p is not constant.
    pub g: Option<GeoNum>,
    /// Smallest feasible `log ρ` found (upper end of the final bracket).
    pub inf_log_rho: Option<f64>,
    pub attained: bool,
    /// Set when p is not constant, so the exponent `p_n / H` has no single
    /// value; only `inf_log_rho` is reported then.
    pub ambiguous_exponent: bool,
    pub bisection_steps: u32,
}

/// `g(x) = inf ρ^{p/H}` over `ρ` with `sup_n (modular at n)^{1/H} ≤ 1`,
/// around L = 0_G. Feasibility is monotone in ρ, so the infimum is
/// bracketed on [`rho_grid`] and refined by bisection to width `tol_rho`.
pub fn paranorm_g(x: &GeoSeq, params: &OrliczParams, tol_rho: f64) -> Result<Paranorm> {
    if !(tol_rho > 0.0 && tol_rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("tol_rho must be positive, got {tol_rho}")));
    }
    let dev = deviations(x, params.m, 0.0)?;
    let p = params.exponents(dev.len())?;
    let avg = params.averaging();
    let ambiguous = params.p.as_constant().is_none();
    let finish = |inf: f64, steps: u32| -> Result<Paranorm> {
        let g = match params.p.as_constant() {
            Some(pc) => Some(GeoNum::from_log(inf.powf(pc / params.h()))?),
            None => None,
        };
        Ok(Paranorm {
            g,
            inf_log_rho: Some(inf),
            attained: true,
            ambiguous_exponent: ambiguous,
            bisection_steps: steps,
        })
    };
    if dev.iter().all(|&v| v == 0.0) {
        return finish(0.0, 0);
    }
    let feasible = |lr: f64| {
        let sup = series_raw(&dev, &params.func, &p, lr, &avg).into_iter().fold(0.0, f64::max);
        sup.is_finite() && sup <= 1.0
    };
    let grid = rho_grid();
    let Some(j) = grid.iter().position(|&lr| feasible(lr)) else {
        return Ok(Paranorm {
            g: None,
            inf_log_rho: None,
            attained: false,
            ambiguous_exponent: ambiguous,
            bisection_steps: 0,
        });
    };
    let (mut lo, mut hi) = (if j == 0 { 0.0 } else { grid[j - 1] }, grid[j]);
    let mut steps = 0;
    while hi - lo > tol_rho {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        steps += 1;
    }
    finish(hi, steps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta2Report {
    pub sup_ratio: f64,
    pub threshold: f64,
    pub satisfied: bool,
}

/// `t = 10^{-3} … 10^3`, 121 log-spaced points.
pub fn default_t_grid() -> Vec<f64> {
    (0..=120).map(|i| 10f64.powf(-3.0 + i as f64 * 0.05)).collect()
}

/// `sup_t M(2t)/M(t)` on the grid. Satisfied iff the supremum is finite, at
/// most `k`, and not still rising: the top quarter of the grid may not exceed
/// the rest.
pub fn delta2_probe(func: &OrliczFn, t_grid: &[f64], k: f64) -> Result<Delta2Report> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("Δ₂ grid must hold positive finite t".into()));
    }
    let mut t: Vec<f64> = t_grid.to_vec();
    t.sort_by(f64::total_cmp);
    let ratios = t
        .iter()
        .map(|&t| {
            let (a, b) = (func.eval(t), func.eval(2.0 * t));
            if a == 0.0 {
                Err(Error::InvalidOrlicz(format!("M({t}) = 0 at positive t")))
            } else if !b.is_finite() {
                Ok(f64::INFINITY)
            } else {
                Ok(b / a)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let split = ratios.len() - ratios.len().div_ceil(4);
    let sup_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let head = ratios[..split].iter().copied().fold(0.0, f64::max);
    let top = ratios[split..].iter().copied().fold(0.0, f64::max);
    let stable = split == 0 || top <= head * (1.0 + 1e-9);
    Ok(Delta2Report { sup_ratio, threshold: k, satisfied: sup_ratio.is_finite() && sup_ratio <= k && stable })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolidityReport {
    pub log_rho: f64,
    pub member_before: Verdict,
    pub member_after: Verdict,
    /// 1-based `n` where the scaled sequence's series exceeds the original's.
    pub violations: Vec<usize>,
}

/// Re-tests `α ⊙ x` (coordinatewise) for `[V,λ,M,p]^G_0` at the ρ that
/// witnessed `x`'s membership. Requires `|log α_k| ≤ cap`.
pub fn solidity_check(
    x: &GeoSeq,
    alphas: &[GeoNum],
    cap: f64,
    params: &OrliczParams,
    tols: Tolerances,
) -> Result<SolidityReport> {
    if let Some(k) = alphas.iter().position(|a| a.log().abs() > cap) {
        return Err(Error::Precondition(format!(
            "|log α_{}| = {} exceeds the cap {cap}",
            k + 1,
            alphas[k].log().abs()
        )));
    }
    let before = space_membership_orlicz(x, params, OrliczVariant::Zero, tols)?;
    let Some(lr) = before.log_rho.filter(|_| before.verdict.is_yes()) else {
        return Err(Error::Precondition("x is not a member of the 0-variant space".into()));
    };
    let y = x.scale_each(alphas)?;
    let avg = params.averaging();
    let dx = deviations(x, params.m, 0.0)?;
    let dy = deviations(&y, params.m, 0.0)?;
    let p = params.exponents(dx.len())?;
    let sx = series_raw(&dx, &params.func, &p, lr, &avg);
    let sy = series_raw(&dy, &params.func, &p, lr, &avg);
    let violations = sx
        .iter()
        .zip(&sy)
        .enumerate()
        .filter(|(_, (a, b))| **b > **a * (1.0 + 1e-12) + 1e-300)
        .map(|(i, _)| i + 1)
        .collect();
    let unit = vec![1.0; dy.len()];
    let r = series_raw(&unit, &params.func, &p, lr, &avg);
    let ts = tail_start(sy.len(), tols.tail_fraction);
    let member_after = Verdict::from_bool(normalized_tail(&sy, &r, ts) <= tols.tol);
    Ok(SolidityReport { log_rho: lr, member_before: before.verdict, member_after, violations })
}
