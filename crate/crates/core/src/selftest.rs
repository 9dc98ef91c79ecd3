//! Seeded property suites behind `geomseq selftest`.
//!
//! Each suite draws its own cases from a ChaCha8 stream seeded with
//! `seed ^ suite index`, so suites are reproducible one by one and adding a
//! suite does not perturb the others.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::convergence::{
    delta_logs, delta_norm, densities_of, space_membership, MeanKind, Space, Tolerances,
};
use crate::diffops::{diff_binomial, diff_recursive};
use crate::duals::{
    alpha_dual_membership, alpha_dual_u_equivalence, canonical_sequence, pairing_bound, telescoping_residual,
};
use crate::error::Result;
use crate::geocore::{geo_abs, geo_add, geo_div, geo_mul, geo_sub, GeoNum};
use crate::orlicz::{modular_series, paranorm_g, OrliczFn, OrliczParams};
use crate::seqmodel::{Averaging, GeoSeq, LambdaKind, PSeq};

pub const DEFAULT_SEED: u64 = 0x6765_6f6d;
pub const DEFAULT_CASES: usize = 200;

/// Tally for one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub passed: usize,
    /// First few failure descriptions, in case order.
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult { name, cases: 0, passed: 0, failures: Vec::new() }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.cases
    }

    fn record(&mut self, case: usize, outcome: Result<Option<String>>) {
        self.cases += 1;
        let failure = match outcome {
            Ok(None) => None,
            Ok(Some(why)) => Some(why),
            Err(e) => Some(format!("error: {e}")),
        };
        match failure {
            None => self.passed += 1,
            Some(why) if self.failures.len() < 5 => self.failures.push(format!("case {case}: {why}")),
            Some(_) => {}
        }
    }
}

type Suite = fn(&mut ChaCha8Rng, usize) -> SuiteResult;

const SUITES: [(&str, Suite); 5] = [
    ("geocore", geocore_suite),
    ("diffops", diffops_suite),
    ("convergence", convergence_suite),
    ("orlicz", orlicz_suite),
    ("duals", duals_suite),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.0).collect()
}

/// Runs one suite by name; `None` if the name is unknown.
pub fn run_suite(name: &str, seed: u64, cases: usize) -> Option<SuiteResult> {
    let (i, (_, f)) = SUITES.iter().enumerate().find(|(_, s)| s.0 == name)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
    Some(f(&mut rng, cases))
}

pub fn run_all(seed: u64, cases: usize) -> Vec<SuiteResult> {
    suite_names().into_iter().filter_map(|n| run_suite(n, seed, cases)).collect()
}

fn random_seq(rng: &mut ChaCha8Rng, len: usize, amp: f64) -> Result<GeoSeq> {
    GeoSeq::from_logs((0..len).map(|_| rng.random_range(-amp..amp)))
}

fn check(ok: bool, why: impl FnOnce() -> String) -> Option<String> {
    if ok {
        None
    } else {
        Some(why())
    }
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn geocore_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    let mut r = SuiteResult::new("geocore");
    for case in 0..cases {
        let (la, lb) = (rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let outcome = (|| {
            let (a, b) = (GeoNum::from_log(la)?, GeoNum::from_log(lb)?);
            let got = [
                geo_add(a, b)?.log(),
                geo_sub(a, b)?.log(),
                geo_mul(a, b)?.log(),
                geo_div(a, b)?.log(),
                geo_abs(a).log(),
            ];
            let want = [la + lb, la - lb, la * lb, la / lb, la.abs()];
            let gap = max_gap(&got, &want);
            Ok(check(gap <= 1e-12 * (1.0 + want.iter().fold(0.0f64, |m, w| m.max(w.abs()))), || {
                format!("log gap {gap:e} at ({la}, {lb})")
            }))
        })();
        r.record(case, outcome);
    }
    r
}

fn diffops_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    let mut r = SuiteResult::new("diffops");
    for case in 0..cases {
        let len = rng.random_range(12..=120);
        let m = rng.random_range(0..=10u32);
        let outcome = (|| {
            let x = random_seq(rng, len, 10.0)?;
            let y = random_seq(rng, len, 10.0)?;
            let alpha = GeoNum::from_log(rng.random_range(-3.0..3.0))?;
            let rec = diff_recursive(&x, m)?.logs();
            let bin = diff_binomial(&x, m)?.logs();
            let gap = max_gap(&rec, &bin);
            if gap > 1e-10 * 2f64.powi(m as i32) {
                return Ok(Some(format!("binomial vs recursive gap {gap:e} (m={m}, len={len})")));
            }
            // Δ(x ⊕ y) = Δx ⊕ Δy and Δ(α ⊙ x) = α ⊙ Δx
            let sum = diff_recursive(&x.add(&y)?, m)?.logs();
            let lin: Vec<f64> = rec.iter().zip(diff_recursive(&y, m)?.logs()).map(|(a, b)| a + b).collect();
            let scaled = diff_recursive(&x.scale(alpha)?, m)?.logs();
            let hom: Vec<f64> = rec.iter().map(|d| alpha.log() * d).collect();
            let lgap = max_gap(&sum, &lin).max(max_gap(&scaled, &hom));
            if lgap > 1e-10 * 2f64.powi(m as i32 + 2) {
                return Ok(Some(format!("linearity gap {lgap:e} (m={m})")));
            }
            if m == 0 {
                return Ok(None);
            }
            // Σ_{k≤n} Δ^m x_k = Δ^{m−1} x_1 ⊖ Δ^{m−1} x_{n+1}
            let lower = diff_recursive(&x, m - 1)?.logs();
            let mut s = 0.0;
            let mut tgap: f64 = 0.0;
            for (n, d) in rec.iter().enumerate() {
                s += d;
                tgap = tgap.max((s - (lower[0] - lower[n + 1])).abs());
            }
            Ok(check(tgap <= 1e-10 * 2f64.powi(m as i32) * len as f64, || {
                format!("telescoping gap {tgap:e} (m={m})")
            }))
        })();
        r.record(case, outcome);
    }
    r
}

fn convergence_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    let mut r = SuiteResult::new("convergence");
    let tols = Tolerances::default();
    for case in 0..cases {
        let len = rng.random_range(40..=160);
        let m = rng.random_range(0..=3u32);
        let kind =
            LambdaKind::parse(["n", "const1", "half", "sqrt"][rng.random_range(0..4)]).expect("built in");
        let lam = kind.build(len);
        let vp = Averaging::VallePoussin(lam.clone());
        let outcome = (|| {
            let x = random_seq(rng, len, 4.0)?;
            let y = random_seq(rng, len, 4.0)?;
            let alpha = GeoNum::from_log(rng.random_range(-3.0..3.0))?;
            for avg in [&Averaging::Cesaro, &vp] {
                for mk in [MeanKind::Signed, MeanKind::Absolute] {
                    let nx = delta_norm(&x, m, avg, mk)?.log();
                    let ny = delta_norm(&y, m, avg, mk)?.log();
                    let nxy = delta_norm(&x.add(&y)?, m, avg, mk)?.log();
                    let nax = delta_norm(&x.scale(alpha)?, m, avg, mk)?.log();
                    let zero = delta_norm(&GeoSeq::from_logs(vec![0.0; len])?, m, avg, mk)?.log();
                    let scale = 1.0 + nx + ny;
                    if nx < 0.0 || zero != 0.0 {
                        return Ok(Some(format!("positivity fails ({mk:?}, {})", avg.describe())));
                    }
                    if nxy > nx + ny + 1e-10 * scale {
                        return Ok(Some(format!("triangle fails: {nxy} > {nx} + {ny}")));
                    }
                    if (nax - alpha.log().abs() * nx).abs() > 1e-10 * scale * (1.0 + alpha.log().abs()) {
                        return Ok(Some(format!("homogeneity fails: {nax} vs |{}|·{nx}", alpha.log())));
                    }
                }
            }
            // absolute summability implies the signed one
            let smooth =
                GeoSeq::from_logs(x.logs().iter().enumerate().map(|(k, l)| l * 1e-3 / (1.0 + k as f64)))?;
            for (strong, weak) in [(Space::AbsC1, Space::C1), (Space::AbsVL, Space::VL)] {
                for z in [&x, &smooth] {
                    let s = space_membership(z, m, strong, Some(&lam), tols)?;
                    let w = space_membership(z, m, weak, Some(&lam), tols)?;
                    if s.verdict.is_yes() && !w.verdict.is_yes() {
                        return Ok(Some(format!("{} member but not {}", strong.name(), weak.name())));
                    }
                }
            }
            // densities lie in [0, 1] and shrink as ε grows
            let d = delta_logs(&x, m)?;
            let (e1, e2) = (rng.random_range(0.01..1.0), rng.random_range(1.0..5.0));
            let (lo, hi) = (densities_of(&d, 0.0, e1, &vp), densities_of(&d, 0.0, e2, &vp));
            let bad = lo.iter().zip(&hi).position(|(a, b)| !(0.0..=1.0).contains(a) || *b > *a + 1e-15);
            Ok(bad.map(|n| format!("density out of order at n={}", n + 1)))
        })();
        r.record(case, outcome);
    }
    r
}

fn orlicz_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    let mut r = SuiteResult::new("orlicz");
    for case in 0..cases {
        let len = rng.random_range(20..=80);
        let m = rng.random_range(0..=2u32);
        let outcome = (|| {
            let func = match rng.random_range(0..3) {
                0 => OrliczFn::Power { q: rng.random_range(1.0..3.0) },
                1 => OrliczFn::Expm1,
                _ => OrliczFn::Pwl { knots: vec![(0.0, 0.0), (1.0, 0.5), (2.0, 2.0)] },
            };
            let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
            func.check_shape(&grid)?;
            let x = random_seq(rng, len, 3.0)?;
            let params = OrliczParams::new(m, LambdaKind::N.build(len), func.clone(), PSeq::constant(1.0)?)?;
            // the modular shrinks as ρ grows
            let (r1, r2) = (rng.random_range(-3.0..3.0f64), rng.random_range(0.0..3.0f64));
            let small = modular_series(&x, &params, 2f64.powf(r1), GeoNum::ZERO)?.values;
            let big = modular_series(&x, &params, 2f64.powf(r1 + r2), GeoNum::ZERO)?.values;
            if let Some(n) = small.iter().zip(&big).position(|(a, b)| b.log() > a.log() * (1.0 + 1e-12)) {
                return Ok(Some(format!("modular grows with ρ at n={}", n + 1)));
            }
            // g is subadditive for M(t) = t and p ≡ 1
            let lin = OrliczParams::new(
                m,
                LambdaKind::N.build(len),
                OrliczFn::Power { q: 1.0 },
                PSeq::constant(1.0)?,
            )?;
            let y = random_seq(rng, len, 3.0)?;
            let g = |z: &GeoSeq| -> Result<f64> {
                Ok(paranorm_g(z, &lin, 1e-10)?.g.map_or(f64::INFINITY, |g| g.log()))
            };
            let (gx, gy, gxy) = (g(&x)?, g(&y)?, g(&x.add(&y)?)?);
            Ok(check(gxy <= gx + gy + 1e-8, || format!("g(x⊕y) = {gxy} > {gx} + {gy}")))
        })();
        r.record(case, outcome);
    }
    r
}

fn duals_suite(rng: &mut ChaCha8Rng, cases: usize) -> SuiteResult {
    let mut r = SuiteResult::new("duals");
    for case in 0..cases {
        let len = rng.random_range(64..=256);
        let m = rng.random_range(1..=3u32);
        let lam = LambdaKind::N.build(len);
        let outcome = (|| {
            let x = random_seq(rng, len, 5.0)?;
            let res = telescoping_residual(&x, m)?;
            let scale = 1.0 + x.logs().iter().fold(0.0f64, |s, l| s.max(l.abs())) * 2f64.powi(m as i32);
            if res > 1e-10 * scale * len as f64 {
                return Ok(Some(format!("telescoping residual {res:e}")));
            }
            // a_k = e^{c / k^{m+3}} is a dual member; pair it with a bounded-growth x
            let c = rng.random_range(-2.0..2.0);
            let a = GeoSeq::from_logs((1..=len).map(|k| c / (k as f64).powi(m as i32 + 3)))?;
            if alpha_dual_membership(&a, &lam, m, 1e-2)?.verdict.is_no() {
                return Ok(Some("decaying coefficients rejected from the dual".into()));
            }
            let canon = canonical_sequence(&lam, m)?;
            let wobble = GeoSeq::from_logs(canon.logs().iter().map(|l| l * rng.random_range(-1.0..1.0)))?;
            let b = pairing_bound(&a, &wobble, &lam, m)?;
            if !b.holds {
                return Ok(Some(format!("pairing {} exceeds bound {}", b.pairing, b.bound)));
            }
            let eq = alpha_dual_u_equivalence(&a, m, &[x, wobble], 1e-2)?;
            Ok(check(eq.flips.is_empty() && eq.max_head_mismatch <= 1e-10, || {
                format!("u-equivalence: flips {:?}, head mismatch {:e}", eq.flips, eq.max_head_mismatch)
            }))
        })();
        r.record(case, outcome);
    }
    r
}
