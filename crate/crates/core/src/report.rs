//! The analysis report: one run of every requested test on one sequence,
//! serialized as JSON with stable key order and 17-significant-digit floats.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io;
use std::str::FromStr;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::convergence::{
    delta_logs, densities_of, membership_of_deltas, stat_of_deltas, EpsDensity, MeanKind, Membership, Space,
    Tolerances,
};
use crate::duals::{
    alpha_dual_membership, vlambda_membership, AlphaDualMembership, VLambdaMembership, VLambdaVariant,
};
use crate::error::{Error, Result};
use crate::geocore::GeoNum;
use crate::orlicz::{
    paranorm_g, space_membership_orlicz, OrliczFn, OrliczMembership, OrliczParams, OrliczVariant, Paranorm,
};
use crate::seqmodel::{Averaging, GeoSeq, LambdaSeq, PSeq};
use crate::verdict::{dyadic_checkpoints, Verdict};

pub const SCHEMA_VERSION: u32 = 1;

/// Analyses selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Analysis {
    Space(Space),
    /// Statistical convergence (Cesàro density).
    S,
    /// λ-statistical convergence.
    SL,
    Orlicz(OrliczVariant),
    /// `V^λ_p(Δ_G^m)`
    VLp,
    /// `V^λ_∞(Δ_G^m)`
    VLinf,
    /// `x` as a member of the α-dual of `uV^λ_∞(Δ_G^m)`.
    Alpha,
}

impl Analysis {
    pub fn all() -> Vec<Analysis> {
        let mut v: Vec<Analysis> = Space::ALL.into_iter().map(Analysis::Space).collect();
        v.extend([
            Analysis::S,
            Analysis::SL,
            Analysis::Orlicz(OrliczVariant::L),
            Analysis::Orlicz(OrliczVariant::Zero),
            Analysis::Orlicz(OrliczVariant::Inf),
            Analysis::VLp,
            Analysis::VLinf,
            Analysis::Alpha,
        ]);
        v
    }

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Space(s) => s.name(),
            Analysis::S => "S",
            Analysis::SL => "SL",
            Analysis::Orlicz(OrliczVariant::L) => "orlicz",
            Analysis::Orlicz(OrliczVariant::Zero) => "orlicz0",
            Analysis::Orlicz(OrliczVariant::Inf) => "orlicz_inf",
            Analysis::VLp => "vlp",
            Analysis::VLinf => "vlinf",
            Analysis::Alpha => "alpha",
        }
    }

    /// Parses a comma list; `all` selects everything.
    pub fn parse_list(s: &str) -> Result<BTreeSet<Analysis>> {
        let mut out = BTreeSet::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if tok == "all" {
                out.extend(Analysis::all());
            } else {
                out.insert(tok.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter("no analyses selected".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Analysis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Analysis> {
        Analysis::all().into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let known: Vec<&str> = Analysis::all().iter().map(|a| a.name()).collect();
            Error::InvalidParameter(format!("unknown space `{s}` (known: {}, all)", known.join(", ")))
        })
    }
}

/// Everything that determines a report besides the sequence itself.
#[derive(Debug, Clone)]
pub struct AnalyzeConfig {
    pub m: u32,
    pub lambda: LambdaSeq,
    pub lambda_desc: String,
    pub analyses: BTreeSet<Analysis>,
    pub eps: Vec<GeoNum>,
    pub tols: Tolerances,
    pub orlicz: OrliczFn,
    pub p: PSeq,
    pub p_desc: String,
    pub tol_rho: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDescriptor {
    pub source: String,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Parameters {
    pub m: u32,
    pub lambda: String,
    pub log_eps: Vec<f64>,
    pub tol: f64,
    pub tail_fraction: f64,
    pub orlicz: OrliczFn,
    pub p: String,
    pub tol_rho: f64,
    pub spaces: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceEntry {
    pub verdict: Verdict,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub limit: Option<GeoNum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sup: Option<f64>,
}

impl From<Membership> for SpaceEntry {
    fn from(m: Membership) -> Self {
        SpaceEntry {
            verdict: m.verdict,
            limit: m.limit.map(|l| l.limit),
            residual: m.limit.map(|l| l.residual),
            sup: m.sup,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSample {
    pub log_eps: f64,
    /// `(n, density)` at `n = 1, 2, 4, …` and the last admissible `n`.
    pub points: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatEntry {
    pub verdict: Verdict,
    #[serde(rename = "L")]
    pub limit: GeoNum,
    pub per_eps: Vec<EpsDensity>,
    pub curves: Vec<CurveSample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    /// Every verdict speaks about the truncation `n`, never the infinite
    /// sequence.
    pub truncation_conditional: bool,
    pub input: InputDescriptor,
    pub parameters: Parameters,
    /// Norm logs keyed `signed_cesaro`, `absolute_cesaro`, `signed_lambda`,
    /// `absolute_lambda`.
    pub norms: BTreeMap<String, GeoNum>,
    pub spaces: BTreeMap<String, SpaceEntry>,
    pub statistical: BTreeMap<String, StatEntry>,
    pub orlicz: BTreeMap<String, OrliczMembership>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paranorm: Option<Paranorm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vlambda_p: Option<VLambdaMembership>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vlambda_inf: Option<VLambdaMembership>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_dual: Option<AlphaDualMembership>,
}

fn sampled(dens: &[f64]) -> Vec<(usize, f64)> {
    let mut pts: Vec<(usize, f64)> =
        dyadic_checkpoints(&vec![0.0; dens.len()]).into_iter().map(|(n, _)| (n, dens[n - 1])).collect();
    pts.dedup_by_key(|p| p.0);
    pts
}

/// Runs every analysis in `cfg` on `x`.
pub fn analyze(x: &GeoSeq, cfg: &AnalyzeConfig) -> Result<AnalysisReport> {
    cfg.tols.validate()?;
    let d = delta_logs(x, cfg.m)?;
    let vp = Averaging::VallePoussin(cfg.lambda.clone());
    let mut norms = BTreeMap::new();
    for (name, avg) in [("cesaro", &Averaging::Cesaro), ("lambda", &vp)] {
        for (kname, kind) in [("signed", MeanKind::Signed), ("absolute", MeanKind::Absolute)] {
            norms.insert(format!("{kname}_{name}"), crate::convergence::delta_norm(x, cfg.m, avg, kind)?);
        }
    }
    let mut spaces = BTreeMap::new();
    let mut statistical = BTreeMap::new();
    let mut orlicz = BTreeMap::new();
    let mut paranorm = None;
    let (mut vlambda_p, mut vlambda_inf, mut alpha_dual) = (None, None, None);
    let oparams = OrliczParams::new(cfg.m, cfg.lambda.clone(), cfg.orlicz.clone(), cfg.p.clone())?;
    for &a in &cfg.analyses {
        match a {
            Analysis::Space(s) => {
                let r = membership_of_deltas(&d, s, Some(&cfg.lambda), cfg.tols)?;
                spaces.insert(s.name().to_string(), r.into());
            }
            Analysis::S | Analysis::SL => {
                let avg = if a == Analysis::S { Averaging::Cesaro } else { vp.clone() };
                let st = stat_of_deltas(&d, &avg, &cfg.eps, cfg.tols)?;
                let curves = cfg
                    .eps
                    .iter()
                    .map(|e| CurveSample {
                        log_eps: e.log(),
                        points: sampled(&densities_of(&d, st.limit.log(), e.log(), &avg)),
                    })
                    .collect();
                statistical.insert(
                    a.name().to_string(),
                    StatEntry { verdict: st.verdict, limit: st.limit, per_eps: st.per_eps, curves },
                );
            }
            Analysis::Orlicz(v) => {
                let r = space_membership_orlicz(x, &oparams, v, cfg.tols)?;
                orlicz.insert(a.name().to_string(), r);
                if v == OrliczVariant::Zero {
                    paranorm = Some(paranorm_g(x, &oparams, cfg.tol_rho)?);
                }
            }
            Analysis::VLp => {
                vlambda_p = Some(vlambda_membership(
                    x,
                    cfg.m,
                    &cfg.lambda,
                    &VLambdaVariant::P(cfg.p.clone()),
                    cfg.tols,
                )?)
            }
            Analysis::VLinf => {
                vlambda_inf = Some(vlambda_membership(x, cfg.m, &cfg.lambda, &VLambdaVariant::Sup, cfg.tols)?)
            }
            Analysis::Alpha => alpha_dual = Some(alpha_dual_membership(x, &cfg.lambda, cfg.m, cfg.tols.tol)?),
        }
    }
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        truncation_conditional: true,
        input: InputDescriptor { source: x.source().to_string(), n: x.len() },
        parameters: Parameters {
            m: cfg.m,
            lambda: cfg.lambda_desc.clone(),
            log_eps: cfg.eps.iter().map(|e| e.log()).collect(),
            tol: cfg.tols.tol,
            tail_fraction: cfg.tols.tail_fraction,
            orlicz: cfg.orlicz.clone(),
            p: cfg.p_desc.clone(),
            tol_rho: cfg.tol_rho,
            spaces: cfg.analyses.iter().map(|a| a.name().to_string()).collect(),
        },
        norms,
        spaces,
        statistical,
        orlicz,
        paranorm,
        vlambda_p,
        vlambda_inf,
        alpha_dual,
    })
}

/// Pretty JSON whose floats are always written as `{:.16e}`.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with stable key order (struct order and sorted maps) and
/// round-trip float formatting. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FixedFloats(PrettyFormatter::with_indent(b"  ")));
    value.serialize(&mut ser).expect("report types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}
