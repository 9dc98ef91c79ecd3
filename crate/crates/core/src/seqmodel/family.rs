//! Canonical sequence generators.
//!
//! Every family is defined by a closed-form formula for `log x_k`, so the
//! generated terms are exact up to the formula's own floating-point
//! evaluation. A family has a compact textual form, `name:key=value,...`,
//! used on the command line and recorded as provenance.

use std::fmt;
use std::str::FromStr;

use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Value,
};

use super::{GeoSeq, Provenance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SpikeSet {
    Squares,
    PowersOfTwo,
    Explicit(Vec<usize>),
}

impl SpikeSet {
    pub fn contains(&self, k: usize) -> bool {
        match self {
            SpikeSet::Squares => {
                let r = (k as f64).sqrt().round() as usize;
                r * r == k
            }
            SpikeSet::PowersOfTwo => k.is_power_of_two(),
            SpikeSet::Explicit(v) => v.binary_search(&k).is_ok(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpikeHeight {
    Constant(f64),
    /// `log x_k = √k` on the spike set.
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `log x_k = scale · k^degree`, i.e. `x_k = e^{scale·k^m}`.
    LogPolynomial { degree: u32, scale: f64 },
    /// Every term has log `c`.
    GeometricConstant { c: f64 },
    /// `log x_k = amplitude · (−1)^k / 2^order`, whose order-th difference
    /// has logs exactly `amplitude · (−1)^k`.
    LogOscillatory { order: u32, amplitude: f64 },
    /// Spikes on an index set, log 0 elsewhere.
    SparseSpike { set: SpikeSet, height: SpikeHeight },
    /// `log x_k = expr(k)` for an arithmetic expression in `k`.
    CustomLog { expr: String },
}

impl Family {
    pub fn log_term(&self, k: usize) -> f64 {
        let kf = k as f64;
        match self {
            Family::LogPolynomial { degree, scale } => scale * kf.powi(*degree as i32),
            Family::GeometricConstant { c } => *c,
            Family::LogOscillatory { order, amplitude } => {
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                amplitude * sign / 2f64.powi(*order as i32)
            }
            Family::SparseSpike { set, height } => {
                if set.contains(k) {
                    match height {
                        SpikeHeight::Constant(h) => *h,
                        SpikeHeight::Sqrt => kf.sqrt(),
                    }
                } else {
                    0.0
                }
            }
            Family::CustomLog { .. } => unreachable!("custom expressions are evaluated in bulk"),
        }
    }
}

/// Generates the first `n` terms of a family.
pub fn generate(family: &Family, n: usize) -> Result<GeoSeq> {
    if n == 0 {
        return Err(Error::InvalidParameter("sequence length must be at least 1".into()));
    }
    let logs: Vec<f64> = match family {
        Family::CustomLog { expr } => eval_custom(expr, n)?,
        other => (1..=n).map(|k| other.log_term(k)).collect(),
    };
    if let Some(k) = logs.iter().position(|l| !l.is_finite()) {
        return Err(Error::Range(format!("{family}: log of term {} is not finite", k + 1)));
    }
    Ok(GeoSeq::from_logs(logs)?.with_source(Provenance::Generated(family.to_string())))
}

fn eval_custom(expr: &str, n: usize) -> Result<Vec<f64>> {
    let tree = build_operator_tree::<DefaultNumericTypes>(expr)
        .map_err(|e| Error::InvalidParameter(format!("expression `{expr}`: {e}")))?;
    let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        ctx.set_value("k".into(), Value::Float(k as f64))
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let v = tree
            .eval_number_with_context(&ctx)
            .map_err(|e| Error::InvalidParameter(format!("expression `{expr}` at k={k}: {e}")))?;
        out.push(v);
    }
    Ok(out)
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::LogPolynomial { degree, scale } => {
                write!(f, "log-polynomial:m={degree},scale={scale}")
            }
            Family::GeometricConstant { c } => write!(f, "geometric-constant:c={c}"),
            Family::LogOscillatory { order, amplitude } => {
                write!(f, "log-oscillatory:m={order},amplitude={amplitude}")
            }
            Family::SparseSpike { set, height } => {
                let set = match set {
                    SpikeSet::Squares => "squares".to_string(),
                    SpikeSet::PowersOfTwo => "pow2".to_string(),
                    SpikeSet::Explicit(v) => v.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";"),
                };
                let height = match height {
                    SpikeHeight::Constant(h) => h.to_string(),
                    SpikeHeight::Sqrt => "sqrt".to_string(),
                };
                write!(f, "sparse-spike:set={set},height={height}")
            }
            Family::CustomLog { expr } => write!(f, "custom-log:expr={expr}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Parses `name[:key=value,...]`. For `custom-log` the `expr=` value
    /// runs to the end of the string, so it may contain commas.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n.trim(), r),
            None => (s.trim(), ""),
        };
        let mut params: Vec<(String, String)> = Vec::new();
        let mut rest = rest;
        while !rest.is_empty() {
            if let Some(expr) = rest.strip_prefix("expr=") {
                params.push(("expr".into(), expr.to_string()));
                break;
            }
            let (item, tail) = rest.split_once(',').unwrap_or((rest, ""));
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{item}`")))?;
            params.push((k.trim().to_string(), v.trim().to_string()));
            rest = tail;
        }
        let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let num = |key: &str, default: f64| -> Result<f64> {
            match get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::InvalidParameter(format!("{key}={v} is not a finite number"))),
            }
        };
        let int = |key: &str, default: u32| -> Result<u32> {
            match get(key) {
                None => Ok(default),
                Some(v) => v
                    .parse::<u32>()
                    .map_err(|_| Error::InvalidParameter(format!("{key}={v} is not a non-negative integer"))),
            }
        };
        let known: &[&str] = match name {
            "log-polynomial" => &["m", "scale"],
            "geometric-constant" => &["c"],
            "log-oscillatory" => &["m", "amplitude"],
            "sparse-spike" => &["set", "height"],
            "custom-log" => &["expr"],
            _ => return Err(Error::UnknownFamily(name.to_string())),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("unknown parameter `{k}` for {name}")));
        }
        match name {
            "log-polynomial" => Ok(Family::LogPolynomial { degree: int("m", 1)?, scale: num("scale", 1.0)? }),
            "geometric-constant" => Ok(Family::GeometricConstant { c: num("c", 0.0)? }),
            "log-oscillatory" => {
                Ok(Family::LogOscillatory { order: int("m", 0)?, amplitude: num("amplitude", 1.0)? })
            }
            "sparse-spike" => {
                let set = match get("set").unwrap_or("squares") {
                    "squares" => SpikeSet::Squares,
                    "pow2" => SpikeSet::PowersOfTwo,
                    list => {
                        let mut v = list
                            .split(';')
                            .map(|t| t.trim().parse::<usize>().ok().filter(|&k| k >= 1))
                            .collect::<Option<Vec<_>>>()
                            .ok_or_else(|| Error::InvalidParameter(format!("bad index set `{list}`")))?;
                        v.sort_unstable();
                        v.dedup();
                        SpikeSet::Explicit(v)
                    }
                };
                let height = match get("height") {
                    Some("sqrt") => SpikeHeight::Sqrt,
                    _ => SpikeHeight::Constant(num("height", 1.0)?),
                };
                Ok(Family::SparseSpike { set, height })
            }
            "custom-log" => {
                let expr = get("expr")
                    .filter(|e| !e.trim().is_empty())
                    .ok_or_else(|| Error::InvalidParameter("custom-log needs expr=".into()))?;
                Ok(Family::CustomLog { expr: expr.to_string() })
            }
            _ => unreachable!(),
        }
    }
}
