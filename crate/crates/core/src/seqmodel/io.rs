//! Text formats for sequences, λ sequences and exponent sequences.
//!
//! Sequence files hold one number per line. A header line `#format: raw`
//! (raw positive values) or `#format: log` (natural logs) selects the
//! interpretation. λ files may add `#unbounded: true|false`. Other `#`
//! lines and blank lines are ignored.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GeoSeq, LambdaSeq, PSeq, Provenance};
use crate::error::{Error, Result};
use crate::geocore::GeoNum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeqFormat {
    Raw,
    Log,
}

struct Parsed {
    format: Option<SeqFormat>,
    unbounded: Option<bool>,
    /// (1-based line number, value)
    values: Vec<(usize, f64)>,
}

fn parse_lines(text: &str) -> Result<Parsed> {
    let mut out = Parsed { format: None, unbounded: None, values: Vec::new() };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            if let Some((key, val)) = header.split_once(':') {
                let val = val.trim();
                match key.trim() {
                    "format" => {
                        out.format = Some(match val {
                            "raw" => SeqFormat::Raw,
                            "log" => SeqFormat::Log,
                            other => {
                                return Err(Error::Parse {
                                    line: line_no,
                                    reason: format!("unknown format `{other}`"),
                                })
                            }
                        })
                    }
                    "unbounded" => {
                        out.unbounded = Some(val.parse::<bool>().map_err(|_| Error::Parse {
                            line: line_no,
                            reason: format!("expected true or false, got `{val}`"),
                        })?)
                    }
                    _ => {}
                }
            }
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| Error::Parse { line: line_no, reason: format!("`{line}` is not a number") })?;
        out.values.push((line_no, v));
    }
    Ok(out)
}

/// Parses a sequence from text. The header's format wins; `fallback` is used
/// when the text has none. A header that contradicts `fallback` is an error.
pub fn ingest_str(text: &str, fallback: Option<SeqFormat>, source: Provenance) -> Result<GeoSeq> {
    let parsed = parse_lines(text)?;
    let format = match (parsed.format, fallback) {
        (Some(h), Some(f)) if h != f => {
            return Err(Error::Parse {
                line: 1,
                reason: format!("header declares {h:?} but {f:?} was requested"),
            })
        }
        (Some(h), _) => h,
        (None, Some(f)) => f,
        (None, None) => {
            return Err(Error::Parse { line: 1, reason: "missing `#format: raw|log` header".into() })
        }
    };
    if parsed.values.is_empty() {
        return Err(Error::Parse { line: 1, reason: "no values".into() });
    }
    let terms = parsed
        .values
        .iter()
        .map(|&(line, v)| {
            let g = match format {
                SeqFormat::Raw => GeoNum::from_value(v),
                SeqFormat::Log => GeoNum::from_log(v),
            };
            g.map_err(|e| Error::Parse { line, reason: e.to_string() })
        })
        .collect::<Result<Vec<_>>>()?;
    GeoSeq::new(terms, source)
}

pub fn ingest(path: &Path, fallback: Option<SeqFormat>) -> Result<GeoSeq> {
    let text = fs::read_to_string(path)?;
    ingest_str(&text, fallback, Provenance::Ingested(path.display().to_string()))
}

/// Log-values serialization with 17 significant digits, which round-trips
/// every finite `f64` bit-exactly.
pub fn serialize_log(seq: &GeoSeq) -> String {
    let mut out = String::with_capacity(seq.len() * 26 + 64);
    out.push_str("#format: log\n");
    out.push_str(&format!("#source: {}\n", seq.source()));
    for t in seq.terms() {
        out.push_str(&format!("{:.16e}\n", t.log()));
    }
    out
}

/// Parses a λ file. A missing `#unbounded` header is taken as `false`:
/// nothing about growth is claimed unless declared.
pub fn parse_lambda(text: &str) -> Result<LambdaSeq> {
    let parsed = parse_lines(text)?;
    let values = parsed.values.iter().map(|&(_, v)| v).collect();
    LambdaSeq::new(values, parsed.unbounded.unwrap_or(false))
}

pub fn read_lambda(path: &Path) -> Result<LambdaSeq> {
    parse_lambda(&fs::read_to_string(path)?)
}

pub fn parse_p(text: &str) -> Result<PSeq> {
    let parsed = parse_lines(text)?;
    PSeq::from_values(parsed.values.iter().map(|&(_, v)| v).collect())
}

pub fn read_p(path: &Path) -> Result<PSeq> {
    parse_p(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn raw_values_become_logs() {
        let s = ingest_str("#format: raw\n2.0\n", None, Provenance::Inline).unwrap();
        assert_eq!(s.logs(), vec![2f64.ln()]);
    }

    #[test]
    fn log_values_kept() {
        let s = ingest_str("#format: log\n-3.5\n\n1\n", None, Provenance::Inline).unwrap();
        assert_eq!(s.logs(), vec![-3.5, 1.0]);
    }

    #[test]
    fn zero_raw_value_names_the_line() {
        let e = ingest_str("#format: raw\n1.5\n0\n", None, Provenance::Inline).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        let e = ingest_str("#format: raw\n-4\n", None, Provenance::Inline).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn malformed_numbers() {
        let e = ingest_str("#format: log\n1.0\nabc\n", None, Provenance::Inline).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        assert!(ingest_str("#format: log\ninf\n", None, Provenance::Inline).is_err());
    }

    #[test]
    fn format_resolution() {
        assert!(ingest_str("1.0\n", None, Provenance::Inline).is_err());
        assert!(ingest_str("1.0\n", Some(SeqFormat::Log), Provenance::Inline).is_ok());
        assert!(ingest_str("#format: raw\n1.0\n", Some(SeqFormat::Log), Provenance::Inline).is_err());
        assert!(ingest_str("#format: hex\n1.0\n", None, Provenance::Inline).is_err());
        assert!(ingest_str("#format: log\n", None, Provenance::Inline).is_err());
    }

    #[test]
    fn lambda_file() {
        let lam = parse_lambda("#unbounded: true\n1\n2\n2.5\n").unwrap();
        assert!(lam.declared_unbounded());
        assert_eq!(lam.values(), &[1.0, 2.0, 2.5]);
        assert!(!parse_lambda("1\n1\n").unwrap().declared_unbounded());
        assert!(matches!(parse_lambda("1\n3\n"), Err(Error::InvalidLambda { index: 2, .. })));
        assert!(parse_lambda("#unbounded: maybe\n1\n").is_err());
    }

    #[test]
    fn p_file() {
        let p = parse_p("1\n0.5\n2\n").unwrap();
        assert_eq!(p.h(), 2.0);
        assert!(parse_p("1\n-1\n").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        let x = GeoSeq::from_logs([0.1, -1e-300, 12345.678, 0.0]).unwrap();
        std::fs::write(&path, serialize_log(&x)).unwrap();
        let y = ingest(&path, None).unwrap();
        assert_eq!(x.logs(), y.logs());
        assert!(matches!(y.source(), Provenance::Ingested(_)));
    }

    proptest! {
        #[test]
        fn log_round_trip_is_bit_exact(logs in prop::collection::vec(-1e300f64..1e300, 1..50)) {
            let x = GeoSeq::from_logs(logs.clone()).unwrap();
            let y = ingest_str(&serialize_log(&x), None, Provenance::Inline).unwrap();
            let a: Vec<u64> = logs.iter().map(|l| l.to_bits()).collect();
            let b: Vec<u64> = y.logs().iter().map(|l| l.to_bits()).collect();
            prop_assert_eq!(a, b);
        }
    }
}
