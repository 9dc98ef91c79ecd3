//! The m-th order geometric difference operator Δ_G^m.
//!
//! With logs `l = log x` and the convention `Δ_G x_i = x_i ⊖ x_{i+1}`, the
//! log of `Δ_G^m x_k` is the classical difference
//! `Σ_{ν=0}^m (−1)^ν C(m,ν) l_{k+ν}`. Output length is `len(x) − m`.

use crate::error::{Error, Result};
use crate::geocore::{GeoNum, NeumaierSum};
use crate::seqmodel::{GeoSeq, Provenance};

/// Largest order for which the binomial closed form is evaluated.
pub const MAX_BINOMIAL_ORDER: u32 = 60;

#[cfg(test)]
thread_local! {
    /// Test-only fault: negates the output of `diff_recursive`.
    pub(crate) static FLIP_SIGN: std::cell::Cell<bool> = const { std::cell::Cell::new(false) };
}

fn check_len(x: &GeoSeq, m: u32) -> Result<()> {
    let needed = m as usize + 1;
    if x.len() < needed {
        return Err(Error::TooShort { len: x.len(), needed });
    }
    Ok(())
}

fn finish(logs: Vec<f64>, x: &GeoSeq, m: u32, how: &str) -> Result<GeoSeq> {
    let terms = logs
        .into_iter()
        .map(|l| GeoNum::from_log(l).map_err(|_| Error::Range(format!("Δ^{m} overflowed the log range"))))
        .collect::<Result<Vec<_>>>()?;
    GeoSeq::new(terms, Provenance::Derived(format!("delta^{m}[{how}] of {}", x.source())))
}

/// Δ_G^m by applying `x_i ⊖ x_{i+1}` m times.
pub fn diff_recursive(x: &GeoSeq, m: u32) -> Result<GeoSeq> {
    check_len(x, m)?;
    let mut logs = x.logs();
    for _ in 0..m {
        for i in 0..logs.len() - 1 {
            logs[i] -= logs[i + 1];
        }
        logs.pop();
    }
    #[cfg(test)]
    if m > 0 && FLIP_SIGN.with(|f| f.get()) {
        logs.iter_mut().for_each(|l| *l = -*l);
    }
    finish(logs, x, m, "recursive")
}

/// Exact `C(m, ν)` for `ν = 0..=m`, `m ≤ 60`.
pub fn binomial_row(m: u32) -> Result<Vec<u128>> {
    if m > MAX_BINOMIAL_ORDER {
        return Err(Error::Range(format!(
            "binomial coefficients beyond order {MAX_BINOMIAL_ORDER} are not exact (m = {m})"
        )));
    }
    let mut row = Vec::with_capacity(m as usize + 1);
    let mut c: u128 = 1;
    row.push(c);
    for nu in 1..=m as u128 {
        c = c * (m as u128 + 1 - nu) / nu;
        row.push(c);
    }
    Ok(row)
}

/// Δ_G^m by the binomial closed form.
pub fn diff_binomial(x: &GeoSeq, m: u32) -> Result<GeoSeq> {
    check_len(x, m)?;
    let coef: Vec<f64> = binomial_row(m)?
        .iter()
        .enumerate()
        .map(|(nu, &c)| if nu % 2 == 0 { c as f64 } else { -(c as f64) })
        .collect();
    let l = x.logs();
    let m = m as usize;
    let logs = (0..l.len() - m)
        .map(|k| {
            let mut s = NeumaierSum::default();
            for (nu, c) in coef.iter().enumerate() {
                s.add(c * l[k + nu]);
            }
            s.total()
        })
        .collect();
    finish(logs, x, m as u32, "binomial")
}
