//! Line-oriented `key=value` serialization of fits and LR tests.
//!
//! Reals are written with 10 significant digits, so a parse/serialize cycle
//! reproduces the text byte for byte. Stable keys:
//!
//! ```text
//! model=BGE
//! params.a=0.4125  params.b=…  params.lambda=…  params.alpha=…
//! loglik=…  converged=true  status=converged  score_norm=…
//! iterations=…  start_index=…  n_obs=…
//! cov.<p>.<q>=… (16 entries) or covariance=none
//! lr.null=BE  lr.alt=BGE  lr.statistic=…  lr.dof=1  lr.p_value=…
//! lr.null_loglik=…  lr.alt_loglik=…  lr.null_converged=…  lr.alt_converged=…
//! ```

use std::collections::BTreeMap;
use std::fmt::Write;

use super::fit::{FitResult, FitStatus, LrTestResult, ModelTag};
use super::PARAM_NAMES;
use crate::dist::BgeParams;
use crate::error::{Error, Result};

/// Format with 10 significant digits: fixed notation for decimal exponents
/// in [−5, 10), scientific otherwise; trailing zeros removed.
pub fn format_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.9e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..10).contains(&exp) {
        let fixed = format!("{:.*}", (9 - exp).max(0) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn push(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}={value}");
}

pub fn fit_to_structured(fit: &FitResult) -> String {
    let mut out = String::new();
    push(&mut out, "model", fit.model.label());
    for (name, v) in PARAM_NAMES.iter().zip(fit.params.to_array()) {
        push(&mut out, &format!("params.{name}"), format_sig10(v));
    }
    push(&mut out, "loglik", format_sig10(fit.loglik));
    push(&mut out, "converged", fit.converged);
    push(&mut out, "status", fit.status.label());
    push(&mut out, "score_norm", format_sig10(fit.score_norm));
    push(&mut out, "iterations", fit.iterations);
    push(&mut out, "start_index", fit.start_index);
    push(&mut out, "n_obs", fit.n_obs);
    match &fit.covariance {
        None => push(&mut out, "covariance", "none"),
        Some(c) => {
            for (r, rn) in PARAM_NAMES.iter().enumerate() {
                for (q, qn) in PARAM_NAMES.iter().enumerate() {
                    push(&mut out, &format!("cov.{rn}.{qn}"), format_sig10(c[r][q]));
                }
            }
        }
    }
    out
}

pub fn lr_to_structured(lr: &LrTestResult) -> String {
    let mut out = String::new();
    push(&mut out, "lr.null", lr.null_model.label());
    push(&mut out, "lr.alt", lr.alt_model.label());
    push(&mut out, "lr.statistic", format_sig10(lr.statistic));
    push(&mut out, "lr.dof", lr.dof);
    push(&mut out, "lr.p_value", format_sig10(lr.p_value));
    push(&mut out, "lr.null_loglik", format_sig10(lr.null_loglik));
    push(&mut out, "lr.alt_loglik", format_sig10(lr.alt_loglik));
    push(&mut out, "lr.null_converged", lr.null_converged);
    push(&mut out, "lr.alt_converged", lr.alt_converged);
    out
}

/// Key → (line number, value). Blank lines and `#` comments are skipped.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, (usize, String)>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse { line: i + 1, msg: "expected key=value".into() })?;
        if map.insert(k.trim().to_string(), (i + 1, v.trim().to_string())).is_some() {
            return Err(Error::Parse { line: i + 1, msg: format!("duplicate key '{}'", k.trim()) });
        }
    }
    Ok(map)
}

struct Fields(BTreeMap<String, (usize, String)>);

impl Fields {
    fn raw(&self, key: &str) -> Result<(usize, &str)> {
        self.0
            .get(key)
            .map(|(l, v)| (*l, v.as_str()))
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing key '{key}'") })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.raw(key)?;
        v.parse().map_err(|_| Error::Parse { line, msg: format!("bad value '{v}' for '{key}'") })
    }

    fn model(&self, key: &str) -> Result<ModelTag> {
        let (line, v) = self.raw(key)?;
        v.parse().map_err(|_| Error::Parse { line, msg: format!("unknown model '{v}'") })
    }
}

pub fn parse_fit_structured(text: &str) -> Result<FitResult> {
    let f = Fields(parse_pairs(text)?);
    let mut p = [0.0; 4];
    for (slot, name) in p.iter_mut().zip(PARAM_NAMES) {
        *slot = f.get(&format!("params.{name}"))?;
    }
    let (line, st) = f.raw("status")?;
    let status = FitStatus::parse(st).ok_or_else(|| Error::Parse { line, msg: format!("unknown status '{st}'") })?;
    let covariance = if f.0.contains_key("covariance") {
        let (line, v) = f.raw("covariance")?;
        if v != "none" {
            return Err(Error::Parse { line, msg: format!("covariance must be 'none' or given entrywise, got '{v}'") });
        }
        None
    } else {
        let mut c = [[0.0; 4]; 4];
        for (r, rn) in PARAM_NAMES.iter().enumerate() {
            for (q, qn) in PARAM_NAMES.iter().enumerate() {
                c[r][q] = f.get(&format!("cov.{rn}.{qn}"))?;
            }
        }
        Some(c)
    };
    Ok(FitResult {
        model: f.model("model")?,
        params: BgeParams::from_array(p)?,
        loglik: f.get("loglik")?,
        score_norm: f.get("score_norm")?,
        covariance,
        converged: f.get("converged")?,
        status,
        iterations: f.get("iterations")?,
        start_index: f.get("start_index")?,
        n_obs: f.get("n_obs")?,
    })
}

pub fn parse_lr_structured(text: &str) -> Result<LrTestResult> {
    let f = Fields(parse_pairs(text)?);
    Ok(LrTestResult {
        null_model: f.model("lr.null")?,
        alt_model: f.model("lr.alt")?,
        statistic: f.get("lr.statistic")?,
        dof: f.get("lr.dof")?,
        p_value: f.get("lr.p_value")?,
        null_loglik: f.get("lr.null_loglik")?,
        alt_loglik: f.get("lr.alt_loglik")?,
        null_converged: f.get("lr.null_converged")?,
        alt_converged: f.get("lr.alt_converged")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig10_formatting() {
        assert_eq!(format_sig10(-15.59952), "-15.59952");
        assert_eq!(format_sig10(1.0 / 3.0), "0.3333333333");
        assert_eq!(format_sig10(3.63e-5), "0.0000363");
        assert_eq!(format_sig10(1.39e-7), "1.39e-7");
        assert_eq!(format_sig10(93.465_512_345_678), "93.46551235");
        assert_eq!(format_sig10(2.5e12), "2.5e12");
        assert_eq!(format_sig10(9_999_999_999.7), "1e10");
        assert_eq!(format_sig10(0.0), "0");
    }

    fn sample_fit() -> FitResult {
        FitResult {
            model: ModelTag::Be,
            params: BgeParams::be(17.778_612_3, 22.722_2, 0.389_812_345_6).unwrap(),
            loglik: -24.127_012_345_67,
            score_norm: 3.2e-8,
            covariance: Some([[1.0 / 7.0, 0.1, 0.2, 0.0], [0.1, 2.0, 0.3, 0.0], [0.2, 0.3, 1e-9, 0.0], [0.0; 4]]),
            converged: true,
            status: FitStatus::Converged,
            iterations: 57,
            start_index: 4,
            n_obs: 63,
        }
    }

    #[test]
    fn fit_round_trip() {
        let text = fit_to_structured(&sample_fit());
        let back = parse_fit_structured(&text).unwrap();
        assert_eq!(fit_to_structured(&back), text);
        assert!((back.loglik / sample_fit().loglik - 1.0).abs() < 1e-9);
        let mut nocov = sample_fit();
        nocov.covariance = None;
        let back = parse_fit_structured(&fit_to_structured(&nocov)).unwrap();
        assert!(back.covariance.is_none());
    }

    #[test]
    fn lr_round_trip_and_errors() {
        let lr = LrTestResult {
            null_model: ModelTag::Ge,
            alt_model: ModelTag::Bge,
            statistic: 31.5678,
            dof: 2,
            p_value: 1.39e-7,
            null_loglik: -31.3834,
            alt_loglik: -15.5995,
            null_converged: true,
            alt_converged: false,
        };
        let text = lr_to_structured(&lr);
        assert_eq!(parse_lr_structured(&text).unwrap(), lr);
        assert!(matches!(parse_lr_structured("lr.null=GE\nnonsense\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_lr_structured(&text.replace("lr.dof=2", "lr.dof=two")).is_err());
    }
}
