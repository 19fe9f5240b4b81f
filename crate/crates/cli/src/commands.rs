use std::fmt::Write;
use std::time::{Duration, Instant};

use bge::data::glass_fibre;
use bge::inference::report::{fit_to_structured, format_sig10, lr_to_structured};
use bge::inference::{
    confidence_intervals, fit_mle, log_likelihood, lr_from_fits, ConfidenceInterval, FitResult, LrTestResult, ModelTag,
    PARAM_NAMES,
};
use bge::series::{skewness_kurtosis, SeriesControl};
use bge::{Bge, BgeParams, Error, Sample};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::input::read_observations;
use crate::{CliError, Command, DataArgs, Format, Grid, Sweep};

/// Output text, plus the error that decides the exit status if any. The
/// text is printed in both cases so partial reports are not lost.
pub type Outcome = Result<String, (String, CliError)>;

pub fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Fit { data, model, params, level, format } => fit(&data, model, params, level, format),
        Command::Compare { data, format } => compare(&data, format),
        Command::Sample { params, n, seed, format } => sample(params, n, seed, format).map_err(|e| (String::new(), e)),
        Command::Curve { params, grid, sweep, format } => match sweep {
            None => curve(params, grid, format).map_err(|e| (String::new(), e)),
            Some(s) => sweep_curve(params, grid, s, format).map_err(|e| (String::new(), e)),
        },
        Command::Reproduce { format } => reproduce(format).map_err(|e| (String::new(), e)),
    }
}

fn load(data: &DataArgs) -> Result<Sample, CliError> {
    match &data.input {
        Some(path) => {
            let values = read_observations(path)?;
            Sample::new(values, path.display().to_string()).map_err(|e| CliError::Usage(e.to_string()))
        }
        None => Ok(glass_fibre()),
    }
}

fn g(x: f64) -> String {
    format_sig10(x)
}

fn fit_failure(model: ModelTag, e: &Error) -> CliError {
    CliError::NotConverged(format!("{model} fit failed: {e}"))
}

fn not_converged(fit: &FitResult) -> CliError {
    CliError::NotConverged(format!(
        "{} fit did not converge (status {}, score norm {})",
        fit.model,
        fit.status.label(),
        g(fit.score_norm)
    ))
}

fn fit(data: &DataArgs, model: ModelTag, init: Option<BgeParams>, level: f64, format: Format) -> Outcome {
    let bare = |e| (String::new(), e);
    if !(level > 0.0 && level < 1.0) {
        return Err(bare(CliError::Usage(format!("--level must lie in (0, 1), got {level}"))));
    }
    let sample = load(data).map_err(bare)?;
    let fit = fit_mle(&sample, model, init).map_err(|e| bare(fit_failure(model, &e)))?;
    let cis = confidence_intervals(&fit, 1.0 - level).ok();
    let text = match format {
        Format::Structured => fit_to_structured(&fit),
        Format::Json => json_line(&json!({ "fit": fit, "level": level, "confidence_intervals": cis })),
        Format::Human => {
            let mut out = String::new();
            let _ = writeln!(out, "data: {} ({} observations)", sample.label(), sample.len());
            human_fit(&mut out, &fit, cis.as_deref(), level);
            out
        }
    };
    if fit.converged {
        Ok(text)
    } else {
        Err((text, not_converged(&fit)))
    }
}

fn json_line(v: &serde_json::Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(v).expect("JSON values serialize"))
}

fn human_fit(out: &mut String, fit: &FitResult, cis: Option<&[ConfidenceInterval]>, level: f64) {
    let _ = writeln!(out, "model: {}", fit.model);
    let _ = writeln!(
        out,
        "status: {}{} (score norm {}, {} iterations, start {})",
        fit.status.label(),
        if fit.converged { "" } else { ", NOT converged" },
        g(fit.score_norm),
        fit.iterations,
        fit.start_index
    );
    let _ = writeln!(out, "log-likelihood: {:.4}", fit.loglik);
    let se = fit.std_errors();
    let _ = writeln!(out, "{:<8} {:>14} {:>12}  {:.0}% interval", "param", "estimate", "std.err", 100.0 * level);
    let free = fit.model.free_mask();
    for (j, (name, v)) in PARAM_NAMES.iter().zip(fit.params.to_array()).enumerate() {
        if !free[j] {
            let _ = writeln!(out, "{name:<8} {:>14} {:>12}", g(v), "(fixed)");
            continue;
        }
        let s = se.map_or("-".to_string(), |s| g(s[j]));
        let ci = cis
            .and_then(|c| c.iter().find(|c| c.name == *name))
            .map_or("-".to_string(), |c| format!("[{}, {}]", g(c.lower), g(c.upper)));
        let _ = writeln!(out, "{name:<8} {:>14} {s:>12}  {ci}", g(v));
    }
    if fit.covariance.is_none() {
        let _ = writeln!(out, "note: information matrix not positive definite; no standard errors");
    }
}

const COMPARED: [ModelTag; 3] = [ModelTag::Bge, ModelTag::Be, ModelTag::Ge];

fn compare(data: &DataArgs, format: Format) -> Outcome {
    let sample = load(data).map_err(|e| (String::new(), e))?;
    let sample = &sample;
    let fits: Vec<(ModelTag, bge::Result<FitResult>)> = std::thread::scope(|s| {
        let handles: Vec<_> = COMPARED.iter().map(|&m| (m, s.spawn(move || fit_mle(sample, m, None)))).collect();
        handles.into_iter().map(|(m, h)| (m, h.join().expect("fit thread panicked"))).collect()
    });
    let alt = fits[0].1.as_ref().ok();
    let tests: Vec<(ModelTag, bge::Result<LrTestResult>)> = fits[1..]
        .iter()
        .map(|(m, f)| {
            let lr = match (f, alt) {
                (Ok(null), Some(alt)) => lr_from_fits(null, alt),
                _ => Err(Error::Optimizer("a member fit failed".into())),
            };
            (*m, lr)
        })
        .collect();

    let mut problems = Vec::new();
    for (m, f) in &fits {
        match f {
            Err(e) => problems.push(format!("{m}: {e}")),
            Ok(f) if !f.converged => problems.push(format!("{m}: {}", f.status.label())),
            Ok(_) => {}
        }
    }

    let mut out = String::new();
    match format {
        Format::Structured => {
            for (m, f) in &fits {
                match f {
                    Ok(f) => prefixed(&mut out, &format!("fit.{m}."), &fit_to_structured(f)),
                    Err(e) => {
                        let _ = writeln!(out, "fit.{m}.error={e}");
                    }
                }
            }
            for (m, t) in &tests {
                match t {
                    Ok(t) => prefixed(&mut out, &format!("test.{m}_vs_BGE."), &lr_to_structured(t)),
                    Err(e) => {
                        let _ = writeln!(out, "test.{m}_vs_BGE.error={e}");
                    }
                }
            }
            let _ = writeln!(out, "compare.all_converged={}", problems.is_empty());
        }
        Format::Json => {
            let fj: serde_json::Map<_, _> = fits
                .iter()
                .map(|(m, f)| (m.label().to_string(), f.as_ref().map_or_else(|e| json!({ "error": e.to_string() }), |f| json!(f))))
                .collect();
            let tj: Vec<_> = tests
                .iter()
                .map(|(_, t)| t.as_ref().map_or_else(|e| json!({ "error": e.to_string() }), |t| json!(t)))
                .collect();
            out = json_line(&json!({ "fits": fj, "tests": tj, "all_converged": problems.is_empty() }));
        }
        Format::Human => {
            let _ = writeln!(out, "data: {} ({} observations)", sample.label(), sample.len());
            let _ = writeln!(out, "{:<6} {:>12} {:>22}  a, b, lambda, alpha", "model", "loglik", "status");
            for (m, f) in &fits {
                match f {
                    Ok(f) => {
                        let p = f.params.to_array().map(g).join(", ");
                        let st = if f.converged { "converged".to_string() } else { format!("{} (NOT converged)", f.status.label()) };
                        let _ = writeln!(out, "{:<6} {:>12.4} {st:>22}  {p}", m.label(), f.loglik);
                    }
                    Err(e) => {
                        let _ = writeln!(out, "{:<6} failed: {e}", m.label());
                    }
                }
            }
            let _ = writeln!(out);
            for (m, t) in &tests {
                match t {
                    Ok(t) => {
                        let _ = writeln!(out, "LR {m} vs BGE: w = {:.4}, dof = {}, p = {}", t.statistic, t.dof, g(t.p_value));
                    }
                    Err(e) => {
                        let _ = writeln!(out, "LR {m} vs BGE: unavailable ({e})");
                    }
                }
            }
            for p in &problems {
                let _ = writeln!(out, "warning: {p}");
            }
        }
    }
    if problems.is_empty() {
        Ok(out)
    } else {
        let msg = format!("not all fits converged: {}", problems.join("; "));
        Err((out, CliError::NotConverged(msg)))
    }
}

fn prefixed(out: &mut String, prefix: &str, block: &str) {
    for line in block.lines() {
        let _ = writeln!(out, "{prefix}{line}");
    }
}

fn sample(params: BgeParams, n: usize, seed: u64, format: Format) -> Result<String, CliError> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let d = Bge::new(params).map_err(|e| CliError::Usage(e.to_string()))?;
    let draws = d.sample(n, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(match format {
        Format::Json => json_line(&json!(draws.values())),
        _ => draws.values().iter().map(|x| format!("{x:?}\n")).collect(),
    })
}

struct Table {
    header: &'static [&'static str],
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Json => {
                let rows: Vec<serde_json::Value> = self
                    .rows
                    .iter()
                    .map(|r| self.header.iter().zip(r).map(|(h, v)| (h.to_string(), json!(v))).collect())
                    .collect();
                return json_line(&json!(rows));
            }
            Format::Structured => {
                let _ = writeln!(out, "{}", self.header.join(","));
                for r in &self.rows {
                    let _ = writeln!(out, "{}", r.iter().map(|&v| g(v)).collect::<Vec<_>>().join(","));
                }
            }
            Format::Human => {
                let _ = writeln!(out, "{}", self.header.iter().map(|h| format!("{h:>16}")).collect::<String>());
                for r in &self.rows {
                    let _ = writeln!(out, "{}", r.iter().map(|&v| format!("{:>16}", g(v))).collect::<String>());
                }
            }
        }
        out
    }
}

fn curve(params: BgeParams, grid: Grid, format: Format) -> Result<String, CliError> {
    let d = Bge::new(params).map_err(|e| CliError::Usage(e.to_string()))?;
    let rows = grid
        .values()
        .map(|x| {
            let f = d.pdf(x).unwrap_or(f64::NAN);
            let h = if x <= 0.0 {
                f
            } else {
                match d.hazard(x) {
                    Ok(h) => h,
                    Err(Error::HazardOverflow(_)) => f64::INFINITY,
                    Err(_) => f64::NAN,
                }
            };
            vec![x, f, d.cdf(x), h]
        })
        .collect();
    Ok(Table { header: &["x", "pdf", "cdf", "hazard"], rows }.render(format))
}

fn sweep_curve(params: BgeParams, grid: Grid, sweep: Sweep, format: Format) -> Result<String, CliError> {
    if grid.min <= 0.0 {
        return Err(CliError::Usage("a shape sweep needs a positive range".into()));
    }
    let ctl = SeriesControl::default();
    let (name, header): (&str, &'static [&'static str]) = match sweep {
        Sweep::A => ("a", &["a", "skewness", "kurtosis"]),
        Sweep::B => ("b", &["b", "skewness", "kurtosis"]),
    };
    let mut rows = Vec::new();
    for v in grid.values() {
        let mut t = params;
        match sweep {
            Sweep::A => t.a = v,
            Sweep::B => t.b = v,
        }
        let (s, k) = skewness_kurtosis(&t, &ctl).map_err(|e| CliError::NotConverged(format!("{name} = {v}: {e}")))?;
        rows.push(vec![v, s, k]);
    }
    Ok(Table { header, rows }.render(format))
}

/// Reference maximum-likelihood results for the glass-fibre strengths.
mod reference {
    pub const GE: [f64; 2] = [2.6105, 31.3032];
    pub const GE_LOGLIK: f64 = -31.3834;
    pub const BE: [f64; 3] = [17.7786, 22.7222, 0.3898];
    pub const BE_LOGLIK: f64 = -24.1270;
    pub const BGE: [f64; 4] = [0.4125, 93.4655, 0.92271, 22.6124];
    pub const BGE_LOGLIK: f64 = -15.5995;
    pub const LR_BE: f64 = 17.0550;
    pub const LR_BE_P: f64 = 3.63e-5;
    pub const LR_GE: f64 = 31.5678;
    pub const LR_GE_P: f64 = 1.39e-7;
}

struct Check {
    key: String,
    reference: f64,
    computed: f64,
    tolerance: &'static str,
    pass: bool,
}

fn rel(key: String, reference: f64, computed: f64, tol: f64, tolerance: &'static str) -> Check {
    Check { key, reference, computed, tolerance, pass: (computed / reference - 1.0).abs() <= tol }
}

fn abs(key: &str, reference: f64, computed: f64, tol: f64, tolerance: &'static str) -> Check {
    Check { key: key.into(), reference, computed, tolerance, pass: (computed - reference).abs() <= tol }
}

fn factor2(key: &str, reference: f64, computed: f64) -> Check {
    let pass = computed > 0.0 && computed / reference <= 2.0 && reference / computed <= 2.0;
    Check { key: key.into(), reference, computed, tolerance: "factor 2", pass }
}

fn reproduce(format: Format) -> Result<String, CliError> {
    use reference as r;
    let data = glass_fibre();
    let timed = |m| {
        let t0 = Instant::now();
        fit_mle(&data, m, None).map(|f| (f, t0.elapsed())).map_err(|e| fit_failure(m, &e))
    };
    let (ge, t_ge) = timed(ModelTag::Ge)?;
    let (be, t_be) = timed(ModelTag::Be)?;
    let (bg, t_bg) = timed(ModelTag::Bge)?;
    let lr_be = lr_from_fits(&be, &bg).map_err(|e| fit_failure(ModelTag::Bge, &e))?;
    let lr_ge = lr_from_fits(&ge, &bg).map_err(|e| fit_failure(ModelTag::Bge, &e))?;

    let ll_at = |p: bge::Result<BgeParams>| p.and_then(|p| log_likelihood(&p, &data)).unwrap_or(f64::NAN);
    let ref_ll = [
        ("GE", ll_at(BgeParams::ge(r::GE[0], r::GE[1]))),
        ("BE", ll_at(BgeParams::be(r::BE[0], r::BE[1], r::BE[2]))),
        ("BGE", ll_at(BgeParams::new(r::BGE[0], r::BGE[1], r::BGE[2], r::BGE[3]))),
    ];

    let mut checks = vec![
        rel("GE.lambda".into(), r::GE[0], ge.params.lambda, 0.01, "1%"),
        rel("GE.alpha".into(), r::GE[1], ge.params.alpha, 0.01, "1%"),
        abs("GE.loglik", r::GE_LOGLIK, ge.loglik, 0.02, "0.02"),
    ];
    for (j, name) in ["a", "b", "lambda"].into_iter().enumerate() {
        checks.push(rel(format!("BE.{name}"), r::BE[j], be.params.to_array()[j], 0.02, "2%"));
    }
    checks.push(abs("BE.loglik", r::BE_LOGLIK, be.loglik, 0.05, "0.05"));
    // Drifting parameters are acceptable only along a ridge on which the
    // computed and reference likelihoods agree.
    let ll_match = (bg.loglik - r::BGE_LOGLIK).abs() <= 0.05;
    let ridge = ll_match && (ref_ll[2].1 - bg.loglik).abs() <= 0.05;
    for (j, name) in PARAM_NAMES.iter().enumerate() {
        let mut c = rel(format!("BGE.{name}"), r::BGE[j], bg.params.to_array()[j], 0.10, "10% or ridge");
        c.pass |= ridge;
        checks.push(c);
    }
    checks.push(abs("BGE.loglik", r::BGE_LOGLIK, bg.loglik, 0.05, "0.05"));
    checks.push(Check {
        key: "BGE.loglik_floor".into(),
        reference: r::BGE_LOGLIK - 0.05,
        computed: bg.loglik,
        tolerance: ">= reference",
        pass: bg.loglik >= r::BGE_LOGLIK - 0.05,
    });
    checks.push(abs("LR.BE_vs_BGE.statistic", r::LR_BE, lr_be.statistic, 0.1, "0.1"));
    checks.push(factor2("LR.BE_vs_BGE.p_value", r::LR_BE_P, lr_be.p_value));
    checks.push(abs("LR.GE_vs_BGE.statistic", r::LR_GE, lr_ge.statistic, 0.1, "0.1"));
    checks.push(factor2("LR.GE_vs_BGE.p_value", r::LR_GE_P, lr_ge.p_value));
    let passed = checks.iter().filter(|c| c.pass).count();
    let fits = [(&ge, t_ge), (&be, t_be), (&bg, t_bg)];

    let mut out = String::new();
    match format {
        Format::Structured => {
            for c in &checks {
                let _ = writeln!(out, "{}.reference={}", c.key, g(c.reference));
                let _ = writeln!(out, "{}.computed={}", c.key, g(c.computed));
                let _ = writeln!(out, "{}.pass={}", c.key, c.pass);
            }
            for (name, ll) in ref_ll {
                let _ = writeln!(out, "{name}.loglik_at_reference={}", g(ll));
            }
            for (f, _) in fits {
                let _ = writeln!(out, "{}.status={}", f.model, f.status.label());
                let _ = writeln!(out, "{}.converged={}", f.model, f.converged);
                if let Some(se) = f.std_errors() {
                    for j in f.model.free_indices() {
                        let _ = writeln!(out, "{}.se.{}={}", f.model, PARAM_NAMES[j], g(se[j]));
                    }
                }
            }
            let _ = writeln!(out, "checks.passed={passed}");
            let _ = writeln!(out, "checks.total={}", checks.len());
        }
        Format::Json => {
            let cj: Vec<_> = checks
                .iter()
                .map(|c| {
                    json!({ "key": c.key, "reference": c.reference, "computed": c.computed,
                            "tolerance": c.tolerance, "pass": c.pass })
                })
                .collect();
            let fj: Vec<_> = fits.iter().map(|(f, _)| json!(f)).collect();
            let rj: serde_json::Map<_, _> = ref_ll.iter().map(|(n, v)| (n.to_string(), json!(v))).collect();
            out = json_line(&json!({
                "checks": cj, "passed": passed, "total": checks.len(), "fits": fj,
                "tests": [lr_be, lr_ge], "loglik_at_reference": rj,
            }));
        }
        Format::Human => {
            let _ = writeln!(out, "data: {} ({} observations)\n", data.label(), data.len());
            let _ = writeln!(out, "{:<24} {:>14} {:>14} {:>14}  result", "quantity", "reference", "computed", "tolerance");
            for c in &checks {
                let _ = writeln!(
                    out,
                    "{:<24} {:>14} {:>14} {:>14}  {}",
                    c.key,
                    g(c.reference),
                    g(c.computed),
                    c.tolerance,
                    if c.pass { "PASS" } else { "FAIL" }
                );
            }
            let _ = writeln!(out, "\n{passed} of {} checks passed\n", checks.len());
            for (name, ll) in ref_ll {
                let _ = writeln!(out, "log-likelihood at the reference {name} estimates: {ll:.4}");
            }
            for (f, t) in fits {
                let _ = writeln!(out);
                let _ = writeln!(out, "fit time: {}", fmt_duration(t));
                let cis = confidence_intervals(f, 0.05).ok();
                human_fit(&mut out, f, cis.as_deref(), 0.95);
            }
        }
    }
    Ok(out)
}

fn fmt_duration(d: Duration) -> String {
    format!("{:.1} ms", d.as_secs_f64() * 1e3)
}
