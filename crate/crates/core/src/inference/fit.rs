//! Maximum-likelihood fits of the BGE family and its sub-models, asymptotic
//! intervals and likelihood-ratio tests.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::optim::{minimize, OptimOptions};
use super::{information_matrix, LogLikKernel, PARAM_NAMES};
use crate::dist::{Bge, BgeParams, Sample};
use crate::error::{domain, Error, Result};
use crate::specfun::{chi_square_sf, digamma, normal_quantile, trigamma};

pub use super::optim::OptimStatus as FitStatus;

/// Which parameters are free. Fixed parameters are held at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelTag {
    Bge,
    Be,
    Ge,
    Dge,
    Exp,
}

impl ModelTag {
    pub const ALL: [ModelTag; 5] = [ModelTag::Bge, ModelTag::Be, ModelTag::Ge, ModelTag::Dge, ModelTag::Exp];

    pub fn label(self) -> &'static str {
        match self {
            ModelTag::Bge => "BGE",
            ModelTag::Be => "BE",
            ModelTag::Ge => "GE",
            ModelTag::Dge => "DGE",
            ModelTag::Exp => "EXP",
        }
    }

    /// Free flags in the order (a, b, λ, α).
    pub fn free_mask(self) -> [bool; 4] {
        match self {
            ModelTag::Bge => [true, true, true, true],
            ModelTag::Be => [true, true, true, false],
            ModelTag::Ge => [false, false, true, true],
            ModelTag::Dge => [false, true, true, true],
            ModelTag::Exp => [false, false, true, false],
        }
    }

    pub fn free_indices(self) -> Vec<usize> {
        (0..4).filter(|&i| self.free_mask()[i]).collect()
    }

    pub fn n_free(self) -> usize {
        self.free_indices().len()
    }

    /// Whether `self` is a sub-model of `alt` (every fixed-at-1 parameter of
    /// `alt` is also fixed in `self`).
    pub fn nested_in(self, alt: ModelTag) -> bool {
        self.free_mask().iter().zip(alt.free_mask()).all(|(&s, a)| !s || a)
    }

    /// Project θ onto the model by fixing the constrained parameters at 1.
    pub fn constrain(self, theta: BgeParams) -> BgeParams {
        let mut v = theta.to_array();
        for (x, free) in v.iter_mut().zip(self.free_mask()) {
            if !free {
                *x = 1.0;
            }
        }
        BgeParams { a: v[0], b: v[1], lambda: v[2], alpha: v[3] }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelTag::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Domain(format!("unknown model '{s}' (expected bge, be, ge, dge or exp)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelTag,
    pub params: BgeParams,
    pub loglik: f64,
    /// ∞-norm of the gradient in log-parameter coordinates, θⱼ·∂ℓ/∂θⱼ,
    /// over the free parameters.
    pub score_norm: f64,
    /// Inverse total information over the free parameters, embedded in 4×4
    /// with zero rows/columns for fixed ones. `None` when the information is
    /// not positive definite or could not be evaluated.
    pub covariance: Option<[[f64; 4]; 4]>,
    pub converged: bool,
    pub status: FitStatus,
    pub iterations: usize,
    /// Index of the ladder start that produced the reported optimum.
    pub start_index: usize,
    pub n_obs: usize,
}

impl FitResult {
    pub fn std_errors(&self) -> Option<[f64; 4]> {
        let c = self.covariance?;
        Some([c[0][0].sqrt(), c[1][1].sqrt(), c[2][2].sqrt(), c[3][3].sqrt()])
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitOptions {
    pub optim: OptimOptions,
    /// Starts tried after the built-in ladder (projected onto the model).
    pub extra_starts: Vec<BgeParams>,
}

/// Shape values of the deterministic {a, b} ladder.
pub const SHAPE_LADDER: [f64; 4] = [0.5, 1.0, 2.0, 10.0];

/// Fit `model` to `data`. With `init` the optimizer starts there only;
/// otherwise a deterministic multi-start ladder is used.
pub fn fit_mle(data: &Sample, model: ModelTag, init: Option<BgeParams>) -> Result<FitResult> {
    fit_mle_with(data, model, init, &FitOptions::default())
}

pub fn fit_mle_with(data: &Sample, model: ModelTag, init: Option<BgeParams>, opts: &FitOptions) -> Result<FitResult> {
    if data.is_empty() {
        return domain("cannot fit an empty sample");
    }
    if let Some(t) = init {
        t.validate()?;
    }
    if model == ModelTag::Exp {
        return fit_exponential(data);
    }
    let mut starts = match init {
        Some(t) => vec![model.constrain(t)],
        None => ladder(data, model, opts)?,
    };
    starts.extend(opts.extra_starts.iter().map(|&t| model.constrain(t)));
    fit_from_starts(data, model, &starts, &opts.optim)
}

fn fit_exponential(data: &Sample) -> Result<FitResult> {
    let theta = BgeParams::exponential(1.0 / data.mean())?;
    let mut r = finish(data, ModelTag::Exp, theta, 0, 0)?;
    r.status = FitStatus::Converged;
    r.converged = true;
    Ok(r)
}

fn median(data: &Sample) -> f64 {
    let mut v = data.values().to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Start with the given shapes and λ chosen so the model median equals the
/// sample median (λ is a pure scale parameter).
fn median_matched(a: f64, b: f64, alpha: f64, med: f64) -> Option<BgeParams> {
    let unit = Bge::new(BgeParams::new(a, b, 1.0, alpha).ok()?).ok()?;
    let q = unit.quantile(0.5).ok()?;
    BgeParams::new(a, b, q / med, alpha).ok()
}

/// GE start matching the sample coefficient of variation:
/// CV² = (ψ′(1) − ψ′(α+1)) / (ψ(α+1) − ψ(1))², decreasing in α.
fn ge_moment_start(data: &Sample) -> Result<BgeParams> {
    let n = data.len() as f64;
    let mean = data.mean();
    let var = if data.len() > 1 {
        data.values().iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        mean * mean
    };
    let cv2 = var / (mean * mean);
    let ratio = |al: f64| {
        let c = digamma(al + 1.0) - digamma(1.0);
        (trigamma(1.0) - trigamma(al + 1.0)) / (c * c)
    };
    let (mut lo, mut hi) = (1e-3f64.ln(), 1e6f64.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio(mid.exp()) > cv2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = (0.5 * (lo + hi)).exp();
    let lambda = (digamma(alpha + 1.0) - digamma(1.0)) / mean;
    BgeParams::ge(lambda, alpha)
}

fn ladder(data: &Sample, model: ModelTag, opts: &FitOptions) -> Result<Vec<BgeParams>> {
    let med = median(data);
    let sub = |m: ModelTag| fit_mle_with(data, m, None, &FitOptions { optim: opts.optim, extra_starts: vec![] });
    let mut starts = Vec::new();
    match model {
        ModelTag::Exp => starts.push(BgeParams::exponential(1.0 / data.mean())?),
        ModelTag::Ge => {
            starts.push(ge_moment_start(data)?);
            starts.push(BgeParams::ge(1.0 / data.mean(), 1.0)?);
        }
        ModelTag::Be => {
            for &a in &SHAPE_LADDER {
                for &b in &SHAPE_LADDER {
                    let lambda = (digamma(a + b) - digamma(b)) / data.mean();
                    starts.push(BgeParams::be(a, b, lambda)?);
                }
            }
            starts.push(sub(ModelTag::Exp)?.params);
        }
        ModelTag::Dge => {
            let ge = sub(ModelTag::Ge)?.params;
            starts.push(ge);
            for &b in &SHAPE_LADDER {
                starts.extend(median_matched(1.0, b, ge.alpha, med));
            }
        }
        ModelTag::Bge => {
            let ge = sub(ModelTag::Ge)?.params;
            starts.push(ge);
            for &a in &SHAPE_LADDER {
                for &b in &SHAPE_LADDER {
                    starts.extend(median_matched(a, b, ge.alpha, med));
                }
            }
            starts.push(sub(ModelTag::Be)?.params);
            starts.push(sub(ModelTag::Dge)?.params);
        }
    }
    Ok(starts)
}

/// Negative log-likelihood and its log-coordinate gradient over the free
/// parameters of `model`.
fn objective<'a>(data: &'a Sample, model: ModelTag) -> impl FnMut(&[f64]) -> Option<(f64, Vec<f64>)> + 'a {
    let idx = model.free_indices();
    move |u: &[f64]| {
        let mut full = [1.0; 4];
        for (&i, &ui) in idx.iter().zip(u) {
            full[i] = ui.exp();
        }
        let theta = BgeParams::from_array(full).ok()?;
        let k = LogLikKernel::new(&theta);
        let mut ll = 0.0;
        let mut g = [0.0; 4];
        for &y in data.values() {
            ll += k.log_density(y);
            for (gi, si) in g.iter_mut().zip(k.score(y)) {
                *gi += si;
            }
        }
        let grad = idx.iter().map(|&i| -g[i] * full[i]).collect();
        Some((-ll, grad))
    }
}

fn fit_from_starts(data: &Sample, model: ModelTag, starts: &[BgeParams], opts: &OptimOptions) -> Result<FitResult> {
    let idx = model.free_indices();
    let mut best: Option<(usize, super::optim::OptimOutcome)> = None;
    for (si, start) in starts.iter().enumerate() {
        let x0: Vec<f64> = idx.iter().map(|&i| start.to_array()[i].ln()).collect();
        let Some(out) = minimize(objective(data, model), &x0, opts) else {
            continue;
        };
        let better = match &best {
            None => true,
            // Ties keep the earlier start.
            Some((_, b)) => out.f < b.f - 1e-10 * b.f.abs().max(1.0),
        };
        if better {
            best = Some((si, out));
        }
    }
    let (si, out) = best.ok_or_else(|| Error::Optimizer(format!("no start could be evaluated for {model}")))?;
    let mut full = [1.0; 4];
    for (&i, &ui) in idx.iter().zip(&out.x) {
        full[i] = ui.exp();
    }
    let mut r = finish(data, model, BgeParams::from_array(full)?, out.iterations, si)?;
    r.status = out.status;
    r.converged = out.status == FitStatus::Converged && r.score_norm < opts.grad_tol;
    Ok(r)
}

fn finish(data: &Sample, model: ModelTag, theta: BgeParams, iterations: usize, start_index: usize) -> Result<FitResult> {
    let k = LogLikKernel::new(&theta);
    let mut ll = 0.0;
    let mut g = [0.0; 4];
    for &y in data.values() {
        ll += k.log_density(y);
        for (gi, si) in g.iter_mut().zip(k.score(y)) {
            *gi += si;
        }
    }
    let full = theta.to_array();
    let idx = model.free_indices();
    let score_norm = idx.iter().fold(0.0f64, |m, &i| m.max((g[i] * full[i]).abs()));
    Ok(FitResult {
        model,
        params: theta,
        loglik: ll,
        score_norm,
        covariance: covariance(&theta, model, data.len()),
        converged: false,
        status: FitStatus::MaxIterations,
        iterations,
        start_index,
        n_obs: data.len(),
    })
}

fn covariance(theta: &BgeParams, model: ModelTag, n: usize) -> Option<[[f64; 4]; 4]> {
    let info = information_matrix(theta).ok()?.with_scale(n as f64);
    let total = info.total();
    let idx = model.free_indices();
    let m = DMatrix::from_fn(idx.len(), idx.len(), |r, c| total[idx[r]][idx[c]]);
    let inv = m.cholesky()?.inverse();
    let mut out = [[0.0; 4]; 4];
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            out[i][j] = inv[(r, c)];
        }
    }
    out.iter().flatten().all(|v| v.is_finite()).then_some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
}

/// θ̂ⱼ ± z_{γ/2}·√(K_n⁻¹)ⱼⱼ for each free parameter.
pub fn confidence_intervals(fit: &FitResult, gamma: f64) -> Result<Vec<ConfidenceInterval>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return domain(format!("significance level must lie in (0, 1), got {gamma}"));
    }
    if !fit.converged {
        return Err(Error::Optimizer(format!("{} fit did not converge ({})", fit.model, fit.status.label())));
    }
    let cov = fit.covariance.ok_or(Error::NotPositiveDefinite)?;
    let z = normal_quantile(1.0 - 0.5 * gamma)?;
    let est = fit.params.to_array();
    Ok(fit
        .model
        .free_indices()
        .into_iter()
        .map(|i| {
            let se = cov[i][i].sqrt();
            ConfidenceInterval {
                name: PARAM_NAMES[i].to_string(),
                estimate: est[i],
                std_error: se,
                lower: est[i] - z * se,
                upper: est[i] + z * se,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrTestResult {
    pub null_model: ModelTag,
    pub alt_model: ModelTag,
    pub statistic: f64,
    pub dof: u32,
    pub p_value: f64,
    pub null_loglik: f64,
    pub alt_loglik: f64,
    pub null_converged: bool,
    pub alt_converged: bool,
}

/// Fit both models and test the null against the alternative. The
/// alternative's ladder is also seeded with the null optimum.
pub fn lr_test(data: &Sample, null_model: ModelTag, alt_model: ModelTag) -> Result<LrTestResult> {
    check_nesting(null_model, alt_model)?;
    let null = fit_mle(data, null_model, None)?;
    let alt = fit_mle_with(data, alt_model, None, &FitOptions { extra_starts: vec![null.params], ..Default::default() })?;
    lr_from_fits(&null, &alt)
}

fn check_nesting(null_model: ModelTag, alt_model: ModelTag) -> Result<()> {
    if !null_model.nested_in(alt_model) {
        return domain(format!("{null_model} is not nested in {alt_model}"));
    }
    Ok(())
}

/// LR statistic from two existing fits of the same data.
pub fn lr_from_fits(null: &FitResult, alt: &FitResult) -> Result<LrTestResult> {
    check_nesting(null.model, alt.model)?;
    let mut w = 2.0 * (alt.loglik - null.loglik);
    if w < -1e-6 {
        return Err(Error::Optimizer(format!(
            "negative LR statistic {w:e}: the {} fit is worse than the nested {} fit",
            alt.model, null.model
        )));
    }
    if w < 0.0 {
        w = 0.0;
    }
    let dof = (alt.model.n_free() - null.model.n_free()) as u32;
    let p_value = if dof == 0 { 1.0 } else { chi_square_sf(w, dof)? };
    Ok(LrTestResult {
        null_model: null.model,
        alt_model: alt.model,
        statistic: w,
        dof,
        p_value,
        null_loglik: null.loglik,
        alt_loglik: alt.loglik,
        null_converged: null.converged,
        alt_converged: alt.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nesting_relation() {
        use ModelTag::*;
        assert!(Exp.nested_in(Ge) && Ge.nested_in(Dge) && Dge.nested_in(Bge) && Be.nested_in(Bge));
        assert!(!Ge.nested_in(Be) && !Be.nested_in(Ge) && !Bge.nested_in(Be));
        assert_eq!(Bge.n_free() - Be.n_free(), 1);
        assert_eq!("dge".parse::<ModelTag>().unwrap(), Dge);
        assert!("weibull".parse::<ModelTag>().is_err());
    }

    #[test]
    fn exponential_closed_form() {
        let s = Sample::new(vec![1.0, 2.0, 3.0], "t").unwrap();
        let f = fit_mle(&s, ModelTag::Exp, None).unwrap();
        assert!((f.params.lambda - 0.5).abs() < 1e-12);
        assert!(f.converged && f.score_norm < 1e-12);
        let ci = confidence_intervals(&f, 0.05).unwrap();
        let z = 1.959_963_984_540_054;
        assert_eq!(ci.len(), 1);
        assert!((ci[0].lower - 0.5 * (1.0 - z / 3f64.sqrt())).abs() < 1e-8);
        assert!((ci[0].upper - 0.5 * (1.0 + z / 3f64.sqrt())).abs() < 1e-8);
    }

    #[test]
    fn ge_fit_recovers_simulated_parameters() {
        let truth = BgeParams::ge(2.0, 5.0).unwrap();
        let s = Bge::new(truth).unwrap().sample(4000, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let f = fit_mle(&s, ModelTag::Ge, None).unwrap();
        assert!(f.converged, "{f:?}");
        assert!((f.params.lambda / 2.0 - 1.0).abs() < 0.1);
        assert!((f.params.alpha / 5.0 - 1.0).abs() < 0.2);
        let se = f.std_errors().unwrap();
        assert!(se[0] == 0.0 && se[2] > 0.0);
    }

    #[test]
    fn self_test_is_trivial() {
        let s = Sample::new(vec![0.5, 1.2, 0.7, 2.2, 1.9, 0.3], "t").unwrap();
        let f = fit_mle(&s, ModelTag::Ge, None).unwrap();
        let r = lr_from_fits(&f, &f).unwrap();
        assert_eq!((r.statistic, r.dof, r.p_value), (0.0, 0, 1.0));
        assert!(lr_test(&s, ModelTag::Be, ModelTag::Ge).is_err());
    }

    #[test]
    fn init_is_respected_for_sub_models() {
        let s = Sample::new(vec![0.5, 1.2, 0.7, 2.2, 1.9, 0.3, 1.1], "t").unwrap();
        let f = fit_mle(&s, ModelTag::Be, Some(BgeParams::new(2.0, 2.0, 1.0, 7.0).unwrap())).unwrap();
        assert_eq!(f.params.alpha, 1.0);
        assert_eq!(f.start_index, 0);
    }
}
