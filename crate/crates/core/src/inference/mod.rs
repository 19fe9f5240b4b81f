//! Likelihood machinery: log-likelihood, analytic score, the expected
//! information matrix, and (in submodules) the optimizer, model fits,
//! likelihood-ratio tests and their serialized reports.

pub mod fit;
pub mod optim;
pub mod report;

use nalgebra::{Matrix4, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{Bge, BgeParams, Sample};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_real_line, Tolerance};
use crate::specfun::{digamma, ge_logs, log1mexp, log_beta_unchecked, trigamma};

pub use fit::{
    confidence_intervals, fit_mle, fit_mle_with, lr_from_fits, lr_test, ConfidenceInterval, FitOptions, FitResult, FitStatus,
    LrTestResult, ModelTag,
};

/// Parameter names in the fixed order (a, b, λ, α).
pub const PARAM_NAMES: [&str; 4] = ["a", "b", "lambda", "alpha"];

/// Gradient of the total log-likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub d_a: f64,
    pub d_b: f64,
    pub d_lambda: f64,
    pub d_alpha: f64,
}

impl ScoreVector {
    pub fn to_array(self) -> [f64; 4] {
        [self.d_a, self.d_b, self.d_lambda, self.d_alpha]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        ScoreVector { d_a: v[0], d_b: v[1], d_lambda: v[2], d_alpha: v[3] }
    }
}

/// Per-observation log-density and score with the θ-only constants
/// (log-beta, digammas) computed once.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogLikKernel {
    a: f64,
    b: f64,
    lambda: f64,
    alpha: f64,
    ln_const: f64,
    psi_ab_minus_a: f64,
    psi_ab_minus_b: f64,
}

impl LogLikKernel {
    pub(crate) fn new(theta: &BgeParams) -> Self {
        let (a, b, lambda, alpha) = (theta.a, theta.b, theta.lambda, theta.alpha);
        let psi_ab = digamma(a + b);
        LogLikKernel {
            a,
            b,
            lambda,
            alpha,
            ln_const: alpha.ln() + lambda.ln() - log_beta_unchecked(a, b),
            psi_ab_minus_a: psi_ab - digamma(a),
            psi_ab_minus_b: psi_ab - digamma(b),
        }
    }

    pub(crate) fn log_density(&self, y: f64) -> f64 {
        let (ln_g, _, ln_1m_v) = ge_logs(self.lambda * y, self.alpha);
        let mut v = self.ln_const - self.lambda * y;
        if self.alpha * self.a != 1.0 {
            v += (self.alpha * self.a - 1.0) * ln_g;
        }
        if self.b != 1.0 {
            v += (self.b - 1.0) * ln_1m_v;
        }
        v
    }

    pub(crate) fn score(&self, y: f64) -> [f64; 4] {
        let (a, b, l, al) = (self.a, self.b, self.lambda, self.alpha);
        let (ln_g, ln_neg_ln_g, ln_1mv) = ge_logs(l * y, al);
        // ln[V/(1 − V)] with V = G^α
        let ln_odds = al * ln_g - ln_1mv;
        // ln[y e^{−λy} / G]
        let ln_r = y.ln() - l * y - ln_g;
        let bm1 = b - 1.0;
        let d_a = al * ln_g + self.psi_ab_minus_a;
        let d_b = ln_1mv + self.psi_ab_minus_b;
        let mut d_l = 1.0 / l - y + (al * a - 1.0) * ln_r.exp();
        let mut d_al = 1.0 / al + a * ln_g;
        if bm1 != 0.0 {
            d_l -= al * bm1 * (ln_r + ln_odds).exp();
            d_al += bm1 * (ln_neg_ln_g + ln_odds).exp();
        }
        [d_a, d_b, d_l, d_al]
    }
}

/// Σᵢ ln f(yᵢ; θ).
pub fn log_likelihood(theta: &BgeParams, data: &Sample) -> Result<f64> {
    theta.validate()?;
    let k = LogLikKernel::new(theta);
    Ok(data.values().iter().map(|&y| k.log_density(y)).sum())
}

/// Analytic gradient of the total log-likelihood.
pub fn score(theta: &BgeParams, data: &Sample) -> Result<ScoreVector> {
    theta.validate()?;
    let k = LogLikKernel::new(theta);
    let mut g = [0.0; 4];
    for &y in data.values() {
        let s = k.score(y);
        for (gi, si) in g.iter_mut().zip(s) {
            *gi += si;
        }
    }
    Ok(ScoreVector::from_array(g))
}

/// Indices (i, j, k, l, m) of the expectation
/// T = E[(1 − V)^{−i} q^j V^{i − k/α} (ln q)^l (ln V)^m],
/// V ~ Beta(a, b), q = 1 − V^{1/α}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TIndex {
    pub i: u8,
    pub j: u8,
    pub k: u8,
    pub l: u8,
    pub m: u8,
}

impl TIndex {
    pub const fn new(i: u8, j: u8, k: u8, l: u8, m: u8) -> Self {
        TIndex { i, j, k, l, m }
    }
}

/// The expectation T_{ijklm}, by quadrature over the logit of V.
///
/// Near V → 1 the integrand behaves like (1 − V)^{b − i + j + m − 1}; near
/// V → 0 like V^{a + i + (l − k)/α − 1}. Both exponents must exceed −1.
pub fn t_expectation(theta: &BgeParams, idx: TIndex) -> Result<f64> {
    theta.validate()?;
    let TIndex { i, j, k, l, m } = idx;
    if [i, j, k, l, m].iter().any(|&v| v > 2) {
        return domain("expectation indices must be in {0, 1, 2}");
    }
    let (a, b, al) = (theta.a, theta.b, theta.alpha);
    let (fi, fj, fk, fl, fm) = (i as f64, j as f64, k as f64, l as f64, m as f64);
    if !(b - fi + fj + fm > 0.0) {
        return Err(Error::NotIntegrable(format!(
            "(1 - V)^{{-{i}}} factor needs b > {} (b = {b})",
            fi - fj - fm
        )));
    }
    if !(a + fi + (fl - fk) / al > 0.0) {
        return Err(Error::NotIntegrable(format!("V^{{{i} - {k}/alpha}} factor is not integrable at 0 (a = {a})")));
    }
    let ln_b = log_beta_unchecked(a, b);
    // Centre and scale of logit(V): E = ψ(a) − ψ(b), Var = ψ′(a) + ψ′(b).
    let mu = digamma(a) - digamma(b);
    let sigma = (trigamma(a) + trigamma(b)).sqrt();
    let pow_v = a + fi - fk / al;
    let pow_1mv = b - fi;
    let integrand = |u: f64| {
        let s = mu + sigma * u;
        // ln V = −ln(1 + e^{−s}), ln(1 − V) = −ln(1 + e^{s})
        let ln_v = -ln1pexp(-s);
        let ln_1mv = -ln1pexp(s);
        let ln_q = log1mexp(ln_v / al);
        let mut log_abs = pow_v * ln_v + pow_1mv * ln_1mv - ln_b;
        if j > 0 {
            log_abs += fj * ln_q;
        }
        let mut sign = 1.0;
        if l > 0 {
            log_abs += fl * ln_q.abs().ln();
            if l % 2 == 1 {
                sign = -sign;
            }
        }
        if m > 0 {
            log_abs += fm * ln_v.abs().ln();
            if m % 2 == 1 {
                sign = -sign;
            }
        }
        let v = sign * log_abs.exp() * sigma;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let tol = Tolerance { abs: 1e-13, rel: 1e-11, max_intervals: 4000 };
    let res = integrate_real_line(integrand, tol)?;
    if !res.converged && res.error > 1e-9 {
        return Err(Error::Quadrature(format!("T expectation error estimate {:e}", res.error)));
    }
    Ok(res.value)
}

/// ln(1 + eˣ) without overflow.
fn ln1pexp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Unit (per-observation) expected information K(θ), scaled by `n_scale`
/// for the total information.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix {
    pub unit: [[f64; 4]; 4],
    pub n_scale: f64,
    /// Entries that were not computed by their closed form, with the reason.
    pub fallback: Vec<(usize, usize, String)>,
}

impl InfoMatrix {
    pub fn with_scale(mut self, n: f64) -> Self {
        self.n_scale = n;
        self
    }

    /// n · K.
    pub fn total(&self) -> [[f64; 4]; 4] {
        let mut t = self.unit;
        for row in t.iter_mut() {
            for v in row.iter_mut() {
                *v *= self.n_scale;
            }
        }
        t
    }

    pub fn as_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|r, c| self.unit[r][c] * self.n_scale)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.as_matrix()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > 0.0
    }
}

/// Within this distance of b = 1 the closed form for κ_{b,α} (which divides
/// by b − 1) is replaced by the quadrature T_{1,0,0,0,1}/α.
pub const KAPPA_B_ALPHA_GUARD: f64 = 1e-4;

/// Closed-form unit information matrix in the order (a, b, λ, α).
pub fn information_matrix(theta: &BgeParams) -> Result<InfoMatrix> {
    theta.validate()?;
    let (a, b, l, al) = (theta.a, theta.b, theta.lambda, theta.alpha);
    let t = |i, j, k, ll, m| t_expectation(theta, TIndex::new(i, j, k, ll, m));
    let psi_a = digamma(a);
    let psi_ab = digamma(a + b);
    let tri_ab = trigamma(a + b);
    let mut fallback = Vec::new();

    let k_aa = trigamma(a) - tri_ab;
    let k_ab = -tri_ab;
    let t01110 = t(0, 1, 1, 1, 0)?;
    let t11110 = t(1, 1, 1, 1, 0)?;
    let k_al = al / l * t01110;
    let k_aal = (psi_ab - psi_a) / al;
    let k_bb = trigamma(b) - tri_ab;
    let k_bl = -al / l * t11110;
    let k_ll = (1.0
        + (al * a - 1.0) * (t(0, 2, 2, 2, 0)? + t(0, 1, 1, 2, 0)?)
        + al * (b - 1.0) * (al * t(2, 2, 2, 2, 0)? + (al - 1.0) * t(1, 2, 2, 2, 0)? - t(1, 1, 1, 2, 0)?))
        / (l * l);
    let k_bal = if (b - 1.0).abs() < KAPPA_B_ALPHA_GUARD {
        fallback.push((1, 3, "b near 1: quadrature T(1,0,0,0,1)/alpha".to_string()));
        t(1, 0, 0, 0, 1)? / al
    } else {
        (a * (psi_a - psi_ab) + 1.0) / (al * (b - 1.0))
    };
    let k_lal = (a * t01110 - (b - 1.0) * (t11110 + t(2, 1, 1, 1, 1)? + t(1, 1, 1, 1, 1)?)) / l;
    let k_alal = (1.0 + (b - 1.0) * (t(2, 0, 0, 0, 2)? + t(1, 0, 0, 0, 2)?)) / (al * al);

    let unit = [
        [k_aa, k_ab, k_al, k_aal],
        [k_ab, k_bb, k_bl, k_bal],
        [k_al, k_bl, k_ll, k_lal],
        [k_aal, k_bal, k_lal, k_alal],
    ];
    if unit.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature("information matrix has non-finite entries".into()));
    }
    Ok(InfoMatrix { unit, n_scale: 1.0, fallback })
}

pub type Array4x4 = [[f64; 4]; 4];

/// Monte Carlo estimate of the unit information: mean and standard error
/// of the per-observation negative Hessian, obtained by central differences
/// of the analytic score (step 1e-5·θⱼ) over `draws` simulated observations.
pub fn monte_carlo_information<R: Rng + ?Sized>(
    theta: &BgeParams,
    draws: usize,
    rng: &mut R,
) -> Result<(Array4x4, Array4x4)> {
    if draws < 2 {
        return domain("Monte Carlo information needs at least two draws");
    }
    let sample = Bge::new(*theta)?.sample(draws, rng)?;
    let base = theta.to_array();
    let mut kernels = Vec::with_capacity(8);
    let mut steps = [0.0; 4];
    for jdx in 0..4 {
        let h = 1e-5 * base[jdx];
        steps[jdx] = h;
        for sign in [1.0, -1.0] {
            let mut v = base;
            v[jdx] += sign * h;
            kernels.push(LogLikKernel::new(&BgeParams::from_array(v)?));
        }
    }
    let mut sum = [[0.0; 4]; 4];
    let mut sum_sq = [[0.0; 4]; 4];
    for &y in sample.values() {
        let mut h = [[0.0; 4]; 4];
        for jdx in 0..4 {
            let up = kernels[2 * jdx].score(y);
            let dn = kernels[2 * jdx + 1].score(y);
            for r in 0..4 {
                h[r][jdx] = -(up[r] - dn[r]) / (2.0 * steps[jdx]);
            }
        }
        for r in 0..4 {
            for c in 0..4 {
                let v = 0.5 * (h[r][c] + h[c][r]);
                sum[r][c] += v;
                sum_sq[r][c] += v * v;
            }
        }
    }
    let n = draws as f64;
    let mut mean = [[0.0; 4]; 4];
    let mut se = [[0.0; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            mean[r][c] = sum[r][c] / n;
            let var = (sum_sq[r][c] / n - mean[r][c] * mean[r][c]).max(0.0) * n / (n - 1.0);
            se[r][c] = (var / n).sqrt();
        }
    }
    Ok((mean, se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(a: f64, b: f64, l: f64, al: f64) -> BgeParams {
        BgeParams::new(a, b, l, al).unwrap()
    }

    #[test]
    fn loglik_examples() {
        let s = Sample::new(vec![1.0, 2.0], "t").unwrap();
        assert!((log_likelihood(&p(1.0, 1.0, 1.0, 1.0), &s).unwrap() + 3.0).abs() < 1e-15);
        let s = Sample::new(vec![0.3, 0.8, 1.25, 2.0, 3.5], "t").unwrap();
        let got = log_likelihood(&p(2.0, 3.0, 1.0, 1.5), &s).unwrap();
        assert!((got + 10.962_705_472_773_219).abs() < 1e-12, "{got}");
    }

    #[test]
    fn loglik_matches_density() {
        let t = p(0.7, 2.2, 1.3, 4.0);
        let d = Bge::new(t).unwrap();
        let xs = vec![0.2, 1.1, 2.5];
        let want: f64 = xs.iter().map(|&x| d.ln_pdf(x).unwrap()).sum();
        let got = log_likelihood(&t, &Sample::new(xs, "t").unwrap()).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn score_matches_finite_differences() {
        let t = p(1.7, 2.4, 0.9, 3.1);
        let s = Sample::new(vec![0.4, 1.3, 2.2, 3.7, 0.9], "t").unwrap();
        let g = score(&t, &s).unwrap().to_array();
        let base = t.to_array();
        for j in 0..4 {
            let h = 1e-6 * base[j];
            let mut up = base;
            let mut dn = base;
            up[j] += h;
            dn[j] -= h;
            let fd = (log_likelihood(&BgeParams::from_array(up).unwrap(), &s).unwrap()
                - log_likelihood(&BgeParams::from_array(dn).unwrap(), &s).unwrap())
                / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-5 * fd.abs().max(1.0), "j={j}: fd {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn t_expectation_identities() {
        let t = p(2.0, 3.0, 1.0, 1.5);
        assert!((t_expectation(&t, TIndex::new(0, 0, 0, 0, 0)).unwrap() - 1.0).abs() < 1e-10);
        let want = digamma(2.0) - digamma(5.0);
        assert!((t_expectation(&t, TIndex::new(0, 0, 0, 0, 1)).unwrap() - want).abs() < 1e-10);
        let got = t_expectation(&t, TIndex::new(0, 1, 1, 1, 0)).unwrap();
        assert!((got + 0.653_865_569_181_065_2).abs() < 1e-9, "{got}");
        // E[V/(1−V)] = a/(b − 1)
        let got = t_expectation(&t, TIndex::new(1, 0, 0, 0, 0)).unwrap();
        assert!((got - 1.0).abs() < 1e-10, "{got}");
        assert!(matches!(
            t_expectation(&p(2.0, 0.8, 1.0, 1.0), TIndex::new(1, 0, 0, 0, 0)),
            Err(Error::NotIntegrable(_))
        ));
        assert!(t_expectation(&t, TIndex::new(3, 0, 0, 0, 0)).is_err());
    }

    #[test]
    fn information_closed_form_entries() {
        let k = information_matrix(&p(2.0, 3.0, 1.0, 1.5)).unwrap();
        assert!((k.unit[0][0] - (0.25 + 1.0 / 9.0 + 1.0 / 16.0)).abs() < 1e-12);
        assert!((k.unit[0][1] + 0.221_322_955_737_115_4).abs() < 1e-12);
        assert!(k.is_positive_definite());
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(k.unit[r][c], k.unit[c][r]);
            }
        }
        assert!(k.fallback.is_empty());
    }

    #[test]
    fn kappa_b_alpha_fallback_near_b_one() {
        let k = information_matrix(&p(2.0, 1.0, 1.0, 1.5)).unwrap();
        assert_eq!(k.fallback.len(), 1);
        let near = information_matrix(&p(2.0, 1.0 + 2e-4, 1.0, 1.5)).unwrap();
        assert!((k.unit[1][3] - near.unit[1][3]).abs() < 1e-3);
    }

    #[test]
    fn information_agrees_with_simulation() {
        let t = p(1.5, 2.5, 1.0, 2.0);
        let k = information_matrix(&t).unwrap();
        let (mean, se) = monte_carlo_information(&t, 200_000, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                // Entries free of y (κ_bb, …) have zero spread; allow finite-difference noise.
                let z = (mean[r][c] - k.unit[r][c]).abs() / se[r][c].max(1e-7 * k.unit[r][c].abs().max(1.0));
                assert!(z < 4.0, "entry ({r},{c}): K = {}, MC = {} ± {}", k.unit[r][c], mean[r][c], se[r][c]);
            }
        }
    }
}
