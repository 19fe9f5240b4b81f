//! Series representations: the cdf and density as mixtures of
//! exponentiated-exponential components, the moment generating function,
//! raw moments of order one to four, skewness, kurtosis and entropy.
//!
//! Every expansion has the shape Σⱼ wⱼ g(j) with
//! wⱼ = (−1)ʲ Γ(b) / {Γ(b − j) j!}. For integer b the weights vanish past
//! j = b − 1 and the sum is finite. For real b they decay like j^{−b−1} and
//! the sum is summed directly, with an Euler–Maclaurin estimate of the tail
//! when the direct terms decay too slowly to meet the tolerance.

use std::f64::consts::PI;

use crate::dist::{Bge, BgeParams};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_half_line, Tolerance};
use crate::specfun::{
    digamma, ln_gamma, log1mexp, ln_gamma_ratio, log_beta_unchecked, pentagamma, signed_ln_gamma, sin_pi,
    tetragamma, trigamma,
};

/// Truncation policy for the infinite expansions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub max_terms: usize,
    /// Absolute tolerance on the neglected tail, in the units of the result.
    pub term_tol: f64,
    /// b within this distance of a positive integer uses the finite branch.
    pub integer_b_eps: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { max_terms: 100_000, term_tol: 1e-13, integer_b_eps: 1e-9 }
    }
}

impl SeriesControl {
    pub fn new(max_terms: usize, term_tol: f64, integer_b_eps: f64) -> Result<Self> {
        if max_terms < 1 || !(term_tol > 0.0) || !(integer_b_eps >= 0.0) {
            return domain("series control needs max_terms >= 1, term_tol > 0, integer_b_eps >= 0");
        }
        Ok(SeriesControl { max_terms, term_tol, integer_b_eps })
    }

    /// The integer n if b should be treated as the integer n ≥ 1.
    pub fn integer_b(&self, b: f64) -> Option<usize> {
        let r = b.round();
        if r >= 1.0 && (b - r).abs() <= self.integer_b_eps {
            Some(r as usize)
        } else {
            None
        }
    }
}

/// A truncated sum with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Number of explicitly summed terms.
    pub terms: usize,
    /// Estimated size of the neglected remainder plus rounding.
    pub error_bound: f64,
    /// Whether an Euler–Maclaurin tail estimate was used.
    pub tail_estimated: bool,
}

/// Raw moments μ′₁..μ′₄ and the derived central summaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub variance: f64,
    pub skewness: f64,
    /// Non-excess kurtosis μ₄ / μ₂² (9 for the exponential).
    pub kurtosis: f64,
}

impl MomentSet {
    pub fn from_raw(mu1: f64, mu2: f64, mu3: f64, mu4: f64) -> Result<Self> {
        let variance = mu2 - mu1 * mu1;
        if !(variance > 0.0) {
            return domain(format!("non-positive variance {variance} from raw moments"));
        }
        let m3 = mu3 - 3.0 * mu1 * mu2 + 2.0 * mu1.powi(3);
        let m4 = mu4 - 4.0 * mu1 * mu3 + 6.0 * mu1 * mu1 * mu2 - 3.0 * mu1.powi(4);
        Ok(MomentSet {
            mu1,
            mu2,
            mu3,
            mu4,
            variance,
            skewness: m3 / variance.powf(1.5),
            kurtosis: m4 / (variance * variance),
        })
    }

    pub fn raw(&self, r: u32) -> Option<f64> {
        match r {
            1 => Some(self.mu1),
            2 => Some(self.mu2),
            3 => Some(self.mu3),
            4 => Some(self.mu4),
            _ => None,
        }
    }
}

/// Which parameter is integral in [`closed_form_cdf_integer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegerShape {
    A,
    B,
}

/// wⱼ = (−1)ʲ Γ(b) / {Γ(b − j) j!}, evaluated through signed log-gamma.
///
/// The summation routines use the equivalent recurrence
/// wⱼ = wⱼ₋₁ (j − 1 − b) / j instead; this form is kept as a reference.
pub fn series_weight(b: f64, j: usize) -> f64 {
    let Some((ln_abs, sign)) = signed_ln_gamma(b - j as f64) else {
        return 0.0;
    };
    let parity = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    parity * sign * (ln_gamma(b) - ln_abs - ln_gamma(j as f64 + 1.0)).exp()
}

/// Weight extended to real x > b − 1 by reflection:
/// w(x) = Γ(b) sin(πb)/π · Γ(x + 1 − b) / Γ(x + 1).
fn weight_continuous(b: f64, x: f64) -> f64 {
    let s = sin_pi(b);
    if s == 0.0 {
        return 0.0;
    }
    let ln_abs = ln_gamma(b) + s.abs().ln() - PI.ln() + ln_gamma_ratio(x + 1.0, b);
    s.signum() * ln_abs.exp()
}

/// Σⱼ wⱼ g(j). `scale` converts the inner sum to result units so that
/// `ctl.term_tol` applies to the final value.
fn sum_weighted<G: Fn(f64) -> f64>(b: f64, scale: f64, ctl: &SeriesControl, g: G) -> Result<SeriesSum> {
    let scale = scale.abs();
    if let Some(nb) = ctl.integer_b(b) {
        let nbf = nb as f64;
        let mut w = 1.0;
        let mut sum = 0.0;
        let mut abs_sum = 0.0;
        for j in 0..nb {
            if j > 0 {
                w *= (j as f64 - 1.0 - (nbf - 1.0)) / j as f64;
            }
            let t = w * g(j as f64);
            sum += t;
            abs_sum += t.abs();
        }
        return Ok(SeriesSum {
            value: sum,
            terms: nb,
            error_bound: f64::EPSILON * abs_sum * scale,
            tail_estimated: false,
        });
    }

    let n0 = 64usize.max(2 * b.ceil() as usize + 16);
    let mut next_check = n0;
    let mut previous_estimate: Option<f64> = None;
    let mut w = 1.0;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let mut small_run = 0usize;
    let mut prev = f64::NAN;
    for j in 0..ctl.max_terms {
        let jf = j as f64;
        if j > 0 {
            w *= (jf - 1.0 - (b - 1.0)) / jf;
        }
        let t = w * g(jf);
        if !t.is_finite() {
            return domain(format!("series term {j} is not finite"));
        }
        sum += t;
        abs_sum += t.abs();
        let tol = ctl.term_tol * (scale * sum).abs().max(1.0);
        if (t * scale).abs() < ctl.term_tol {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if j > 0 {
            let bound = if t == 0.0 && prev == 0.0 {
                0.0
            } else if prev != 0.0 && t.signum() != prev.signum() && t.abs() < prev.abs() {
                // Alternating, decreasing: the partial sums bracket the limit.
                t.abs()
            } else if jf > b + 1.0 && prev != 0.0 {
                let r = (t / prev).abs();
                if r < 1.0 {
                    t.abs() * r / (1.0 - r)
                } else {
                    f64::INFINITY
                }
            } else {
                f64::INFINITY
            };
            if small_run >= 3 && bound * scale < tol {
                return Ok(SeriesSum {
                    value: sum,
                    terms: j + 1,
                    error_bound: bound * scale + f64::EPSILON * abs_sum * scale,
                    tail_estimated: false,
                });
            }
        }
        prev = t;
        if j + 1 == next_check {
            let estimate = sum + euler_maclaurin_tail(b, next_check as f64, scale, ctl, &g)?;
            if let Some(pe) = previous_estimate {
                let diff = (estimate - pe).abs() * scale;
                if diff <= 100.0 * ctl.term_tol * (scale * estimate).abs().max(1.0) {
                    return Ok(SeriesSum {
                        value: estimate,
                        terms: j + 1,
                        error_bound: diff + f64::EPSILON * abs_sum * scale,
                        tail_estimated: true,
                    });
                }
            }
            previous_estimate = Some(estimate);
            next_check *= 2;
        }
    }
    Err(Error::NonConvergence { terms: ctl.max_terms, partial: sum * scale })
}

/// Σ_{j ≥ n} w(j) g(j) ≈ ∫ₙ^∞ f + f(n)/2 − f′(n)/12 + f‴(n)/720.
fn euler_maclaurin_tail<G: Fn(f64) -> f64>(
    b: f64,
    n: f64,
    scale: f64,
    ctl: &SeriesControl,
    g: &G,
) -> Result<f64> {
    let f = |x: f64| {
        let gx = g(x);
        if gx == 0.0 {
            0.0
        } else {
            weight_continuous(b, x) * gx
        }
    };
    // x = n eᵘ turns the algebraic decay of the tail into exponential decay.
    let tol = Tolerance {
        abs: 0.01 * ctl.term_tol / scale.max(f64::MIN_POSITIVE),
        rel: 1e-12,
        max_intervals: 2000,
    };
    let integral = integrate_half_line(
        |u| {
            let x = n * u.exp();
            if !x.is_finite() {
                return 0.0;
            }
            let fx = f(x);
            if fx == 0.0 {
                0.0
            } else {
                fx * x
            }
        },
        0.0,
        tol,
    )?;
    let h1 = 0.05 * n;
    let d1 = (-f(n + 2.0 * h1) + 8.0 * f(n + h1) - 8.0 * f(n - h1) + f(n - 2.0 * h1)) / (12.0 * h1);
    let h3 = 0.1 * n;
    let d3 = (f(n + 2.0 * h3) - 2.0 * f(n + h3) + 2.0 * f(n - h3) - f(n - 2.0 * h3)) / (2.0 * h3.powi(3));
    Ok(integral.value + 0.5 * f(n) - d1 / 12.0 + d3 / 720.0)
}

/// ln G and ln y = α ln G at x > 0, where G = 1 − e^{−λx}.
fn ln_g(p: &BgeParams, x: f64) -> f64 {
    log1mexp(-p.lambda * x)
}

/// F(x) = y^a / B(a,b) · Σ wⱼ yʲ / (a + j).
pub fn cdf_series(theta: &BgeParams, x: f64, ctl: &SeriesControl) -> Result<SeriesSum> {
    theta.validate()?;
    if x.is_nan() || x < 0.0 {
        return domain(format!("cdf series requires x >= 0 (got {x})"));
    }
    let zero = SeriesSum { value: 0.0, terms: 0, error_bound: 0.0, tail_estimated: false };
    if x == 0.0 {
        return Ok(zero);
    }
    if x.is_infinite() {
        return Ok(SeriesSum { value: 1.0, ..zero });
    }
    let ln_y = theta.alpha * ln_g(theta, x);
    let a = theta.a;
    let prefactor = (a * ln_y - log_beta_unchecked(a, theta.b)).exp();
    let s = sum_weighted(theta.b, prefactor, ctl, |j| (j * ln_y).exp() / (a + j))?;
    Ok(SeriesSum { value: prefactor * s.value, ..s })
}

/// Finite closed forms of the cdf when a or b is a positive integer.
///
/// Integer a: F = 1 − (1 − y)^b Σ_{j<a} Γ(b+j)/{Γ(b) j!} yʲ.
/// Integer b: F = y^a Σ_{j<b} Γ(a+j)/{Γ(a) j!} (1 − y)ʲ.
pub fn closed_form_cdf_integer(theta: &BgeParams, x: f64, which: IntegerShape) -> Result<f64> {
    theta.validate()?;
    let eps = SeriesControl::default().integer_b_eps;
    let (n, other) = match which {
        IntegerShape::A => (theta.a, theta.b),
        IntegerShape::B => (theta.b, theta.a),
    };
    let r = n.round();
    if r < 1.0 || (n - r).abs() > eps {
        return domain(format!("selected shape {n} is not a positive integer"));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let ln_y = theta.alpha * ln_g(theta, x);
    let y = ln_y.exp();
    let ymc = -ln_y.exp_m1();
    // Both forms are P(Beta tail) = lead^other · Σ_{j<n} c_j base^j.
    let (lead, base) = match which {
        IntegerShape::A => (ymc, y),
        IntegerShape::B => (y, ymc),
    };
    let mut c = 1.0;
    let mut sum = 0.0;
    let mut power = 1.0;
    for j in 0..r as usize {
        if j > 0 {
            c *= (other + j as f64 - 1.0) / j as f64;
            power *= base;
        }
        sum += c * power;
    }
    let tail = lead.powf(other) * sum;
    Ok(match which {
        IntegerShape::A => 1.0 - tail,
        IntegerShape::B => tail,
    })
}

/// f(x) = αλ/B(a,b) · e^{−λx} G^{αa−1} Σ wⱼ yʲ.
pub fn pdf_mixture(theta: &BgeParams, x: f64, ctl: &SeriesControl) -> Result<SeriesSum> {
    theta.validate()?;
    if !(x > 0.0) || x.is_infinite() {
        return domain(format!("mixture density requires finite x > 0 (got {x})"));
    }
    let lg = ln_g(theta, x);
    let ln_y = theta.alpha * lg;
    let ln_pre = theta.alpha.ln() + theta.lambda.ln() - log_beta_unchecked(theta.a, theta.b)
        - theta.lambda * x
        + (theta.alpha * theta.a - 1.0) * lg;
    let prefactor = ln_pre.exp();
    let s = sum_weighted(theta.b, prefactor, ctl, |j| (j * ln_y).exp())?;
    Ok(SeriesSum { value: prefactor * s.value, ..s })
}

/// M(t) = α/B(a,b) · Σ wⱼ B(1 − t/λ, α(a + j)), t < λ.
pub fn mgf(theta: &BgeParams, t: f64, ctl: &SeriesControl) -> Result<SeriesSum> {
    theta.validate()?;
    if !(t < theta.lambda) {
        return domain(format!("mgf requires t < lambda (t = {t}, lambda = {})", theta.lambda));
    }
    let tau = t / theta.lambda;
    let (a, alpha) = (theta.a, theta.alpha);
    let prefactor = alpha * (-log_beta_unchecked(a, theta.b)).exp();
    let s = sum_weighted(theta.b, prefactor, ctl, |j| {
        log_beta_unchecked(1.0 - tau, alpha * (a + j)).exp()
    })?;
    Ok(SeriesSum { value: prefactor * s.value, ..s })
}

/// E[Yʳ] for Y with cdf (1 − e^{−y})^s, r = 1..4, through its cumulants
/// κ₁ = ψ(s+1) − ψ(1), κ₂ = ψ′(1) − ψ′(s+1), κ₃ = ψ″(s+1) − ψ″(1),
/// κ₄ = ψ‴(1) − ψ‴(s+1).
pub(crate) fn ge_unit_moment(r: u32, s: f64) -> f64 {
    const PSI1: f64 = -0.577_215_664_901_532_9;
    const PSI1_1: f64 = 1.644_934_066_848_226_4;
    const PSI2_1: f64 = -2.404_113_806_319_188_6;
    const PSI3_1: f64 = 6.493_939_402_266_829;
    let c = digamma(s + 1.0) - PSI1;
    if r == 1 {
        return c;
    }
    let g1 = PSI1_1 - trigamma(s + 1.0);
    if r == 2 {
        return c * c + g1;
    }
    let g2 = PSI2_1 - tetragamma(s + 1.0);
    if r == 3 {
        return c * (c * c + 3.0 * g1) - g2;
    }
    let g3 = PSI3_1 - pentagamma(s + 1.0);
    c.powi(4) + 6.0 * c * c * g1 + 3.0 * g1 * g1 - 4.0 * c * g2 + g3
}

/// μ′ᵣ = 1/(λʳ B(a,b)) · Σ wⱼ mᵣ(α(a + j)) / (a + j), r = 1..4.
pub fn raw_moment(theta: &BgeParams, r: u32, ctl: &SeriesControl) -> Result<SeriesSum> {
    theta.validate()?;
    if !(1..=4).contains(&r) {
        return domain(format!("raw moment order must be 1..=4 (got {r})"));
    }
    let (a, alpha) = (theta.a, theta.alpha);
    let prefactor = (-(r as f64) * theta.lambda.ln() - log_beta_unchecked(a, theta.b)).exp();
    let s = sum_weighted(theta.b, prefactor, ctl, |j| ge_unit_moment(r, alpha * (a + j)) / (a + j))?;
    Ok(SeriesSum { value: prefactor * s.value, ..s })
}

pub fn moments(theta: &BgeParams, ctl: &SeriesControl) -> Result<MomentSet> {
    let m = |r| raw_moment(theta, r, ctl).map(|s| s.value);
    MomentSet::from_raw(m(1)?, m(2)?, m(3)?, m(4)?)
}

/// (skewness, kurtosis) from the series moments.
pub fn skewness_kurtosis(theta: &BgeParams, ctl: &SeriesControl) -> Result<(f64, f64)> {
    let m = moments(theta, ctl)?;
    Ok((m.skewness, m.kurtosis))
}

/// E[−ln f(X)] = −ln(αλ) + ln B(a,b) + λμ′₁ + (1/α − a){ψ(a) − ψ(a+b)}
/// − (b − 1){ψ(b) − ψ(a+b)}.
pub fn shannon_entropy(theta: &BgeParams, ctl: &SeriesControl) -> Result<f64> {
    let mu1 = raw_moment(theta, 1, ctl)?.value;
    let (a, b, l, al) = (theta.a, theta.b, theta.lambda, theta.alpha);
    let psi_ab = digamma(a + b);
    let mut h = -(al * l).ln() + log_beta_unchecked(a, b) + l * mu1 + (1.0 / al - a) * (digamma(a) - psi_ab);
    if b != 1.0 {
        h -= (b - 1.0) * (digamma(b) - psi_ab);
    }
    Ok(h)
}

/// Convenience: the direct incomplete-beta cdf for comparison.
pub fn direct_cdf(theta: &BgeParams, x: f64) -> Result<f64> {
    Ok(Bge::new(*theta)?.cdf(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64, l: f64, al: f64) -> BgeParams {
        BgeParams::new(a, b, l, al).unwrap()
    }

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    #[test]
    fn weights_recurrence_matches_gamma_form() {
        for &b in &[0.3, 1.7, 2.5, 4.0, 7.25] {
            let mut w = 1.0;
            for j in 0..40 {
                if j > 0 {
                    w *= (j as f64 - 1.0 - (b - 1.0)) / j as f64;
                }
                let g = series_weight(b, j);
                assert!((w - g).abs() <= 1e-12 * w.abs().max(1e-300) + 1e-300, "b={b} j={j}: {w} vs {g}");
                if j as f64 > b - 1.0 {
                    let c = weight_continuous(b, j as f64);
                    if b.fract() != 0.0 {
                        assert!((c - w).abs() <= 1e-11 * w.abs(), "b={b} j={j}: {c} vs {w}");
                    }
                }
            }
        }
        // Integer b: (−1)ʲ C(b−1, j), zero past j = b − 1.
        assert!((series_weight(4.0, 2) - 3.0).abs() < 1e-14);
        assert_eq!(series_weight(4.0, 5), 0.0);
    }

    #[test]
    fn integer_dispatch() {
        let c = ctl();
        assert_eq!(c.integer_b(3.0), Some(3));
        assert_eq!(c.integer_b(3.0 + 1e-12), Some(3));
        assert_eq!(c.integer_b(3.1), None);
        assert_eq!(c.integer_b(0.0 + 1e-12), None);
        assert!(SeriesControl::new(0, 1e-12, 1e-9).is_err());
    }

    #[test]
    fn cdf_series_examples() {
        let x = 0.9;
        let got = cdf_series(&p(1.0, 1.0, 1.0, 2.0), x, &ctl()).unwrap();
        assert!((got.value - (1.0 - (-x).exp()).powi(2)).abs() < 1e-15);
        assert_eq!(got.terms, 1);
        let t = p(2.0, 3.0, 1.0, 1.0);
        let want = direct_cdf(&t, 1.0).unwrap();
        assert!((cdf_series(&t, 1.0, &ctl()).unwrap().value - want).abs() < 1e-12);
        let t = p(1.5, 2.7, 1.0, 1.3);
        let want = direct_cdf(&t, 0.8).unwrap();
        assert!((cdf_series(&t, 0.8, &ctl()).unwrap().value - want).abs() < 1e-10);
    }

    #[test]
    fn slow_tail_uses_euler_maclaurin() {
        // Small b and y near one: terms decay like j^{-b-2}.
        let t = p(0.5, 0.5, 1.0, 1.0);
        let x = 6.0;
        let s = cdf_series(&t, x, &ctl()).unwrap();
        let want = direct_cdf(&t, x).unwrap();
        assert!(s.tail_estimated);
        assert!((s.value - want).abs() < 1e-10, "{} vs {want}", s.value);
    }

    #[test]
    fn closed_forms() {
        let t = p(3.0, 2.5, 1.0, 1.0);
        let got = closed_form_cdf_integer(&t, 1.0, IntegerShape::A).unwrap();
        assert!((got - direct_cdf(&t, 1.0).unwrap()).abs() < 1e-12);
        let t = p(2.5, 3.0, 1.0, 1.0);
        let got = closed_form_cdf_integer(&t, 1.0, IntegerShape::B).unwrap();
        assert!((got - direct_cdf(&t, 1.0).unwrap()).abs() < 1e-12);
        let t = p(1.0, 1.0, 1.3, 2.2);
        let want = (1.0 - (-1.3f64 * 0.4).exp()).powf(2.2);
        for which in [IntegerShape::A, IntegerShape::B] {
            assert!((closed_form_cdf_integer(&t, 0.4, which).unwrap() - want).abs() < 1e-15);
        }
        assert!(closed_form_cdf_integer(&p(2.5, 3.0, 1.0, 1.0), 1.0, IntegerShape::A).is_err());
    }

    #[test]
    fn pdf_mixture_examples() {
        let t = p(2.0, 4.0, 1.0, 1.5);
        let want = Bge::new(t).unwrap().pdf(0.6).unwrap();
        assert!((pdf_mixture(&t, 0.6, &ctl()).unwrap().value - want).abs() < 1e-12);
        let t = p(0.7, 2.3, 2.0, 0.9);
        let want = Bge::new(t).unwrap().pdf(0.3).unwrap();
        assert!((pdf_mixture(&t, 0.3, &ctl()).unwrap().value - want).abs() < 1e-9);
    }

    #[test]
    fn mgf_examples() {
        let t = p(1.0, 1.0, 2.0, 1.0);
        assert!((mgf(&t, 0.5, &ctl()).unwrap().value - 2.0 / 1.5).abs() < 1e-14);
        let t = p(1.0, 1.0, 1.0, 2.5);
        let want = 2.5 * log_beta_unchecked(1.0 - 0.3, 2.5).exp();
        assert!((mgf(&t, 0.3, &ctl()).unwrap().value - want).abs() < 1e-14);
        let t = p(2.0, 3.0, 1.0, 1.0);
        let want = (log_beta_unchecked(3.0 - 0.4, 2.0) - log_beta_unchecked(2.0, 3.0)).exp();
        assert!((mgf(&t, 0.4, &ctl()).unwrap().value - want).abs() < 1e-12);
        assert!(mgf(&t, 1.0, &ctl()).is_err());
        let t = p(1.3, 0.7, 1.0, 1.9);
        assert!((mgf(&t, 0.0, &ctl()).unwrap().value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn moment_examples() {
        let m = raw_moment(&p(1.0, 1.0, 2.0, 1.0), 1, &ctl()).unwrap().value;
        assert!((m - 0.5).abs() < 1e-15);
        let m = raw_moment(&p(1.0, 1.0, 1.0, 3.0), 1, &ctl()).unwrap().value;
        assert!((m - (1.0 + 0.5 + 1.0 / 3.0)).abs() < 1e-14);
        // Exponential: r! / λʳ.
        for (r, fact) in [(2, 2.0), (3, 6.0), (4, 24.0)] {
            let m = raw_moment(&p(1.0, 1.0, 1.0, 1.0), r, &ctl()).unwrap().value;
            assert!((m - fact).abs() < 1e-12, "r={r}: {m}");
        }
        // 40-digit quadrature of xʳ f(x).
        let want = [1.613_255_808_004_824_8, 3.349_458_823_059_087_4, 8.607_694_459_996_405, 26.632_519_167_426_22];
        let t = p(2.0, 1.5, 1.0, 2.0);
        for r in 1..=4u32 {
            let got = raw_moment(&t, r, &ctl()).unwrap().value;
            assert!((got / want[r as usize - 1] - 1.0).abs() < 1e-9, "r={r}: {got}");
        }
        assert!(raw_moment(&t, 5, &ctl()).is_err());
    }

    #[test]
    fn exponential_shape_summaries() {
        let (s, k) = skewness_kurtosis(&p(1.0, 1.0, 3.0, 1.0), &ctl()).unwrap();
        assert!((s - 2.0).abs() < 1e-9 && (k - 9.0).abs() < 1e-9, "{s} {k}");
        let (s, k) = skewness_kurtosis(&p(2.0, 3.0, 1.0, 1.0), &ctl()).unwrap();
        assert!((s - 1.456).abs() < 1e-9, "{s}");
        assert!((k - 6.2352).abs() < 1e-9, "{k}");
    }

    #[test]
    fn entropy_examples() {
        let h = shannon_entropy(&p(1.0, 1.0, 2.0, 1.0), &ctl()).unwrap();
        assert!((h - (1.0 - 2f64.ln())).abs() < 1e-14);
        let cases = [
            (p(1.0, 1.0, 1.0, 2.0), 1.306_852_819_440_054_7),
            (p(2.0, 3.0, 1.0, 1.0), 0.348_426_683_545_333_02),
            (p(2.0, 1.5, 1.0, 2.0), 1.152_244_579_116_057_4),
        ];
        for (t, want) in cases {
            let h = shannon_entropy(&t, &ctl()).unwrap();
            assert!((h - want).abs() < 1e-10, "{t:?}: {h}");
        }
    }

    #[test]
    fn beta_exponential_mgf_identity() {
        // Σ wⱼ B(1 − τ, a + j) = B(b − τ, a)
        for &(a, b, tau) in &[(0.7, 2.3, 0.4), (2.0, 0.6, -1.5), (1.3, 5.5, 0.9)] {
            let t = p(a, b, 1.0, 1.0);
            let got = mgf(&t, tau, &ctl()).unwrap().value;
            let want = (log_beta_unchecked(b - tau, a) - log_beta_unchecked(a, b)).exp();
            assert!((got - want).abs() < 1e-9 * want.max(1.0), "{a} {b} {tau}: {got} vs {want}");
        }
    }
}
