//! The four-parameter distribution itself: parameter validation, density,
//! distribution and survival functions, hazard, quantile and sampling.
//!
//! With G(x) = 1 − e^{−λx} and y = G^α, the cdf is the incomplete beta ratio
//! I_y(a, b). Every evaluation goes through ln G = ln(1 − e^{−λx}) so that
//! large exponents (αa − 1 of order ten is common) never underflow.

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{ge_logs, inc_beta_inverse_parts, inc_beta_parts, log1mexp, log_beta_unchecked};

/// θ = (a, b, λ, α), all strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BgeParams {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub alpha: f64,
}

impl BgeParams {
    pub fn new(a: f64, b: f64, lambda: f64, alpha: f64) -> Result<Self> {
        let p = BgeParams { a, b, lambda, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        Self::new(1.0, 1.0, lambda, 1.0)
    }

    /// Exponentiated exponential: a = b = 1.
    pub fn ge(lambda: f64, alpha: f64) -> Result<Self> {
        Self::new(1.0, 1.0, lambda, alpha)
    }

    /// Beta exponential: α = 1.
    pub fn be(a: f64, b: f64, lambda: f64) -> Result<Self> {
        Self::new(a, b, lambda, 1.0)
    }

    /// a = 1; the survival function is {1 − (1 − e^{−λx})^α}^b.
    pub fn dge(b: f64, lambda: f64, alpha: f64) -> Result<Self> {
        Self::new(1.0, b, lambda, alpha)
    }

    pub fn from_array(v: [f64; 4]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a, self.b, self.lambda, self.alpha]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("lambda", self.lambda), ("alpha", self.alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("parameter {name} must be positive and finite (got {v})"));
            }
        }
        Ok(())
    }

    pub fn is_ge(&self) -> bool {
        self.a == 1.0 && self.b == 1.0
    }

    pub fn is_be(&self) -> bool {
        self.alpha == 1.0
    }

    pub fn is_dge(&self) -> bool {
        self.a == 1.0
    }

    pub fn is_exponential(&self) -> bool {
        self.a == 1.0 && self.b == 1.0 && self.alpha == 1.0
    }
}

/// A validated set of strictly positive observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    values: Vec<f64>,
    label: String,
}

impl Sample {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return domain("sample must contain at least one observation");
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return domain(format!("observation {} is not a positive finite number ({v})", i + 1));
        }
        Ok(Sample { values, label: label.into() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Limit of the density as x → 0⁺.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OriginDensity {
    /// αa > 1
    Zero,
    /// αa = 1: the limit is αλ / B(a, b).
    Finite(f64),
    /// αa < 1: the density has a power singularity at the origin.
    Unbounded,
}

impl OriginDensity {
    pub fn value(self) -> f64 {
        match self {
            OriginDensity::Zero => 0.0,
            OriginDensity::Finite(v) => v,
            OriginDensity::Unbounded => f64::INFINITY,
        }
    }
}

/// A distribution instance with ln B(a, b) cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bge {
    params: BgeParams,
    ln_beta: f64,
}

impl Bge {
    pub fn new(params: BgeParams) -> Result<Self> {
        params.validate()?;
        Ok(Bge { params, ln_beta: log_beta_unchecked(params.a, params.b) })
    }

    pub fn params(&self) -> BgeParams {
        self.params
    }

    /// ln B(a, b).
    pub fn ln_beta(&self) -> f64 {
        self.ln_beta
    }

    pub fn origin_density(&self) -> OriginDensity {
        let p = &self.params;
        let s = p.alpha * p.a;
        if s > 1.0 {
            OriginDensity::Zero
        } else if s == 1.0 {
            OriginDensity::Finite((p.alpha.ln() + p.lambda.ln() - self.ln_beta).exp())
        } else {
            OriginDensity::Unbounded
        }
    }

    /// Log density for x > 0.
    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return domain(format!("density requires x >= 0 (got {x})"));
        }
        if x == 0.0 {
            return Ok(self.origin_density().value().ln());
        }
        if x.is_infinite() {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.ln_pdf_positive(x))
    }

    pub(crate) fn ln_pdf_positive(&self, x: f64) -> f64 {
        let p = &self.params;
        let (ln_g, _, ln_1m_y) = ge_logs(p.lambda * x, p.alpha);
        let mut v = p.alpha.ln() + p.lambda.ln() - self.ln_beta - p.lambda * x;
        let s = p.alpha * p.a - 1.0;
        if s != 0.0 {
            v += s * ln_g;
        }
        if p.b != 1.0 {
            v += (p.b - 1.0) * ln_1m_y;
        }
        v
    }

    /// Density. At x = 0 returns the limit described by [`OriginDensity`].
    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.ln_pdf(x).map(f64::exp)
    }

    /// `(F(x), S(x))`, each computed directly from its own tail.
    pub fn cdf_parts(&self, x: f64) -> (f64, f64) {
        if x.is_nan() {
            return (f64::NAN, f64::NAN);
        }
        if x <= 0.0 {
            return (0.0, 1.0);
        }
        if x.is_infinite() {
            return (1.0, 0.0);
        }
        let p = &self.params;
        let (ln_g, _, ln_1m_y) = ge_logs(p.lambda * x, p.alpha);
        let y = (p.alpha * ln_g).exp();
        let ymc = ln_1m_y.exp();
        inc_beta_parts(y, ymc, p.a, p.b)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_parts(x).0
    }

    pub fn survival(&self, x: f64) -> f64 {
        self.cdf_parts(x).1
    }

    /// f(x) / S(x).
    pub fn hazard(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return domain(format!("hazard requires x > 0 (got {x})"));
        }
        let s = self.survival(x);
        if s <= 0.0 {
            return Err(Error::HazardOverflow(x));
        }
        Ok((self.ln_pdf_positive(x) - s.ln()).exp())
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("quantile requires 0 < p < 1 (got {p})"));
        }
        Ok(self.quantile_parts(p, 1.0 - p))
    }

    /// Quantile given the lower and upper tail probabilities separately.
    pub(crate) fn quantile_parts(&self, p: f64, q: f64) -> f64 {
        let t = &self.params;
        let (y, ymc) = inc_beta_inverse_parts(p, q, t.a, t.b);
        let ln_y = if y < 0.5 { y.ln() } else { (-ymc).ln_1p() };
        -log1mexp(ln_y / t.alpha) / t.lambda
    }

    /// n independent draws X = −ln(1 − V^{1/α}) / λ with V ~ Beta(a, b).
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Sample> {
        if n == 0 {
            return domain("sample size must be at least 1");
        }
        let t = &self.params;
        let beta = Beta::new(t.a, t.b).map_err(|e| Error::Domain(e.to_string()))?;
        let mut values = Vec::with_capacity(n);
        while values.len() < n {
            let v: f64 = beta.sample(rng);
            let x = -log1mexp(v.ln() / t.alpha) / t.lambda;
            // V rounding to exactly 0 or 1 maps to the boundary; redraw.
            if x > 0.0 && x.is_finite() {
                values.push(x);
            }
        }
        Sample::new(values, "simulated")
    }
}
