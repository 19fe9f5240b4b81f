//! Order statistics of a sample of size n: the direct density, its
//! expansion as a weighted mixture of distributions from the same family,
//! and the corresponding moments and mgf.
//!
//! Writing F = y^a/B(a,b) · Σ_m c_m y^m with c_m = w_m/(a + m) and expanding
//! (1 − F)^{n−i} binomially gives
//!
//! f_{i:n}(x) = Σ_k Σ_d δ_{k,d} · f(x; A, b, λ, α),  A = a(k + i) + d,
//!
//! δ_{k,d} = (−1)^k C(n−i, k) B(A, b) C_d / {B(a,b)^{k+i} B(i, n−i+1)},
//!
//! where C_d is the degree-d coefficient of (Σ_m c_m z^m)^{k+i−1}. The
//! alternative readings of the shape and product length are kept so the
//! expansion can be reconciled numerically against the direct density.

use crate::dist::{Bge, BgeParams};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_positive_axis, Tolerance};
use crate::series::{mgf, raw_moment, SeriesControl, SeriesSum};
use crate::specfun::{ln_gamma, log_beta_unchecked};

/// Rank i (1-based) within a sample of size n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderStatIndex {
    i: usize,
    n: usize,
}

impl OrderStatIndex {
    pub fn new(i: usize, n: usize) -> Result<Self> {
        if i < 1 || i > n {
            return domain(format!("order statistic index requires 1 <= i <= n (got i = {i}, n = {n})"));
        }
        Ok(OrderStatIndex { i, n })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Truncation policy for the multiple sums of the mixture expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixtureTermBudget {
    /// Each inner index m runs over 0..per_index_cap for real b.
    pub per_index_cap: usize,
    /// Maximum number of (k, d) component evaluations.
    pub total_term_cap: usize,
}

impl Default for MixtureTermBudget {
    fn default() -> Self {
        MixtureTermBudget { per_index_cap: 25, total_term_cap: 10_000 }
    }
}

impl MixtureTermBudget {
    pub fn new(per_index_cap: usize, total_term_cap: usize) -> Result<Self> {
        if per_index_cap < 1 || total_term_cap < 1 {
            return domain("mixture budget caps must be at least 1");
        }
        Ok(MixtureTermBudget { per_index_cap, total_term_cap })
    }
}

/// Candidate first shape parameter of the mixture components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComponentShape {
    /// α{a(i + 1) + d}
    AlphaTimesAIPlusOne,
    /// a(i + 1) + d
    AIPlusOne,
    /// α{a(k + i) + d}
    AlphaTimesAKPlusI,
    /// a(k + i) + d, the form that follows from the binomial expansion.
    AKPlusI,
}

impl ComponentShape {
    pub const ALL: [ComponentShape; 4] = [
        ComponentShape::AlphaTimesAIPlusOne,
        ComponentShape::AIPlusOne,
        ComponentShape::AlphaTimesAKPlusI,
        ComponentShape::AKPlusI,
    ];

    pub fn value(self, a: f64, alpha: f64, i: usize, k: usize, d: usize) -> f64 {
        let (i, k, d) = (i as f64, k as f64, d as f64);
        match self {
            ComponentShape::AlphaTimesAIPlusOne => alpha * (a * (i + 1.0) + d),
            ComponentShape::AIPlusOne => a * (i + 1.0) + d,
            ComponentShape::AlphaTimesAKPlusI => alpha * (a * (k + i) + d),
            ComponentShape::AKPlusI => a * (k + i) + d,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ComponentShape::AlphaTimesAIPlusOne => "alpha*(a*(i+1)+d)",
            ComponentShape::AIPlusOne => "a*(i+1)+d",
            ComponentShape::AlphaTimesAKPlusI => "alpha*(a*(k+i)+d)",
            ComponentShape::AKPlusI => "a*(k+i)+d",
        }
    }
}

/// Number of weighted factors c_m in the coefficient product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProductLength {
    /// k + i − 1 factors, one per inner index.
    KPlusIMinusOne,
    /// k weighted factors; the remaining i − 1 inner indices carry weight
    /// one. Only finite (hence defined) for integer b.
    K,
}

impl ProductLength {
    pub const ALL: [ProductLength; 2] = [ProductLength::KPlusIMinusOne, ProductLength::K];

    pub fn label(self) -> &'static str {
        match self {
            ProductLength::KPlusIMinusOne => "k+i-1",
            ProductLength::K => "k",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MixtureReading {
    pub shape: ComponentShape,
    pub length: ProductLength,
}

impl MixtureReading {
    /// The reading that reproduces the direct density.
    pub const VALIDATED: MixtureReading =
        MixtureReading { shape: ComponentShape::AKPlusI, length: ProductLength::KPlusIMinusOne };
}

/// f(x) F(x)^{i−1} S(x)^{n−i} / B(i, n − i + 1), in log space.
pub fn order_stat_pdf_direct(theta: &BgeParams, idx: OrderStatIndex, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("order statistic density requires x > 0 (got {x})"));
    }
    let d = Bge::new(*theta)?;
    Ok(direct_ln_pdf(&d, idx, x).exp())
}

fn direct_ln_pdf(d: &Bge, idx: OrderStatIndex, x: f64) -> f64 {
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let (i, n) = (idx.i as f64, idx.n as f64);
    let (cdf, sf) = d.cdf_parts(x);
    let mut v = d.ln_pdf_positive(x) - log_beta_unchecked(i, n - i + 1.0);
    if idx.i > 1 {
        v += (i - 1.0) * cdf.ln();
    }
    if idx.n > idx.i {
        v += (n - i) * sf.ln();
    }
    v
}

/// Coefficients of (Σ_{m<cap} c_m z^m)^p · (Σ_{m<cap} z^m)^q up to degree `max_deg`.
fn power_coefficients(c: &[f64], p: usize, q: usize, max_deg: usize) -> Vec<f64> {
    let mut acc = vec![0.0; max_deg + 1];
    acc[0] = 1.0;
    let ones = vec![1.0; c.len()];
    for factor in std::iter::repeat_n(c, p).chain(std::iter::repeat_n(ones.as_slice(), q)) {
        let mut next = vec![0.0; max_deg + 1];
        for (deg, &v) in acc.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            for (m, &cm) in factor.iter().enumerate() {
                if deg + m > max_deg {
                    break;
                }
                next[deg + m] += v * cm;
            }
        }
        acc = next;
    }
    acc
}

/// Σ_k Σ_d δ_{k,d} · eval(A) under a given reading. `eval` receives the
/// component's first shape parameter A.
pub fn mixture_sum<E>(
    theta: &BgeParams,
    idx: OrderStatIndex,
    reading: MixtureReading,
    budget: &MixtureTermBudget,
    ctl: &SeriesControl,
    eval: E,
) -> Result<SeriesSum>
where
    E: Fn(f64) -> Result<f64>,
{
    theta.validate()?;
    let (a, b, alpha) = (theta.a, theta.b, theta.alpha);
    let (i, n) = (idx.i, idx.n);
    let integer_b = ctl.integer_b(b);
    if reading.length == ProductLength::K && integer_b.is_none() {
        return domain("the k-factor product reading is only defined for integer b");
    }
    let cap = integer_b.unwrap_or(budget.per_index_cap);
    // c_m = w_m / (a + m)
    let bb = integer_b.map(|v| v as f64).unwrap_or(b);
    let mut c = Vec::with_capacity(cap);
    let mut w = 1.0;
    for m in 0..cap {
        if m > 0 {
            w *= (m as f64 - bb) / m as f64;
        }
        c.push(w / (a + m as f64));
    }
    let ln_b = log_beta_unchecked(a, b);
    let ln_bi = log_beta_unchecked(i as f64, (n - i) as f64 + 1.0);

    struct Block {
        k: usize,
        sign_binom: f64,
        coeffs: Vec<f64>,
    }
    let mut blocks = Vec::new();
    let mut max_deg_all = 0;
    for k in 0..=(n - i) {
        let (p, q) = match reading.length {
            ProductLength::KPlusIMinusOne => (k + i - 1, 0),
            ProductLength::K => (k, i - 1),
        };
        let max_deg = ((p + q) * (cap - 1)).min(budget.total_term_cap);
        max_deg_all = max_deg_all.max(max_deg);
        let ln_binom = ln_gamma((n - i) as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - i - k) as f64 + 1.0);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        blocks.push(Block { k, sign_binom: sign * ln_binom.exp(), coeffs: power_coefficients(&c, p, q, max_deg) });
    }

    let mut sum = 0.0;
    let mut terms = 0usize;
    let mut last_shell = f64::INFINITY;
    let mut small_shells = 0usize;
    for d in 0..=max_deg_all {
        let mut shell = 0.0;
        for blk in &blocks {
            let Some(&cd) = blk.coeffs.get(d) else { continue };
            if cd == 0.0 {
                continue;
            }
            terms += 1;
            if terms > budget.total_term_cap {
                return Err(Error::BudgetExhausted { terms, partial: sum, last_shell });
            }
            let shape = reading.shape.value(a, alpha, i, blk.k, d);
            let kk = (blk.k + i) as f64;
            let weight = blk.sign_binom * cd * (log_beta_unchecked(shape, b) - kk * ln_b - ln_bi).exp();
            shell += weight * eval(shape)?;
        }
        sum += shell;
        last_shell = shell;
        if integer_b.is_none() && d > 0 {
            if shell.abs() < ctl.term_tol {
                small_shells += 1;
                if small_shells >= 2 {
                    return Ok(SeriesSum { value: sum, terms, error_bound: shell.abs(), tail_estimated: false });
                }
            } else {
                small_shells = 0;
            }
        }
    }
    if integer_b.is_none() && last_shell.abs() >= ctl.term_tol {
        return Err(Error::BudgetExhausted { terms, partial: sum, last_shell });
    }
    let error_bound = if integer_b.is_some() { f64::EPSILON * sum.abs() } else { last_shell.abs() };
    Ok(SeriesSum { value: sum, terms, error_bound, tail_estimated: false })
}

fn component(theta: &BgeParams, shape: f64) -> Result<BgeParams> {
    BgeParams::new(shape, theta.b, theta.lambda, theta.alpha)
}

/// Mixture expansion of the order-statistic density under the validated reading.
pub fn order_stat_pdf_mixture(
    theta: &BgeParams,
    idx: OrderStatIndex,
    x: f64,
    budget: &MixtureTermBudget,
    ctl: &SeriesControl,
) -> Result<SeriesSum> {
    order_stat_pdf_mixture_with(theta, idx, x, MixtureReading::VALIDATED, budget, ctl)
}

/// Mixture expansion of the density under an explicit reading.
pub fn order_stat_pdf_mixture_with(
    theta: &BgeParams,
    idx: OrderStatIndex,
    x: f64,
    reading: MixtureReading,
    budget: &MixtureTermBudget,
    ctl: &SeriesControl,
) -> Result<SeriesSum> {
    if !(x > 0.0) {
        return domain(format!("order statistic density requires x > 0 (got {x})"));
    }
    mixture_sum(theta, idx, reading, budget, ctl, |shape| Bge::new(component(theta, shape)?)?.pdf(x))
}

/// Mgf of X_{i:n} as a δ-weighted sum of component mgfs, t < λ.
pub fn order_stat_mgf(
    theta: &BgeParams,
    idx: OrderStatIndex,
    t: f64,
    budget: &MixtureTermBudget,
    ctl: &SeriesControl,
) -> Result<SeriesSum> {
    if !(t < theta.lambda) {
        return domain(format!("mgf requires t < lambda (t = {t}, lambda = {})", theta.lambda));
    }
    mixture_sum(theta, idx, MixtureReading::VALIDATED, budget, ctl, |shape| {
        mgf(&component(theta, shape)?, t, ctl).map(|s| s.value)
    })
}

/// How [`order_stat_moment`] evaluates E(X_{i:n}^r).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    /// ∫ xʳ f_{i:n}(x) dx with the direct density.
    Quadrature,
    /// δ-weighted component moments from the series.
    Mixture,
}

/// E(X_{i:n}^r), r = 1..4.
pub fn order_stat_moment(theta: &BgeParams, idx: OrderStatIndex, r: u32, method: MomentMethod) -> Result<f64> {
    if !(1..=4).contains(&r) {
        return domain(format!("moment order must be 1..=4 (got {r})"));
    }
    match method {
        MomentMethod::Quadrature => {
            let d = Bge::new(*theta)?;
            let center = d.quantile(0.5)?;
            let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 4000 };
            let res = integrate_positive_axis(|x| (r as f64 * x.ln() + direct_ln_pdf(&d, idx, x)).exp(), center, tol)?;
            if !res.converged {
                return Err(Error::Quadrature(format!("moment integral error estimate {:e}", res.error)));
            }
            Ok(res.value)
        }
        MomentMethod::Mixture => {
            let ctl = SeriesControl::default();
            let budget = MixtureTermBudget::default();
            mixture_sum(theta, idx, MixtureReading::VALIDATED, &budget, &ctl, |shape| {
                raw_moment(&component(theta, shape)?, r, &ctl).map(|s| s.value)
            })
            .map(|s| s.value)
        }
    }
}

/// One density comparison used to adjudicate the mixture readings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconciliationCase {
    pub theta: BgeParams,
    pub idx: OrderStatIndex,
    pub x: f64,
}

/// How one reading fared over a set of cases.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadingOutcome {
    pub reading: MixtureReading,
    /// Largest relative deviation from the direct density over the cases
    /// where the reading is defined and its sum converged.
    pub max_rel_error: f64,
    pub evaluated: usize,
    /// Cases where the reading is undefined (k-factor product, real b).
    pub undefined: usize,
    /// Cases where the truncated sum failed (budget or non-finite terms).
    pub failed: usize,
    pub pass: bool,
}

/// Fixed cases: integer and real b, ranks i ≥ 2 (i = 1 cannot separate the
/// product lengths), and α ≠ 1 (α = 1 cannot separate α-scaled shapes).
pub fn default_reconciliation_cases() -> Vec<ReconciliationCase> {
    let raw: [(f64, f64, f64, f64, usize, usize, f64); 10] = [
        (1.0, 2.0, 1.0, 1.0, 1, 2, 0.5),
        (1.5, 2.5, 1.0, 1.2, 2, 3, 1.0),
        (2.0, 3.0, 1.0, 1.5, 2, 3, 0.8),
        (1.3, 2.0, 0.7, 2.0, 2, 2, 1.4),
        (0.8, 3.0, 1.2, 0.7, 3, 3, 0.6),
        (2.0, 2.0, 1.0, 1.0, 2, 3, 1.1),
        (1.2, 1.7, 1.0, 1.8, 1, 3, 0.9),
        (0.9, 0.6, 1.5, 1.4, 2, 3, 0.7),
        (1.7, 4.0, 0.5, 2.5, 3, 4, 2.0),
        (2.5, 1.5, 2.0, 0.8, 2, 4, 0.4),
    ];
    raw.iter()
        .map(|&(a, b, l, al, i, n, x)| ReconciliationCase {
            theta: BgeParams::new(a, b, l, al).expect("fixed case"),
            idx: OrderStatIndex::new(i, n).expect("fixed case"),
            x,
        })
        .collect()
}

/// Evaluate every (shape, product length) reading against the direct
/// density. A reading passes when it is defined and converged on at least
/// one case and agrees to `rel_tol` wherever it is defined.
pub fn reconcile_readings(
    cases: &[ReconciliationCase],
    budget: &MixtureTermBudget,
    ctl: &SeriesControl,
    rel_tol: f64,
) -> Result<Vec<ReadingOutcome>> {
    let mut out = Vec::new();
    for shape in ComponentShape::ALL {
        for length in ProductLength::ALL {
            let reading = MixtureReading { shape, length };
            let mut o = ReadingOutcome {
                reading,
                max_rel_error: 0.0,
                evaluated: 0,
                undefined: 0,
                failed: 0,
                pass: false,
            };
            for c in cases {
                if length == ProductLength::K && ctl.integer_b(c.theta.b).is_none() {
                    o.undefined += 1;
                    continue;
                }
                let direct = order_stat_pdf_direct(&c.theta, c.idx, c.x)?;
                match order_stat_pdf_mixture_with(&c.theta, c.idx, c.x, reading, budget, ctl) {
                    Ok(m) if m.value.is_finite() => {
                        o.evaluated += 1;
                        o.max_rel_error = o.max_rel_error.max((m.value - direct).abs() / direct.abs());
                    }
                    _ => o.failed += 1,
                }
            }
            o.pass = o.evaluated > 0 && o.failed == 0 && o.max_rel_error <= rel_tol;
            out.push(o);
        }
    }
    Ok(out)
}

/// `key=value` rendering of the reconciliation outcomes.
pub fn reconciliation_report(outcomes: &[ReadingOutcome], rel_tol: f64) -> String {
    let mut s = format!("tolerance.rel={rel_tol:e}\n");
    for o in outcomes {
        let key = format!("reading[{}|{}]", o.reading.shape.label(), o.reading.length.label());
        s.push_str(&format!(
            "{key}.result={}\n{key}.max_rel_error={:.3e}\n{key}.evaluated={}\n{key}.undefined={}\n{key}.failed={}\n",
            if o.pass { "pass" } else { "fail" },
            o.max_rel_error,
            o.evaluated,
            o.undefined,
            o.failed
        ));
    }
    let valid: Vec<_> = outcomes.iter().filter(|o| o.pass).collect();
    s.push_str(&format!("validated.count={}\n", valid.len()));
    for o in valid {
        s.push_str(&format!("validated={}|{}\n", o.reading.shape.label(), o.reading.length.label()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64, l: f64, al: f64) -> BgeParams {
        BgeParams::new(a, b, l, al).unwrap()
    }

    fn idx(i: usize, n: usize) -> OrderStatIndex {
        OrderStatIndex::new(i, n).unwrap()
    }

    #[test]
    fn index_validation() {
        assert!(OrderStatIndex::new(0, 3).is_err());
        assert!(OrderStatIndex::new(4, 3).is_err());
        assert!(MixtureTermBudget::new(0, 5).is_err());
    }

    #[test]
    fn direct_density_examples() {
        let t = p(1.3, 2.1, 0.7, 1.9);
        let f = Bge::new(t).unwrap().pdf(0.8).unwrap();
        assert!((order_stat_pdf_direct(&t, idx(1, 1), 0.8).unwrap() - f).abs() < 1e-15);
        let t = p(1.0, 1.0, 2.0, 1.0);
        let x: f64 = 0.6;
        let want = 2.0 * (1.0 - (-2.0 * x).exp()) * 2.0 * (-2.0 * x).exp();
        assert!((order_stat_pdf_direct(&t, idx(2, 2), x).unwrap() - want).abs() < 1e-14);
        // 40-digit direct evaluation.
        let got = order_stat_pdf_direct(&p(2.0, 3.0, 1.0, 1.0), idx(2, 5), 0.7).unwrap();
        assert!((got - 0.297_643_659_671_822_16).abs() < 1e-13, "{got}");
        assert!(order_stat_pdf_direct(&t, idx(1, 2), 0.0).is_err());
    }

    #[test]
    fn mixture_reduces_to_parent_density() {
        let t = p(1.7, 3.0, 1.2, 0.8);
        let ctl = SeriesControl::default();
        let got = order_stat_pdf_mixture(&t, idx(1, 1), 0.5, &MixtureTermBudget::default(), &ctl).unwrap();
        let want = Bge::new(t).unwrap().pdf(0.5).unwrap();
        assert!((got.value - want).abs() < 1e-13);
        assert_eq!(got.terms, 1);
    }

    #[test]
    fn mixture_matches_direct_density() {
        let ctl = SeriesControl::default();
        let budget = MixtureTermBudget::default();
        for (t, id, x) in [(p(1.0, 2.0, 1.0, 1.0), idx(1, 2), 0.5), (p(1.5, 2.5, 1.0, 1.2), idx(2, 3), 1.0)] {
            let direct = order_stat_pdf_direct(&t, id, x).unwrap();
            let mix = order_stat_pdf_mixture(&t, id, x, &budget, &ctl).unwrap().value;
            assert!((mix / direct - 1.0).abs() < 1e-4, "{t:?} {id:?}: {mix} vs {direct}");
        }
        let want = 0.541_341_132_946_450_77;
        assert!((order_stat_pdf_direct(&p(1.0, 2.0, 1.0, 1.0), idx(1, 2), 0.5).unwrap() - want).abs() < 1e-14);
        let want = 0.408_658_862_688_432_5;
        assert!((order_stat_pdf_direct(&p(1.5, 2.5, 1.0, 1.2), idx(2, 3), 1.0).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn k_factor_reading_needs_integer_b() {
        let reading = MixtureReading { shape: ComponentShape::AKPlusI, length: ProductLength::K };
        let r = order_stat_pdf_mixture_with(
            &p(1.5, 2.5, 1.0, 1.2),
            idx(2, 3),
            1.0,
            reading,
            &MixtureTermBudget::default(),
            &SeriesControl::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tight = MixtureTermBudget::new(3, 4).unwrap();
        let r = order_stat_pdf_mixture(&p(1.5, 0.5, 1.0, 1.2), idx(2, 3), 3.0, &tight, &SeriesControl::default());
        assert!(matches!(r, Err(Error::BudgetExhausted { .. })), "{r:?}");
    }

    #[test]
    fn moments_and_mgf() {
        let e = p(1.0, 1.0, 1.0, 1.0);
        let m = order_stat_moment(&e, idx(1, 2), 1, MomentMethod::Quadrature).unwrap();
        assert!((m - 0.5).abs() < 1e-10);
        let t = p(2.0, 2.0, 1.0, 1.0);
        let q = order_stat_moment(&t, idx(2, 3), 2, MomentMethod::Quadrature).unwrap();
        let mix = order_stat_moment(&t, idx(2, 3), 2, MomentMethod::Mixture).unwrap();
        assert!((q - 0.714_891_660_367_850_8).abs() < 1e-9, "{q}");
        assert!((mix - q).abs() < 1e-9, "{mix} vs {q}");
        let ctl = SeriesControl::default();
        let budget = MixtureTermBudget::default();
        let m = order_stat_mgf(&p(1.0, 2.0, 1.0, 1.0), idx(1, 2), 0.3, &budget, &ctl).unwrap();
        assert!((m.value - 1.081_081_081_081_081).abs() < 1e-12, "{m:?}");
        let m0 = order_stat_mgf(&p(1.4, 2.0, 1.0, 0.7), idx(2, 4), 0.0, &budget, &ctl).unwrap();
        assert!((m0.value - 1.0).abs() < 1e-10);
    }
}
