#![allow(dead_code)]

use bge::quadrature::{integrate_positive_axis, Tolerance};
use bge::{Bge, BgeParams};

pub fn p(a: f64, b: f64, lambda: f64, alpha: f64) -> BgeParams {
    BgeParams::new(a, b, lambda, alpha).unwrap()
}

/// ∫ xʳ f(x) dx by quadrature on the log scale, centred at the median.
pub fn quadrature_moment(theta: &BgeParams, r: u32) -> f64 {
    let d = Bge::new(*theta).unwrap();
    let center = d.quantile(0.5).unwrap();
    let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 4000 };
    integrate_positive_axis(|x| (r as f64 * x.ln() + d.ln_pdf(x).unwrap()).exp(), center, tol).unwrap().value
}

/// Kolmogorov–Smirnov statistic of `xs` against `cdf`.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
    })
}

/// Asymptotic 1% critical value of the KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_61 / (n as f64).sqrt()
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
