//! Adaptive Gauss–Kronrod (7/15) quadrature with a global error queue, plus
//! maps for half-line and whole-line integrals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Stopping rule: stop once the estimated error is below
/// `max(abs, rel · |value|)` or the interval budget is spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-14, rel: 1e-11, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    /// Whether the requested tolerance was met.
    pub converged: bool,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let value = kronrod * half;
    if !value.is_finite() {
        return Err(Error::Quadrature(format!(
            "integrand is not finite on [{lo}, {hi}]"
        )));
    }
    let error = ((kronrod - gauss) * half).abs();
    Ok(Segment { lo, hi, value, error })
}

/// ∫_lo^hi f(x) dx on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Integral> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Quadrature("integration limits must be finite".into()));
    }
    if lo == hi {
        return Ok(Integral { value: 0.0, error: 0.0, intervals: 0, converged: true });
    }
    if hi < lo {
        let r = integrate(f, hi, lo, tol)?;
        return Ok(Integral { value: -r.value, ..r });
    }
    let mut segments = vec![gk15(&f, lo, hi)?];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target || segments.len() >= tol.max_intervals {
            return Ok(Integral {
                value,
                error,
                intervals: segments.len(),
                converged: error <= target,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // Interval cannot be split further in floating point.
            segments.push(Segment { error: 0.0, ..seg });
            continue;
        }
        segments.push(gk15(&f, seg.lo, mid)?);
        segments.push(gk15(&f, mid, seg.hi)?);
    }
}

/// ∫_lo^∞ f(x) dx through x = lo + t/(1 − t).
pub fn integrate_half_line<F: Fn(f64) -> f64>(f: F, lo: f64, tol: Tolerance) -> Result<Integral> {
    let g = |t: f64| {
        let omt = 1.0 - t;
        let x = lo + t / omt;
        let fx = f(x);
        if fx == 0.0 {
            0.0
        } else {
            fx / (omt * omt)
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

/// ∫_{−∞}^{∞} f(s) ds through s = t/(1 − t²).
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, tol: Tolerance) -> Result<Integral> {
    let g = |t: f64| {
        let omt2 = 1.0 - t * t;
        let s = t / omt2;
        let fs = f(s);
        if fs == 0.0 {
            0.0
        } else {
            fs * (1.0 + t * t) / (omt2 * omt2)
        }
    };
    integrate(g, -1.0, 1.0, tol)
}

/// ∫₀^∞ f(x) dx through x = c·eˢ followed by the whole-line map.
///
/// `center` should be a typical magnitude of the integrand's support (a
/// median, say). Power singularities at the origin and exponential tails
/// both become exponentially decaying in s.
pub fn integrate_positive_axis<F: Fn(f64) -> f64>(f: F, center: f64, tol: Tolerance) -> Result<Integral> {
    if !(center > 0.0 && center.is_finite()) {
        return Err(Error::Quadrature(format!("center must be positive (got {center})")));
    }
    integrate_real_line(
        |s| {
            let x = center * s.exp();
            if x == 0.0 || !x.is_finite() {
                return 0.0;
            }
            let fx = f(x);
            if fx == 0.0 {
                0.0
            } else {
                fx * x
            }
        },
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate(|x| x.exp(), 1.0, 0.0, Tolerance::default()).unwrap();
        assert!((r.value + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let r = integrate(|x| x.powf(-0.5), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn half_line_exponential() {
        let r = integrate_half_line(|x| (-x).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn real_line_gaussian() {
        let r = integrate_real_line(|s| (-0.5 * s * s).exp(), Tolerance::default()).unwrap();
        assert!((r.value - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-11);
    }

    #[test]
    fn positive_axis_with_origin_singularity() {
        // ∫₀^∞ x^{-1/2} e^{-x} dx = √π
        let r = integrate_positive_axis(|x| x.powf(-0.5) * (-x).exp(), 1.0, Tolerance::default()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-11, "{r:?}");
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, Tolerance::default()).is_err());
    }
}
