//! Box-constrained BFGS with a strong-Wolfe line search and a damped Newton
//! polish. Works on an arbitrary smooth objective; the fitting code feeds it
//! the negative log-likelihood in log-parameter coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Why the minimizer stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimStatus {
    /// Gradient ∞-norm below tolerance at an interior point.
    Converged,
    /// Projected gradient below tolerance with at least one coordinate
    /// pinned at a box bound.
    Boundary,
    MaxIterations,
    LineSearchFailure,
}

impl OptimStatus {
    pub fn label(self) -> &'static str {
        match self {
            OptimStatus::Converged => "converged",
            OptimStatus::Boundary => "boundary",
            OptimStatus::MaxIterations => "max-iterations",
            OptimStatus::LineSearchFailure => "line-search-failure",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            OptimStatus::Converged,
            OptimStatus::Boundary,
            OptimStatus::MaxIterations,
            OptimStatus::LineSearchFailure,
        ]
        .into_iter()
        .find(|v| v.label() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    pub lower: f64,
    pub upper: f64,
    /// Newton iterations attempted after the quasi-Newton phase.
    pub polish_iter: usize,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions { max_iter: 2000, grad_tol: 1e-6, lower: 1e-8f64.ln(), upper: 1e8f64.ln(), polish_iter: 25 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub status: OptimStatus,
}

impl OptimOutcome {
    pub fn grad_norm(&self) -> f64 {
        self.grad.iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

type Eval = Option<(f64, DVector<f64>)>;

struct Problem<F> {
    f: F,
    lower: f64,
    upper: f64,
}

impl<F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>> Problem<F> {
    fn eval(&mut self, x: &DVector<f64>) -> Eval {
        let (v, g) = (self.f)(x.as_slice())?;
        if !v.is_finite() || g.iter().any(|d| !d.is_finite()) {
            return None;
        }
        Some((v, DVector::from_vec(g)))
    }

    fn clamp(&self, x: &mut DVector<f64>) {
        for v in x.iter_mut() {
            *v = v.clamp(self.lower, self.upper);
        }
    }

    /// Coordinates sitting on a bound with the gradient pushing outward.
    fn active(&self, x: &DVector<f64>, g: &DVector<f64>) -> Vec<bool> {
        x.iter()
            .zip(g.iter())
            .map(|(&xi, &gi)| (xi <= self.lower && gi > 0.0) || (xi >= self.upper && gi < 0.0))
            .collect()
    }

    fn projected_norm(&self, x: &DVector<f64>, g: &DVector<f64>) -> (f64, bool) {
        let act = self.active(x, g);
        let mut m: f64 = 0.0;
        for (gi, a) in g.iter().zip(&act) {
            if !a {
                m = m.max(gi.abs());
            }
        }
        (m, act.iter().any(|&a| a))
    }
}

/// Minimize `f` from `x0` inside the box [lower, upper]ⁿ. The closure returns
/// the objective and its gradient, or `None` where it cannot be evaluated.
pub fn minimize<F>(f: F, x0: &[f64], opts: &OptimOptions) -> Option<OptimOutcome>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let mut p = Problem { f, lower: opts.lower, upper: opts.upper };
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    p.clamp(&mut x);
    let (mut fx, mut g) = p.eval(&x)?;
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut iterations = 0;
    let mut status = OptimStatus::MaxIterations;

    while iterations < opts.max_iter {
        let (pg, _) = p.projected_norm(&x, &g);
        if pg < opts.grad_tol {
            status = OptimStatus::Converged;
            break;
        }
        iterations += 1;
        let act = p.active(&x, &g);
        let mut d = -(&h * &g);
        for (i, &a) in act.iter().enumerate() {
            if a {
                d[i] = 0.0;
            }
        }
        if d.dot(&g) >= 0.0 {
            h = DMatrix::identity(n, n);
            fresh = true;
            d = -g.clone();
            for (i, &a) in act.iter().enumerate() {
                if a {
                    d[i] = 0.0;
                }
            }
        }
        if fresh {
            // Keep the first trial step modest in log-parameter units.
            let dn = d.amax();
            if dn > 1.0 {
                d /= dn;
            }
        }
        let t_max = max_step(&x, &d, opts.lower, opts.upper);
        match line_search(&mut p, &x, fx, &g, &d, t_max) {
            Some((t, f_new, g_new)) => {
                let mut x_new = &x + t * &d;
                p.clamp(&mut x_new);
                let s = &x_new - &x;
                let y = &g_new - &g;
                let sy = s.dot(&y);
                if sy > 1e-12 * s.norm() * y.norm() {
                    if fresh {
                        let scale = sy / y.dot(&y);
                        h = DMatrix::identity(n, n) * scale;
                    }
                    let rho = 1.0 / sy;
                    let hy = &h * &y;
                    let yhy = y.dot(&hy);
                    h += (rho * rho * yhy + rho) * &s * s.transpose() - rho * (&hy * s.transpose() + &s * hy.transpose());
                    fresh = false;
                }
                let stalled = (fx - f_new).abs() <= 1e-16 * fx.abs().max(1.0) && s.amax() < 1e-14;
                x = x_new;
                fx = f_new;
                g = g_new;
                if stalled {
                    status = OptimStatus::LineSearchFailure;
                    break;
                }
            }
            None if !fresh => {
                h = DMatrix::identity(n, n);
                fresh = true;
            }
            None => {
                status = OptimStatus::LineSearchFailure;
                break;
            }
        }
    }

    if status != OptimStatus::Converged || p.projected_norm(&x, &g).0 >= opts.grad_tol {
        let (xp, fp, gp, used) = newton_polish(&mut p, x.clone(), fx, g.clone(), opts);
        iterations += used;
        // Near the optimum f is flat to rounding; let the gradient decide.
        let f_ok = fp <= fx + 1e-12 * fx.abs().max(1.0);
        if fp < fx || (f_ok && p.projected_norm(&xp, &gp).0 < p.projected_norm(&x, &g).0) {
            x = xp;
            fx = fp;
            g = gp;
        }
    }
    let (pg, any_active) = p.projected_norm(&x, &g);
    let on_bound = x.iter().any(|&v| v <= opts.lower || v >= opts.upper);
    if pg < opts.grad_tol {
        status = if any_active || on_bound { OptimStatus::Boundary } else { OptimStatus::Converged };
    } else if status == OptimStatus::Converged {
        status = OptimStatus::MaxIterations;
    }
    Some(OptimOutcome { x: x.as_slice().to_vec(), f: fx, grad: g.as_slice().to_vec(), iterations, status })
}

fn max_step(x: &DVector<f64>, d: &DVector<f64>, lo: f64, hi: f64) -> f64 {
    let mut t = f64::INFINITY;
    for (&xi, &di) in x.iter().zip(d.iter()) {
        if di > 0.0 {
            t = t.min((hi - xi) / di);
        } else if di < 0.0 {
            t = t.min((lo - xi) / di);
        }
    }
    t.max(0.0)
}

type Trial = Option<(f64, f64, DVector<f64>)>;

/// Strong-Wolfe search along `d` on (0, t_max]; returns (t, f, g).
fn line_search<F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>>(
    p: &mut Problem<F>,
    x: &DVector<f64>,
    f0: f64,
    g0: &DVector<f64>,
    d: &DVector<f64>,
    t_max: f64,
) -> Option<(f64, f64, DVector<f64>)> {
    let dg0 = g0.dot(d);
    if !(dg0 < 0.0) || t_max <= 0.0 {
        return None;
    }
    // (f, directional derivative, gradient) at x + t·d
    let mut eval = |t: f64| -> Trial {
        let mut xt = x + t * d;
        p.clamp(&mut xt);
        let (ft, gt) = p.eval(&xt)?;
        Some((ft, gt.dot(d), gt))
    };
    let mut prev = (0.0, f0, dg0);
    let mut t = t_max.min(1.0);
    for it in 0..40 {
        let Some((ft, dgt, gt)) = eval(t) else {
            t = 0.5 * (prev.0 + t);
            if t - prev.0 < 1e-16 {
                return None;
            }
            continue;
        };
        if ft > f0 + WOLFE_C1 * t * dg0 || (it > 0 && ft >= prev.1) {
            return zoom(&mut eval, f0, dg0, prev, (t, ft, dgt));
        }
        if dgt.abs() <= -WOLFE_C2 * dg0 {
            return Some((t, ft, gt));
        }
        if dgt >= 0.0 {
            return zoom(&mut eval, f0, dg0, (t, ft, dgt), prev);
        }
        if t >= t_max {
            // Pinned at the box edge with sufficient decrease: accept.
            return Some((t, ft, gt));
        }
        prev = (t, ft, dgt);
        t = (2.0 * t).min(t_max);
    }
    None
}

const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;

fn zoom(
    eval: &mut impl FnMut(f64) -> Trial,
    f0: f64,
    dg0: f64,
    mut lo: (f64, f64, f64),
    mut hi: (f64, f64, f64),
) -> Option<(f64, f64, DVector<f64>)> {
    let mut best: Option<(f64, f64, DVector<f64>)> = None;
    for _ in 0..60 {
        let (a, b) = (lo.0.min(hi.0), lo.0.max(hi.0));
        if b - a < 1e-16 * b.max(1.0) {
            break;
        }
        // Minimizer of the quadratic through f(lo), f'(lo), f(hi), kept off the ends.
        let dt = hi.0 - lo.0;
        let denom = 2.0 * (hi.1 - lo.1 - lo.2 * dt);
        let mut t = if hi.1.is_finite() && denom > 0.0 { lo.0 - lo.2 * dt * dt / denom } else { 0.5 * (a + b) };
        let margin = 0.1 * (b - a);
        if !(t > a + margin && t < b - margin) {
            t = 0.5 * (a + b);
        }
        let Some((ft, dgt, gt)) = eval(t) else {
            hi = (t, f64::INFINITY, 0.0);
            continue;
        };
        if ft > f0 + WOLFE_C1 * t * dg0 || ft >= lo.1 {
            hi = (t, ft, dgt);
        } else {
            if best.as_ref().is_none_or(|bst| ft < bst.1) {
                best = Some((t, ft, gt.clone()));
            }
            if dgt.abs() <= -WOLFE_C2 * dg0 {
                return Some((t, ft, gt));
            }
            if dgt * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = (t, ft, dgt);
        }
    }
    // Accept the best sufficient-decrease point even if curvature failed.
    best
}

/// Damped Newton steps with a central-difference Hessian of the gradient.
/// Returns (x, f, g, iterations used).
fn newton_polish<F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>>(
    p: &mut Problem<F>,
    mut x: DVector<f64>,
    mut fx: f64,
    mut g: DVector<f64>,
    opts: &OptimOptions,
) -> (DVector<f64>, f64, DVector<f64>, usize) {
    let n = x.len();
    let mut used = 0;
    for _ in 0..opts.polish_iter {
        if p.projected_norm(&x, &g).0 < 0.1 * opts.grad_tol {
            break;
        }
        used += 1;
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let h = 1e-5 * x[j].abs().max(1.0);
            let mut up = x.clone();
            let mut dn = x.clone();
            up[j] += h;
            dn[j] -= h;
            let (Some((_, gu)), Some((_, gd))) = (p.eval(&up), p.eval(&dn)) else {
                return (x, fx, g, used);
            };
            hess.set_column(j, &((gu - gd) / (2.0 * h)));
        }
        hess = 0.5 * (&hess + hess.transpose());
        let act = p.active(&x, &g);
        for (i, &a) in act.iter().enumerate() {
            if a {
                hess.row_mut(i).fill(0.0);
                hess.column_mut(i).fill(0.0);
                hess[(i, i)] = 1.0;
            }
        }
        let mut rhs = g.clone();
        for (i, &a) in act.iter().enumerate() {
            if a {
                rhs[i] = 0.0;
            }
        }
        let scale = hess.diagonal().amax().max(1e-12);
        let mut damping = 0.0;
        let mut accepted = false;
        for _ in 0..12 {
            let m = &hess + DMatrix::identity(n, n) * damping;
            if let Some(ch) = m.cholesky() {
                let step = -ch.solve(&rhs);
                let mut t = 1.0;
                for _ in 0..20 {
                    let mut xt = &x + t * &step;
                    p.clamp(&mut xt);
                    if let Some((ft, gt)) = p.eval(&xt) {
                        if ft <= fx + 1e-12 * fx.abs().max(1.0) && ft.is_finite() {
                            let improves = ft < fx || p.projected_norm(&xt, &gt).0 < p.projected_norm(&x, &g).0;
                            if improves {
                                x = xt;
                                fx = ft;
                                g = gt;
                                accepted = true;
                                break;
                            }
                        }
                    }
                    t *= 0.5;
                }
                if accepted {
                    break;
                }
            }
            damping = if damping == 0.0 { 1e-8 * scale } else { damping * 100.0 };
        }
        if !accepted {
            break;
        }
    }
    (x, fx, g, used)
}
