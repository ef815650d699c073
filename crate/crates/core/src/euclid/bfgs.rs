//! Quasi-Newton minimization with a strong Wolfe line search.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct BfgsConfig {
    pub max_iter: usize,
    /// Stop once `‖∇f‖_∞` falls below this.
    pub grad_tol: f64,
    /// Stop once `‖Δx‖ ≤ step_tol · (1 + ‖x‖)`.
    pub step_tol: f64,
    /// Treat the problem as unbounded once `f` drops below this.
    pub lower_bound: f64,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        BfgsConfig {
            max_iter: 2000,
            grad_tol: 1e-9,
            step_tol: 1e-10,
            lower_bound: -1e6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BfgsOutcome {
    pub x: DVector<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub unbounded: bool,
}

/// Minimizes `f`, which returns the value and gradient at a point.
pub fn minimize<F>(f: F, x0: DVector<f64>, cfg: &BfgsConfig) -> BfgsOutcome
where
    F: Fn(&DVector<f64>) -> (f64, DVector<f64>),
{
    let n = x0.len();
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut first = true;
    let mut iterations = 0;
    let mut converged = false;
    let mut unbounded = false;
    while iterations < cfg.max_iter {
        if !fx.is_finite() || fx < cfg.lower_bound {
            unbounded = fx < cfg.lower_bound || fx == f64::NEG_INFINITY;
            break;
        }
        if g.amax() <= cfg.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir = -(&h * &g);
        if dir.dot(&g) >= 0.0 {
            h = DMatrix::identity(n, n);
            dir = -g.clone();
        }
        if first {
            // Keep the first trial step at unit length.
            let scale = dir.norm().max(1e-300);
            dir /= scale.max(1.0);
        }
        let Some((alpha, fnew, gnew)) = wolfe_search(&f, &x, fx, &g, &dir) else {
            if first {
                // No descent left at working precision.
                converged = g.amax() <= cfg.grad_tol.sqrt();
                break;
            }
            h = DMatrix::identity(n, n);
            first = true;
            continue;
        };
        let s = &dir * alpha;
        let y = &gnew - &g;
        let sy = s.dot(&y);
        let xnorm = x.norm();
        x += &s;
        let small_step = s.norm() <= cfg.step_tol * (1.0 + xnorm);
        fx = fnew;
        g = gnew;
        if sy > 1e-300 {
            if first {
                // Shanno–Phua scaling of the initial inverse Hessian.
                h *= sy / y.dot(&y);
                first = false;
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        if small_step {
            converged = g.amax() <= cfg.grad_tol.sqrt();
            break;
        }
    }
    let grad_norm = g.amax();
    BfgsOutcome {
        x,
        value: fx,
        grad_norm,
        iterations,
        converged,
        unbounded,
    }
}

type Trial = (f64, f64, DVector<f64>, f64);

fn wolfe_search<F>(
    f: &F,
    x: &DVector<f64>,
    f0: f64,
    g0: &DVector<f64>,
    dir: &DVector<f64>,
) -> Option<(f64, f64, DVector<f64>)>
where
    F: Fn(&DVector<f64>) -> (f64, DVector<f64>),
{
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    let d0 = g0.dot(dir);
    let eval = |a: f64| -> Trial {
        let (v, g) = f(&(x + dir * a));
        let slope = g.dot(dir);
        (a, if v.is_nan() { f64::INFINITY } else { v }, g, slope)
    };
    let armijo = |t: &Trial| t.1 <= f0 + C1 * t.0 * d0;
    let curvature = |t: &Trial| t.3.abs() <= -C2 * d0;
    let mut prev: Trial = (0.0, f0, g0.clone(), d0);
    let mut a = 1.0;
    for i in 0..60 {
        let t = eval(a);
        if !armijo(&t) || (i > 0 && t.1 >= prev.1) {
            return zoom(&eval, prev, t, armijo, curvature);
        }
        if curvature(&t) {
            return Some((t.0, t.1, t.2));
        }
        if t.3 >= 0.0 {
            return zoom(&eval, t, prev, armijo, curvature);
        }
        prev = t;
        a *= 2.0;
    }
    (prev.0 > 0.0).then_some((prev.0, prev.1, prev.2))
}

fn zoom(
    eval: &impl Fn(f64) -> Trial,
    mut lo: Trial,
    mut hi: Trial,
    armijo: impl Fn(&Trial) -> bool,
    curvature: impl Fn(&Trial) -> bool,
) -> Option<(f64, f64, DVector<f64>)> {
    for _ in 0..60 {
        let t = eval(0.5 * (lo.0 + hi.0));
        if !armijo(&t) || t.1 >= lo.1 {
            hi = t;
        } else {
            if curvature(&t) {
                return Some((t.0, t.1, t.2));
            }
            if t.3 * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = t;
        }
        if (hi.0 - lo.0).abs() <= 1e-16 * lo.0.abs().max(1e-300) {
            break;
        }
    }
    (lo.0 > 0.0).then_some((lo.0, lo.1, lo.2))
}
