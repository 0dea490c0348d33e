//! Small deterministic optimisers used for transform and GP hyperparameter fitting.

use std::collections::VecDeque;

const SQRT_EPS: f64 = 1.490_116_119_384_765_6e-8;

/// Minimise a scalar function on `[lo, hi]` with Brent's golden-section /
/// parabolic-interpolation hybrid. Returns `(argmin, min)`.
///
/// Non-finite function values are treated as `+inf`.
pub fn brent_minimize<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64) {
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let golden = 0.5 * (3.0 - 5f64.sqrt());
    let (mut a, mut b) = (lo, hi);
    let mut x = a + golden * (b - a);
    let (mut v, mut w) = (x, x);
    let mut fx = eval(x);
    let (mut fv, mut fw) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);

    for _ in 0..500 {
        let xm = 0.5 * (a + b);
        let tol1 = SQRT_EPS * x.abs() + xtol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - xm).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut use_golden = true;
        if e.abs() > tol1 {
            let mut r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            r = e;
            e = d;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if (u - a) < tol2 || (b - u) < tol2 {
                    d = tol1.copysign(xm - x);
                }
                use_golden = false;
            }
        }
        if use_golden {
            e = if x >= xm { a - x } else { b - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = eval(u);
        if fu <= fx {
            if u >= x { a = x } else { b = x }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x { a = u } else { b = u }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, fx)
}

#[derive(Debug, Clone, Copy)]
pub struct BoxOptions {
    pub max_iters: usize,
    /// Stop when the infinity norm of the projected gradient falls below this.
    pub grad_tol: f64,
    /// Stop when an accepted step improves the objective by less than
    /// `f_rel_tol * max(1, |f|)`.
    pub f_rel_tol: f64,
    pub memory: usize,
}

impl Default for BoxOptions {
    fn default() -> Self {
        BoxOptions { max_iters: 200, grad_tol: 1e-5, f_rel_tol: 1e-9, memory: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

fn project(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((xi, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *xi = xi.clamp(lo, hi);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Box-constrained minimisation with a projected limited-memory quasi-Newton
/// direction and Armijo backtracking. `f` returns `None` where the objective
/// is undefined; such points are rejected by the line search.
///
/// Every accepted step strictly decreases the objective, so the result is
/// never worse than the (projected) starting point. Returns `None` only when
/// the starting point itself is undefined.
pub fn minimize_box<F>(mut f: F, x0: &[f64], lower: &[f64], upper: &[f64], opts: &BoxOptions) -> Option<Minimum>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let mut evaluations = 1;
    let (mut fx, mut g) = f(&x).filter(|(v, g)| v.is_finite() && g.iter().all(|gi| gi.is_finite()))?;
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;

    while iterations < opts.max_iters {
        iterations += 1;
        // variables pinned at a bound with the gradient pushing outwards are frozen
        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)))
            .collect();
        let pg: Vec<f64> = (0..n).map(|i| if free[i] { g[i] } else { 0.0 }).collect();
        if pg.iter().fold(0.0f64, |m, v| m.max(v.abs())) < opts.grad_tol {
            break;
        }

        // two-loop recursion
        let mut q = pg.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = memory.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        } else {
            let norm = dot(&pg, &pg).sqrt();
            q.iter_mut().for_each(|qi| *qi /= norm.max(1.0));
        }
        for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = (0..n).map(|i| if free[i] { -q[i] } else { 0.0 }).collect();
        if dot(&dir, &g) >= 0.0 {
            memory.clear();
            let norm = dot(&pg, &pg).sqrt().max(1.0);
            dir = pg.iter().map(|v| -v / norm).collect();
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut xn: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            project(&mut xn, lower, upper);
            let decrease: f64 = dot(&g, &xn.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
            evaluations += 1;
            if let Some((fv, gv)) = f(&xn) {
                if fv.is_finite() && gv.iter().all(|v| v.is_finite()) && fv <= fx + 1e-4 * decrease && fv < fx {
                    accepted = Some((xn, fv, gv));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else { break };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if memory.len() == opts.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        let improvement = fx - fn_;
        x = xn;
        fx = fn_;
        g = gn;
        if improvement < opts.f_rel_tol * fx.abs().max(1.0) {
            break;
        }
    }
    Some(Minimum { x, f: fx, iterations, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_interior_minimum() {
        let (x, fx) = brent_minimize(|x| (x - 1.234).powi(2) + 3.0, -5.0, 5.0, 1e-8);
        assert!((x - 1.234).abs() < 1e-6);
        assert!((fx - 3.0).abs() < 1e-12);
    }

    #[test]
    fn brent_handles_boundary_minimum() {
        let (x, _) = brent_minimize(|x| x, -5.0, 5.0, 1e-6);
        assert!(x < -5.0 + 1e-4, "{x}");
    }

    #[test]
    fn brent_treats_nan_as_infinity() {
        let (x, _) = brent_minimize(|x| if x > 2.0 { f64::NAN } else { (x - 1.0).powi(2) }, -5.0, 5.0, 1e-6);
        assert!((x - 1.0).abs() < 1e-4);
    }

    #[test]
    fn box_minimizer_solves_rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            Some((v, g))
        };
        let opts = BoxOptions { max_iters: 500, grad_tol: 1e-8, f_rel_tol: 0.0, memory: 8 };
        let m = minimize_box(f, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], &opts).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn box_minimizer_respects_bounds() {
        let f = |x: &[f64]| Some(((x[0] - 3.0).powi(2) + (x[1] + 3.0).powi(2), vec![2.0 * (x[0] - 3.0), 2.0 * (x[1] + 3.0)]));
        let m = minimize_box(f, &[0.0, 0.0], &[-1.0, -1.0], &[1.0, 1.0], &BoxOptions::default()).unwrap();
        assert_eq!(m.x, vec![1.0, -1.0]);
    }

    #[test]
    fn box_minimizer_never_worsens_start() {
        let f = |x: &[f64]| if x[0] > 0.5 { None } else { Some((-x[0], vec![-1.0])) };
        let m = minimize_box(f, &[0.0], &[-1.0], &[1.0], &BoxOptions::default()).unwrap();
        assert!(m.f <= 0.0 && m.x[0] <= 0.5);
        assert!(minimize_box(|_: &[f64]| None, &[0.0], &[-1.0], &[1.0], &BoxOptions::default()).is_none());
    }
}
