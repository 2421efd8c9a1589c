//! Limited-memory BFGS with a backtracking Armijo line search.

use std::collections::VecDeque;

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct LbfgsResult<F> {
    pub x: Vec<F>,
    pub value: F,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions<F> {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop once the gradient max-norm falls below this.
    pub gtol: F,
}

fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn max_abs<F: Scalar>(a: &[F]) -> F {
    a.iter().fold(F::zero(), |m, &v| m.max(v.abs()))
}

/// Minimizes `f`, which returns the value and gradient at a point. A
/// non-finite value aborts and is reported through `value`.
pub fn minimize<F, Obj>(mut f: Obj, x0: Vec<F>, opts: LbfgsOptions<F>) -> LbfgsResult<F>
where
    F: Scalar,
    Obj: FnMut(&[F]) -> (F, Vec<F>),
{
    let c1 = F::lit(1e-4);
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let mut history: VecDeque<(Vec<F>, Vec<F>, F)> = VecDeque::with_capacity(opts.memory);
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if !fx.is_finite() {
            break;
        }
        if max_abs(&g) < opts.gtol {
            return LbfgsResult {
                x,
                value: fx,
                iterations,
                converged: true,
            };
        }

        // two-loop recursion
        let mut d: Vec<F> = g.iter().map(|&v| -v).collect();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = *rho * dot(s, &d);
            for (di, &yi) in d.iter_mut().zip(y) {
                *di -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            for di in d.iter_mut() {
                *di *= gamma;
            }
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = *rho * dot(y, &d);
            for (di, &si) in d.iter_mut().zip(s) {
                *di += (a - b) * si;
            }
        }
        let mut slope = dot(&g, &d);
        if !(slope < F::zero()) {
            history.clear();
            d = g.iter().map(|&v| -v).collect();
            slope = dot(&g, &d);
        }

        let mut step = if history.is_empty() {
            F::one().min(F::one() / max_abs(&g).max(F::min_positive_value()))
        } else {
            F::one()
        };
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<F> = x.iter().zip(&d).map(|(&xi, &di)| xi + step * di).collect();
            let (ft, gt) = f(&trial);
            if ft.is_finite() && ft <= fx + c1 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= F::lit(0.5);
        }
        iterations += 1;
        let Some((xn, fnew, gn)) = accepted else {
            break;
        };
        let s: Vec<F> = xn.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<F> = gn.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > F::epsilon() * dot(&y, &y) {
            if history.len() == opts.memory {
                history.pop_front();
            }
            history.push_back((s, y, F::one() / sy));
        }
        let stalled = fx - fnew <= F::epsilon() * fx.abs().max(F::one()) && max_abs(&gn) >= opts.gtol;
        x = xn;
        fx = fnew;
        g = gn;
        if stalled && history.is_empty() {
            break;
        }
    }
    let converged = fx.is_finite() && max_abs(&g) < opts.gtol;
    LbfgsResult {
        x,
        value: fx,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            (v, g)
        };
        let r = minimize(rosen, vec![-1.2, 1.0], LbfgsOptions { memory: 10, max_iter: 500, gtol: 1e-8 });
        assert!(r.converged, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadratic_in_few_steps() {
        let q = |x: &[f64]| {
            let v: f64 = x.iter().enumerate().map(|(i, &xi)| (i + 1) as f64 * xi * xi).sum();
            (v, x.iter().enumerate().map(|(i, &xi)| 2.0 * (i + 1) as f64 * xi).collect())
        };
        let r = minimize(q, vec![1.0; 5], LbfgsOptions { memory: 5, max_iter: 100, gtol: 1e-10 });
        assert!(r.converged);
        assert!(r.iterations < 40);
    }
}
