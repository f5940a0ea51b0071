use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{eval_flat, gradient_flat, inf_norm, Objective, OptResult, StopReason, StoppingCriteria, Tracker, DEFAULT_FD_STEP};
use crate::error::{input_err, Result};
use crate::statevector::QaoaParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbfgsOptions {
    /// Number of curvature pairs kept.
    pub memory: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant of the strong Wolfe conditions.
    pub c2: f64,
    pub max_line_search: usize,
    /// Finite-difference step.
    pub h: f64,
    pub stop: StoppingCriteria,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        LbfgsOptions {
            memory: 10,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 40,
            h: DEFAULT_FD_STEP,
            stop: StoppingCriteria { max_iters: 200, ..Default::default() },
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `-H g` by the two-loop recursion over the stored `(s, y, 1/y.s)` pairs.
fn direction(g: &[f64], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(s, &q);
        for (qk, yk) in q.iter_mut().zip(y) {
            *qk -= a * yk;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let scale = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= scale);
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        for (qk, sk) in q.iter_mut().zip(s) {
            *qk += (a - b) * sk;
        }
    }
    q.iter().map(|v| -v).collect()
}

/// One-dimensional restriction `phi(a) = f(x + a d)` with evaluation counting.
struct Line<'a> {
    obj: &'a dyn Objective,
    x: &'a [f64],
    d: &'a [f64],
    h: f64,
    evaluations: usize,
}

impl Line<'_> {
    fn point(&self, a: f64) -> Vec<f64> {
        self.x.iter().zip(self.d).map(|(x, d)| x + a * d).collect()
    }

    fn value(&mut self, a: f64) -> Result<f64> {
        self.evaluations += 1;
        eval_flat(self.obj, &self.point(a))
    }

    fn gradient(&mut self, a: f64) -> Result<Vec<f64>> {
        self.evaluations += 2 * self.x.len();
        gradient_flat(self.obj, &self.point(a), self.h)
    }
}

/// Accepted step: length, value, gradient.
type Step = (f64, f64, Vec<f64>);

/// Line search for the strong Wolfe conditions (bracketing, then zoom).
fn strong_wolfe(line: &mut Line, f0: f64, d0: f64, a_init: f64, opts: &LbfgsOptions) -> Result<Option<Step>> {
    let armijo = |a: f64, fa: f64| fa <= f0 + opts.c1 * a * d0;
    let curvature_ok = |da: f64| da.abs() <= -opts.c2 * d0;

    let (mut a_prev, mut f_prev, mut d_prev) = (0.0, f0, d0);
    let mut a = a_init;
    for i in 0..opts.max_line_search {
        let fa = line.value(a)?;
        if !armijo(a, fa) || (i > 0 && fa >= f_prev) {
            return zoom(line, f0, d0, (a_prev, f_prev, d_prev), (a, fa), opts);
        }
        let ga = line.gradient(a)?;
        let da = dot(&ga, line.d);
        if curvature_ok(da) {
            return Ok(Some((a, fa, ga)));
        }
        if da >= 0.0 {
            return zoom(line, f0, d0, (a, fa, da), (a_prev, f_prev), opts);
        }
        (a_prev, f_prev, d_prev) = (a, fa, da);
        a *= 2.0;
    }
    Ok(None)
}

fn zoom(
    line: &mut Line,
    f0: f64,
    d0: f64,
    lo: (f64, f64, f64),
    hi: (f64, f64),
    opts: &LbfgsOptions,
) -> Result<Option<Step>> {
    let (mut a_lo, mut f_lo, mut d_lo) = lo;
    let (mut a_hi, mut f_hi) = hi;
    for _ in 0..opts.max_line_search {
        let width = a_hi - a_lo;
        // Minimizer of the quadratic through (a_lo, f_lo, d_lo) and (a_hi, f_hi),
        // kept away from the bracket ends.
        let denom = 2.0 * (f_hi - f_lo - d_lo * width);
        let mut a = if denom.abs() > f64::EPSILON { a_lo - d_lo * width * width / denom } else { f64::NAN };
        let (left, right) = if a_lo < a_hi { (a_lo, a_hi) } else { (a_hi, a_lo) };
        let margin = 0.1 * (right - left);
        if !(a > left + margin && a < right - margin) {
            a = 0.5 * (a_lo + a_hi);
        }
        if (right - left) < 1e-14 * right.abs().max(1.0) {
            break;
        }
        let fa = line.value(a)?;
        if fa > f0 + opts.c1 * a * d0 || fa >= f_lo {
            a_hi = a;
            f_hi = fa;
        } else {
            let ga = line.gradient(a)?;
            let da = dot(&ga, line.d);
            if da.abs() <= -opts.c2 * d0 {
                return Ok(Some((a, fa, ga)));
            }
            if da * (a_hi - a_lo) >= 0.0 {
                a_hi = a_lo;
                f_hi = f_lo;
            }
            (a_lo, f_lo, d_lo) = (a, fa, da);
        }
    }
    // Fall back to the best sufficient-decrease point of the bracket.
    if a_lo > 0.0 && f_lo < f0 {
        let g = line.gradient(a_lo)?;
        return Ok(Some((a_lo, f_lo, g)));
    }
    Ok(None)
}

/// Limited-memory BFGS with a strong Wolfe line search on finite-difference
/// gradients. Unconstrained; callers fold periodic angles afterwards.
pub fn quasi_newton_minimize(obj: &dyn Objective, init: &QaoaParams, opts: &LbfgsOptions) -> Result<OptResult> {
    if opts.stop.max_iters == 0 || opts.memory == 0 {
        return input_err("quasi-newton needs at least one iteration and one memory slot");
    }
    if !(0.0 < opts.c1 && opts.c1 < opts.c2 && opts.c2 < 1.0) {
        return input_err("line search constants must satisfy 0 < c1 < c2 < 1");
    }
    let mut x = init.to_flat();
    let dim = x.len();
    let mut f = eval_flat(obj, &x)?;
    let mut tr = Tracker::new(&x, f);
    let mut g = gradient_flat(obj, &x, opts.h)?;
    tr.evaluations += 2 * dim;
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut reason = StopReason::IterationLimit;
    let mut iterations = 0;

    let mut k = 0;
    while k < opts.stop.max_iters {
        if inf_norm(&g) < opts.stop.gtol {
            reason = StopReason::GradientTolerance;
            break;
        }
        let mut d = direction(&g, &memory);
        let mut d0 = dot(&g, &d);
        if d0 >= 0.0 || !d0.is_finite() {
            memory.clear();
            d = g.iter().map(|v| -v).collect();
            d0 = dot(&g, &d);
        }
        let a_init = if memory.is_empty() { (1.0 / dot(&g, &g).sqrt()).min(1.0) } else { 1.0 };
        let mut line = Line { obj, x: &x, d: &d, h: opts.h, evaluations: 0 };
        let step = strong_wolfe(&mut line, f, d0, a_init, opts)?;
        tr.evaluations += line.evaluations;
        let Some((a, f_new, g_new)) = step else {
            if memory.is_empty() {
                reason = StopReason::LineSearchFailure;
                break;
            }
            // Stale curvature information: retry along steepest descent.
            memory.clear();
            continue;
        };
        k += 1;
        let s: Vec<f64> = d.iter().map(|v| a * v).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if memory.len() == opts.memory {
                memory.pop_front();
            }
            memory.push_back((s.clone(), y, 1.0 / sy));
        }
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        tr.record(k, &x, f_new);
        iterations = k;
        let settled = opts.stop.small_change(f, f_new);
        f = f_new;
        g = g_new;
        if settled {
            reason = StopReason::FunctionTolerance;
            break;
        }
    }
    if reason == StopReason::IterationLimit && inf_norm(&g) < opts.stop.gtol {
        reason = StopReason::GradientTolerance;
    }
    tr.finish(iterations, reason)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::FnObjective;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn quadratic_bowl_converges_fast() {
        let obj = FnObjective::new(2, |x: &[f64]| x.iter().enumerate().map(|(k, v)| (k + 1) as f64 * v * v).sum());
        let init = QaoaParams::new(vec![1.0, -2.0], vec![0.5, 3.0]).unwrap();
        let r = quasi_newton_minimize(&obj, &init, &LbfgsOptions::default()).unwrap();
        assert!(r.best_value < 1e-8, "{}", r.best_value);
        assert!(r.iterations < 50, "{} iterations", r.iterations);
        assert!(r.converged.converged);
    }

    #[test]
    fn rosenbrock_within_200_iterations() {
        let obj = FnObjective::new(1, rosenbrock);
        let init = QaoaParams::new(vec![-1.2], vec![1.0]).unwrap();
        let r = quasi_newton_minimize(&obj, &init, &LbfgsOptions::default()).unwrap();
        assert!(r.best_value < 1e-6, "{} after {} iterations ({:?})", r.best_value, r.iterations, r.converged);
        assert!(r.iterations <= 200);
    }

    #[test]
    fn wolfe_steps_decrease_monotonically() {
        let obj = FnObjective::new(1, rosenbrock);
        let r = quasi_newton_minimize(&obj, &QaoaParams::new(vec![-1.2], vec![1.0]).unwrap(), &LbfgsOptions::default()).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1].value <= w[0].value);
        }
        assert_eq!(r.best_value, r.trace.last().unwrap().value);
    }

    #[test]
    fn two_loop_reproduces_inverse_hessian_on_quadratic() {
        // With A-conjugate pairs from f = x^T A x / 2 the recursion applies
        // exactly A^-1 in two dimensions.
        let a = [[3.0, 1.0], [1.0, 2.0]];
        let mul = |v: &[f64]| vec![a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]];
        let mut mem = VecDeque::new();
        for s in [vec![1.0, 0.0], vec![1.0, -3.0]] {
            let y = mul(&s);
            let rho = 1.0 / dot(&s, &y);
            mem.push_back((s, y, rho));
        }
        let g = vec![0.7, -0.4];
        let d = direction(&g, &mem);
        let back = mul(&d);
        assert!((back[0] + g[0]).abs() < 1e-12 && (back[1] + g[1]).abs() < 1e-12);
    }

    #[test]
    fn invalid_options() {
        let obj = FnObjective::new(1, rosenbrock);
        let bad = LbfgsOptions { c1: 0.95, ..Default::default() };
        assert!(quasi_newton_minimize(&obj, &QaoaParams::zeros(1), &bad).is_err());
    }
}
