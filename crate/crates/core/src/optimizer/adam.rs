use serde::{Deserialize, Serialize};

use super::{eval_flat, gradient_flat, inf_norm, Objective, OptResult, StopReason, StoppingCriteria, Tracker, DEFAULT_FD_STEP};
use crate::error::{input_err, Result};
use crate::statevector::QaoaParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamOptions {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Finite-difference step.
    pub h: f64,
    pub stop: StoppingCriteria,
}

impl Default for AdamOptions {
    fn default() -> Self {
        AdamOptions {
            lr: 0.02,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            h: DEFAULT_FD_STEP,
            stop: StoppingCriteria::default(),
        }
    }
}

/// Adam with bias-corrected moments on finite-difference gradients.
///
/// Returns the best iterate seen, not the last one.
pub fn adam_minimize(obj: &dyn Objective, init: &QaoaParams, opts: &AdamOptions) -> Result<OptResult> {
    if opts.stop.max_iters == 0 {
        return input_err("adam needs at least one iteration");
    }
    let mut x = init.to_flat();
    let dim = x.len();
    let mut f = eval_flat(obj, &x)?;
    let mut tr = Tracker::new(&x, f);
    let mut m = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let mut reason = StopReason::IterationLimit;
    let mut iterations = 0;

    for t in 1..=opts.stop.max_iters {
        let g = gradient_flat(obj, &x, opts.h)?;
        tr.evaluations += 2 * dim;
        if inf_norm(&g) < opts.stop.gtol {
            reason = StopReason::GradientTolerance;
            break;
        }
        let c1 = 1.0 - opts.beta1.powi(t as i32);
        let c2 = 1.0 - opts.beta2.powi(t as i32);
        for k in 0..dim {
            m[k] = opts.beta1 * m[k] + (1.0 - opts.beta1) * g[k];
            v[k] = opts.beta2 * v[k] + (1.0 - opts.beta2) * g[k] * g[k];
            x[k] -= opts.lr * (m[k] / c1) / ((v[k] / c2).sqrt() + opts.eps);
        }
        let next = eval_flat(obj, &x)?;
        tr.evaluations += 1;
        tr.record(t, &x, next);
        iterations = t;
        let settled = opts.stop.small_change(f, next);
        f = next;
        if settled {
            reason = StopReason::FunctionTolerance;
            break;
        }
    }
    tr.finish(iterations, reason)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::FnObjective;

    #[test]
    fn zero_gradient_leaves_params() {
        let obj = FnObjective::new(1, |_: &[f64]| 0.25);
        let init = QaoaParams::new(vec![0.3], vec![0.9]).unwrap();
        let r = adam_minimize(&obj, &init, &AdamOptions::default()).unwrap();
        assert_eq!(r.best_params, init);
        assert_eq!(r.best_value, 0.25);
        assert_eq!(r.converged.reason, StopReason::GradientTolerance);
        assert!(r.converged.converged);
    }

    #[test]
    fn quadratic_bowl() {
        let obj = FnObjective::new(2, |x: &[f64]| x.iter().map(|v| v * v).sum());
        let init = QaoaParams::new(vec![1.0; 2], vec![1.0; 2]).unwrap();
        let opts = AdamOptions { lr: 0.05, stop: StoppingCriteria { max_iters: 500, ..Default::default() }, ..Default::default() };
        let r = adam_minimize(&obj, &init, &opts).unwrap();
        assert!(r.best_value < 1e-3, "{}", r.best_value);
        assert!(r.trace.len() >= 2);
    }

    #[test]
    fn best_seen_never_exceeds_start() {
        // Large learning rate makes Adam overshoot; the result must not.
        let obj = FnObjective::new(1, |x: &[f64]| (3.0 * x[0]).cos() + x[1] * x[1]);
        let init = QaoaParams::new(vec![1.0], vec![0.1]).unwrap();
        let opts = AdamOptions { lr: 2.0, stop: StoppingCriteria { max_iters: 20, ..Default::default() }, ..Default::default() };
        let r = adam_minimize(&obj, &init, &opts).unwrap();
        assert!(r.best_value <= r.trace[0].value);
        let again = obj.evaluate(&r.best_params).unwrap();
        assert_eq!(again, r.best_value);
    }

    #[test]
    fn zero_iterations_rejected() {
        let obj = FnObjective::new(1, |_: &[f64]| 0.0);
        let opts = AdamOptions { stop: StoppingCriteria { max_iters: 0, ..Default::default() }, ..Default::default() };
        assert!(adam_minimize(&obj, &QaoaParams::zeros(1), &opts).is_err());
    }
}
