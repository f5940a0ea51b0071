use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{adam_minimize, quasi_newton_minimize, AdamOptions, LbfgsOptions, Method, Objective, OptResult, SearchBox, TreeObjective};
use crate::error::{input_err, Result};
use crate::rcc::TreeSpec;
use crate::rng::stream_rng;
use crate::statevector::QaoaParams;
use crate::tensornet::{PlanStats, PlannerOptions};

/// Optimizer choice and settings for training runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub method: Method,
    pub adam: AdamOptions,
    pub lbfgs: LbfgsOptions,
    /// Random starts at the first depth of a ladder.
    pub starts: usize,
    /// Additional random starts at every deeper level.
    pub extra_starts: usize,
    pub planner: PlannerOptions,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            method: Method::QuasiNewton,
            adam: AdamOptions::default(),
            lbfgs: LbfgsOptions::default(),
            starts: 8,
            extra_starts: 0,
            planner: PlannerOptions::default(),
        }
    }
}

impl TrainOptions {
    pub fn with_method(method: Method) -> Self {
        TrainOptions { method, ..Default::default() }
    }
}

/// Run the configured local optimizer once from `init`.
pub fn minimize(obj: &dyn Objective, init: &QaoaParams, opts: &TrainOptions) -> Result<OptResult> {
    match opts.method {
        Method::Adam => adam_minimize(obj, init, &opts.adam),
        Method::QuasiNewton => quasi_newton_minimize(obj, init, &opts.lbfgs),
    }
}

/// Values this close count as the same optimum when choosing among starts.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Optimize from every start in parallel and keep the best run. Runs within
/// [`TIE_TOLERANCE`] of the best value count as ties and the earliest start
/// wins, so callers can list preferred starts first. Evaluations are summed
/// over all runs.
pub fn multi_start(obj: &dyn Objective, inits: &[QaoaParams], opts: &TrainOptions) -> Result<OptResult> {
    if inits.is_empty() {
        return input_err("multi-start needs at least one initial point");
    }
    let runs: Vec<OptResult> = inits.par_iter().map(|x| minimize(obj, x, opts)).collect::<Result<_>>()?;
    let evaluations = runs.iter().map(|r| r.evaluations).sum();
    let lowest = runs.iter().map(|r| r.best_value).fold(f64::INFINITY, f64::min);
    let mut best = runs
        .into_iter()
        .find(|r| r.best_value <= lowest + TIE_TOLERANCE)
        .expect("non-empty");
    best.evaluations = evaluations;
    Ok(best)
}

/// Least-squares line through `(k, values[k-1])`, evaluated at `k = len + 1`.
fn extrapolate(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return values.first().copied().unwrap_or(0.0);
    }
    let mean_k = (n + 1.0) / 2.0;
    let mean_v = values.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in values.iter().enumerate() {
        let dk = (i + 1) as f64 - mean_k;
        sxy += dk * (v - mean_v);
        sxx += dk * dk;
    }
    mean_v + sxy / sxx * (n + 1.0 - mean_k)
}

/// Depth `p + 1` initial guess: the previous angles plus one new block on
/// the best-fit line through each angle sequence, clipped into `bounds`.
pub fn warm_start_extend(prev: &QaoaParams, bounds: &SearchBox) -> QaoaParams {
    let mut next = prev.clone();
    let (b0, b1) = bounds.beta_range();
    let (g0, g1) = bounds.gamma_range();
    next.betas.push(extrapolate(&prev.betas).clamp(b0, b1));
    next.gammas.push(extrapolate(&prev.gammas).clamp(g0, g1));
    next
}

/// Small-angle start on the annealing-like branch: a short, slow ramp with
/// the mixer angle decreasing and the problem angle increasing in magnitude.
pub fn annealing_start(depth: usize, bounds: &SearchBox) -> QaoaParams {
    let scale = 0.1;
    let p = depth as f64;
    let betas = (0..depth).map(|k| -scale * bounds.beta_period / PI * (1.0 - (k as f64 + 0.5) / p)).collect();
    let gammas = (0..depth).map(|k| scale * bounds.gamma_period / PI * (k as f64 + 0.5) / p).collect();
    QaoaParams { betas, gammas }
}

/// Previous angles followed by an identity block; reproduces the shallower
/// value exactly and so anchors the ladder's monotonicity.
fn nested_start(prev: &QaoaParams) -> QaoaParams {
    let mut next = prev.clone();
    next.betas.push(0.0);
    next.gammas.push(0.0);
    next
}

/// One rung of a tree-training ladder.
#[derive(Debug, Clone, Serialize)]
pub struct TreeStage {
    pub depth: usize,
    pub qubits: usize,
    pub plan: PlanStats,
    pub result: OptResult,
}

impl TreeStage {
    pub fn e_g(&self) -> f64 {
        self.result.best_value
    }
}

/// Optimize `e_g` on the tree for `p = 1..=p_max`, each depth warm-started
/// from the previous optimum.
pub fn tree_train_with(spec: &TreeSpec, p_max: usize, seed: u64, opts: &TrainOptions) -> Result<Vec<TreeStage>> {
    if p_max == 0 {
        return input_err("p_max must be at least 1");
    }
    if opts.starts == 0 {
        return input_err("at least one start is required at depth 1");
    }
    let bounds = SearchBox::for_coupling(spec.coupling);
    let mut stages: Vec<TreeStage> = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        let obj = TreeObjective::new(&spec.with_depth(p)?, &opts.planner)?;
        let mut rng = stream_rng(seed, p as u64);
        let mut inits = Vec::new();
        let random = match stages.last() {
            None => {
                inits.push(annealing_start(1, &bounds));
                opts.starts
            }
            Some(prev) => {
                let prev = &prev.result.best_params;
                inits.push(warm_start_extend(prev, &bounds));
                inits.push(nested_start(prev));
                opts.extra_starts
            }
        };
        inits.extend((0..random).map(|_| bounds.sample(p, &mut rng)));
        let mut result = multi_start(&obj, &inits, opts)?;
        result.best_params = bounds.fold(&result.best_params);
        stages.push(TreeStage {
            depth: p,
            qubits: obj.evaluator().cone().n(),
            plan: obj.evaluator().plan().stats(),
            result,
        });
    }
    Ok(stages)
}

/// [`tree_train_with`] using default settings for `method`.
pub fn tree_train(spec: &TreeSpec, p_max: usize, method: Method, seed: u64) -> Result<Vec<OptResult>> {
    let stages = tree_train_with(spec, p_max, seed, &TrainOptions::with_method(method))?;
    Ok(stages.into_iter().map(|s| s.result).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warm_start_examples() {
        let b = SearchBox::for_coupling(0.5);
        let one = warm_start_extend(&QaoaParams::new(vec![0.5], vec![0.5]).unwrap(), &b);
        assert_eq!((one.betas[1], one.gammas[1]), (0.5, 0.5));
        let two = warm_start_extend(&QaoaParams::new(vec![0.6, 0.4], vec![0.1, 0.2]).unwrap(), &b);
        assert!((two.betas[2] - 0.2).abs() < 1e-12);
        assert!((two.gammas[2] - 0.3).abs() < 1e-12);
        let clipped = warm_start_extend(&QaoaParams::new(vec![-1.0, -1.5], vec![2.0, 3.0]).unwrap(), &b);
        assert_eq!(clipped.betas[2], -PI / 2.0);
        assert_eq!(clipped.gammas[2], PI);
        // least squares, not the last two points
        let three = warm_start_extend(&QaoaParams::new(vec![0.0, 0.5, 0.5], vec![0.0; 3]).unwrap(), &b);
        assert!((three.betas[3] - 5.0 / 6.0).abs() < 1e-12);
    }

    /// `<Z Z>` on a triangle-free `d`-regular graph at one block with uniform
    /// coupling `j`, in the convention `exp(-i gamma j Z Z)`, `exp(-i beta X)`.
    fn depth_one_closed_form(degree: i32, j: f64, beta: f64, gamma: f64) -> f64 {
        let t = 2.0 * gamma * j;
        (4.0 * beta).sin() * t.sin() * t.cos().powi(degree - 1)
    }

    #[test]
    fn closed_form_oracle_matches_tree_network() {
        let obj = TreeObjective::new(&TreeSpec::maxcut(3, 1).unwrap(), &PlannerOptions::default()).unwrap();
        for (b, g) in [(0.3, 0.55), (1.1, 2.9), (-0.4, 4.0)] {
            let tn = obj.evaluate(&QaoaParams::new(vec![b], vec![g]).unwrap()).unwrap();
            assert!((tn - depth_one_closed_form(3, 0.5, b, g)).abs() < 1e-12, "{tn}");
        }
    }

    #[test]
    fn depth_one_training_reaches_grid_minimum() {
        let step = PI / 400.0;
        let mut grid_min = f64::INFINITY;
        for bi in 0..400 {
            for gi in 0..800 {
                grid_min = grid_min.min(depth_one_closed_form(3, 0.5, bi as f64 * step, gi as f64 * step));
            }
        }
        let spec = TreeSpec::maxcut(3, 1).unwrap();
        let r = &tree_train(&spec, 1, Method::QuasiNewton, 11).unwrap()[0];
        assert!(r.best_value <= grid_min + 1e-4, "{} vs grid {grid_min}", r.best_value);
        assert!(r.best_value >= grid_min - 1e-4);
        // from (0.1, 0.1) as well
        let obj = TreeObjective::new(&spec, &PlannerOptions::default()).unwrap();
        let single = quasi_newton_minimize(&obj, &QaoaParams::new(vec![0.1], vec![0.1]).unwrap(), &LbfgsOptions::default()).unwrap();
        assert!((single.best_value - grid_min).abs() < 1e-4, "{}", single.best_value);
    }

    #[test]
    fn ladder_is_monotone_and_deterministic() {
        let spec = TreeSpec::maxcut(3, 1).unwrap();
        let a = tree_train_with(&spec, 3, 5, &TrainOptions::default()).unwrap();
        for w in a.windows(2) {
            assert!(w[1].e_g() < w[0].e_g(), "{} then {}", w[0].e_g(), w[1].e_g());
        }
        let b = tree_train_with(&spec, 3, 5, &TrainOptions::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.result.best_params, y.result.best_params);
        }
        assert_eq!(a.iter().map(|s| s.qubits).collect::<Vec<_>>(), vec![6, 14, 30]);
    }

    #[test]
    fn multi_start_keeps_best_and_counts_all() {
        let obj = crate::optimizer::FnObjective::new(1, |x: &[f64]| (x[0] - 1.0).powi(2) * (x[0] + 1.0).powi(2) + 0.1 * x[0] + x[1] * x[1]);
        let inits = [QaoaParams::new(vec![0.9], vec![0.0]).unwrap(), QaoaParams::new(vec![-0.9], vec![0.0]).unwrap()];
        let opts = TrainOptions::default();
        let r = multi_start(&obj, &inits, &opts).unwrap();
        assert!(r.best_params.betas[0] < 0.0);
        let singles: usize = inits.iter().map(|x| minimize(&obj, x, &opts).unwrap().evaluations).sum();
        assert_eq!(r.evaluations, singles);
        assert!(multi_start(&obj, &[], &opts).is_err());
    }
}
