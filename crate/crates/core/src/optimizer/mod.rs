//! Classical outer loops: Adam, L-BFGS, warm-started depth ladders.
//!
//! Gradients are central finite differences. Every optimizer keeps the best
//! iterate it has seen, so its result never exceeds the starting value.

mod adam;
mod lbfgs;
mod objective;
mod train;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::statevector::QaoaParams;

pub use adam::{adam_minimize, AdamOptions};
pub use lbfgs::{quasi_newton_minimize, LbfgsOptions};
pub use objective::{
    Backend, FnObjective, InstanceObjective, Objective, ObjectiveDescriptor, SearchBox, Target,
    TreeObjective,
};
pub use train::{
    annealing_start, minimize, multi_start, tree_train, tree_train_with, warm_start_extend,
    TrainOptions, TreeStage, TIE_TOLERANCE,
};

/// Default finite-difference step, in radians.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Which local optimizer to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Adam,
    #[default]
    QuasiNewton,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adam" => Ok(Method::Adam),
            "bfgs" | "lbfgs" | "l-bfgs" | "quasi_newton" | "quasi-newton" => Ok(Method::QuasiNewton),
            other => input_err(format!("unknown method {other:?} (expected adam or bfgs)")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Method::Adam => "adam",
            Method::QuasiNewton => "bfgs",
        })
    }
}

/// Shared stopping rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingCriteria {
    /// Relative change of the objective between iterations.
    pub ftol: f64,
    /// Infinity norm of the gradient.
    pub gtol: f64,
    pub max_iters: usize,
}

impl Default for StoppingCriteria {
    fn default() -> Self {
        StoppingCriteria { ftol: 1e-9, gtol: 1e-6, max_iters: 300 }
    }
}

impl StoppingCriteria {
    fn small_change(&self, before: f64, after: f64) -> bool {
        (before - after).abs() <= self.ftol * before.abs().max(after.abs()).max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    FunctionTolerance,
    GradientTolerance,
    IterationLimit,
    /// No step satisfying the line-search conditions was found.
    LineSearchFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergence {
    pub converged: bool,
    pub reason: StopReason,
}

impl From<StopReason> for Convergence {
    fn from(reason: StopReason) -> Self {
        let converged = matches!(reason, StopReason::FunctionTolerance | StopReason::GradientTolerance);
        Convergence { converged, reason }
    }
}

/// Objective value at one iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub value: f64,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_params: QaoaParams,
    pub best_value: f64,
    pub trace: Vec<TracePoint>,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: Convergence,
}

/// Running best-seen bookkeeping shared by the optimizers.
struct Tracker {
    best: Vec<f64>,
    best_value: f64,
    trace: Vec<TracePoint>,
    evaluations: usize,
}

impl Tracker {
    fn new(x: &[f64], value: f64) -> Self {
        Tracker {
            best: x.to_vec(),
            best_value: value,
            trace: vec![TracePoint { iteration: 0, value, params: x.to_vec() }],
            evaluations: 1,
        }
    }

    fn record(&mut self, iteration: usize, x: &[f64], value: f64) {
        if value < self.best_value {
            self.best_value = value;
            self.best = x.to_vec();
        }
        self.trace.push(TracePoint { iteration, value, params: x.to_vec() });
    }

    fn finish(self, iterations: usize, reason: StopReason) -> Result<OptResult> {
        Ok(OptResult {
            best_params: QaoaParams::from_flat(&self.best)?,
            best_value: self.best_value,
            trace: self.trace,
            evaluations: self.evaluations,
            iterations,
            converged: reason.into(),
        })
    }
}

fn eval_flat(obj: &dyn Objective, x: &[f64]) -> Result<f64> {
    let v = obj.evaluate(&QaoaParams::from_flat(x)?)?;
    if !v.is_finite() {
        return Err(Error::Numerical(format!("objective returned {v} at {x:?}")));
    }
    Ok(v)
}

fn gradient_flat(obj: &dyn Objective, x: &[f64], h: f64) -> Result<Vec<f64>> {
    (0..x.len())
        .into_par_iter()
        .map(|k| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[k] += h;
            down[k] -= h;
            Ok((eval_flat(obj, &up)? - eval_flat(obj, &down)?) / (2.0 * h))
        })
        .collect()
}

/// Central-difference gradient in flat order `[d/dbeta..., d/dgamma...]`.
pub fn finite_diff_gradient(obj: &dyn Objective, params: &QaoaParams, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return input_err(format!("finite-difference step must be positive, got {h}"));
    }
    gradient_flat(obj, &params.to_flat(), h)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Write `iteration,value,beta_1..beta_p,gamma_1..gamma_p` rows.
pub fn write_trace_csv<W: Write>(out: W, trace: &[TracePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = trace.first().map_or(0, |t| t.params.len());
    let p = dim / 2;
    let mut header = vec!["iteration".to_string(), "value".to_string()];
    header.extend((1..=p).map(|k| format!("beta_{k}")));
    header.extend((1..=p).map(|k| format!("gamma_{k}")));
    w.write_record(&header)?;
    for t in trace {
        let mut row = vec![t.iteration.to_string(), format!("{:.17e}", t.value)];
        row.extend(t.params.iter().map(|x| format!("{x:.17e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
