//! Quantum annealing with schedules read off trained QAOA angles.
//!
//! `H(s) = A(s) H_M + B(s) H_P` with driver `H_M = -sum_q X_q`, whose ground
//! state is `|+>^n`, integrated with fixed-step RK4 over `t in [0, T]`.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::instance::{EnergySpectrum, SpinGlass};
use crate::statevector::{QaoaParams, StateVector};

/// Largest instance annealed densely.
pub const MAX_ANNEAL_SPINS: usize = 14;

/// Maximum polynomial degree of a fitted ramp.
pub const MAX_FIT_DEGREE: usize = 6;

/// Points used to locate the maximum of a fitted ramp.
const NORMALIZATION_SAMPLES: usize = 1000;

/// Accepted deviation of the state norm from one.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Least-squares polynomial fit; coefficients in increasing order.
pub fn polyfit(points: &[(f64, f64)], degree: usize) -> Result<Vec<f64>> {
    if points.len() < degree + 1 {
        return input_err(format!("degree {degree} fit needs {} points, got {}", degree + 1, points.len()));
    }
    let v = DMatrix::from_fn(points.len(), degree + 1, |r, c| points[r].0.powi(c as i32));
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let coeffs = v
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::Numerical(format!("polynomial fit failed: {e}")))?;
    Ok(coeffs.iter().copied().collect())
}

/// Horner evaluation.
pub fn polyval(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Linear,
    Fitted,
}

impl std::fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScheduleKind::Linear => "linear",
            ScheduleKind::Fitted => "fitted",
        })
    }
}

/// How a fitted schedule was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitInfo {
    pub depth: usize,
    pub degree: usize,
    /// Fewer points than a full-degree fit needs: the polynomial interpolates.
    pub interpolating: bool,
}

/// Ramps `A(s)` and `B(s)` on `s in [0, 1]` as polynomials; evaluation
/// clamps into `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub a_coeffs: Vec<f64>,
    pub b_coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitInfo>,
}

impl Schedule {
    pub fn a(&self, s: f64) -> f64 {
        polyval(&self.a_coeffs, s).clamp(0.0, 1.0)
    }

    pub fn b(&self, s: f64) -> f64 {
        polyval(&self.b_coeffs, s).clamp(0.0, 1.0)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let s: Schedule = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if s.a_coeffs.is_empty() || s.b_coeffs.is_empty() {
            return input_err("schedule has empty coefficient lists");
        }
        Ok(s)
    }
}

/// `A(s) = 1 - s`, `B(s) = s`.
pub fn linear_schedule() -> Schedule {
    Schedule { kind: ScheduleKind::Linear, a_coeffs: vec![1.0, -1.0], b_coeffs: vec![0.0, 1.0], fit: None }
}

/// Degree used for `p` angle pairs.
pub fn fit_degree(p: usize) -> usize {
    MAX_FIT_DEGREE.min(p.saturating_sub(1))
}

fn normalized(mut coeffs: Vec<f64>) -> Result<Vec<f64>> {
    let peak = (0..NORMALIZATION_SAMPLES)
        .map(|k| polyval(&coeffs, k as f64 / (NORMALIZATION_SAMPLES - 1) as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(Error::Numerical(format!("fitted ramp has no positive values (max {peak})")));
    }
    coeffs.iter_mut().for_each(|c| *c /= peak);
    Ok(coeffs)
}

/// Fit `|beta_k|` (for `A`) and `|gamma_k|` (for `B`) against the block
/// midpoints `s_k = (k - 1/2) / p`, then scale each ramp to a maximum of one.
pub fn fit_schedule(params: &QaoaParams) -> Result<Schedule> {
    let p = params.depth();
    if p < 2 {
        return input_err(format!("schedule fit needs at least 2 blocks, got {p}"));
    }
    let degree = fit_degree(p);
    let interpolating = p <= MAX_FIT_DEGREE;
    if interpolating {
        log::warn!("fitting a degree-{degree} schedule to {p} blocks interpolates the angles exactly");
    }
    let abscissa = |k: usize| (k as f64 + 0.5) / p as f64;
    let points = |v: &[f64]| v.iter().enumerate().map(|(k, x)| (abscissa(k), x.abs())).collect::<Vec<_>>();
    Ok(Schedule {
        kind: ScheduleKind::Fitted,
        a_coeffs: normalized(polyfit(&points(&params.betas), degree)?)?,
        b_coeffs: normalized(polyfit(&points(&params.gammas), degree)?)?,
        fit: Some(FitInfo { depth: p, degree, interpolating }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub total_time: f64,
    pub steps: usize,
    pub ground_population: f64,
    pub norm_drift: f64,
    /// `(s, <H(s)>)` samples along the run, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<(f64, f64)>>,
}

/// Minimum RK4 step count: `max(2000, ceil(200 T))`.
pub fn default_steps(total_time: f64) -> usize {
    2000usize.max((200.0 * total_time).ceil() as usize)
}

/// Norm loss the automatic step count aims for over a whole run.
pub const DRIFT_TARGET: f64 = 5e-9;

/// Steps that keep the norm loss of an eigencomponent with frequency `rho`
/// below [`DRIFT_TARGET`]: one RK4 step scales it by
/// `1 - (rho dt)^6 / 144 + O(dt^8)`.
pub fn accuracy_steps(spectral_bound: f64, total_time: f64) -> usize {
    let x = spectral_bound * total_time;
    (x.powi(6) / (144.0 * DRIFT_TARGET)).powf(0.2).ceil() as usize
}

/// Annealing runs on one instance, with its diagonal and ground manifold
/// computed once.
#[derive(Debug, Clone)]
pub struct Annealer {
    n: usize,
    /// `H_P` minus its trace average, which only contributes a global phase
    /// but would otherwise inflate the RK4 error.
    diagonal: Vec<f64>,
    offset: f64,
    spectrum: EnergySpectrum,
}

impl Annealer {
    pub fn new(sg: &SpinGlass) -> Result<Self> {
        if sg.n() > MAX_ANNEAL_SPINS {
            return Err(Error::Capacity(format!(
                "annealing simulation limited to {MAX_ANNEAL_SPINS} spins, got {}",
                sg.n()
            )));
        }
        let mut diagonal = sg.diagonal();
        let offset = diagonal.iter().sum::<f64>() / diagonal.len() as f64;
        diagonal.iter_mut().for_each(|d| *d -= offset);
        Ok(Annealer { n: sg.n(), diagonal, offset, spectrum: sg.spectrum()? })
    }

    pub fn spectrum(&self) -> &EnergySpectrum {
        &self.spectrum
    }

    /// Upper bound on `||H(s)||` for ramps in `[0, 1]`.
    pub fn spectral_bound(&self) -> f64 {
        self.n as f64 + self.diagonal.iter().fold(0.0f64, |m, d| m.max(d.abs()))
    }

    /// [`default_steps`], raised where needed so the norm drift stays below
    /// [`DRIFT_TARGET`].
    pub fn steps_for(&self, total_time: f64) -> usize {
        default_steps(total_time).max(accuracy_steps(self.spectral_bound(), total_time))
    }

    /// `out = -i H(s) psi`.
    fn derivative(&self, a: f64, b: f64, psi: &[Complex64], out: &mut [Complex64]) {
        for (k, (o, x)) in out.iter_mut().zip(psi).enumerate() {
            let mut acc = x * (b * self.diagonal[k]);
            let mut flip_sum = Complex64::new(0.0, 0.0);
            for q in 0..self.n {
                flip_sum += psi[k ^ (1 << q)];
            }
            acc -= flip_sum * a;
            *o = Complex64::new(acc.im, -acc.re);
        }
    }

    fn energy(&self, a: f64, b: f64, psi: &[Complex64]) -> f64 {
        let mut e = b * self.offset;
        for (k, x) in psi.iter().enumerate() {
            e += b * self.diagonal[k] * x.norm_sqr();
            for q in 0..self.n {
                e -= a * (x.conj() * psi[k ^ (1 << q)]).re;
            }
        }
        e
    }

    /// Integrate `i d psi/dt = H(t/T) psi` from `|+>^n` and return the
    /// final population of the classical ground manifold.
    pub fn run(&self, sched: &Schedule, total_time: f64, steps: usize, trajectory: bool) -> Result<AnnealResult> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return input_err(format!("annealing time must be positive, got {total_time}"));
        }
        if steps == 0 {
            return input_err("annealing needs at least one step");
        }
        let mut psi = StateVector::plus(self.n)?;
        let dim = psi.amplitudes().len();
        let dt = total_time / steps as f64;
        let mut k1 = vec![Complex64::new(0.0, 0.0); dim];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut tmp = k1.clone();
        let record_every = (steps / 100).max(1);
        let mut samples = trajectory.then(Vec::new);

        for step in 0..steps {
            let s0 = step as f64 / steps as f64;
            let sh = (step as f64 + 0.5) / steps as f64;
            let s1 = (step + 1) as f64 / steps as f64;
            let y = psi.amplitudes_mut();
            if let Some(samples) = samples.as_mut() {
                if step % record_every == 0 {
                    samples.push((s0, self.energy(sched.a(s0), sched.b(s0), y)));
                }
            }
            self.derivative(sched.a(s0), sched.b(s0), y, &mut k1);
            for i in 0..dim {
                tmp[i] = y[i] + k1[i] * (0.5 * dt);
            }
            let (ah, bh) = (sched.a(sh), sched.b(sh));
            self.derivative(ah, bh, &tmp, &mut k2);
            for i in 0..dim {
                tmp[i] = y[i] + k2[i] * (0.5 * dt);
            }
            self.derivative(ah, bh, &tmp, &mut k3);
            for i in 0..dim {
                tmp[i] = y[i] + k3[i] * dt;
            }
            self.derivative(sched.a(s1), sched.b(s1), &tmp, &mut k4);
            for i in 0..dim {
                y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
            }
        }
        let norm_drift = (psi.norm() - 1.0).abs();
        if norm_drift > NORM_DRIFT_LIMIT {
            return Err(Error::Numerical(format!(
                "norm drifted by {norm_drift:.3e} with {steps} steps at T = {total_time}; increase the step count"
            )));
        }
        if let Some(samples) = samples.as_mut() {
            samples.push((1.0, self.energy(sched.a(1.0), sched.b(1.0), psi.amplitudes())));
        }
        let ground_population = self.spectrum.ground_states.iter().map(|&g| psi.probability(g)).sum::<f64>().min(1.0);
        Ok(AnnealResult { total_time, steps, ground_population, norm_drift, trajectory: samples })
    }
}

/// One annealing run on `sg`; `steps = None` uses [`Annealer::steps_for`].
pub fn anneal_simulate(sg: &SpinGlass, sched: &Schedule, total_time: f64, steps: Option<usize>) -> Result<AnnealResult> {
    let annealer = Annealer::new(sg)?;
    let steps = steps.unwrap_or_else(|| annealer.steps_for(total_time));
    annealer.run(sched, total_time, steps, false)
}
