use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::instance::SpinGlass;
use crate::rcc::{build_tree_cone, TreeSpec};
use crate::statevector::{DisorderRealization, QaoaParams, QaoaSimulator};
use crate::tensornet::{ConeEvaluator, PlannerOptions};

/// Where an objective's values come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    TreeTensorNetwork,
    Statevector,
    Function,
}

/// What an objective measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Per-edge correlation on the infinite-size tree.
    EdgeCorrelation,
    /// `<H_P>` of a concrete instance.
    InstanceEnergy,
    /// `<H_P>` of a concrete instance prepared by a disturbed circuit.
    DisturbedEnergy,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveDescriptor {
    pub backend: Backend,
    pub target: Target,
    pub depth: usize,
    pub qubits: usize,
}

/// A deterministic function of the QAOA angles to be minimized.
pub trait Objective: Sync {
    fn evaluate(&self, params: &QaoaParams) -> Result<f64>;
    fn descriptor(&self) -> ObjectiveDescriptor;

    fn depth(&self) -> usize {
        self.descriptor().depth
    }
}

/// `e_g` of a regular tree, contracted with a plan computed once up front.
///
/// The value is `sign(J) <Z_1 Z_2>`, so minimizing it minimizes the energy
/// per edge for either sign of the uniform coupling.
#[derive(Debug, Clone)]
pub struct TreeObjective {
    spec: TreeSpec,
    evaluator: ConeEvaluator,
}

impl TreeObjective {
    pub fn new(spec: &TreeSpec, planner: &PlannerOptions) -> Result<Self> {
        let cone = build_tree_cone(spec)?;
        let evaluator = ConeEvaluator::new(cone, planner)?;
        Ok(TreeObjective { spec: *spec, evaluator })
    }

    pub fn spec(&self) -> &TreeSpec {
        &self.spec
    }

    pub fn evaluator(&self) -> &ConeEvaluator {
        &self.evaluator
    }
}

impl Objective for TreeObjective {
    fn evaluate(&self, params: &QaoaParams) -> Result<f64> {
        Ok(self.spec.coupling.signum() * self.evaluator.expectation(params)?)
    }

    fn descriptor(&self) -> ObjectiveDescriptor {
        ObjectiveDescriptor {
            backend: Backend::TreeTensorNetwork,
            target: Target::EdgeCorrelation,
            depth: self.spec.depth,
            qubits: self.evaluator.cone().n(),
        }
    }
}

/// Energy expectation of a concrete instance by dense simulation.
#[derive(Debug, Clone)]
pub struct InstanceObjective {
    sim: QaoaSimulator,
    depth: usize,
}

impl InstanceObjective {
    pub fn new(sg: SpinGlass, depth: usize) -> Result<Self> {
        Ok(InstanceObjective { sim: QaoaSimulator::new(sg)?, depth })
    }

    pub fn with_disorder(sg: SpinGlass, depth: usize, disorder: DisorderRealization) -> Result<Self> {
        Ok(InstanceObjective { sim: QaoaSimulator::with_disorder(sg, disorder)?, depth })
    }

    pub fn simulator(&self) -> &QaoaSimulator {
        &self.sim
    }
}

impl Objective for InstanceObjective {
    fn evaluate(&self, params: &QaoaParams) -> Result<f64> {
        if params.depth() != self.depth {
            return input_err(format!("expected depth {}, got {}", self.depth, params.depth()));
        }
        self.sim.energy(params)
    }

    fn descriptor(&self) -> ObjectiveDescriptor {
        ObjectiveDescriptor {
            backend: Backend::Statevector,
            target: if self.sim.disorder().is_some() {
                Target::DisturbedEnergy
            } else {
                Target::InstanceEnergy
            },
            depth: self.depth,
            qubits: self.sim.instance().n(),
        }
    }
}

/// Plain function of the flattened angle vector `[betas..., gammas...]`.
pub struct FnObjective<F> {
    f: F,
    depth: usize,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(depth: usize, f: F) -> Self {
        FnObjective { f, depth }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn evaluate(&self, params: &QaoaParams) -> Result<f64> {
        Ok((self.f)(&params.to_flat()))
    }

    fn descriptor(&self) -> ObjectiveDescriptor {
        ObjectiveDescriptor {
            backend: Backend::Function,
            target: Target::Custom,
            depth: self.depth,
            qubits: 0,
        }
    }
}

/// One period of the landscape per block, centred on zero:
/// `beta in [-beta_period/2, beta_period/2)`, likewise for `gamma`.
///
/// Centring keeps the small-angle, annealing-like branch (`beta < 0`,
/// `gamma > 0` in this sign convention) in one piece, so line extrapolation
/// of angle sequences does not jump across a period boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub beta_period: f64,
    pub gamma_period: f64,
}

fn centred(x: f64, period: f64) -> f64 {
    (x + 0.5 * period).rem_euclid(period) - 0.5 * period
}

impl SearchBox {
    /// Box for a Hamiltonian whose terms all have magnitude `|coupling|`:
    /// periods `pi` in beta and `pi / |coupling|` in gamma.
    pub fn for_coupling(coupling: f64) -> Self {
        SearchBox { beta_period: PI, gamma_period: PI / coupling.abs() }
    }

    /// The gamma period is exact when all couplings and fields share one
    /// magnitude; otherwise the box is only a sampling region.
    pub fn for_instance(sg: &SpinGlass) -> Self {
        let smallest = sg
            .edges()
            .iter()
            .map(|e| e.coupling.abs())
            .chain(sg.fields().iter().map(|h| h.abs()).filter(|&h| h > 0.0))
            .fold(f64::INFINITY, f64::min);
        if smallest.is_finite() {
            Self::for_coupling(smallest)
        } else {
            Self::for_coupling(1.0)
        }
    }

    pub fn beta_range(&self) -> (f64, f64) {
        (-0.5 * self.beta_period, 0.5 * self.beta_period)
    }

    pub fn gamma_range(&self) -> (f64, f64) {
        (-0.5 * self.gamma_period, 0.5 * self.gamma_period)
    }

    /// Uniform point of the box.
    pub fn sample(&self, depth: usize, rng: &mut impl Rng) -> QaoaParams {
        let (b0, b1) = self.beta_range();
        let (g0, g1) = self.gamma_range();
        QaoaParams {
            betas: (0..depth).map(|_| rng.random_range(b0..b1)).collect(),
            gammas: (0..depth).map(|_| rng.random_range(g0..g1)).collect(),
        }
    }

    /// Reduce every angle into the box. An exact symmetry of the landscape
    /// only when the periods are exact.
    pub fn fold(&self, params: &QaoaParams) -> QaoaParams {
        QaoaParams {
            betas: params.betas.iter().map(|&b| centred(b, self.beta_period)).collect(),
            gammas: params.gammas.iter().map(|&g| centred(g, self.gamma_period)).collect(),
        }
    }

    /// Smallest box implied by the exact symmetries of `sg`'s QAOA energy:
    ///
    /// * without fields, `X^n` commutes with `H_P` and fixes `|+>`, so each
    ///   `beta_k` has period `pi / 2`;
    /// * with one coupling magnitude `c` and no fields, each `gamma_k` has
    ///   period `pi / c`, halved again when every vertex has even degree
    ///   (the product of all `Z_i Z_j` is then the identity).
    pub fn symmetry_reduced(sg: &SpinGlass) -> Self {
        let mut b = Self::for_instance(sg);
        if !sg.has_fields() {
            b.beta_period = 0.5 * PI;
            let c = sg.edges().first().map_or(1.0, |e| e.coupling.abs());
            let uniform = sg.edges().iter().all(|e| e.coupling.abs() == c);
            if uniform && sg.degrees().iter().all(|d| d % 2 == 0) {
                b.gamma_period = 0.5 * PI / c;
            }
        }
        b
    }

    /// Canonical representative under folding and time reversal
    /// `(beta, gamma) -> (-beta, -gamma)`: angles in the box with
    /// `gamma_1 >= 0`.
    pub fn canonicalize(&self, params: &QaoaParams) -> QaoaParams {
        let folded = self.fold(params);
        match folded.gammas.first() {
            Some(&g) if g < 0.0 => self.fold(&folded.negated()),
            _ => folded,
        }
    }

    /// Clamp every angle into the box.
    pub fn clip(&self, params: &QaoaParams) -> QaoaParams {
        let (b0, b1) = self.beta_range();
        let (g0, g1) = self.gamma_range();
        QaoaParams {
            betas: params.betas.iter().map(|b| b.clamp(b0, b1)).collect(),
            gammas: params.gammas.iter().map(|g| g.clamp(g0, g1)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::gen_regular_maxcut;
    use crate::rng::rng_from_seed;
    use crate::statevector::{energy_expectation, qaoa_state};

    #[test]
    fn descriptors() {
        let t = TreeObjective::new(&TreeSpec::maxcut(3, 1).unwrap(), &PlannerOptions::default()).unwrap();
        let d = t.descriptor();
        assert_eq!((d.backend, d.target, d.depth, d.qubits), (Backend::TreeTensorNetwork, Target::EdgeCorrelation, 1, 6));
        let sg = gen_regular_maxcut(8, 3, 0).unwrap();
        let i = InstanceObjective::new(sg, 2).unwrap();
        assert_eq!(i.descriptor().target, Target::InstanceEnergy);
        assert!(i.evaluate(&QaoaParams::zeros(1)).is_err());
    }

    #[test]
    fn instance_objective_is_energy() {
        let sg = gen_regular_maxcut(8, 3, 2).unwrap();
        let params = QaoaParams::new(vec![0.2, 0.4], vec![1.0, 0.3]).unwrap();
        let obj = InstanceObjective::new(sg.clone(), 2).unwrap();
        let want = energy_expectation(&sg, &qaoa_state(&sg, &params, None).unwrap()).unwrap();
        assert!((obj.evaluate(&params).unwrap() - want).abs() < 1e-12);
        // Zero angles leave |+>, whose energy is the constant for Max-Cut.
        assert!((obj.evaluate(&QaoaParams::zeros(2)).unwrap() - sg.constant()).abs() < 1e-12);
    }

    #[test]
    fn search_box_sampling_and_folding() {
        let b = SearchBox::for_coupling(0.5);
        assert!((b.gamma_period - 2.0 * PI).abs() < 1e-15);
        let mut rng = rng_from_seed(1);
        for _ in 0..100 {
            let p = b.sample(3, &mut rng);
            assert!(p.betas.iter().all(|x| (-PI / 2.0..PI / 2.0).contains(x)));
            assert!(p.gammas.iter().all(|x| (-PI..PI).contains(x)));
        }
        let f = b.fold(&QaoaParams::new(vec![2.0], vec![7.0]).unwrap());
        assert!((f.betas[0] - (2.0 - PI)).abs() < 1e-15);
        assert!((f.gammas[0] - (7.0 - 2.0 * PI)).abs() < 1e-15);
        let c = b.clip(&QaoaParams::new(vec![2.0], vec![-7.0]).unwrap());
        assert_eq!((c.betas[0], c.gammas[0]), (PI / 2.0, -PI));
        let sg = gen_regular_maxcut(8, 3, 0).unwrap();
        assert_eq!(SearchBox::for_instance(&sg), b);
    }

    #[test]
    fn symmetry_reduced_box_preserves_energy() {
        let mut rng = rng_from_seed(8);
        for sg in [gen_regular_maxcut(8, 3, 1).unwrap(), crate::instance::gen_regular_pm_glass(8, 4, 2).unwrap()] {
            let b = SearchBox::symmetry_reduced(&sg);
            let obj = InstanceObjective::new(sg.clone(), 3).unwrap();
            for _ in 0..5 {
                let x = SearchBox::for_coupling(1.0).sample(3, &mut rng);
                let x = QaoaParams {
                    betas: x.betas.iter().map(|v| 3.0 * v).collect(),
                    gammas: x.gammas.iter().map(|v| 3.0 * v).collect(),
                };
                let c = b.canonicalize(&x);
                assert!(c.gammas[0] >= 0.0);
                assert!(c.betas.iter().all(|v| v.abs() <= b.beta_period / 2.0));
                let (e1, e2) = (obj.evaluate(&x).unwrap(), obj.evaluate(&c).unwrap());
                assert!((e1 - e2).abs() < 1e-10, "{e1} vs {e2}");
            }
        }
        let glass = crate::instance::gen_regular_pm_glass(10, 4, 0).unwrap();
        assert_eq!(SearchBox::symmetry_reduced(&glass).gamma_period, PI / 2.0);
        assert_eq!(SearchBox::symmetry_reduced(&gen_regular_maxcut(8, 3, 1).unwrap()).gamma_period, 2.0 * PI);
    }
}
