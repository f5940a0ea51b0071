use num_complex::Complex64;

use super::build::{build_network, build_network_with, BuildOptions};
use super::network::TensorNetwork;
use super::plan::{plan_contraction_with, ContractionPlan, PlannerOptions, DEFAULT_MEMORY_CAP, ELEMENT_BYTES};
use super::tensor::{contract_pair, Tensor};
use crate::error::{Error, Result};
use crate::rcc::{build_tree_cone, CausalCone, TreeSpec};
use crate::statevector::QaoaParams;

/// Tolerance on the imaginary part and range of a contracted expectation.
pub const EXPECTATION_TOLERANCE: f64 = 1e-9;

/// Execute `plan` on `net` and return the closed network's value.
pub fn contract(net: TensorNetwork, plan: &ContractionPlan) -> Result<Complex64> {
    contract_with_cap(net, plan, DEFAULT_MEMORY_CAP)
}

pub fn contract_with_cap(
    net: TensorNetwork,
    plan: &ContractionPlan,
    memory_cap_bytes: usize,
) -> Result<Complex64> {
    if !net.is_closed() {
        return Err(Error::Input("network has open bonds".into()));
    }
    plan.validate(&net.shapes())?;
    let mut slots: Vec<Option<Tensor>> = net.into_tensors().into_iter().map(Some).collect();
    for (step, &(a, b)) in plan.steps.iter().enumerate() {
        let ta = slots[a].take().expect("validated plan");
        let tb = slots[b].take().expect("validated plan");
        let out_elems = ta.len() * tb.len() / shared_size(&ta, &tb).pow(2);
        // Permuted copies of both inputs live alongside the result.
        let bytes = (out_elems + ta.len() + tb.len()) * ELEMENT_BYTES;
        if bytes > memory_cap_bytes {
            return Err(Error::Capacity(format!(
                "step {step} (tensors {a} x {b}) needs {bytes} bytes, cap is {memory_cap_bytes}"
            )));
        }
        slots.push(Some(contract_pair(&ta, &tb)));
    }
    let last = slots.into_iter().flatten().next().expect("plan leaves one tensor");
    last.into_scalar()
        .ok_or_else(|| Error::Input("network did not contract to a scalar".into()))
}

fn shared_size(a: &Tensor, b: &Tensor) -> usize {
    a.bonds()
        .iter()
        .zip(a.dims())
        .filter(|(x, _)| b.bonds().contains(x))
        .map(|(_, &d)| d)
        .product()
}

fn checked_expectation(value: Complex64) -> Result<f64> {
    if value.im.abs() >= EXPECTATION_TOLERANCE || value.re.abs() > 1.0 + EXPECTATION_TOLERANCE {
        return Err(Error::Numerical(format!("expectation value {value} is not a valid <ZZ>")));
    }
    Ok(value.re)
}

/// Correlation `<Z_i Z_j>` on the marked edge of an arbitrary cone.
///
/// The bond structure of the network does not depend on the angles, so the
/// plan is computed once and replayed for every evaluation.
#[derive(Debug, Clone)]
pub struct ConeEvaluator {
    cone: CausalCone,
    plan: ContractionPlan,
    options: BuildOptions,
    memory_cap_bytes: usize,
}

impl ConeEvaluator {
    pub fn new(cone: CausalCone, planner: &PlannerOptions) -> Result<Self> {
        Self::with_options(cone, BuildOptions::default(), planner)
    }

    pub fn with_options(cone: CausalCone, options: BuildOptions, planner: &PlannerOptions) -> Result<Self> {
        let probe = build_network_with(&cone, &QaoaParams::zeros(cone.depth), options)?;
        let plan = plan_contraction_with(&probe, planner)?;
        Ok(ConeEvaluator { cone, plan, options, memory_cap_bytes: planner.memory_cap_bytes })
    }

    pub fn cone(&self) -> &CausalCone {
        &self.cone
    }

    pub fn plan(&self) -> &ContractionPlan {
        &self.plan
    }

    pub fn depth(&self) -> usize {
        self.cone.depth
    }

    pub fn value(&self, params: &QaoaParams) -> Result<Complex64> {
        let net = build_network_with(&self.cone, params, self.options)?;
        contract_with_cap(net, &self.plan, self.memory_cap_bytes)
    }

    /// Real expectation value, checked for a vanishing imaginary part.
    pub fn expectation(&self, params: &QaoaParams) -> Result<f64> {
        checked_expectation(self.value(params)?)
    }
}

/// Per-edge correlation `e_g` of the infinite-size limit at `params`.
pub fn evaluate_eg(spec: &TreeSpec, params: &QaoaParams) -> Result<f64> {
    let cone = build_tree_cone(spec)?;
    let net = build_network(&cone, params)?;
    let plan = plan_contraction_with(&net, &PlannerOptions::default())?;
    checked_expectation(contract(net, &plan)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensornet::build::Observable;

    #[test]
    fn zero_angles_give_zero() {
        for spec in [TreeSpec::maxcut(3, 1).unwrap(), TreeSpec::pm_glass(4, 1).unwrap(), TreeSpec::maxcut(3, 2).unwrap()] {
            let v = evaluate_eg(&spec, &QaoaParams::zeros(spec.depth)).unwrap();
            assert!(v.abs() < 1e-15, "{v}");
        }
    }

    #[test]
    fn trace_network_is_one() {
        let cone = build_tree_cone(&TreeSpec::maxcut(3, 2).unwrap()).unwrap();
        let ev = ConeEvaluator::with_options(
            cone,
            BuildOptions { observable: Observable::Trace, unpruned: false },
            &PlannerOptions { restarts: 2, ..Default::default() },
        )
        .unwrap();
        let v = ev.value(&QaoaParams::new(vec![0.4, -1.1], vec![2.3, 0.7]).unwrap()).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn memory_cap_names_the_step() {
        let cone = build_tree_cone(&TreeSpec::maxcut(3, 1).unwrap()).unwrap();
        let params = QaoaParams::new(vec![0.3], vec![0.55]).unwrap();
        let net = build_network(&cone, &params).unwrap();
        let plan = plan_contraction_with(&net, &PlannerOptions::default()).unwrap();
        match contract_with_cap(net, &plan, 64) {
            Err(Error::Capacity(msg)) => assert!(msg.contains("step 0"), "{msg}"),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn checked_expectation_rejects_complex() {
        assert!(checked_expectation(Complex64::new(0.1, 1e-6)).is_err());
        assert!(checked_expectation(Complex64::new(1.5, 0.0)).is_err());
        assert_eq!(checked_expectation(Complex64::new(0.25, 1e-12)).unwrap(), 0.25);
    }
}
