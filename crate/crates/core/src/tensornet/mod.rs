//! Superoperator tensor networks of causal-cone correlation functions and
//! their contraction.

mod build;
mod contract;
mod network;
mod plan;
mod tensor;

pub use build::{
    build_network, build_network_with, rx, rz, superoperator, BuildOptions, Observable,
    MEASURE_TRACE, MEASURE_Z, PLUS,
};
pub use contract::{contract, contract_with_cap, evaluate_eg, ConeEvaluator, EXPECTATION_TOLERANCE};
pub use network::{TensorNetwork, TensorShape};
pub use plan::{
    plan_contraction, plan_contraction_with, ContractionPlan, PlanStats, PlannerOptions,
    DEFAULT_MEMORY_CAP, ELEMENT_BYTES,
};
pub use tensor::{contract_pair, BondId, Tensor};
