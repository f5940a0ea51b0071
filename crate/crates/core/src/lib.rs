//! Tree-QAOA: QAOA control parameters inferred classically from the
//! infinite-size limit of regular problem graphs.
//!
//! The per-edge energy of a QAOA circuit on a large graph only depends on the
//! reverse causal cone of the edge. For random regular graphs that cone is a
//! tree, and its correlation function is evaluated by contracting a
//! superoperator tensor network whose cost grows with the circuit depth but
//! not with the graph size. Optimizing that value yields parameters that are
//! reused on every concrete instance.
//!
//! Modules:
//! * [`instance`]: spin-glass instances, random families, exact spectra.
//! * [`rcc`]: reverse causal cones and regular trees.
//! * [`tensornet`]: network construction, greedy planning, contraction.
//! * [`statevector`]: dense reference simulator, disorder injection.
//! * [`optimizer`]: Adam, L-BFGS, warm starts, tree training.
//! * [`anneal`]: schedules fitted to QAOA angles and annealing simulation.
//! * [`experiments`]: end-to-end runs with persisted inputs and outputs.

pub mod anneal;
pub mod error;
pub mod experiments;
pub mod instance;
pub mod optimizer;
pub mod rcc;
pub mod rng;
pub mod statevector;
pub mod tensornet;

pub use error::{Error, Result};
pub use instance::{Assignment, EnergySpectrum, SpinGlass};
pub use rcc::{build_tree_cone, reverse_causal_cone, CausalCone, TreeSpec};
pub use statevector::{QaoaParams, StateVector};
