//! Evaluate e_g on the degree-3 tree and cross-check it against a dense
//! simulation of the same cone circuit where that is still possible.
//!
//! cargo run --release --example tree_energy -- [beta] [gamma]

use treeqaoa::rcc::{build_tree_cone, TreeSpec};
use treeqaoa::statevector::{correlation, qaoa_state};
use treeqaoa::tensornet::evaluate_eg;
use treeqaoa::QaoaParams;

fn main() -> treeqaoa::Result<()> {
    let mut args = std::env::args().skip(1);
    let beta: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(-0.3);
    let gamma: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.6);

    for p in 1..=4 {
        let spec = TreeSpec::maxcut(3, p)?;
        let params = QaoaParams::new(vec![beta; p], vec![gamma; p])?;
        let e_g = evaluate_eg(&spec, &params)?;
        let cone = build_tree_cone(&spec)?;
        let dense = if cone.n() <= 20 {
            let psi = qaoa_state(&cone.graph, &params, None)?;
            format!("{:+.12}", correlation(&psi, cone.marked_edge.0, cone.marked_edge.1)?)
        } else {
            "(too large)".to_string()
        };
        println!("p={p} qubits={:>3} e_g={e_g:+.12} dense={dense}  cut fraction={:.6}", cone.n(), 0.5 - 0.5 * e_g);
    }
    Ok(())
}
