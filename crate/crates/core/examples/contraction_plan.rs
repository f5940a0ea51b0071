//! Plan statistics and timing of the e_g contraction for growing depth.
//!
//! cargo run --release --example contraction_plan -- [max_depth] [degree]

use std::time::Instant;

use treeqaoa::rcc::{build_tree_cone, TreeSpec};
use treeqaoa::tensornet::{ConeEvaluator, PlannerOptions};
use treeqaoa::QaoaParams;

fn main() -> treeqaoa::Result<()> {
    let mut args = std::env::args().skip(1);
    let max_depth: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let degree: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);

    println!("{:>2} {:>6} {:>8} {:>10} {:>12} {:>10} {:>10}", "p", "qubits", "tensors", "peak_rank", "flops", "plan_s", "eval_s");
    for p in 1..=max_depth {
        let spec = TreeSpec::maxcut(degree, p)?;
        let cone = build_tree_cone(&spec)?;
        let qubits = cone.n();
        let t0 = Instant::now();
        let ev = ConeEvaluator::new(cone, &PlannerOptions { restarts: 8, seed: 1, ..Default::default() })?;
        let plan_s = t0.elapsed().as_secs_f64();
        let params = QaoaParams::new(
            (0..p).map(|k| 0.5 - 0.3 * k as f64 / p as f64).collect(),
            (0..p).map(|k| 0.4 + 0.6 * k as f64 / p as f64).collect(),
        )?;
        let t1 = Instant::now();
        let e_g = ev.expectation(&params)?;
        let stats = ev.plan().stats();
        println!(
            "{p:>2} {qubits:>6} {:>8} {:>10} {:>12.3e} {plan_s:>10.3} {:>10.3}   e_g = {e_g:+.12}",
            stats.tensors,
            stats.peak_rank,
            stats.flops,
            t1.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
