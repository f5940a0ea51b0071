//! Train tree-QAOA angles for a regular tree, depth by depth.
//!
//! ```text
//! cargo run --release --example tree_train -- [degree] [p_max] [adam|bfgs] [seed]
//! ```

use std::time::Instant;

use treeqaoa::optimizer::{tree_train_with, TrainOptions};
use treeqaoa::TreeSpec;

fn main() -> treeqaoa::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let degree: usize = args.first().map_or(Ok(3), |s| s.parse()).expect("degree");
    let p_max: usize = args.get(1).map_or(Ok(4), |s| s.parse()).expect("p_max");
    let method = args.get(2).map_or(Ok(Default::default()), |s| s.parse())?;
    let seed: u64 = args.get(3).map_or(Ok(0), |s| s.parse()).expect("seed");

    // Max-Cut couplings for degree 3, +-1 glass couplings otherwise.
    let spec = if degree == 3 { TreeSpec::maxcut(degree, 1)? } else { TreeSpec::pm_glass(degree, 1)? };
    let start = Instant::now();
    let stages = tree_train_with(&spec, p_max, seed, &TrainOptions::with_method(method))?;
    println!("{:>3} {:>7} {:>9} {:>16} {:>6}  angles (beta | gamma)", "p", "qubits", "peak_rank", "e_g", "evals");
    for s in &stages {
        let r = &s.result;
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
        println!(
            "{:>3} {:>7} {:>9} {:>16.12} {:>6}  {} | {}",
            s.depth,
            s.qubits,
            s.plan.peak_rank,
            s.e_g(),
            r.evaluations,
            fmt(&r.best_params.betas),
            fmt(&r.best_params.gammas)
        );
    }
    eprintln!("total {:.2} s", start.elapsed().as_secs_f64());
    Ok(())
}
