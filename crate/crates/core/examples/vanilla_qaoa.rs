//! Tree parameters versus per-instance training on small Max-Cut instances.
//!
//! cargo run --release --example vanilla_qaoa -- [n] [M] [p] [seed]

use treeqaoa::experiments::{evaluate_rows, generate_instances, vanilla_rows, GeneratorSpec, VanillaOptions};
use treeqaoa::instance::Family;
use treeqaoa::optimizer::{tree_train_with, Method, TrainOptions};
use treeqaoa::statevector::DisorderMode;
use treeqaoa::TreeSpec;

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn main() -> treeqaoa::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (n, m, p) = (*args.first().unwrap_or(&12), *args.get(1).unwrap_or(&10), *args.get(2).unwrap_or(&3));
    let seed = *args.get(3).unwrap_or(&0) as u64;

    let instances = generate_instances(&GeneratorSpec::regular(Family::MaxCutRegular, n), m, seed)?;
    let stages = tree_train_with(&TreeSpec::maxcut(3, 1)?, p, seed, &TrainOptions::default())?;
    let tree = evaluate_rows(&instances, &[stages[p - 1].result.best_params.clone()], &[], DisorderMode::PerTerm, seed)?;

    for method in [Method::Adam, Method::QuasiNewton] {
        let opts = VanillaOptions { train: TrainOptions::with_method(method), ..Default::default() };
        let rows = vanilla_rows(&instances, p, &opts, seed)?;
        println!("{method:>5} (one random start): mean r = {:.4}", mean(rows.iter().map(|r| r.residual_energy)));
    }
    println!(" tree (no training)      : mean r = {:.4}", mean(tree.iter().map(|r| r.residual_energy)));
    println!(" |+> baseline            : mean r = {:.4}", mean(tree.iter().map(|r| r.baseline_residual)));
    Ok(())
}
