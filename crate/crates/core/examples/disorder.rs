//! Residual energy of tree parameters under coherent over/under-rotation.
//!
//! cargo run --release --example disorder -- [n] [M] [p] [seed]

use treeqaoa::experiments::{evaluate_rows, generate_instances, mean_variance, GeneratorSpec};
use treeqaoa::instance::Family;
use treeqaoa::optimizer::{tree_train_with, TrainOptions};
use treeqaoa::statevector::DisorderMode;
use treeqaoa::TreeSpec;

fn main() -> treeqaoa::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (n, m, p) = (*args.first().unwrap_or(&14), *args.get(1).unwrap_or(&10), *args.get(2).unwrap_or(&3));
    let seed = *args.get(3).unwrap_or(&0) as u64;
    let sigmas = [0.0, 0.05, 0.1, 0.2, 0.4];

    let instances = generate_instances(&GeneratorSpec::regular(Family::MaxCutRegular, n), m, seed)?;
    let stages = tree_train_with(&TreeSpec::maxcut(3, 1)?, p, seed, &TrainOptions::default())?;
    let params = stages[p - 1].result.best_params.clone();
    for mode in [DisorderMode::PerTerm, DisorderMode::PerBlock] {
        let rows = evaluate_rows(&instances, std::slice::from_ref(&params), &sigmas, mode, seed)?;
        println!("{mode:?}");
        for &s in &sigmas {
            let r: Vec<f64> = rows.iter().filter(|r| r.sigma == s).map(|r| r.residual_energy).collect();
            let (mean, var) = mean_variance(&r);
            println!("  sigma={s:<5} mean r={mean:.4} +- {:.4}", (var / r.len() as f64).sqrt());
        }
    }
    let base: Vec<f64> = instances.iter().map(|i| treeqaoa::experiments::baseline_residual(&i.instance)).collect::<Result<_, _>>()?;
    println!("|+> baseline mean r={:.4}", mean_variance(&base).0);
    Ok(())
}
