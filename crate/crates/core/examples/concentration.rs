//! Spread of per-instance optimal angles as the instance size grows.
//!
//! cargo run --release --example concentration -- [M] [p] [random_starts] [seed]

use treeqaoa::experiments::{concentration_rows, VanillaOptions};
use treeqaoa::instance::Family;
use treeqaoa::optimizer::TrainOptions;

fn main() -> treeqaoa::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (m, p, starts) = (*args.first().unwrap_or(&10), *args.get(1).unwrap_or(&2), *args.get(2).unwrap_or(&8));
    let seed = *args.get(3).unwrap_or(&0) as u64;

    let opts = VanillaOptions { train: TrainOptions::default(), random_starts: starts, annealing_start: true };
    let (_, summary) = concentration_rows(Family::RegularGlass, &[6, 8, 10, 12], m, p, &opts, seed)?;
    println!("{:>3} {:>4} {:>12} {:>12} {:>10}", "n", "M", "mean gamma1", "var gamma1", "mean r");
    for s in summary {
        println!("{:>3} {:>4} {:>12.5} {:>12.3e} {:>10.4}", s.n, s.instances, s.mean_gamma_1, s.var_gamma_1, s.mean_residual);
    }
    Ok(())
}
