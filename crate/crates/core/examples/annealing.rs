//! Linear ramp versus the schedule fitted to tree-QAOA angles.
//!
//! cargo run --release --example annealing -- [p] [n] [M] [seed]

use treeqaoa::anneal::{fit_schedule, linear_schedule};
use treeqaoa::experiments::{anneal_rows, generate_instances, GeneratorSpec};
use treeqaoa::instance::Family;
use treeqaoa::optimizer::{tree_train_with, TrainOptions};
use treeqaoa::TreeSpec;

fn main() -> treeqaoa::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let (p, n, m) = (*args.first().unwrap_or(&4), *args.get(1).unwrap_or(&8), *args.get(2).unwrap_or(&10));
    let seed = *args.get(3).unwrap_or(&0) as u64;

    let stages = tree_train_with(&TreeSpec::maxcut(3, 1)?, p, seed, &TrainOptions::default())?;
    let fitted = fit_schedule(&stages[p - 1].result.best_params)?;
    let linear = linear_schedule();
    println!("{:>5} {:>8} {:>8} {:>8} {:>8}", "s", "A_lin", "B_lin", "A_fit", "B_fit");
    for k in 0..=10 {
        let s = k as f64 / 10.0;
        println!("{s:>5.2} {:>8.4} {:>8.4} {:>8.4} {:>8.4}", linear.a(s), linear.b(s), fitted.a(s), fitted.b(s));
    }

    let instances = generate_instances(&GeneratorSpec::regular(Family::MaxCutRegular, n), m, seed)?;
    let grid = [1.0, 2.0, 4.0, 8.0, 16.0];
    let rows = anneal_rows(&instances, &[linear, fitted], &grid, None)?;
    println!("\n{:>5} {:>10} {:>10}", "T", "linear", "fitted");
    for &t in &grid {
        let mean = |kind: &str| {
            let v: Vec<f64> = rows.iter().filter(|r| r.total_time == t && r.schedule_kind == kind).map(|r| r.ground_population).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        println!("{t:>5} {:>10.4} {:>10.4}", mean("linear"), mean("fitted"));
    }
    Ok(())
}
