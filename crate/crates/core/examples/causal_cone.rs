//! Reverse causal cones of a concrete graph versus the ideal tree.
//!
//! On a random 3-regular graph the cone of an edge is a tree as long as no
//! short cycle is reached; this prints how often that holds as p grows.
//!
//! cargo run --release --example causal_cone -- [n] [seed]

use treeqaoa::instance::gen_regular_maxcut;
use treeqaoa::rcc::{build_tree_cone, reverse_causal_cone, TreeSpec};

fn main() -> treeqaoa::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let sg = gen_regular_maxcut(n, 3, seed)?;

    println!("{:>2} {:>10} {:>14} {:>16}", "p", "tree size", "mean cone size", "tree-like edges");
    for p in 1..=5 {
        let tree = build_tree_cone(&TreeSpec::maxcut(3, p)?)?;
        let mut sizes = 0usize;
        let mut tree_like = 0usize;
        for e in sg.edges() {
            let cone = reverse_causal_cone(&sg, (e.i, e.j), p)?;
            sizes += cone.graph.n();
            // a connected cone is a tree iff |E| = |V| - 1
            if cone.graph.edges().len() + 1 == cone.graph.n() && cone.graph.n() == tree.graph.n() {
                tree_like += 1;
            }
        }
        let m = sg.edges().len();
        println!(
            "{p:>2} {:>10} {:>14.1} {:>10}/{m:<5}",
            tree.graph.n(),
            sizes as f64 / m as f64,
            tree_like
        );
    }
    Ok(())
}
