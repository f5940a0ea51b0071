//! Draw a few instances of each family and print their exact spectra.
//!
//! cargo run --release --example generate_instances -- [seed]

use treeqaoa::experiments::{baseline_residual, generate_instances, GeneratorSpec};
use treeqaoa::instance::Family;

fn main() -> treeqaoa::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let specs = [
        ("3-regular Max-Cut, n=12", GeneratorSpec::regular(Family::MaxCutRegular, 12)),
        ("4-regular +-1 glass, n=10", GeneratorSpec::regular(Family::RegularGlass, 10)),
        ("4x4 grid +-1 glass", GeneratorSpec::grid(4, 4)),
    ];
    for (label, spec) in specs {
        println!("{label}");
        for inst in generate_instances(&spec, 3, seed)? {
            let sg = &inst.instance;
            let spectrum = sg.spectrum()?;
            println!(
                "  {}  edges={:>3}  E0={:>6}  Emax={:>6}  ground states={:>3}  |+> residual={:.4}",
                inst.id,
                sg.edges().len(),
                spectrum.e0,
                spectrum.emax,
                spectrum.ground_states.len(),
                baseline_residual(sg)?
            );
        }
    }
    Ok(())
}
