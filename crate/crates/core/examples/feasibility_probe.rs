//! Which integer demands are achievable without symbol extensions, and the
//! rank condition that fails when one is not.

use relay_align::channel::generate_generic;
use relay_align::dof::classify;
use relay_align::feasibility::{feasibility_scheme, probe_infeasibility};
use relay_align::{AntennaConfig, Topology};

pub fn run_example() -> relay_align::Result<()> {
    let y = Topology::AllUnicast;
    let channels = generate_generic(AntennaConfig::new(3, 7)?, 1);
    for d in 1..=2 {
        let probe = probe_infeasibility(&channels, y, d, 1);
        print!("(3, 7) d = {d}: {:?}", probe.verdict);
        if let Some(e) = probe.violated() {
            print!("  [{} needs {}, has {}]", e.condition, e.required, e.available);
        }
        println!();
    }

    for (t, m, n) in [(y, 10, 23), (y, 7, 12), (y, 13, 13), (Topology::MultipleUnicast, 9, 10)] {
        let p = classify(t, m, n);
        let design = feasibility_scheme(t, m, n, 3)?;
        println!(
            "{t:?} ({m}, {n}): d* = {}, design d = {} via {:?} on ({}, {})",
            p.d_star, design.d, design.scheme, design.reduced.config.m, design.reduced.config.n
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
