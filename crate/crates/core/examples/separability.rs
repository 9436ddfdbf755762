//! Pair separability at the relay on random channels: each pair's
//! interference occupies N - 1 dimensions and both pair images stick out.

use relay_align::aligner::{build_system, solve_beamformers, verify_pair_separability};
use relay_align::channel::generate_generic;
use relay_align::linalg::DEFAULT_RANK_TOL;
use relay_align::{AntennaConfig, Topology};

pub fn run_example() -> relay_align::Result<()> {
    for (t, m, n) in [(Topology::AllUnicast, 3, 7), (Topology::MultipleUnicast, 2, 5)] {
        let channels = generate_generic(AntennaConfig::new(m, n)?, 11);
        let beams = solve_beamformers(&build_system(&channels, t, 1)?, 11, 1.0)?;
        let report = verify_pair_separability(&channels, &beams, t, DEFAULT_RANK_TOL);
        println!("{t:?} at ({m}, {n}): passed = {}", report.passed);
        for p in &report.pairs {
            println!(
                "  {:<12} interference rank {} / {}  gains ({}, {})  gap {:.1e}",
                p.pair,
                p.interference_rank,
                p.expected_interference_rank,
                p.forward_gain,
                p.backward_gain,
                p.interference_retained_min / p.interference_discarded_max.max(f64::MIN_POSITIVE),
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
