//! Identity-block channels where V_k = [I; 0] aligns every pair exactly on a
//! 6 m1-antenna relay.

use relay_align::aligner::verify_pair_separability;
use relay_align::feasibility::construct_block_fixture;
use relay_align::linalg::DEFAULT_RANK_TOL;
use relay_align::Topology;

pub fn run_example() -> relay_align::Result<()> {
    for m1 in 1..=3 {
        let fx = construct_block_fixture(m1, 3 * m1 + 1, 2)?;
        let beams = fx.beams();
        let report = verify_pair_separability(&fx.channels, &beams, Topology::AllUnicast, DEFAULT_RANK_TOL);
        println!(
            "m1 = {m1}: relay {} antennas, pairwise residual {}, separable {}",
            fx.channels.config.n,
            fx.pairwise_residual(&beams),
            report.passed
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
