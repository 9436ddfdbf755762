//! One-to-one alignment when 2M > N: both messages of a pair land on the
//! same relay subspace, and the six pair subspaces fill the relay.

use relay_align::aligner::{pairwise_alignment_ranks, solve_one_to_one};
use relay_align::channel::generate_generic;
use relay_align::linalg::{hstack, numeric_rank, CMat, DEFAULT_RANK_TOL};
use relay_align::{AntennaConfig, Topology};

pub fn run_example() -> relay_align::Result<()> {
    for (t, m, n, d) in [(Topology::AllUnicast, 7, 12, 2), (Topology::MultipleUnicast, 5, 8, 2)] {
        let channels = generate_generic(AntennaConfig::new(m, n)?, 5);
        let beams = solve_one_to_one(&channels, t, d, 5, 1.0)?;
        let imgs: Vec<CMat> = t.messages().iter().map(|id| beams.image(&channels, *id)).collect();
        let joint = numeric_rank(&hstack(n, &imgs.iter().collect::<Vec<_>>()), DEFAULT_RANK_TOL);
        println!("{t:?} at ({m}, {n}), d = {d}: joint relay span {joint}");
        for (p, a, b, j) in pairwise_alignment_ranks(&channels, &beams, DEFAULT_RANK_TOL) {
            println!("  {p:<12} ranks {a} {b} joint {j}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
