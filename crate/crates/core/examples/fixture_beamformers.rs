//! Solve the alignment equations on the integer reference channels and
//! compare with the published beamformers.

use relay_align::aligner::{build_system, max_deviation_mod_scalar, reference_fixture_set, relay_basis, solve_beamformers};
use relay_align::channel::load_fixture;
use relay_align::linalg::{numeric_rank, DEFAULT_RANK_TOL};
use relay_align::Topology;

pub fn run_example() -> relay_align::Result<()> {
    for t in [Topology::AllUnicast, Topology::MultipleUnicast] {
        let channels = load_fixture(t);
        let system = build_system(&channels, t, 1)?;
        let beams = solve_beamformers(&system, 7, 1.0)?;
        let dev = max_deviation_mod_scalar(&beams.vectorized(), &reference_fixture_set(t).vectorized());
        println!(
            "{t:?}: stacked {}x{}, rank {}, residual {:.1e}, deviation from reference {:.1e}",
            system.stacked.nrows(),
            system.stacked.ncols(),
            numeric_rank(&system.stacked, DEFAULT_RANK_TOL),
            system.residual(&beams),
            dev
        );
        if t == Topology::AllUnicast {
            let g = relay_basis(&channels, &beams)?;
            println!("  relay basis rank {}, det {:.4}", g.rank.rank, g.det.unwrap());
        } else {
            println!("  implied equation residual {:.1e}", system.redundancy_identity_residual(&beams)?);
        }
        for (id, v) in &beams.beams {
            let col: Vec<String> = v.iter().map(|z| format!("{:+.4}", z.re)).collect();
            println!("  V{}{} = [{}]", id.source, id.destination, col.join(", "));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
