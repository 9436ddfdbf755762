//! DoF per message along a row of fixed relay antennas, with the regime
//! boundaries and the counting bound.
//!
//! ```bash
//! cargo run --example dof_table
//! ```

use relay_align::dof::{as_f64, classify, dof, transition_ratios};
use relay_align::Topology;

pub fn run_example() -> relay_align::Result<()> {
    let n = 84;
    println!("Y channel, N = {n}");
    println!("{:>3} {:>8} {:>8} {:>6}  regime", "M", "d*", "bound", "floor");
    let mut last = None;
    for m in 1..=n {
        let p = classify(Topology::AllUnicast, m, n);
        let label = p.regime.label(Topology::AllUnicast);
        if last.as_ref() != Some(&label) || m % 12 == 0 {
            println!(
                "{m:>3} {:>8} {:>8.3} {:>6}  {label}",
                p.d_star.to_string(),
                as_f64(p.counting_bound),
                p.feasible_floor
            );
        }
        last = Some(label);
    }

    for t in [Topology::AllUnicast, Topology::MultipleUnicast] {
        let (lo, hi) = transition_ratios(t);
        println!("{t:?}: bound is tight at M/N = {lo} and {hi}");
    }
    println!("X channel, (M, N) = (16, 40): d* = {}", dof(Topology::MultipleUnicast, 16, 40));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
