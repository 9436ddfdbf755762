//! Monte-Carlo rate versus transmit power; the fitted slope is the DoF per
//! message.

use relay_align::transceiver::simulate;
use relay_align::{AntennaConfig, Topology};

pub fn run_example() -> relay_align::Result<()> {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let grid = [30.0, 40.0, 50.0, 60.0];
    for (t, m, n) in [(Topology::AllUnicast, 3, 7), (Topology::MultipleUnicast, 2, 5)] {
        let r = simulate(AntennaConfig::new(m, n)?, t, &grid, trials, 4)?;
        println!("{t:?} ({m}, {n}), {trials} trials");
        for (id, (rates, slope)) in r.messages.iter().zip(r.mean_rate.iter().zip(&r.slopes)) {
            let rates: Vec<String> = rates.iter().map(|x| format!("{x:6.2}")).collect();
            println!("  {id}: {}  slope {slope:.3}", rates.join(" "));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
