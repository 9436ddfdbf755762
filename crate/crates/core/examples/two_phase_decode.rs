//! Full uplink/downlink exchange: every user recovers the three messages
//! meant for it after cancelling its own symbols.

use relay_align::channel::generate_generic;
use relay_align::transceiver::{noise_free_error, random_symbols, TwoPhaseLink};
use relay_align::{AntennaConfig, Topology};

pub fn run_example() -> relay_align::Result<()> {
    for (t, m, n) in [(Topology::AllUnicast, 3, 7), (Topology::MultipleUnicast, 2, 5)] {
        let channels = generate_generic(AntennaConfig::new(m, n)?, 21);
        let link = TwoPhaseLink::design(&channels, t, 21, 1.0)?;
        println!("{t:?} ({m}, {n}): noise-free max error {:.1e}", noise_free_error(&link, 1)?);

        let symbols = random_symbols(t, link.d(), 1000, 2);
        for db in [10.0, 30.0, 50.0] {
            let at = link.with_power(10f64.powf(db / 10.0))?;
            let est = at.run(&symbols, Some(3))?;
            let mse: f64 = symbols.iter().map(|(id, u)| (&est[id] - u).norm_squared()).sum::<f64>()
                / (symbols.len() * 1000 * link.d()) as f64;
            let rate: f64 = at.message_rates().values().sum();
            println!("  {db:>4} dB: symbol MSE {mse:.2e}, sum rate {rate:.2} bit/use");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
