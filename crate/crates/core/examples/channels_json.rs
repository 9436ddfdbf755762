//! Save a channel draw and its beamformers to JSON and read them back.

use relay_align::aligner::{build_system, solve_beamformers, BeamformerSet};
use relay_align::channel::generate_generic;
use relay_align::{AntennaConfig, ChannelSet, Topology};

pub fn run_example() -> relay_align::Result<()> {
    let dir = std::env::temp_dir().join(format!("relay-align-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let t = Topology::MultipleUnicast;
    let channels = generate_generic(AntennaConfig::new(2, 5)?, 8);
    let beams = solve_beamformers(&build_system(&channels, t, 1)?, 8, 1.0)?;

    let ch_path = dir.join("channels.json");
    let bf_path = dir.join("beams.json");
    channels.save(&ch_path)?;
    std::fs::write(&bf_path, beams.to_json()?)?;

    let ch2 = ChannelSet::load(&ch_path)?;
    let bf2 = BeamformerSet::from_json(&std::fs::read_to_string(&bf_path)?)?;
    println!("channels round trip exact: {}", ch2 == channels);
    println!("beamformers round trip exact: {}", bf2 == beams);
    println!("{}", &std::fs::read_to_string(&ch_path)?[..120]);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
