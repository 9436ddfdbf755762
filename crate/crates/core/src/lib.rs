//! Linear interference alignment for multi-way relay MIMO networks.

pub mod aligner;
pub mod channel;
pub mod cli;
pub mod dof;
pub mod error;
pub mod feasibility;
pub mod linalg;
pub mod transceiver;
pub mod wire;

pub use channel::{AntennaConfig, ChannelSet, MessageId, Pair, Topology};
pub use error::{Error, Result};
