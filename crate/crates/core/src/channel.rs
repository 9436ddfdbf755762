//! Channel matrices of the four-user relay network.
//!
//! User `k` reaches the relay through an `N x M` uplink matrix `H_k` and
//! hears the relay through an `M x N` downlink matrix. Users are indexed
//! 1..=4 everywhere in the public API.

use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, from_int_rows, hstack, numeric_rank, CMat, DEFAULT_RANK_TOL};
use crate::wire::{from_wire, to_wire, WireMatrix};

/// Number of user nodes.
pub const USERS: usize = 4;

const MAX_DRAWS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AntennaConfig {
    /// Antennas per user.
    pub m: usize,
    /// Antennas at the relay.
    pub n: usize,
}

impl AntennaConfig {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidConfig { m, n });
        }
        Ok(AntennaConfig { m, n })
    }

    pub fn users(&self) -> usize {
        USERS
    }
}

/// Which message set is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Every user sends to every other user: 12 messages (relay Y channel).
    AllUnicast,
    /// Users {1,2} exchange with users {3,4}: 8 messages (relay X channel).
    MultipleUnicast,
}

impl Topology {
    /// Active messages in lexicographic (source, destination) order. This is
    /// also the column-block order of the stacked alignment systems.
    pub fn messages(self) -> Vec<MessageId> {
        let mut out = Vec::new();
        for s in 1..=USERS as u8 {
            for d in 1..=USERS as u8 {
                let id = MessageId { source: s, destination: d };
                if s != d && self.is_active(id) {
                    out.push(id);
                }
            }
        }
        out
    }

    pub fn is_active(self, id: MessageId) -> bool {
        match self {
            Topology::AllUnicast => true,
            Topology::MultipleUnicast => {
                let same_side = |a: u8, b: u8| (a <= 2) == (b <= 2);
                !same_side(id.source, id.destination)
            }
        }
    }

    /// Message pairs `{(i,j), (j,i)}` with `i < j`, lexicographic.
    pub fn pairs(self) -> Vec<Pair> {
        self.messages()
            .into_iter()
            .filter(|m| m.source < m.destination)
            .map(|m| Pair { forward: m, backward: m.reverse() })
            .collect()
    }

    pub fn message_count(self) -> usize {
        self.messages().len()
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Topology::AllUnicast => "y",
            Topology::MultipleUnicast => "x",
        }
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "y" | "all_unicast" | "all-unicast" => Ok(Topology::AllUnicast),
            "x" | "multiple_unicast" | "multiple-unicast" => Ok(Topology::MultipleUnicast),
            other => Err(Error::InvalidArgument(format!("unknown topology '{other}'"))),
        }
    }
}

/// Message `W_{source,destination}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MessageId {
    pub source: u8,
    pub destination: u8,
}

impl MessageId {
    pub fn new(source: u8, destination: u8) -> Result<Self> {
        let valid = |u: u8| (1..=USERS as u8).contains(&u);
        if !valid(source) || !valid(destination) || source == destination {
            return Err(Error::InvalidArgument(format!(
                "invalid message ({source}, {destination})"
            )));
        }
        Ok(MessageId { source, destination })
    }

    pub fn reverse(self) -> Self {
        MessageId { source: self.destination, destination: self.source }
    }

    pub(crate) fn src_idx(self) -> usize {
        self.source as usize - 1
    }

    pub(crate) fn dst_idx(self) -> usize {
        self.destination as usize - 1
    }
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}{}", self.source, self.destination)
    }
}

/// The two messages exchanged between one pair of users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pair {
    /// `(i, j)` with `i < j`.
    pub forward: MessageId,
    /// `(j, i)`.
    pub backward: MessageId,
}

impl Pair {
    pub fn contains(&self, m: MessageId) -> bool {
        m == self.forward || m == self.backward
    }

    pub fn users(&self) -> (u8, u8) {
        (self.forward.source, self.forward.destination)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.forward, self.backward)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub config: AntennaConfig,
    /// `H_k`, `N x M`.
    pub uplink: [CMat; USERS],
    /// Downlink `M x N`.
    pub downlink: [CMat; USERS],
}

/// SplitMix64 finaliser, used to derive independent sub-seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for a named stream of a run.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix(seed ^ mix(stream.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// The single seeded generator used across the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `rows x cols` matrix of i.i.d. standard circular complex Gaussians
/// (unit variance, real and imaginary parts each of variance 1/2).
pub fn gaussian_matrix<R: rand::Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re * s, im * s)
    })
}

fn full_rank(m: &CMat) -> bool {
    numeric_rank(m, DEFAULT_RANK_TOL) == m.nrows().min(m.ncols())
}

/// Draws a generic channel set. Deterministic in `(config, seed)`.
///
/// A rank-deficient draw has probability zero; it is redrawn, and a run of
/// such draws indicates a defect and panics.
pub fn generate_generic(config: AntennaConfig, seed: u64) -> ChannelSet {
    let mut rng = seeded_rng(seed);
    for _ in 0..MAX_DRAWS {
        let uplink: [CMat; USERS] =
            std::array::from_fn(|_| gaussian_matrix(&mut rng, config.n, config.m));
        let downlink: [CMat; USERS] =
            std::array::from_fn(|_| gaussian_matrix(&mut rng, config.m, config.n));
        if uplink.iter().chain(downlink.iter()).all(full_rank) {
            return ChannelSet { config, uplink, downlink };
        }
    }
    panic!("generic channel draw rank-deficient {MAX_DRAWS} times (M={}, N={})", config.m, config.n);
}

const Y_FIXTURE: [[i32; 21]; USERS] = [
    [1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0],
    [0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0],
    [0, 1, 0, 0, 1, 1, 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 1, 0, 1, 1],
];

const X_FIXTURE: [[i32; 10]; USERS] = [
    [1, 0, 0, 1, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 1, 0, 0],
    [0, 1, 1, 1, 0, 0, 1, 0, 0, 1],
    [0, 1, 0, 0, 0, 1, 0, 0, 1, 0],
];

/// The special integer channels used to certify full rank: 7x3 matrices for
/// the Y channel, 5x2 for the X channel. Downlinks are the uplink transposes.
pub fn load_fixture(topology: Topology) -> ChannelSet {
    let (config, uplink): (AntennaConfig, [CMat; USERS]) = match topology {
        Topology::AllUnicast => (
            AntennaConfig { m: 3, n: 7 },
            std::array::from_fn(|k| from_int_rows(7, 3, &Y_FIXTURE[k])),
        ),
        Topology::MultipleUnicast => (
            AntennaConfig { m: 2, n: 5 },
            std::array::from_fn(|k| from_int_rows(5, 2, &X_FIXTURE[k])),
        ),
    };
    let downlink = std::array::from_fn(|k| uplink[k].transpose());
    ChannelSet { config, uplink, downlink }
}

impl ChannelSet {
    pub fn h(&self, user: u8) -> &CMat {
        &self.uplink[user as usize - 1]
    }

    /// Keeps the leading `n_new x m_new` block of every uplink matrix and the
    /// leading `m_new x n_new` block of every downlink matrix.
    pub fn reduce_antennas(&self, m_new: usize, n_new: usize) -> Result<ChannelSet> {
        let AntennaConfig { m, n } = self.config;
        if m_new == 0 || n_new == 0 || m_new > m || n_new > n {
            return Err(Error::Reduction { m, n, m_new, n_new });
        }
        Ok(ChannelSet {
            config: AntennaConfig { m: m_new, n: n_new },
            uplink: std::array::from_fn(|k| self.uplink[k].view((0, 0), (n_new, m_new)).into_owned()),
            downlink: std::array::from_fn(|k| {
                self.downlink[k].view((0, 0), (m_new, n_new)).into_owned()
            }),
        })
    }

    /// Channel set whose uplinks are the transposed downlinks; used to design
    /// the relay-to-user phase by reciprocity.
    pub fn reciprocal(&self) -> ChannelSet {
        ChannelSet {
            config: self.config,
            uplink: std::array::from_fn(|k| self.downlink[k].transpose()),
            downlink: std::array::from_fn(|k| self.uplink[k].transpose()),
        }
    }

    /// `rank([H_i H_j])`.
    pub fn pair_span_rank(&self, i: u8, j: u8, tol: f64) -> usize {
        let joint = hstack(self.config.n, &[self.h(i), self.h(j)]);
        numeric_rank(&joint, tol)
    }

    pub fn to_json(&self) -> Result<String> {
        let w = ChannelSetWire {
            m: self.config.m,
            n: self.config.n,
            uplink: self.uplink.iter().map(to_wire).collect(),
            downlink: self.downlink.iter().map(to_wire).collect(),
        };
        Ok(serde_json::to_string_pretty(&w)?)
    }

    pub fn from_json(s: &str) -> Result<ChannelSet> {
        let w: ChannelSetWire = serde_json::from_str(s)?;
        let config = AntennaConfig::new(w.m, w.n)?;
        if w.uplink.len() != USERS || w.downlink.len() != USERS {
            return Err(Error::Format(format!(
                "expected {USERS} uplink and {USERS} downlink matrices"
            )));
        }
        let mut up = Vec::with_capacity(USERS);
        let mut down = Vec::with_capacity(USERS);
        for k in 0..USERS {
            up.push(from_wire(&w.uplink[k], w.n, w.m, &format!("uplink[{k}]"))?);
            down.push(from_wire(&w.downlink[k], w.m, w.n, &format!("downlink[{k}]"))?);
        }
        Ok(ChannelSet {
            config,
            uplink: up.try_into().expect("four matrices"),
            downlink: down.try_into().expect("four matrices"),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<ChannelSet> {
        ChannelSet::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ChannelSetWire {
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    uplink: Vec<WireMatrix>,
    downlink: Vec<WireMatrix>,
}
