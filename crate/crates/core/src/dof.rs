//! Closed-form degrees-of-freedom quantities, all in exact rational
//! arithmetic.
//!
//! Both topologies share one shape: with per-user message count `a`, relay
//! span `b` and pair count `c`,
//!
//! ```text
//! d* = max(min(M/a, N/b), min(2M/b, N/c))
//! ```
//!
//! giving `(a, b, c) = (3, 7, 6)` for the Y channel and `(2, 5, 4)` for the X
//! channel. The transition ratios are `a/b`, `1/2` and `b/(2c)`.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::channel::Topology;
use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopologyConstants {
    /// Messages sent by each user.
    pub per_user: i64,
    /// Relay dimensions used by the subspace-alignment scheme per unit DoF.
    pub relay_span: i64,
    /// Number of message pairs.
    pub pairs: i64,
    /// Denominator of the counting bound `(2M + N) / den`.
    pub counting_den: i64,
}

pub fn constants(topology: Topology) -> TopologyConstants {
    match topology {
        Topology::AllUnicast => TopologyConstants { per_user: 3, relay_span: 7, pairs: 6, counting_den: 13 },
        Topology::MultipleUnicast => TopologyConstants { per_user: 2, relay_span: 5, pairs: 4, counting_den: 9 },
    }
}

fn r(n: usize, d: i64) -> Rational {
    Rational::new(n as i64, d)
}

/// `max(min(M/3, N/7), min(2M/7, N/6))`.
pub fn dof_y(m: usize, n: usize) -> Rational {
    dof(Topology::AllUnicast, m, n)
}

/// `max(min(M/2, N/5), min(2M/5, N/4))`.
pub fn dof_x(m: usize, n: usize) -> Rational {
    dof(Topology::MultipleUnicast, m, n)
}

pub fn dof(topology: Topology, m: usize, n: usize) -> Rational {
    let k = constants(topology);
    let low = r(m, k.per_user).min(r(n, k.relay_span));
    let high = r(2 * m, k.relay_span).min(r(n, k.pairs));
    low.max(high)
}

/// Proper/improper frontier of linear schemes: `(2M + N) / 13` (Y) or
/// `(2M + N) / 9` (X).
pub fn counting_bound(topology: Topology, m: usize, n: usize) -> Rational {
    r(2 * m + n, constants(topology).counting_den)
}

/// The two outer transition ratios `M/N` where `d*` meets the counting bound.
pub fn transition_ratios(topology: Topology) -> (Rational, Rational) {
    let k = constants(topology);
    (
        Rational::new(k.per_user, k.relay_span),
        Rational::new(k.relay_span, 2 * k.pairs),
    )
}

/// Which linear piece of `d*` is active. Boundaries belong to the lower
/// piece, so `Regime::LowUser` covers `0 < M/N <= a/b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `M/3` (Y) or `M/2` (X).
    LowUser,
    /// `N/7` (Y) or `N/5` (X).
    LowRelay,
    /// `2M/7` (Y) or `2M/5` (X).
    HighUser,
    /// `N/6` (Y) or `N/4` (X).
    HighRelay,
}

impl Regime {
    pub fn label(self, topology: Topology) -> String {
        let k = constants(topology);
        match self {
            Regime::LowUser => format!("M/{}", k.per_user),
            Regime::LowRelay => format!("N/{}", k.relay_span),
            Regime::HighUser => format!("2M/{}", k.relay_span),
            Regime::HighRelay => format!("N/{}", k.pairs),
        }
    }

    /// Whether `d*` is limited by the user antenna count in this piece.
    pub fn user_limited(self) -> bool {
        matches!(self, Regime::LowUser | Regime::HighUser)
    }

    /// Whether this piece belongs to the one-to-one (`M/N > 1/2`) side.
    pub fn high(self) -> bool {
        matches!(self, Regime::HighUser | Regime::HighRelay)
    }
}

/// Where spare antenna dimensions sit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Redundancy {
    UserRedundant,
    RelayRedundant,
    Both,
    Neither,
}

impl Redundancy {
    pub fn as_str(self) -> &'static str {
        match self {
            Redundancy::UserRedundant => "user_redundant",
            Redundancy::RelayRedundant => "relay_redundant",
            Redundancy::Both => "both",
            Redundancy::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofProfile {
    pub topology: Topology,
    pub m: usize,
    pub n: usize,
    pub d_star: Rational,
    pub regime: Regime,
    pub counting_bound: Rational,
    pub feasible_floor: usize,
    pub redundancy: Redundancy,
}

pub fn regime(topology: Topology, m: usize, n: usize) -> Regime {
    let (low, high) = transition_ratios(topology);
    let ratio = Rational::new(m as i64, n as i64);
    if ratio <= low {
        Regime::LowUser
    } else if ratio <= Rational::new(1, 2) {
        Regime::LowRelay
    } else if ratio <= high {
        Regime::HighUser
    } else {
        Regime::HighRelay
    }
}

pub fn classify(topology: Topology, m: usize, n: usize) -> DofProfile {
    let (low, high) = transition_ratios(topology);
    let ratio = Rational::new(m as i64, n as i64);
    let regime = regime(topology, m, n);
    let redundancy = if ratio == low || ratio == high {
        Redundancy::Neither
    } else if ratio == Rational::new(1, 2) {
        Redundancy::Both
    } else if regime.user_limited() {
        Redundancy::RelayRedundant
    } else {
        Redundancy::UserRedundant
    };
    let d_star = dof(topology, m, n);
    DofProfile {
        topology,
        m,
        n,
        d_star,
        regime,
        counting_bound: counting_bound(topology, m, n),
        feasible_floor: d_star.floor().to_integer() as usize,
        redundancy,
    }
}

/// Spatial extension by `scale_q` followed by antenna reduction to a network
/// sitting exactly on a transition ratio, where each message carries
/// `per_message_symbols` symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationPlan {
    pub scale_q: usize,
    pub reduced_m: usize,
    pub reduced_n: usize,
    pub per_message_symbols: usize,
}

impl NormalizationPlan {
    /// Per-message DoF after dividing by the extension factor.
    pub fn normalized_dof(&self) -> Rational {
        Rational::new(self.per_message_symbols as i64, self.scale_q as i64)
    }

    pub fn reduced_ratio(&self) -> Rational {
        Rational::new(self.reduced_m as i64, self.reduced_n as i64)
    }
}

pub fn normalization_plan(topology: Topology, m: usize, n: usize) -> NormalizationPlan {
    let k = constants(topology);
    let (a, b, c) = (k.per_user as usize, k.relay_span as usize, k.pairs as usize);
    let (low, high) = transition_ratios(topology);
    let ratio = Rational::new(m as i64, n as i64);
    let plan = |q, rm, rn, s| NormalizationPlan {
        scale_q: q,
        reduced_m: rm,
        reduced_n: rn,
        per_message_symbols: s,
    };
    if ratio == low {
        plan(1, m, n, m / a)
    } else if ratio == high {
        plan(1, m, n, 2 * m / b)
    } else if ratio < low {
        plan(a, a * m, b * m, m)
    } else if ratio <= Rational::new(1, 2) {
        plan(b, a * n, b * n, n)
    } else if ratio < high {
        plan(b, b * m, 2 * c * m, 2 * m)
    } else {
        plan(2 * c, b * n, 2 * c * n, 2 * n)
    }
}

/// Inclusive integer range parsed from `a..b` or a single value.
pub fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || Error::InvalidArgument(format!("bad range '{s}'"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (
            a.trim().parse::<usize>().map_err(|_| bad())?,
            b.trim().trim_start_matches('=').parse::<usize>().map_err(|_| bad())?,
        ),
        None => {
            let v = s.trim().parse::<usize>().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(Error::InvalidArgument(format!("empty range '{s}'")));
    }
    Ok(lo..=hi)
}

/// One row of the DoF table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DofRow {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub ratio: f64,
    pub d_star_num: i64,
    pub d_star_den: i64,
    pub counting_num: i64,
    pub counting_den: i64,
    pub feasible_floor: usize,
    pub regime: String,
    pub redundancy: &'static str,
}

impl From<&DofProfile> for DofRow {
    fn from(p: &DofProfile) -> Self {
        DofRow {
            m: p.m,
            n: p.n,
            ratio: (p.m as f64) / (p.n as f64),
            d_star_num: *p.d_star.numer(),
            d_star_den: *p.d_star.denom(),
            counting_num: *p.counting_bound.numer(),
            counting_den: *p.counting_bound.denom(),
            feasible_floor: p.feasible_floor,
            regime: p.regime.label(p.topology),
            redundancy: p.redundancy.as_str(),
        }
    }
}

/// Profiles over a rectangular grid, `M` major.
pub fn dof_table(
    topology: Topology,
    ms: std::ops::RangeInclusive<usize>,
    ns: std::ops::RangeInclusive<usize>,
) -> Vec<DofProfile> {
    let mut out = Vec::new();
    for m in ms {
        for n in ns.clone() {
            out.push(classify(topology, m, n));
        }
    }
    out
}

/// Writes the table as CSV with the fixed column set.
pub fn write_dof_csv<W: std::io::Write>(w: W, rows: &[DofProfile]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for p in rows {
        wtr.serialize(DofRow::from(p))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Approximate value, for reporting only.
pub fn as_f64(x: Rational) -> f64 {
    if x.is_zero() {
        0.0
    } else {
        x.to_f64().unwrap_or(f64::NAN)
    }
}
