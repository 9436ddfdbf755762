//! Integer-DoF designs without symbol extensions, and a constructive probe
//! that reports which rank condition blocks a demand.
//!
//! A demand of `d` symbols per message is attempted with two constructions:
//!
//! * subspace alignment on a network reduced to `(a d, b d)` antennas, which
//!   needs `M >= a d` and `N >= b d`;
//! * one-to-one alignment with the relay reduced to `c d` antennas, which
//!   needs `N >= c d` and a pairwise intersection of dimension at least `d`.
//!
//! `(a, b, c)` are `(3, 7, 6)` for the Y channel and `(2, 5, 4)` for the X
//! channel.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::aligner::{
    build_system, intersection_subspace, solve_beamformers, solve_one_to_one,
    verify_pair_separability, BeamformerSet, Scheme, SeparabilityReport,
};
use crate::channel::{
    derive_seed, gaussian_matrix, generate_generic, seeded_rng, AntennaConfig, ChannelSet,
    MessageId, Topology, USERS,
};
use crate::dof::{classify, constants};
use crate::error::{Error, Result};
use crate::linalg::{c, numeric_rank, CMat, DEFAULT_RANK_TOL};

/// Block rows hit by each user's three messages in the identity-block
/// channels (`6 m1 x 3 m1` left part).
const BLOCK_ROWS: [[usize; 3]; USERS] = [[0, 1, 2], [0, 3, 4], [1, 3, 5], [2, 4, 5]];

#[derive(Debug, Clone)]
pub struct BlockFixture {
    pub m1: usize,
    pub channels: ChannelSet,
}

/// Channels `H_k = [H'_k R_k]` on a `6 m1`-antenna relay, with `H'_k` the
/// identity-block patterns and `R_k` seeded Gaussian fill. Downlinks are the
/// uplink transposes.
pub fn construct_block_fixture(m1: usize, m: usize, seed: u64) -> Result<BlockFixture> {
    if m1 == 0 || m < 3 * m1 {
        return Err(Error::InvalidArgument(format!(
            "block fixture needs M >= 3 m1 (M={m}, m1={m1})"
        )));
    }
    let n = 6 * m1;
    let mut rng = seeded_rng(seed);
    let uplink: [CMat; USERS] = std::array::from_fn(|k| {
        let mut h = CMat::zeros(n, m);
        for (t, &row) in BLOCK_ROWS[k].iter().enumerate() {
            for i in 0..m1 {
                h[(row * m1 + i, t * m1 + i)] = c(1.0, 0.0);
            }
        }
        if m > 3 * m1 {
            h.view_mut((0, 3 * m1), (n, m - 3 * m1))
                .copy_from(&gaussian_matrix(&mut rng, n, m - 3 * m1));
        }
        h
    });
    let downlink = std::array::from_fn(|k| uplink[k].transpose());
    Ok(BlockFixture {
        m1,
        channels: ChannelSet { config: AntennaConfig { m, n }, uplink, downlink },
    })
}

impl BlockFixture {
    /// `V_k = [I_{3 m1}; 0]`, user `k`'s three messages taking consecutive
    /// `m1`-column slices in destination order.
    pub fn beams(&self) -> BeamformerSet {
        let m = self.channels.config.m;
        let m1 = self.m1;
        let mut beams = BTreeMap::new();
        for s in 1..=USERS as u8 {
            let dests = (1..=USERS as u8).filter(|&d| d != s);
            for (t, d) in dests.enumerate() {
                let mut v = CMat::zeros(m, m1);
                for i in 0..m1 {
                    v[(t * m1 + i, i)] = c(1.0, 0.0);
                }
                beams.insert(MessageId { source: s, destination: d }, v);
            }
        }
        BeamformerSet {
            topology: Topology::AllUnicast,
            config: self.channels.config,
            symbols_per_message: m1,
            beams,
            power_scale: 1.0,
        }
    }

    /// Largest entry of `H_i V_ij - H_j V_ji` over all pairs.
    pub fn pairwise_residual(&self, beams: &BeamformerSet) -> f64 {
        Topology::AllUnicast
            .pairs()
            .iter()
            .map(|p| {
                let diff = beams.image(&self.channels, p.forward) - beams.image(&self.channels, p.backward);
                diff.iter().map(|z| z.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// A verified design on a reduced network.
#[derive(Debug, Clone)]
pub struct FeasibleDesign {
    pub topology: Topology,
    pub original: AntennaConfig,
    pub reduced: ChannelSet,
    pub scheme: Scheme,
    pub d: usize,
    pub beams: BeamformerSet,
    pub separability: SeparabilityReport,
}

impl FeasibleDesign {
    pub fn reduced_config(&self) -> AntennaConfig {
        self.reduced.config
    }
}

/// One rank or dimension requirement checked by a construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub construction: Scheme,
    pub condition: String,
    pub required: usize,
    pub available: usize,
    pub satisfied: bool,
}

impl Evidence {
    fn new(construction: Scheme, condition: impl Into<String>, required: usize, available: usize) -> Self {
        Evidence {
            construction,
            condition: condition.into(),
            required,
            available,
            satisfied: available >= required,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub verdict: Verdict,
    pub d: usize,
    pub evidence: Vec<Evidence>,
    pub design: Option<FeasibleDesign>,
}

impl ProbeResult {
    /// The first requirement that failed, if any.
    pub fn violated(&self) -> Option<&Evidence> {
        self.evidence.iter().find(|e| !e.satisfied)
    }
}

const BEAM_STREAM: u64 = 0xbea0;

fn finish(
    topology: Topology,
    original: AntennaConfig,
    reduced: ChannelSet,
    scheme: Scheme,
    d: usize,
    beams: BeamformerSet,
) -> FeasibleDesign {
    let separability = verify_pair_separability(&reduced, &beams, topology, DEFAULT_RANK_TOL);
    FeasibleDesign { topology, original, reduced, scheme, d, beams, separability }
}

/// Subspace alignment at `(a d, b d)`.
fn attempt_low(
    channels: &ChannelSet,
    topology: Topology,
    d: usize,
    seed: u64,
    evidence: &mut Vec<Evidence>,
) -> Option<FeasibleDesign> {
    let k = constants(topology);
    let (a, b) = (k.per_user as usize, k.relay_span as usize);
    let AntennaConfig { m, n } = channels.config;
    let scheme = Scheme::SubspaceAlignment;
    let cap = Evidence::new(scheme, format!("user antennas for {a} messages of d={d}"), a * d, m);
    let span = Evidence::new(scheme, format!("relay antennas for the {b}d-dimensional signal space"), b * d, n);
    let ok = cap.satisfied && span.satisfied;
    evidence.push(cap);
    evidence.push(span);
    if !ok {
        return None;
    }
    let reduced = channels.reduce_antennas(a * d, b * d).ok()?;
    let system = build_system(&reduced, topology, d).ok()?;
    let rows = system.stacked.nrows();
    let rank = numeric_rank(&system.stacked, DEFAULT_RANK_TOL);
    let nullity = system.stacked.ncols() - rank;
    evidence.push(Evidence::new(scheme, "alignment null space dimension", d, nullity));
    evidence.push(Evidence::new(scheme, "stacked alignment row rank", rows, rank));
    if nullity < d {
        return None;
    }
    let beams = solve_beamformers(&system, derive_seed(seed, BEAM_STREAM), 1.0).ok()?;
    let design = finish(topology, channels.config, reduced, scheme, d, beams);
    evidence.push(Evidence::new(
        scheme,
        "pairs separable at the relay",
        design.separability.pairs.len(),
        design.separability.pairs.iter().filter(|p| p.passed).count(),
    ));
    design.separability.passed.then_some(design)
}

/// One-to-one alignment with the relay reduced to `c d` antennas.
fn attempt_high(
    channels: &ChannelSet,
    topology: Topology,
    d: usize,
    seed: u64,
    evidence: &mut Vec<Evidence>,
) -> Option<FeasibleDesign> {
    let pairs = constants(topology).pairs as usize;
    let AntennaConfig { m, n } = channels.config;
    let scheme = Scheme::OneToOne;
    let span = Evidence::new(scheme, format!("relay antennas for the joint span of {pairs} pairs"), pairs * d, n);
    let ok = span.satisfied;
    evidence.push(span);
    if !ok {
        return None;
    }
    let reduced = channels.reduce_antennas(m, pairs * d).ok()?;
    let min_dim = topology
        .pairs()
        .iter()
        .map(|p| {
            let (i, j) = p.users();
            intersection_subspace(reduced.h(i), reduced.h(j), DEFAULT_RANK_TOL).ncols()
        })
        .min()
        .unwrap_or(0);
    evidence.push(Evidence::new(scheme, "smallest pairwise intersection dimension", d, min_dim));
    if min_dim < d {
        return None;
    }
    let beams = solve_one_to_one(&reduced, topology, d, derive_seed(seed, BEAM_STREAM), 1.0).ok();
    let Some(beams) = beams else {
        evidence.push(Evidence::new(scheme, "joint relay span of pair subspaces", pairs * d, 0));
        return None;
    };
    let design = finish(topology, channels.config, reduced, scheme, d, beams);
    evidence.push(Evidence::new(
        scheme,
        "pairs separable at the relay",
        design.separability.pairs.len(),
        design.separability.pairs.iter().filter(|p| p.passed).count(),
    ));
    design.separability.passed.then_some(design)
}

/// Tries both constructions at demand `d`; reports the design if one
/// verifies, else the failed conditions of both.
pub fn probe_infeasibility(channels: &ChannelSet, topology: Topology, d: usize, seed: u64) -> ProbeResult {
    let mut evidence = Vec::new();
    let design = if d == 0 {
        None
    } else {
        attempt_low(channels, topology, d, seed, &mut evidence)
            .or_else(|| attempt_high(channels, topology, d, seed, &mut evidence))
    };
    let verdict = if d == 0 || design.is_some() { Verdict::Feasible } else { Verdict::Infeasible };
    ProbeResult { verdict, d, evidence, design }
}

/// Design at the largest feasible integer demand `floor(d*)` for the given
/// channels: subspace alignment after antenna reduction when `M/N <= 1/2`,
/// one-to-one with a reduced relay otherwise.
pub fn feasibility_scheme_for(channels: &ChannelSet, topology: Topology, seed: u64) -> Result<FeasibleDesign> {
    let AntennaConfig { m, n } = channels.config;
    let profile = classify(topology, m, n);
    let d = profile.feasible_floor;
    if d == 0 {
        return Err(Error::Infeasible { d: 1, reason: format!("floor(d*) = 0 at (M, N) = ({m}, {n})") });
    }
    let mut evidence = Vec::new();
    let design = if profile.regime.high() {
        attempt_high(channels, topology, d, seed, &mut evidence)
    } else {
        attempt_low(channels, topology, d, seed, &mut evidence)
    };
    design.ok_or_else(|| {
        let failed: Vec<String> = evidence
            .iter()
            .filter(|e| !e.satisfied)
            .map(|e| format!("{} ({} < {})", e.condition, e.available, e.required))
            .collect();
        Error::Verification(format!("design at d={d} failed: {}", failed.join("; ")))
    })
}

/// [`feasibility_scheme_for`] on a generic draw at `(M, N)`.
pub fn feasibility_scheme(topology: Topology, m: usize, n: usize, seed: u64) -> Result<FeasibleDesign> {
    let config = AntennaConfig::new(m, n)?;
    let channels = generate_generic(config, derive_seed(seed, 0xc4a7));
    feasibility_scheme_for(&channels, topology, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aligner::pairwise_alignment_ranks;

    const Y: Topology = Topology::AllUnicast;
    const X: Topology = Topology::MultipleUnicast;

    fn cfg(m: usize, n: usize) -> AntennaConfig {
        AntennaConfig::new(m, n).unwrap()
    }

    #[test]
    fn block_fixture_m1_one() {
        let fx = construct_block_fixture(1, 3, 0).unwrap();
        let h1 = &fx.channels.uplink[0];
        assert_eq!(h1.shape(), (6, 3));
        let mut want = CMat::zeros(6, 3);
        for i in 0..3 {
            want[(i, i)] = c(1.0, 0.0);
        }
        assert_eq!(*h1, want);
    }

    #[test]
    fn block_fixture_m1_two() {
        let fx = construct_block_fixture(2, 7, 4).unwrap();
        assert_eq!(fx.channels.uplink[2].shape(), (12, 7));
        // H'_3: block rows 1, 3, 5 carry I_2 in block columns 0, 1, 2.
        let left = fx.channels.uplink[2].view((0, 0), (12, 6));
        for br in 0..6 {
            for bc in 0..3 {
                let block = left.view((2 * br, 2 * bc), (2, 2));
                let expect_identity = BLOCK_ROWS[2][bc] == br;
                let id = CMat::identity(2, 2);
                if expect_identity {
                    assert_eq!(block.into_owned(), id);
                } else {
                    assert_eq!(block.norm(), 0.0);
                }
            }
        }
        assert!(fx.channels.uplink[2].column(6).norm() > 0.0);
    }

    #[test]
    fn block_fixture_needs_width() {
        assert!(construct_block_fixture(1, 2, 0).is_err());
        assert!(construct_block_fixture(0, 2, 0).is_err());
    }

    #[test]
    fn block_fixture_alignment_is_exact() {
        for m1 in 1..=3 {
            let fx = construct_block_fixture(m1, 3 * m1 + 2, m1 as u64).unwrap();
            let beams = fx.beams();
            assert_eq!(fx.pairwise_residual(&beams), 0.0);
            assert!(verify_pair_separability(&fx.channels, &beams, Y, DEFAULT_RANK_TOL).passed);
        }
    }

    #[test]
    fn low_regime_scheme_reduces_antennas() {
        let d = feasibility_scheme(Y, 10, 23, 1).unwrap();
        assert_eq!(d.reduced_config(), cfg(9, 21));
        assert_eq!(d.d, 3);
        assert_eq!(d.scheme, Scheme::SubspaceAlignment);
        assert!(d.separability.passed);
    }

    #[test]
    fn high_regime_scheme_one_to_one() {
        let d = feasibility_scheme(Y, 7, 12, 2).unwrap();
        assert_eq!((d.d, d.scheme), (2, Scheme::OneToOne));
        assert!(d.separability.passed);

        let d = feasibility_scheme(Y, 13, 13, 3).unwrap();
        assert_eq!(d.d, 2);
        assert_eq!(d.reduced_config(), cfg(13, 12));
        assert!(d.separability.passed);
        for (_, a, b, joint) in pairwise_alignment_ranks(&d.reduced, &d.beams, DEFAULT_RANK_TOL) {
            assert_eq!((a, b, joint), (2, 2, 2));
        }
    }

    #[test]
    fn x_schemes() {
        for (m, n, want_d) in [(2, 5, 1), (3, 7, 1), (5, 8, 2), (9, 10, 2)] {
            let d = feasibility_scheme(X, m, n, 5).unwrap();
            assert_eq!(d.d, want_d, "({m},{n})");
            assert!(d.separability.passed);
        }
    }

    #[test]
    fn nothing_to_achieve() {
        assert!(matches!(feasibility_scheme(Y, 1, 1, 0), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn probe_examples() {
        let ch = generate_generic(cfg(3, 7), 1);
        let p = probe_infeasibility(&ch, Y, 2, 1);
        assert_eq!(p.verdict, Verdict::Infeasible);
        let v = p.violated().unwrap();
        assert_eq!((v.required, v.available), (6, 3));

        let p = probe_infeasibility(&ch, Y, 1, 1);
        assert_eq!(p.verdict, Verdict::Feasible);
        assert!(p.design.unwrap().separability.passed);

        let ch = generate_generic(cfg(7, 12), 2);
        let p = probe_infeasibility(&ch, Y, 3, 1);
        assert_eq!(p.verdict, Verdict::Infeasible);
        let span = p
            .evidence
            .iter()
            .find(|e| e.construction == Scheme::OneToOne)
            .unwrap();
        assert_eq!((span.required, span.available, span.satisfied), (18, 12, false));
    }
}
