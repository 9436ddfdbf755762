//! Inter-user signal subspace alignment.
//!
//! Two constructions are provided:
//!
//! * the one-to-many scheme at `M/N = 3/7` (Y) and `2/5` (X), where the
//!   beamformers are a null-space element of a stacked block system, and
//! * the one-to-one scheme for `2M > N`, where both members of a message pair
//!   are steered into a common intersection of their users' column spaces.
//!
//! Both produce a [`BeamformerSet`] whose quality is judged by
//! [`verify_pair_separability`]: for every pair, all other messages must
//! occupy exactly `N - d` relay dimensions and each pair member must add `d`
//! new ones.

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::channel::{
    derive_seed, gaussian_matrix, seeded_rng, AntennaConfig, ChannelSet, MessageId, Pair, Topology,
    USERS,
};
use crate::dof::constants;
use crate::error::{Error, Result};
use crate::linalg::{
    c, column_basis, hstack, null_space, numeric_rank, pinv, rank_report, spectral_norm, CMat,
    RankReport, C64, DEFAULT_RANK_TOL,
};
use crate::wire::{from_wire, to_wire, WireMatrix};

/// Attempts at redrawing random coordinates before giving up.
pub const MAX_RESAMPLES: usize = 8;

/// Relative residual accepted for an alignment equation.
pub const ALIGNMENT_TOL: f64 = 1e-9;

fn m(s: u8, d: u8) -> MessageId {
    MessageId { source: s, destination: d }
}

/// Row blocks of the stacked system. Each entry lists the messages whose
/// relay images sum to zero.
pub fn alignment_equations(topology: Topology) -> Vec<Vec<MessageId>> {
    match topology {
        Topology::AllUnicast => vec![
            vec![m(1, 2), m(2, 1), m(3, 4), m(4, 3)],
            vec![m(1, 3), m(3, 1), m(3, 4), m(4, 3)],
            vec![m(1, 4), m(3, 4), m(4, 1), m(4, 3)],
            vec![m(2, 3), m(3, 2), m(3, 4), m(4, 3)],
            vec![m(2, 4), m(3, 4), m(4, 2), m(4, 3)],
        ],
        Topology::MultipleUnicast => vec![
            vec![m(2, 3), m(2, 4), m(3, 2), m(4, 2)],
            vec![m(1, 3), m(1, 4), m(3, 1), m(4, 1)],
            vec![m(1, 4), m(2, 4), m(4, 1), m(4, 2)],
        ],
    }
}

/// The X-channel equation implied by the first two minus the third.
pub fn implied_x_equation() -> Vec<MessageId> {
    vec![m(1, 3), m(2, 3), m(3, 1), m(3, 2)]
}

/// `(M, N)` of the unit network on which the one-to-many scheme runs.
pub fn base_shape(topology: Topology) -> (usize, usize) {
    let k = constants(topology);
    (k.per_user as usize, k.relay_span as usize)
}

#[derive(Debug, Clone)]
pub struct AlignmentSystem {
    pub topology: Topology,
    pub config: AntennaConfig,
    pub symbols_per_message: usize,
    /// `(equations * N) x (messages * M)` block matrix.
    pub stacked: CMat,
    /// Row range of each message's beamformer inside the stacked unknown.
    pub layout: Vec<(MessageId, Range<usize>)>,
    pub equations: Vec<Vec<MessageId>>,
    uplink: [CMat; USERS],
}

impl AlignmentSystem {
    pub fn block_range(&self, id: MessageId) -> Option<Range<usize>> {
        self.layout.iter().find(|(m, _)| *m == id).map(|(_, r)| r.clone())
    }

    /// Stacks the beamformers in layout order into one `(messages * M) x d`
    /// unknown.
    pub fn stack(&self, beams: &BeamformerSet) -> CMat {
        let rows = self.stacked.ncols();
        let mut x = CMat::zeros(rows, beams.symbols_per_message);
        for (id, range) in &self.layout {
            x.view_mut((range.start, 0), (range.len(), beams.symbols_per_message))
                .copy_from(beams.get(*id));
        }
        x
    }

    /// `||H X|| / (||H|| ||X||)`; zero when the beamformers solve the system.
    pub fn residual(&self, beams: &BeamformerSet) -> f64 {
        let x = self.stack(beams);
        let scale = spectral_norm(&self.stacked) * x.norm();
        if scale == 0.0 {
            return 0.0;
        }
        (&self.stacked * x).norm() / scale
    }

    /// Relative residual of an arbitrary sum of relay images.
    pub fn equation_residual(&self, beams: &BeamformerSet, terms: &[MessageId]) -> f64 {
        equation_residual(&self.uplink, beams, terms)
    }

    /// Residual of the X-channel equation that the three stacked equations
    /// imply without stating it.
    pub fn redundancy_identity_residual(&self, beams: &BeamformerSet) -> Result<f64> {
        if self.topology != Topology::MultipleUnicast {
            return Err(Error::InvalidArgument(
                "the implied equation exists only for the X channel".into(),
            ));
        }
        Ok(self.equation_residual(beams, &implied_x_equation()))
    }
}

fn equation_residual(uplink: &[CMat; USERS], beams: &BeamformerSet, terms: &[MessageId]) -> f64 {
    let n = uplink[0].nrows();
    let mut sum = CMat::zeros(n, beams.symbols_per_message);
    let mut scale: f64 = 0.0;
    for id in terms {
        let img = &uplink[id.src_idx()] * beams.get(*id);
        scale = scale.max(spectral_norm(&uplink[id.src_idx()]) * beams.get(*id).norm());
        sum += img;
    }
    if scale == 0.0 {
        0.0
    } else {
        sum.norm() / scale
    }
}

/// Builds the stacked alignment system at `(M, N) = (a d, b d)`.
pub fn build_system(channels: &ChannelSet, topology: Topology, d: usize) -> Result<AlignmentSystem> {
    let AntennaConfig { m: m_ant, n } = channels.config;
    let base = base_shape(topology);
    if d == 0 || m_ant != base.0 * d || n != base.1 * d {
        return Err(Error::WrongRatio { topology, m: m_ant, n, d, base });
    }
    let messages = topology.messages();
    let equations = alignment_equations(topology);
    let layout: Vec<(MessageId, Range<usize>)> = messages
        .iter()
        .enumerate()
        .map(|(i, id)| (*id, i * m_ant..(i + 1) * m_ant))
        .collect();
    let mut stacked = CMat::zeros(equations.len() * n, messages.len() * m_ant);
    for (row, eq) in equations.iter().enumerate() {
        for id in eq {
            let col = messages.iter().position(|x| x == id).expect("active message");
            let mut block = stacked.view_mut((row * n, col * m_ant), (n, m_ant));
            block += channels.h(id.source);
        }
    }
    Ok(AlignmentSystem {
        topology,
        config: channels.config,
        symbols_per_message: d,
        stacked,
        layout,
        equations,
        uplink: channels.uplink.clone(),
    })
}

/// Transmit beamformers of every active message.
///
/// `beams` are normalised so that the busiest user has unit transmit power
/// with unit-power symbols; the transmitted signal uses `power_scale * V`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSet {
    pub topology: Topology,
    pub config: AntennaConfig,
    pub symbols_per_message: usize,
    pub beams: BTreeMap<MessageId, CMat>,
    pub power_scale: f64,
}

impl BeamformerSet {
    pub fn get(&self, id: MessageId) -> &CMat {
        &self.beams[&id]
    }

    pub fn scaled(&self, id: MessageId) -> CMat {
        self.get(id) * c(self.power_scale, 0.0)
    }

    /// Relay image `H_source V_id` of the unscaled beamformer.
    pub fn image(&self, channels: &ChannelSet, id: MessageId) -> CMat {
        channels.h(id.source) * self.get(id)
    }

    /// `sum_j ||V_kj||_F^2` for user `k` (unscaled).
    pub fn user_power(&self, user: u8) -> f64 {
        self.beams
            .iter()
            .filter(|(id, _)| id.source == user)
            .map(|(_, v)| v.norm_squared())
            .sum()
    }

    /// Rescales so the busiest user has unit power, then sets the transmit
    /// power scale to `sqrt(power)`.
    fn normalize(mut self, power: f64) -> Result<Self> {
        if !(power > 0.0) {
            return Err(Error::InvalidArgument(format!("power must be positive, got {power}")));
        }
        let peak = (1..=USERS as u8).map(|u| self.user_power(u)).fold(0.0, f64::max);
        if peak > 0.0 {
            let s = c(1.0 / peak.sqrt(), 0.0);
            for v in self.beams.values_mut() {
                *v *= s;
            }
        }
        self.power_scale = power.sqrt();
        Ok(self)
    }

    /// Multiplies every beamformer by the same complex scalar.
    pub fn scale_by(&self, s: C64) -> BeamformerSet {
        let mut out = self.clone();
        for v in out.beams.values_mut() {
            *v *= s;
        }
        out
    }

    /// All beamformers stacked in message order into a single column-major
    /// vector.
    pub fn vectorized(&self) -> CMat {
        let entries: Vec<C64> = self
            .topology
            .messages()
            .iter()
            .flat_map(|id| self.get(*id).iter().copied().collect::<Vec<_>>())
            .collect();
        CMat::from_column_slice(entries.len(), 1, &entries)
    }

    pub fn to_json(&self) -> Result<String> {
        let w = BeamformerSetWire {
            topology: self.topology,
            m: self.config.m,
            n: self.config.n,
            d: self.symbols_per_message,
            power_scale: self.power_scale,
            beams: self
                .beams
                .iter()
                .map(|(id, v)| BeamWire { src: id.source, dst: id.destination, matrix: to_wire(v) })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&w)?)
    }

    pub fn from_json(s: &str) -> Result<BeamformerSet> {
        let w: BeamformerSetWire = serde_json::from_str(s)?;
        let config = AntennaConfig::new(w.m, w.n)?;
        let mut beams = BTreeMap::new();
        for b in &w.beams {
            let id = MessageId::new(b.src, b.dst)?;
            if !w.topology.is_active(id) {
                return Err(Error::Format(format!("message {id} is not active")));
            }
            let v = from_wire(&b.matrix, w.m, w.d, &id.to_string())?;
            if beams.insert(id, v).is_some() {
                return Err(Error::Format(format!("duplicate beamformer for {id}")));
            }
        }
        if beams.len() != w.topology.message_count() {
            return Err(Error::Format(format!(
                "expected {} beamformers, found {}",
                w.topology.message_count(),
                beams.len()
            )));
        }
        Ok(BeamformerSet {
            topology: w.topology,
            config,
            symbols_per_message: w.d,
            beams,
            power_scale: w.power_scale,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct BeamWire {
    src: u8,
    dst: u8,
    matrix: WireMatrix,
}

#[derive(Serialize, Deserialize)]
struct BeamformerSetWire {
    topology: Topology,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    power_scale: f64,
    beams: Vec<BeamWire>,
}

/// Draws a null-space element of the stacked system and splits it into
/// per-message beamformers.
///
/// With `d` symbols per message, `d` random combinations of the null-space
/// basis are taken jointly for all messages (one common coefficient matrix),
/// which keeps every alignment equation intact; a draw where some `V_kj`
/// loses column rank is redrawn.
pub fn solve_beamformers(system: &AlignmentSystem, seed: u64, power: f64) -> Result<BeamformerSet> {
    let rows = system.stacked.nrows();
    let report = rank_report(&system.stacked, DEFAULT_RANK_TOL);
    if report.rank < rows {
        return Err(Error::RankDeficient {
            what: "stacked alignment matrix".into(),
            rank: report.rank,
            expected: rows,
        });
    }
    if !report.well_conditioned() {
        return Err(Error::IllConditioned {
            what: "stacked alignment matrix".into(),
            gap: report.gap_ratio(),
        });
    }
    let kernel = null_space(&system.stacked, DEFAULT_RANK_TOL);
    let d = system.symbols_per_message;
    if kernel.ncols() < d {
        return Err(Error::RankDeficient {
            what: "alignment null space".into(),
            rank: kernel.ncols(),
            expected: d,
        });
    }
    let mut rng = seeded_rng(seed);
    for _ in 0..MAX_RESAMPLES {
        let coords = gaussian_matrix(&mut rng, kernel.ncols(), d);
        let x = &kernel * coords;
        let beams: BTreeMap<MessageId, CMat> = system
            .layout
            .iter()
            .map(|(id, r)| (*id, x.view((r.start, 0), (r.len(), d)).into_owned()))
            .collect();
        if beams.values().all(|v| numeric_rank(v, DEFAULT_RANK_TOL) == d) {
            return BeamformerSet {
                topology: system.topology,
                config: system.config,
                symbols_per_message: d,
                beams,
                power_scale: 1.0,
            }
            .normalize(power);
        }
    }
    Err(Error::RetriesExhausted { what: "null-space beamformer assembly".into(), attempts: MAX_RESAMPLES })
}

/// Null-space solution through the projector form
/// `(I - H^H (H H^H)^{-1} H) det(H H^H) q`. Only practical for small systems;
/// used to cross-check the SVD route.
pub fn projector_solution(system: &AlignmentSystem, q: &CMat) -> Option<CMat> {
    let h = &system.stacked;
    let gram = h * h.adjoint();
    let det = gram.clone().determinant();
    let inv = gram.try_inverse()?;
    let n = h.ncols();
    let proj = CMat::identity(n, n) - h.adjoint() * inv * h;
    Some(proj * q * det)
}

/// Signal-space basis at the relay, `[H2V21, H3V31, H3V32, H3V34, H4V41,
/// H4V42, H4V43]`.
#[derive(Debug, Clone)]
pub struct RelayBasis {
    pub f: Vec<CMat>,
    pub g: CMat,
    pub rank: RankReport,
    /// Only defined when `G` is square.
    pub det: Option<C64>,
}

impl RelayBasis {
    pub fn full_rank(&self) -> bool {
        self.rank.rank == self.g.nrows()
    }
}

/// Messages whose images form the relay basis, in basis order.
pub fn relay_basis_messages() -> [MessageId; 7] {
    [m(2, 1), m(3, 1), m(3, 2), m(3, 4), m(4, 1), m(4, 2), m(4, 3)]
}

pub fn relay_basis(channels: &ChannelSet, beams: &BeamformerSet) -> Result<RelayBasis> {
    if beams.topology != Topology::AllUnicast {
        return Err(Error::InvalidArgument("relay basis is defined for the Y channel".into()));
    }
    let n = channels.config.n;
    let f: Vec<CMat> = relay_basis_messages().iter().map(|id| beams.image(channels, *id)).collect();
    let refs: Vec<&CMat> = f.iter().collect();
    let g = hstack(n, &refs);
    let rank = rank_report(&g, DEFAULT_RANK_TOL);
    let det = g.is_square().then(|| g.clone().determinant());
    if rank.rank < n {
        return Err(Error::RankDeficient { what: "relay basis G".into(), rank: rank.rank, expected: n });
    }
    Ok(RelayBasis { f, g, rank, det })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairCheck {
    pub pair: String,
    pub interference_rank: usize,
    pub expected_interference_rank: usize,
    /// `rank([interference, H_i V_ij]) - interference_rank`.
    pub forward_gain: usize,
    /// `rank([interference, H_j V_ji]) - interference_rank`.
    pub backward_gain: usize,
    /// Smallest retained singular value of the interference images.
    pub interference_retained_min: f64,
    /// Largest discarded singular value of the interference images.
    pub interference_discarded_max: f64,
    pub ill_conditioned: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparabilityReport {
    pub relay_antennas: usize,
    pub symbols_per_message: usize,
    pub pairs: Vec<PairCheck>,
    pub passed: bool,
}

/// Relay images of every active message except the two in `pair`.
pub fn interference_images(channels: &ChannelSet, beams: &BeamformerSet, pair: &Pair) -> CMat {
    let imgs: Vec<CMat> = beams
        .topology
        .messages()
        .into_iter()
        .filter(|id| !pair.contains(*id))
        .map(|id| beams.image(channels, id))
        .collect();
    let refs: Vec<&CMat> = imgs.iter().collect();
    hstack(channels.config.n, &refs)
}

pub fn verify_pair_separability(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    topology: Topology,
    tol: f64,
) -> SeparabilityReport {
    let n = channels.config.n;
    let d = beams.symbols_per_message;
    let pairs: Vec<PairCheck> = topology
        .pairs()
        .iter()
        .map(|pair| {
            let interference = interference_images(channels, beams, pair);
            let base = rank_report(&interference, tol);
            let gain = |id: MessageId| {
                let img = beams.image(channels, id);
                let r = rank_report(&hstack(n, &[&interference, &img]), tol);
                (r.rank.saturating_sub(base.rank), r.well_conditioned())
            };
            let (fg, fw) = gain(pair.forward);
            let (bg, bw) = gain(pair.backward);
            let expected = n.saturating_sub(d);
            PairCheck {
                pair: pair.to_string(),
                interference_rank: base.rank,
                expected_interference_rank: expected,
                forward_gain: fg,
                backward_gain: bg,
                interference_retained_min: base.retained_min,
                interference_discarded_max: base.discarded_max,
                ill_conditioned: !(base.well_conditioned() && fw && bw),
                passed: d > 0 && base.rank == expected && fg == d && bg == d,
            }
        })
        .collect();
    let passed = !pairs.is_empty() && pairs.iter().all(|p| p.passed);
    SeparabilityReport { relay_antennas: n, symbols_per_message: d, pairs, passed }
}

/// Orthonormal basis of `col(hi) ∩ col(hj)`.
pub fn intersection_subspace(hi: &CMat, hj: &CMat, tol: f64) -> CMat {
    let n = hi.nrows();
    assert_eq!(n, hj.nrows(), "intersection needs a common row count");
    let qi = column_basis(hi, tol);
    let qj = column_basis(hj, tol);
    if qi.ncols() == 0 || qj.ncols() == 0 {
        return CMat::zeros(n, 0);
    }
    // Qi x = Qj y  <=>  [Qi, -Qj] (x; y) = 0.
    let joint = hstack(n, &[&qi, &(-&qj)]);
    let kernel = null_space(&joint, tol);
    if kernel.ncols() == 0 {
        return CMat::zeros(n, 0);
    }
    let x = kernel.rows(0, qi.ncols()).into_owned();
    column_basis(&(&qi * x), tol)
}

/// One-to-one alignment: for each pair, `H_i V_ij = H_j V_ji = W_p` with
/// `W_p` a random `d`-dimensional subspace of the pair's intersection.
pub fn solve_one_to_one(
    channels: &ChannelSet,
    topology: Topology,
    d: usize,
    seed: u64,
    power: f64,
) -> Result<BeamformerSet> {
    let AntennaConfig { m: m_ant, n } = channels.config;
    let pairs = topology.pairs();
    let empty = |beams| BeamformerSet {
        topology,
        config: channels.config,
        symbols_per_message: d,
        beams,
        power_scale: 1.0,
    };
    if d == 0 {
        let beams = topology.messages().into_iter().map(|id| (id, CMat::zeros(m_ant, 0))).collect();
        return empty(beams).normalize(power);
    }
    if pairs.len() * d > n {
        return Err(Error::RankDeficient {
            what: "joint pair span at the relay".into(),
            rank: n,
            expected: pairs.len() * d,
        });
    }
    let mut bases = Vec::with_capacity(pairs.len());
    for p in &pairs {
        let (i, j) = p.users();
        let b = intersection_subspace(channels.h(i), channels.h(j), DEFAULT_RANK_TOL);
        if b.ncols() < d {
            return Err(Error::InsufficientIntersection { i, j, dim: b.ncols(), needed: d });
        }
        bases.push(b);
    }
    let pinvs: Vec<CMat> = channels.uplink.iter().map(|h| pinv(h, DEFAULT_RANK_TOL)).collect();
    let mut rng = seeded_rng(derive_seed(seed, 0x0121));
    for _ in 0..MAX_RESAMPLES {
        let mut beams = BTreeMap::new();
        let mut dirs = Vec::with_capacity(pairs.len());
        for (p, b) in pairs.iter().zip(&bases) {
            let w = column_basis(&(b * gaussian_matrix(&mut rng, b.ncols(), d)), DEFAULT_RANK_TOL);
            if w.ncols() != d {
                break;
            }
            let (i, j) = p.users();
            beams.insert(p.forward, &pinvs[i as usize - 1] * &w);
            beams.insert(p.backward, &pinvs[j as usize - 1] * &w);
            dirs.push(w);
        }
        if dirs.len() != pairs.len() {
            continue;
        }
        let refs: Vec<&CMat> = dirs.iter().collect();
        let joint = rank_report(&hstack(n, &refs), DEFAULT_RANK_TOL);
        if joint.rank == pairs.len() * d && joint.well_conditioned() {
            return empty(beams).normalize(power);
        }
    }
    Err(Error::RetriesExhausted { what: "one-to-one direction choice".into(), attempts: MAX_RESAMPLES })
}

/// Per pair, `(rank H_iV_ij, rank H_jV_ji, rank [H_iV_ij H_jV_ji])`.
pub fn pairwise_alignment_ranks(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    tol: f64,
) -> Vec<(Pair, usize, usize, usize)> {
    let n = channels.config.n;
    beams
        .topology
        .pairs()
        .into_iter()
        .map(|p| {
            let a = beams.image(channels, p.forward);
            let b = beams.image(channels, p.backward);
            let joint = numeric_rank(&hstack(n, &[&a, &b]), tol);
            (p, numeric_rank(&a, tol), numeric_rank(&b, tol), joint)
        })
        .collect()
}

/// Which construction a beamformer design uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// One-to-many null-space scheme at the low transition ratio.
    SubspaceAlignment,
    /// Pairwise intersections, `2M > N`.
    OneToOne,
}

pub fn solve_scheme(
    channels: &ChannelSet,
    topology: Topology,
    scheme: Scheme,
    d: usize,
    seed: u64,
    power: f64,
) -> Result<BeamformerSet> {
    match scheme {
        Scheme::SubspaceAlignment => {
            let system = build_system(channels, topology, d)?;
            solve_beamformers(&system, seed, power)
        }
        Scheme::OneToOne => solve_one_to_one(channels, topology, d, seed, power),
    }
}

/// Beamformers printed for the integer fixture channels, each a single
/// column (one symbol per message).
pub fn reference_fixture_beams(topology: Topology) -> BTreeMap<MessageId, CMat> {
    let raw: Vec<((u8, u8), Vec<i32>)> = match topology {
        Topology::AllUnicast => vec![
            ((1, 2), vec![1, 0, 0]),
            ((1, 3), vec![0, 1, 0]),
            ((1, 4), vec![0, 0, -1]),
            ((2, 1), vec![1, -1, 0]),
            ((2, 3), vec![0, -1, 0]),
            ((2, 4), vec![0, 0, 1]),
            ((3, 1), vec![0, 1, -1]),
            ((3, 2), vec![0, 1, 0]),
            ((3, 4), vec![1, 0, 1]),
            ((4, 1), vec![1, 1, -1]),
            ((4, 2), vec![0, 1, -1]),
            ((4, 3), vec![0, -1, 0]),
        ],
        Topology::MultipleUnicast => vec![
            ((1, 3), vec![0, -1]),
            ((1, 4), vec![-1, 0]),
            ((2, 3), vec![0, -1]),
            ((2, 4), vec![-1, 0]),
            ((3, 1), vec![0, 1]),
            ((3, 2), vec![1, -1]),
            ((4, 1), vec![-1, 0]),
            ((4, 2), vec![1, 1]),
        ],
    };
    raw.into_iter()
        .map(|((s, d), v)| {
            let col = CMat::from_iterator(v.len(), 1, v.iter().map(|&x| c(x as f64, 0.0)));
            (m(s, d), col)
        })
        .collect()
}

/// [`reference_fixture_beams`] as an unscaled set on the fixture shape.
pub fn reference_fixture_set(topology: Topology) -> BeamformerSet {
    let (m, n) = base_shape(topology);
    BeamformerSet {
        topology,
        config: AntennaConfig { m, n },
        symbols_per_message: 1,
        beams: reference_fixture_beams(topology),
        power_scale: 1.0,
    }
}

/// Divides a vector by its first entry of (within rounding) largest modulus.
pub fn pivot_normalize(v: &CMat) -> CMat {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v.clone();
    }
    let pivot = v.iter().find(|z| z.norm() >= max * (1.0 - 1e-8)).copied().expect("nonzero");
    v / pivot
}

/// Largest entrywise deviation between two vectors after pivot
/// normalisation.
pub fn max_deviation_mod_scalar(a: &CMat, b: &CMat) -> f64 {
    let (a, b) = (pivot_normalize(a), pivot_normalize(b));
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
