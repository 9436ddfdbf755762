//! Two-phase relay protocol: uplink superposition, zero-forcing resolution of
//! one combination per message pair at the relay, reciprocal downlink, and
//! own-symbol cancellation at the users.
//!
//! Signal model (unit-variance symbols and noise):
//!
//! ```text
//! relay:   y   = sum_k H_k X_k + z,           X_k = a sum_j V_kj u_kj
//! pair p:  s_p = U_p^H y = B_ij u_ij + B'_ji u_ji + U_p^H z
//! relay:   x_R = sum_p g_p T_p s_p
//! user j:  r   = W^T (Hbar_j x_R + n_j)
//! ```
//!
//! where `W` is user `j`'s receive filter for the pair containing its own
//! message, taken from the uplink design solved on the transposed downlink
//! channels.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::aligner::{
    interference_images, solve_scheme, verify_pair_separability, BeamformerSet, Scheme,
};
use crate::channel::{
    derive_seed, gaussian_matrix, generate_generic, seeded_rng, AntennaConfig, ChannelSet,
    MessageId, Pair, Topology,
};
use crate::dof::classify;
use crate::error::{Error, Result};
use crate::feasibility::{feasibility_scheme_for, probe_infeasibility};
use crate::linalg::{c, hstack, null_space, orthogonal_complement, singular_values, CMat, DEFAULT_RANK_TOL};

/// Smallest singular value, relative to the largest, accepted for an
/// effective coefficient matrix.
pub const COEFF_TOL: f64 = 1e-9;

/// Receive filter and effective coefficients of one pair.
#[derive(Debug, Clone)]
pub struct PairCombiner {
    pub pair: Pair,
    /// `N x d`, orthonormal columns orthogonal to every non-pair image.
    pub filter: CMat,
    /// `U^H H_i (a V_ij)`.
    pub forward_coeff: CMat,
    /// `U^H H_j (a V_ji)`.
    pub backward_coeff: CMat,
}

impl PairCombiner {
    pub fn coeff(&self, id: MessageId) -> &CMat {
        if id == self.pair.forward {
            &self.forward_coeff
        } else {
            &self.backward_coeff
        }
    }

    /// `E ||s_p||^2` with unit-variance symbols and noise.
    pub fn combination_power(&self) -> f64 {
        self.forward_coeff.norm_squared()
            + self.backward_coeff.norm_squared()
            + self.filter.ncols() as f64
    }
}

#[derive(Debug, Clone)]
pub struct RelayCombiner {
    pub pairs: Vec<PairCombiner>,
}

impl RelayCombiner {
    pub fn for_message(&self, id: MessageId) -> Option<(usize, &PairCombiner)> {
        self.pairs.iter().enumerate().find(|(_, p)| p.pair.contains(id))
    }
}

pub fn relay_combiners(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    topology: Topology,
    tol: f64,
) -> Result<RelayCombiner> {
    let d = beams.symbols_per_message;
    if d == 0 {
        return Ok(RelayCombiner { pairs: Vec::new() });
    }
    let report = verify_pair_separability(channels, beams, topology, tol);
    if !report.passed {
        let bad: Vec<&str> = report.pairs.iter().filter(|p| !p.passed).map(|p| p.pair.as_str()).collect();
        return Err(Error::Verification(format!("pairs not separable at the relay: {}", bad.join(", "))));
    }
    let a = c(beams.power_scale, 0.0);
    let pairs = topology
        .pairs()
        .into_iter()
        .map(|pair| {
            let filter = orthogonal_complement(&interference_images(channels, beams, &pair), tol);
            debug_assert_eq!(filter.ncols(), d);
            let coeff = |id: MessageId| filter.adjoint() * beams.image(channels, id) * a;
            PairCombiner {
                pair,
                forward_coeff: coeff(pair.forward),
                backward_coeff: coeff(pair.backward),
                filter,
            }
        })
        .collect();
    Ok(RelayCombiner { pairs })
}

/// Symbol blocks, `d x T` per message.
pub type Symbols = BTreeMap<MessageId, CMat>;

/// Draws i.i.d. unit-variance complex Gaussian symbols for every message.
pub fn random_symbols(topology: Topology, d: usize, len: usize, seed: u64) -> Symbols {
    let mut rng = seeded_rng(seed);
    topology.messages().into_iter().map(|id| (id, gaussian_matrix(&mut rng, d, len))).collect()
}

fn block_len(symbols: &Symbols) -> usize {
    symbols.values().next().map(|s| s.ncols()).unwrap_or(0)
}

/// Relay observation `sum_k H_k X_k + z` over a block of `T` channel uses.
/// Noise is unit-variance AWGN drawn from `noise_seed`, or absent.
pub fn phase1(
    channels: &ChannelSet,
    beams: &BeamformerSet,
    symbols: &Symbols,
    noise_seed: Option<u64>,
) -> Result<CMat> {
    if !(beams.power_scale > 0.0) {
        return Err(Error::InvalidArgument("transmit power must be positive".into()));
    }
    let len = block_len(symbols);
    let n = channels.config.n;
    let mut y = CMat::zeros(n, len);
    for (id, u) in symbols {
        if !beams.beams.contains_key(id) {
            return Err(Error::InvalidArgument(format!("no beamformer for {id}")));
        }
        if u.shape() != (beams.symbols_per_message, len) {
            return Err(Error::InvalidArgument(format!("symbol block for {id} has shape {:?}", u.shape())));
        }
        y += channels.h(id.source) * beams.scaled(*id) * u;
    }
    if let Some(seed) = noise_seed {
        y += gaussian_matrix(&mut seeded_rng(seed), n, len);
    }
    Ok(y)
}

/// `s_p = U_p^H y` for every pair.
pub fn relay_resolve(combiner: &RelayCombiner, observation: &CMat) -> Vec<CMat> {
    combiner.pairs.iter().map(|p| p.filter.adjoint() * observation).collect()
}

/// Relay-to-user design obtained by reciprocity.
#[derive(Debug, Clone)]
pub struct DownlinkDesign {
    /// Uplink design on the transposed downlink channels. User `j`'s filter
    /// for the pair `{(i,j),(j,i)}` is `reciprocal.get((j,i))`.
    pub reciprocal: BeamformerSet,
    /// Per pair, `N x d` relay precoder with orthonormal columns.
    pub precoders: Vec<CMat>,
    pub pairs: Vec<Pair>,
}

impl DownlinkDesign {
    /// Receive filter used by the destination of `id`.
    pub fn receive_filter(&self, id: MessageId) -> &CMat {
        self.reciprocal.get(id.reverse())
    }

    fn pair_index(&self, id: MessageId) -> usize {
        self.pairs.iter().position(|p| p.contains(id)).expect("active message")
    }
}

/// Designs the downlink: solves the uplink scheme on `Hbar_k^T`, then picks
/// each relay precoder in the (transpose) null space of the reciprocal images
/// of every non-pair message.
pub fn phase2_design(
    channels: &ChannelSet,
    topology: Topology,
    scheme: Scheme,
    d: usize,
    seed: u64,
) -> Result<DownlinkDesign> {
    let recip_channels = channels.reciprocal();
    let reciprocal = solve_scheme(&recip_channels, topology, scheme, d, seed, 1.0)?;
    let pairs = topology.pairs();
    if d == 0 {
        return Ok(DownlinkDesign { reciprocal, precoders: Vec::new(), pairs });
    }
    let report = verify_pair_separability(&recip_channels, &reciprocal, topology, DEFAULT_RANK_TOL);
    if !report.passed {
        return Err(Error::Verification("reciprocal design is not separable".into()));
    }
    let mut precoders = Vec::with_capacity(pairs.len());
    for p in &pairs {
        let others = interference_images(&recip_channels, &reciprocal, p);
        let t = null_space(&others.transpose(), DEFAULT_RANK_TOL);
        if t.ncols() != d {
            return Err(Error::RankDeficient {
                what: format!("relay precoder for pair {p}"),
                rank: t.ncols(),
                expected: d,
            });
        }
        precoders.push(t);
    }
    Ok(DownlinkDesign { reciprocal, precoders, pairs })
}

/// Per-pair amplification meeting total relay power `relay_power`, split
/// equally across the pairs.
pub fn forwarding_gains(combiner: &RelayCombiner, relay_power: f64) -> Vec<f64> {
    let share = relay_power / combiner.pairs.len().max(1) as f64;
    combiner.pairs.iter().map(|p| (share / p.combination_power()).sqrt()).collect()
}

/// `x_R = sum_p g_p T_p s_p`.
pub fn relay_transmit(design: &DownlinkDesign, combos: &[CMat], gains: &[f64]) -> CMat {
    let n = design.precoders.first().map(|t| t.nrows()).unwrap_or(0);
    let len = combos.first().map(|s| s.ncols()).unwrap_or(0);
    let mut x = CMat::zeros(n, len);
    for ((t, s), g) in design.precoders.iter().zip(combos).zip(gains) {
        x += t * s * c(*g, 0.0);
    }
    x
}

/// `Hbar_k x_R + n_k` for every user.
pub fn downlink(channels: &ChannelSet, x_relay: &CMat, noise_seed: Option<u64>) -> Vec<CMat> {
    let mut rng = noise_seed.map(seeded_rng);
    channels
        .downlink
        .iter()
        .map(|hb| {
            let mut y = hb * x_relay;
            if let Some(rng) = rng.as_mut() {
                y += gaussian_matrix(rng, y.nrows(), y.ncols());
            }
            y
        })
        .collect()
}

/// `W^T Hbar_j T_q` for each of user `j`'s receive filters (rows, one per
/// message it sends) against each pair (columns), as `d x d` blocks.
pub fn user_coefficients(channels: &ChannelSet, design: &DownlinkDesign, user: u8) -> Vec<(MessageId, Vec<CMat>)> {
    design
        .reciprocal
        .topology
        .messages()
        .into_iter()
        .filter(|m| m.source == user)
        .map(|own| {
            let w = design.reciprocal.get(own);
            let row = design
                .precoders
                .iter()
                .map(|t| w.transpose() * channels.downlink[user as usize - 1].clone() * t)
                .collect();
            (own, row)
        })
        .collect()
}

/// Symbol estimates for every message, each user cancelling its own
/// contribution to the pair combination before inverting the effective
/// channel.
pub fn user_decode(
    channels: &ChannelSet,
    design: &DownlinkDesign,
    combiner: &RelayCombiner,
    gains: &[f64],
    user_observations: &[CMat],
    own_symbols: &Symbols,
) -> Result<Symbols> {
    let mut out = Symbols::new();
    for id in design.reciprocal.topology.messages() {
        let receiver = id.destination;
        let own = id.reverse();
        let p = design.pair_index(id);
        let pc = &combiner.pairs[p];
        let w = design.receive_filter(id);
        let hb = &channels.downlink[receiver as usize - 1];
        let a = w.transpose() * hb * &design.precoders[p] * c(gains[p], 0.0);
        let r = w.transpose() * &user_observations[receiver as usize - 1];
        let own_u = own_symbols
            .get(&own)
            .ok_or_else(|| Error::InvalidArgument(format!("missing side information {own}")))?;
        let desired = &a * pc.coeff(id);
        let sv = singular_values(&desired);
        let smax = sv.first().copied().unwrap_or(0.0);
        if sv.len() < desired.ncols() || smax == 0.0 || *sv.last().unwrap() < COEFF_TOL * smax {
            return Err(Error::Verification(format!("effective channel of {id} is singular")));
        }
        let clean = r - &a * pc.coeff(own) * own_u;
        let est = desired
            .clone()
            .lu()
            .solve(&clean)
            .ok_or_else(|| Error::Verification(format!("effective channel of {id} is singular")))?;
        out.insert(id, est);
    }
    Ok(out)
}

/// Everything needed to run the protocol on one channel realisation.
#[derive(Debug, Clone)]
pub struct TwoPhaseLink {
    pub topology: Topology,
    pub channels: ChannelSet,
    pub scheme: Scheme,
    pub beams: BeamformerSet,
    pub combiner: RelayCombiner,
    pub downlink: DownlinkDesign,
    pub gains: Vec<f64>,
}

impl TwoPhaseLink {
    /// Builds the link at the largest feasible integer demand for
    /// `channels`, reducing antennas as needed; all nodes use power `power`.
    pub fn design(channels: &ChannelSet, topology: Topology, seed: u64, power: f64) -> Result<Self> {
        let up = feasibility_scheme_for(channels, topology, derive_seed(seed, 1))?;
        Self::from_beams(up.reduced, topology, up.scheme, up.beams, seed, power)
    }

    /// Builds the link at demand `d`, failing with the probe's evidence when
    /// neither construction applies.
    pub fn design_at(channels: &ChannelSet, topology: Topology, d: usize, seed: u64, power: f64) -> Result<Self> {
        let probe = probe_infeasibility(channels, topology, d, derive_seed(seed, 1));
        match probe.design {
            Some(up) => Self::from_beams(up.reduced, topology, up.scheme, up.beams, seed, power),
            None => Err(Error::Infeasible {
                d,
                reason: probe
                    .violated()
                    .map(|e| format!("{} ({} < {})", e.condition, e.available, e.required))
                    .unwrap_or_else(|| "no construction applies".into()),
            }),
        }
    }

    pub fn from_beams(
        channels: ChannelSet,
        topology: Topology,
        scheme: Scheme,
        beams: BeamformerSet,
        seed: u64,
        power: f64,
    ) -> Result<Self> {
        if !(power > 0.0) {
            return Err(Error::InvalidArgument(format!("power must be positive, got {power}")));
        }
        let mut beams = beams;
        beams.power_scale = power.sqrt();
        let d = beams.symbols_per_message;
        let combiner = relay_combiners(&channels, &beams, topology, DEFAULT_RANK_TOL)?;
        let downlink = phase2_design(&channels, topology, scheme, d, derive_seed(seed, 2))?;
        let gains = forwarding_gains(&combiner, power);
        Ok(TwoPhaseLink { topology, channels, scheme, beams, combiner, downlink, gains })
    }

    /// Same design at another transmit power.
    pub fn with_power(&self, power: f64) -> Result<Self> {
        if !(power > 0.0) {
            return Err(Error::InvalidArgument(format!("power must be positive, got {power}")));
        }
        let ratio = (power.sqrt() / self.beams.power_scale).max(0.0);
        let mut out = self.clone();
        out.beams.power_scale = power.sqrt();
        for p in &mut out.combiner.pairs {
            p.forward_coeff *= c(ratio, 0.0);
            p.backward_coeff *= c(ratio, 0.0);
        }
        out.gains = forwarding_gains(&out.combiner, power);
        Ok(out)
    }

    pub fn d(&self) -> usize {
        self.beams.symbols_per_message
    }

    /// Runs both phases on `symbols`, with optional noise at the relay and
    /// the users, and returns every user's estimates.
    pub fn run(&self, symbols: &Symbols, noise_seed: Option<u64>) -> Result<Symbols> {
        let y = phase1(&self.channels, &self.beams, symbols, noise_seed.map(|s| derive_seed(s, 10)))?;
        let combos = relay_resolve(&self.combiner, &y);
        let x = relay_transmit(&self.downlink, &combos, &self.gains);
        let obs = downlink(&self.channels, &x, noise_seed.map(|s| derive_seed(s, 11)));
        user_decode(&self.channels, &self.downlink, &self.combiner, &self.gains, &obs, symbols)
    }

    /// Achievable rate in bits per channel use of each message after own
    /// symbol cancellation, treating the effective `d x d` channel as a
    /// Gaussian MIMO link with coloured noise.
    pub fn message_rates(&self) -> BTreeMap<MessageId, f64> {
        let mut out = BTreeMap::new();
        for id in self.topology.messages() {
            let p = self.downlink.pair_index(id);
            let g = self.gains[p];
            let w = self.downlink.receive_filter(id);
            let hb = &self.channels.downlink[id.dst_idx()];
            let a = w.transpose() * hb * &self.downlink.precoders[p] * c(g, 0.0);
            let sig = &a * self.combiner.pairs[p].coeff(id);
            let noise = &a * a.adjoint() + w.transpose() * w.map(|z| z.conj());
            let total = &sig * sig.adjoint() + &noise;
            let rate = (total.determinant().re.ln() - noise.determinant().re.ln()) / std::f64::consts::LN_2;
            out.insert(id, rate.max(0.0));
        }
        out
    }
}

/// Outcome of a rate-versus-power Monte-Carlo run.
#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    pub topology: Topology,
    pub config: AntennaConfig,
    pub reduced: AntennaConfig,
    pub symbols_per_message: usize,
    pub power_db: Vec<f64>,
    pub trials: usize,
    pub messages: Vec<MessageId>,
    /// `mean_rate[message][power]`, bits per channel use.
    pub mean_rate: Vec<Vec<f64>>,
    /// Least-squares slope over the upper half of the grid, bits per 3.01 dB.
    pub slopes: Vec<f64>,
    /// Mean squared symbol error over all messages at each power.
    pub decode_mse: Vec<f64>,
    /// Mean per-dimension power of the filtered relay noise at each power.
    pub relay_noise_power: Vec<f64>,
}

impl SimResult {
    pub fn min_slope(&self) -> f64 {
        self.slopes.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_slope(&self) -> f64 {
        self.slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rows `power_dB, message_src, message_dst, mean_rate_bits, trials`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            #[serde(rename = "power_dB")]
            power_db: f64,
            message_src: u8,
            message_dst: u8,
            mean_rate_bits: f64,
            trials: usize,
        }
        let mut wtr = csv::Writer::from_writer(w);
        for (pi, p) in self.power_db.iter().enumerate() {
            for (mi, id) in self.messages.iter().enumerate() {
                wtr.serialize(Row {
                    power_db: *p,
                    message_src: id.source,
                    message_dst: id.destination,
                    mean_rate_bits: self.mean_rate[mi][pi],
                    trials: self.trials,
                })?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Slope of `y` against `x` by ordinary least squares.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// dB per doubling of power.
pub const DB_PER_DOUBLING: f64 = 3.010_299_956_639_812;

/// Symbols per trial used for the decode-error statistic.
const DECODE_BLOCK: usize = 8;

struct TrialOutcome {
    rates: Vec<Vec<f64>>,
    mse: Vec<f64>,
    noise: Vec<f64>,
    reduced: AntennaConfig,
    d: usize,
}

/// Monte-Carlo rate versus power over independent generic channel draws, at
/// the largest feasible integer demand.
pub fn simulate(
    config: AntennaConfig,
    topology: Topology,
    power_grid_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SimResult> {
    simulate_at(config, topology, None, power_grid_db, trials, seed)
}

/// [`simulate`] with an explicit demand per message.
pub fn simulate_at(
    config: AntennaConfig,
    topology: Topology,
    demand: Option<usize>,
    power_grid_db: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SimResult> {
    if power_grid_db.len() < 2 {
        return Err(Error::InvalidArgument("slope needs at least two power points".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    if power_grid_db.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument("power grid must be finite".into()));
    }
    let profile = classify(topology, config.m, config.n);
    if demand.is_none() && profile.feasible_floor == 0 {
        return Err(Error::Infeasible {
            d: 1,
            reason: format!("floor(d*) = 0 at (M, N) = ({}, {})", config.m, config.n),
        });
    }
    let mut grid: Vec<f64> = power_grid_db.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let messages = topology.messages();

    let outcomes: Vec<Result<TrialOutcome>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = derive_seed(seed, t as u64);
            let channels = generate_generic(config, derive_seed(trial_seed, 0));
            let base = match demand {
                Some(d) => TwoPhaseLink::design_at(&channels, topology, d, trial_seed, 1.0)?,
                None => TwoPhaseLink::design(&channels, topology, trial_seed, 1.0)?,
            };
            let symbols = random_symbols(topology, base.d(), DECODE_BLOCK, derive_seed(trial_seed, 3));
            let mut rates = vec![vec![0.0; grid.len()]; messages.len()];
            let mut mse = vec![0.0; grid.len()];
            let mut noise = vec![0.0; grid.len()];
            for (pi, db) in grid.iter().enumerate() {
                let link = base.with_power(10f64.powf(db / 10.0))?;
                let r = link.message_rates();
                for (mi, id) in messages.iter().enumerate() {
                    rates[mi][pi] = r[id];
                }
                let est = link.run(&symbols, Some(derive_seed(trial_seed, 100 + pi as u64)))?;
                let count = (messages.len() * base.d() * DECODE_BLOCK) as f64;
                mse[pi] = messages.iter().map(|id| (&est[id] - &symbols[id]).norm_squared()).sum::<f64>() / count;
                noise[pi] = link
                    .combiner
                    .pairs
                    .iter()
                    .map(|p| (p.filter.adjoint() * &p.filter).trace().re / p.filter.ncols() as f64)
                    .sum::<f64>()
                    / link.combiner.pairs.len() as f64;
            }
            Ok(TrialOutcome { rates, mse, noise, reduced: base.channels.config, d: base.d() })
        })
        .collect();

    let mut mean_rate = vec![vec![0.0; grid.len()]; messages.len()];
    let mut decode_mse = vec![0.0; grid.len()];
    let mut relay_noise_power = vec![0.0; grid.len()];
    let mut reduced = config;
    let mut d = 0;
    for o in outcomes {
        let o = o?;
        reduced = o.reduced;
        d = o.d;
        for (acc, r) in mean_rate.iter_mut().zip(&o.rates) {
            for (a, x) in acc.iter_mut().zip(r) {
                *a += x;
            }
        }
        for (a, x) in decode_mse.iter_mut().zip(&o.mse) {
            *a += x;
        }
        for (a, x) in relay_noise_power.iter_mut().zip(&o.noise) {
            *a += x;
        }
    }
    let tn = trials as f64;
    for row in &mut mean_rate {
        row.iter_mut().for_each(|x| *x /= tn);
    }
    decode_mse.iter_mut().for_each(|x| *x /= tn);
    relay_noise_power.iter_mut().for_each(|x| *x /= tn);

    let start = grid.len() / 2;
    let start = start.min(grid.len() - 2);
    let xs: Vec<f64> = grid[start..].iter().map(|db| db / DB_PER_DOUBLING).collect();
    let slopes = mean_rate.iter().map(|row| ls_slope(&xs, &row[start..])).collect();

    Ok(SimResult {
        topology,
        config,
        reduced,
        symbols_per_message: d,
        power_db: grid,
        trials,
        messages,
        mean_rate,
        slopes,
        decode_mse,
        relay_noise_power,
    })
}

/// Largest absolute symbol error of a noise-free run.
pub fn noise_free_error(link: &TwoPhaseLink, seed: u64) -> Result<f64> {
    let symbols = random_symbols(link.topology, link.d(), 4, seed);
    let est = link.run(&symbols, None)?;
    Ok(symbols
        .iter()
        .map(|(id, u)| (&est[id] - u).iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(0.0, f64::max))
}

/// Stacks `blocks` horizontally; convenience for reports.
pub fn stack_images(n: usize, blocks: &[CMat]) -> CMat {
    hstack(n, &blocks.iter().collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aligner::{build_system, reference_fixture_beams, relay_basis, solve_beamformers};
    use crate::channel::load_fixture;
    use crate::linalg::{collinearity, numeric_rank};

    const Y: Topology = Topology::AllUnicast;
    const X: Topology = Topology::MultipleUnicast;

    fn fixture_beams(t: Topology) -> (ChannelSet, BeamformerSet) {
        let ch = load_fixture(t);
        let b = solve_beamformers(&build_system(&ch, t, 1).unwrap(), 1, 1.0).unwrap();
        (ch, b)
    }

    fn generic_link(t: Topology, m: usize, n: usize, seed: u64) -> TwoPhaseLink {
        let ch = generate_generic(AntennaConfig::new(m, n).unwrap(), seed);
        TwoPhaseLink::design(&ch, t, seed, 1.0).unwrap()
    }

    #[test]
    fn fixture_combiner_nulls_f4_plus_f7_for_pair_34() {
        let (ch, b) = fixture_beams(Y);
        let comb = relay_combiners(&ch, &b, Y, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(comb.pairs.len(), 6);
        let p = comb.pairs.iter().find(|p| p.pair.to_string() == "(u34,u43)").unwrap();
        let f = relay_basis(&ch, &b).unwrap().f;
        let dirs = [&f[0], &f[1], &f[2], &f[4], &f[5], &(&f[3] + &f[6])];
        for v in dirs {
            assert!((p.filter.adjoint() * v).norm() < 1e-12 * v.norm());
        }
        assert!((p.filter.adjoint() * &f[3]).norm() > 1e-3 * f[3].norm());
    }

    #[test]
    fn x_combiners_shape() {
        let link = generic_link(X, 2, 5, 3);
        assert_eq!(link.combiner.pairs.len(), 4);
        for p in &link.combiner.pairs {
            assert_eq!(p.filter.shape(), (5, 1));
        }
    }

    #[test]
    fn zero_demand_gives_empty_combiner() {
        let ch = load_fixture(Y);
        let mut b = fixture_beams(Y).1;
        b.symbols_per_message = 0;
        for v in b.beams.values_mut() {
            *v = CMat::zeros(3, 0);
        }
        assert!(relay_combiners(&ch, &b, Y, DEFAULT_RANK_TOL).unwrap().pairs.is_empty());
    }

    #[test]
    fn phase1_superposition() {
        let (ch, b) = fixture_beams(Y);
        let zero = random_symbols(Y, 1, 1, 0).into_keys().map(|id| (id, CMat::zeros(1, 1))).collect();
        assert_eq!(phase1(&ch, &b, &zero, None).unwrap().norm(), 0.0);

        let mut single: Symbols = zero.clone();
        let u21 = MessageId::new(2, 1).unwrap();
        single.insert(u21, CMat::from_element(1, 1, c(1.0, 0.0)));
        let y = phase1(&ch, &b, &single, None).unwrap();
        let f1 = b.image(&ch, u21);
        assert!(collinearity(&y, &f1) > 1.0 - 1e-12);

        let ones: Symbols = zero.keys().map(|id| (*id, CMat::from_element(1, 1, c(1.0, 0.0)))).collect();
        let y = phase1(&ch, &b, &ones, None).unwrap();
        let mut sum = CMat::zeros(7, 1);
        for id in Y.messages() {
            sum += b.image(&ch, id) * c(b.power_scale, 0.0);
        }
        assert!((y - sum).norm() < 1e-12);
    }

    #[test]
    fn phase1_rejects_nonpositive_power() {
        let (ch, mut b) = fixture_beams(Y);
        b.power_scale = 0.0;
        assert!(phase1(&ch, &b, &random_symbols(Y, 1, 1, 0), None).is_err());
    }

    #[test]
    fn relay_resolves_pair_combinations() {
        let (ch, b) = fixture_beams(Y);
        let comb = relay_combiners(&ch, &b, Y, DEFAULT_RANK_TOL).unwrap();
        let u = random_symbols(Y, 1, 3, 5);
        let s = relay_resolve(&comb, &phase1(&ch, &b, &u, None).unwrap());
        for (p, sp) in comb.pairs.iter().zip(&s) {
            let want = &p.forward_coeff * &u[&p.pair.forward] + &p.backward_coeff * &u[&p.pair.backward];
            assert!((sp - &want).norm() <= 1e-9 * want.norm());
        }

        // interference only
        for (pi, p) in comb.pairs.iter().enumerate() {
            let mut v = u.clone();
            v.insert(p.pair.forward, CMat::zeros(1, 3));
            v.insert(p.pair.backward, CMat::zeros(1, 3));
            let y = phase1(&ch, &b, &v, None).unwrap();
            let s = relay_resolve(&comb, &y);
            assert!(s[pi].norm() <= 1e-9 * y.norm());
        }
    }

    #[test]
    fn relay_noise_only() {
        let (ch, b) = fixture_beams(Y);
        let comb = relay_combiners(&ch, &b, Y, DEFAULT_RANK_TOL).unwrap();
        let zero: Symbols = Y.messages().into_iter().map(|id| (id, CMat::zeros(1, 4))).collect();
        let y = phase1(&ch, &b, &zero, Some(9)).unwrap();
        let z = gaussian_matrix(&mut seeded_rng(9), 7, 4);
        assert!((&y - &z).norm() < 1e-15);
        for (p, s) in comb.pairs.iter().zip(relay_resolve(&comb, &y)) {
            assert!((s - p.filter.adjoint() * &z).norm() < 1e-12);
            assert!((p.filter.adjoint() * &p.filter - CMat::identity(1, 1)).norm() < 1e-12);
        }
    }

    #[test]
    fn reciprocal_filters_equal_uplink_beams_on_fixture() {
        for t in [Y, X] {
            let (ch, b) = fixture_beams(t);
            let dl = phase2_design(&ch, t, Scheme::SubspaceAlignment, 1, 4).unwrap();
            assert!(collinearity(&dl.reciprocal.vectorized(), &b.vectorized()) > 1.0 - 1e-9);
            let reference = reference_fixture_beams(t);
            for id in t.messages() {
                // user j receives u_ij through the filter it transmits u_ji with
                let filt = dl.receive_filter(id);
                assert!(collinearity(filt, &reference[&id.reverse()]) > 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn user_observations_block_diagonal() {
        let link = generic_link(Y, 3, 7, 12);
        for user in 1..=4u8 {
            for (own, row) in user_coefficients(&link.channels, &link.downlink, user) {
                let diag = link.downlink.pair_index(own);
                let scale = row.iter().map(|b| b.norm()).fold(0.0, f64::max);
                for (q, blk) in row.iter().enumerate() {
                    if q == diag {
                        assert!(blk.norm() > 1e-6 * scale);
                    } else {
                        assert!(blk.norm() <= 1e-9 * scale, "user {user} pair {q}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_relay_power_gives_zero_observations() {
        let link = generic_link(Y, 3, 7, 2);
        let combos = relay_resolve(&link.combiner, &phase1(&link.channels, &link.beams, &random_symbols(Y, 1, 2, 1), None).unwrap());
        let x = relay_transmit(&link.downlink, &combos, &vec![0.0; combos.len()]);
        assert!(downlink(&link.channels, &x, None).iter().all(|y| y.norm() == 0.0));
    }

    #[test]
    fn noise_free_decoding_is_exact() {
        for (t, m, n) in [(Y, 3, 7), (X, 2, 5), (Y, 7, 12), (X, 5, 8)] {
            let link = generic_link(t, m, n, 31);
            assert!(noise_free_error(&link, 1).unwrap() <= 1e-8, "{t:?} ({m},{n})");
        }
    }

    #[test]
    fn own_symbol_zero_leaves_estimate_unchanged() {
        let link = generic_link(Y, 3, 7, 8);
        let mut u = random_symbols(Y, 1, 2, 2);
        let id = MessageId::new(1, 2).unwrap();
        u.insert(id.reverse(), CMat::zeros(1, 2));
        let est = link.run(&u, None).unwrap();
        assert!((&est[&id] - &u[&id]).norm() < 1e-9);
    }

    #[test]
    fn combiner_independent_of_power() {
        let link = generic_link(X, 2, 5, 4);
        let hi = link.with_power(1e6).unwrap();
        for (a, b) in link.combiner.pairs.iter().zip(&hi.combiner.pairs) {
            assert_eq!(a.filter, b.filter);
            assert!((&b.forward_coeff - &a.forward_coeff * c(1e3, 0.0)).norm() < 1e-9 * b.forward_coeff.norm());
        }
    }

    #[test]
    fn rates_increase_with_power() {
        let link = generic_link(Y, 3, 7, 6);
        let mut prev = BTreeMap::new();
        for db in [0.0, 10.0, 20.0, 30.0] {
            let r = link.with_power(10f64.powf(db / 10.0)).unwrap().message_rates();
            for (id, v) in &r {
                assert!(*v >= 0.0);
                if let Some(p) = prev.get(id) {
                    assert!(v >= p);
                }
            }
            prev = r;
        }
    }

    #[test]
    fn slope_fit() {
        assert!((ls_slope(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn simulate_rejects_single_point_and_infeasible() {
        let cfg = AntennaConfig::new(3, 7).unwrap();
        assert!(simulate(cfg, Y, &[30.0], 2, 1).is_err());
        assert!(simulate(AntennaConfig::new(1, 1).unwrap(), Y, &[10.0, 20.0], 2, 1).is_err());
    }

    #[test]
    fn simulate_small_run() {
        let cfg = AntennaConfig::new(2, 5).unwrap();
        let r = simulate(cfg, X, &[20.0, 30.0, 40.0, 50.0], 8, 3).unwrap();
        assert_eq!(r.messages.len(), 8);
        for row in &r.mean_rate {
            assert!(row.windows(2).all(|w| w[1] >= w[0]));
        }
        for v in &r.relay_noise_power {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let again = simulate(cfg, X, &[20.0, 30.0, 40.0, 50.0], 8, 3).unwrap();
        assert_eq!(r.mean_rate, again.mean_rate);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("power_dB,message_src,message_dst,mean_rate_bits,trials\n"));
        assert_eq!(text.lines().count(), 1 + 4 * 8);
    }

    #[test]
    fn separability_images_full_span() {
        let link = generic_link(Y, 3, 7, 1);
        let imgs: Vec<CMat> = Y.messages().iter().map(|id| link.beams.image(&link.channels, *id)).collect();
        assert_eq!(numeric_rank(&stack_images(7, &imgs), DEFAULT_RANK_TOL), 7);
    }
}
