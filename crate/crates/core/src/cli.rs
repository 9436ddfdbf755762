//! Command-line front end. Each subcommand writes its outputs next to a
//! `<output>.manifest.json` recording the flags that produced them.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::aligner::{
    build_system, pairwise_alignment_ranks, relay_basis, BeamformerSet, Scheme,
    SeparabilityReport, ALIGNMENT_TOL,
};
use crate::channel::{derive_seed, generate_generic, load_fixture, AntennaConfig, ChannelSet, Topology};
use crate::dof::{classify, dof_table, parse_range, write_dof_csv, Rational};
use crate::error::{Error, Result};
use crate::feasibility::{feasibility_scheme_for, probe_infeasibility, Evidence, FeasibleDesign, Verdict};
use crate::linalg::{hstack, numeric_rank, CMat, DEFAULT_RANK_TOL};
use crate::transceiver::{noise_free_error, simulate_at, SimResult, TwoPhaseLink};

/// Environment variable naming the directory for outputs whose path is not
/// given explicitly.
pub const OUT_DIR_ENV: &str = "RELAYALIGN_OUT_DIR";

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const VERIFICATION: i32 = 4;
}

/// Largest noise-free symbol error accepted by `verify`.
pub const DECODE_TOL: f64 = 1e-8;
/// Accepted fitted slope, as a fraction of the demand per message.
pub const SLOPE_BAND: (f64, f64) = (0.9, 1.1);

const STREAM_CHANNELS: u64 = 0;
const STREAM_SOLVE: u64 = 1;
const STREAM_SIMULATE: u64 = 2;
const STREAM_DECODE: u64 = 3;

#[derive(Parser, Debug)]
#[command(name = "relay-align", version, about = "Interference alignment for 4-user relay MIMO networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate the DoF per message over a grid of antenna counts.
    DofTable(DofTableArgs),
    /// Design beamformers for one channel draw.
    Solve(SolveArgs),
    /// Check a saved beamformer design against saved channels.
    Verify(VerifyArgs),
    /// Test whether a demand is achievable on generic channels.
    Probe(ProbeArgs),
    /// Monte-Carlo rate versus transmit power.
    Simulate(SimulateArgs),
    /// generate, probe, solve, verify and simulate in one run.
    Pipeline(PipelineArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::DofTable(_) => "dof-table",
            Command::Solve(_) => "solve",
            Command::Verify(_) => "verify",
            Command::Probe(_) => "probe",
            Command::Simulate(_) => "simulate",
            Command::Pipeline(_) => "pipeline",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct DofTableArgs {
    #[arg(long)]
    pub topology: Topology,
    /// User antennas, `a..b` or a single value.
    #[arg(long = "M")]
    pub m: String,
    /// Relay antennas, `a..b` or a single value.
    #[arg(long = "N")]
    pub n: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub topology: Topology,
    #[arg(long = "M", required_unless_present_any = ["fixture", "channels"])]
    pub m: Option<usize>,
    #[arg(long = "N", required_unless_present_any = ["fixture", "channels"])]
    pub n: Option<usize>,
    /// Symbols per message; defaults to the largest feasible integer.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use the integer-valued reference channels.
    #[arg(long, conflicts_with = "channels")]
    pub fixture: bool,
    /// Read channels from JSON instead of drawing them.
    #[arg(long)]
    pub channels: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the (possibly antenna-reduced) channels the design uses.
    #[arg(long)]
    pub channels_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub beams: PathBuf,
    #[arg(long)]
    pub channels: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Relative singular-value threshold for rank decisions.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct ProbeArgs {
    #[arg(long)]
    pub topology: Topology,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    /// Number of channel draws.
    #[arg(long, default_value_t = 20)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub topology: Topology,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub d: Option<usize>,
    /// Transmit powers in dB.
    #[arg(long, value_delimiter = ',', default_value = "30,40,50,60")]
    pub snr: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PipelineArgs {
    #[arg(long)]
    pub topology: Topology,
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "30,40,50,60")]
    pub snr: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub flags: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    fn new<A: Serialize>(command: &str, args: &A, seed: Option<u64>, outputs: Vec<PathBuf>) -> Result<Self> {
        Ok(RunManifest {
            command: command.into(),
            flags: serde_json::to_value(args)?,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            outputs,
        })
    }

    /// Writes `<output>.manifest.json` next to every output.
    fn write(&self) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        for out in &self.outputs {
            fs::write(manifest_path(out), &text)?;
        }
        Ok(())
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn output_path(given: &Option<PathBuf>, default_name: &str) -> Result<PathBuf> {
    let path = given.clone().unwrap_or_else(|| default_out_dir().join(default_name));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(path)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn ratio_string(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible { .. } => exit::INFEASIBLE,
        Error::Verification(_)
        | Error::RankDeficient { .. }
        | Error::IllConditioned { .. }
        | Error::RetriesExhausted { .. }
        | Error::InsufficientIntersection { .. } => exit::VERIFICATION,
        Error::InvalidArgument(_) | Error::InvalidConfig { .. } | Error::WrongRatio { .. } | Error::Reduction { .. } => {
            exit::USAGE
        }
        Error::Format(_) | Error::Json(_) | Error::Csv(_) | Error::Io(_) => exit::FAILURE,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit status.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::DofTable(a) => cmd_dof_table(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Probe(a) => cmd_probe(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Pipeline(a) => cmd_pipeline(&a),
    }
}

pub fn cmd_dof_table(args: &DofTableArgs) -> Result<i32> {
    let rows = dof_table(args.topology, parse_range(&args.m)?, parse_range(&args.n)?);
    let out = output_path(&args.out, "dof_table.csv")?;
    write_dof_csv(fs::File::create(&out)?, &rows)?;
    RunManifest::new("dof-table", args, None, vec![out.clone()])?.write()?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(exit::OK)
}

fn design_for(channels: &ChannelSet, topology: Topology, d: Option<usize>, seed: u64) -> Result<FeasibleDesign> {
    match d {
        None => feasibility_scheme_for(channels, topology, seed),
        Some(d) => {
            let probe = probe_infeasibility(channels, topology, d, seed);
            let reason = describe_violation(probe.violated());
            probe.design.ok_or(Error::Infeasible { d, reason })
        }
    }
}

fn describe_violation(e: Option<&Evidence>) -> String {
    e.map(|e| format!("{:?}: {} needs {}, has {}", e.construction, e.condition, e.required, e.available))
        .unwrap_or_else(|| "no construction applies".into())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let channels = if args.fixture {
        load_fixture(args.topology)
    } else if let Some(path) = &args.channels {
        ChannelSet::load(path)?
    } else {
        let (m, n) = (args.m.unwrap_or(0), args.n.unwrap_or(0));
        generate_generic(AntennaConfig::new(m, n)?, derive_seed(args.seed, STREAM_CHANNELS))
    };
    let design = design_for(&channels, args.topology, args.d, derive_seed(args.seed, STREAM_SOLVE))?;
    let out = output_path(&args.out, "beams.json")?;
    let ch_out = match &args.channels_out {
        Some(p) => output_path(&Some(p.clone()), "")?,
        None => out.with_file_name("channels.json"),
    };
    fs::write(&out, design.beams.to_json()? + "\n")?;
    design.reduced.save(&ch_out)?;
    RunManifest::new("solve", args, Some(args.seed), vec![out.clone(), ch_out.clone()])?.write()?;
    let summary = json!({
        "topology": args.topology,
        "original": design.original,
        "reduced": design.reduced.config,
        "d": design.d,
        "scheme": design.scheme,
        "separable": design.separability.passed,
        "beams": out,
        "channels": ch_out,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(exit::OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub detail: String,
}

impl Check {
    fn bound(name: &str, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= limit,
            value: Some(value),
            detail: format!("{value:.3e} <= {limit:.0e}"),
        }
    }

    fn flag(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.into(), passed, value: None, detail }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub topology: Topology,
    pub config: AntennaConfig,
    pub d: usize,
    pub scheme: Scheme,
    pub separability: SeparabilityReport,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// All numerical checks of a design: alignment equations (or exact pairwise
/// alignment), the implied X equation, the Y relay basis, relay
/// separability and noise-free two-phase decoding.
pub fn verify_design(channels: &ChannelSet, beams: &BeamformerSet, tol: f64, seed: u64) -> Result<VerifyReport> {
    if beams.config != channels.config {
        return Err(Error::Format(format!(
            "beamformers are for {:?} but channels are {:?}",
            beams.config, channels.config
        )));
    }
    let topology = beams.topology;
    let d = beams.symbols_per_message;
    let mut checks = Vec::new();
    let scheme = match build_system(channels, topology, d) {
        Ok(system) => {
            checks.push(Check::bound("alignment_residual", system.residual(beams), ALIGNMENT_TOL));
            if topology == Topology::MultipleUnicast {
                checks.push(Check::bound(
                    "implied_equation_residual",
                    system.redundancy_identity_residual(beams)?,
                    ALIGNMENT_TOL,
                ));
            } else if d == 1 {
                let basis = relay_basis(channels, beams);
                let rank = basis.as_ref().map(|b| b.rank.rank).unwrap_or(0);
                checks.push(Check::flag(
                    "relay_basis_rank",
                    basis.map(|b| b.full_rank()).unwrap_or(false),
                    format!("rank {rank} of {}", channels.config.n),
                ));
            }
            Scheme::SubspaceAlignment
        }
        Err(_) => {
            let ranks = pairwise_alignment_ranks(channels, beams, tol);
            let bad: Vec<String> = ranks
                .iter()
                .filter(|(_, a, b, j)| (*a, *b, *j) != (d, d, d))
                .map(|(p, a, b, j)| format!("{p}: {a},{b},{j}"))
                .collect();
            checks.push(Check::flag(
                "pairwise_alignment",
                bad.is_empty(),
                if bad.is_empty() { format!("all pairs rank {d}") } else { bad.join("; ") },
            ));
            let imgs: Vec<CMat> = topology.messages().iter().map(|id| beams.image(channels, *id)).collect();
            let joint = numeric_rank(&hstack(channels.config.n, &imgs.iter().collect::<Vec<_>>()), tol);
            let want = topology.pairs().len() * d;
            checks.push(Check::flag("joint_relay_span", joint == want, format!("{joint} of {want}")));
            Scheme::OneToOne
        }
    };
    let separability = crate::aligner::verify_pair_separability(channels, beams, topology, tol);
    checks.push(Check::flag(
        "pair_separability",
        separability.passed,
        format!("{}/{} pairs", separability.pairs.iter().filter(|p| p.passed).count(), separability.pairs.len()),
    ));
    let decode = TwoPhaseLink::from_beams(channels.clone(), topology, scheme, beams.clone(), seed, 1.0)
        .and_then(|link| noise_free_error(&link, derive_seed(seed, STREAM_DECODE)));
    checks.push(match decode {
        Ok(e) => Check::bound("noise_free_decode", e, DECODE_TOL),
        Err(e) => Check::flag("noise_free_decode", false, e.to_string()),
    });
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { topology, config: channels.config, d, scheme, separability, checks, passed })
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let beams = BeamformerSet::from_json(&fs::read_to_string(&args.beams)?)?;
    let channels = ChannelSet::load(&args.channels)?;
    let report = verify_design(&channels, &beams, args.tol, args.seed)?;
    let out = output_path(&args.report, "verify_report.json")?;
    write_json(&out, &report)?;
    RunManifest::new("verify", args, Some(args.seed), vec![out.clone()])?.write()?;
    for c in &report.checks {
        println!("{:<5} {:<26} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(if report.passed { exit::OK } else { exit::VERIFICATION })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeSummary {
    pub topology: Topology,
    pub config: AntennaConfig,
    pub d: usize,
    pub d_star: String,
    pub feasible_floor: usize,
    pub seeds: usize,
    pub feasible_draws: usize,
    /// `feasible`, `infeasible`, or `mixed` when draws disagree.
    pub verdict: String,
    /// Conditions checked on the first draw.
    pub evidence: Vec<Evidence>,
    pub violated: Option<Evidence>,
}

pub fn probe_grid_cell(topology: Topology, config: AntennaConfig, d: usize, seeds: usize, seed: u64) -> ProbeSummary {
    let results: Vec<_> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let s = derive_seed(seed, s as u64);
            let ch = generate_generic(config, derive_seed(s, STREAM_CHANNELS));
            probe_infeasibility(&ch, topology, d, derive_seed(s, STREAM_SOLVE))
        })
        .collect();
    let feasible = results.iter().filter(|r| r.verdict == Verdict::Feasible).count();
    let verdict = if feasible == seeds {
        "feasible"
    } else if feasible == 0 {
        "infeasible"
    } else {
        "mixed"
    };
    let profile = classify(topology, config.m, config.n);
    let first = results.first();
    ProbeSummary {
        topology,
        config,
        d,
        d_star: ratio_string(profile.d_star),
        feasible_floor: profile.feasible_floor,
        seeds,
        feasible_draws: feasible,
        verdict: verdict.into(),
        evidence: first.map(|r| r.evidence.clone()).unwrap_or_default(),
        violated: first.and_then(|r| r.violated().cloned()).filter(|_| feasible == 0),
    }
}

pub fn cmd_probe(args: &ProbeArgs) -> Result<i32> {
    if args.seeds == 0 {
        return Err(Error::InvalidArgument("--seeds must be positive".into()));
    }
    let config = AntennaConfig::new(args.m, args.n)?;
    let summary = probe_grid_cell(args.topology, config, args.d, args.seeds, args.seed);
    if let Some(path) = &args.out {
        let out = output_path(&Some(path.clone()), "")?;
        write_json(&out, &summary)?;
        RunManifest::new("probe", args, Some(args.seed), vec![out])?.write()?;
    }
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(match summary.verdict.as_str() {
        "feasible" => exit::OK,
        "infeasible" => exit::INFEASIBLE,
        _ => exit::VERIFICATION,
    })
}

fn slope_summary(r: &SimResult) -> Value {
    json!({
        "topology": r.topology,
        "config": r.config,
        "reduced": r.reduced,
        "d": r.symbols_per_message,
        "trials": r.trials,
        "power_dB": r.power_db,
        "slopes": r.messages.iter().zip(&r.slopes).map(|(id, s)| json!({
            "message": id.to_string(),
            "slope": s,
        })).collect::<Vec<_>>(),
        "min_slope": r.min_slope(),
        "max_slope": r.max_slope(),
        "decode_mse": r.decode_mse,
        "relay_noise_power": r.relay_noise_power,
    })
}

fn slopes_in_band(r: &SimResult) -> bool {
    let d = r.symbols_per_message as f64;
    r.min_slope() >= SLOPE_BAND.0 * d && r.max_slope() <= SLOPE_BAND.1 * d
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32> {
    let config = AntennaConfig::new(args.m, args.n)?;
    let result = simulate_at(config, args.topology, args.d, &args.snr, args.trials, derive_seed(args.seed, STREAM_SIMULATE))?;
    let out = output_path(&args.out, "rates.csv")?;
    let summary_path = out.with_extension("summary.json");
    result.write_csv(fs::File::create(&out)?)?;
    let summary = slope_summary(&result);
    write_json(&summary_path, &summary)?;
    RunManifest::new("simulate", args, Some(args.seed), vec![out, summary_path])?.write()?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(exit::OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub manifest: RunManifest,
    pub topology: Topology,
    pub config: AntennaConfig,
    pub d_star: String,
    pub d: usize,
    pub stages: Vec<StageReport>,
    pub passed: bool,
    pub exit_code: i32,
}

/// Runs every stage on one configuration; stops at the first stage that
/// errors.
pub fn run_pipeline(args: &PipelineArgs, report_path: &Path) -> Result<PipelineReport> {
    let config = AntennaConfig::new(args.m, args.n)?;
    let profile = classify(args.topology, args.m, args.n);
    let d = args.d.unwrap_or(profile.feasible_floor);
    let mut stages = Vec::new();
    let mut code = exit::OK;

    let channels = generate_generic(config, derive_seed(args.seed, STREAM_CHANNELS));
    stages.push(StageReport { stage: "generate".into(), passed: true, detail: json!({ "config": config }) });

    let probe = probe_infeasibility(&channels, args.topology, d, derive_seed(args.seed, STREAM_SOLVE));
    let feasible = d > 0 && probe.design.is_some();
    stages.push(StageReport {
        stage: "probe".into(),
        passed: feasible,
        detail: json!({
            "d": d,
            "verdict": if feasible { Verdict::Feasible } else { Verdict::Infeasible },
            "evidence": probe.evidence,
            "violated": probe.violated(),
        }),
    });

    if let Some(design) = probe.design.filter(|_| feasible) {
        stages.push(StageReport {
            stage: "solve".into(),
            passed: true,
            detail: json!({ "scheme": design.scheme, "reduced": design.reduced.config }),
        });
        let verify = verify_design(&design.reduced, &design.beams, args.tol, args.seed);
        let ok = match &verify {
            Ok(v) => {
                stages.push(StageReport { stage: "verify".into(), passed: v.passed, detail: serde_json::to_value(v)? });
                v.passed
            }
            Err(e) => {
                stages.push(StageReport { stage: "verify".into(), passed: false, detail: json!(e.to_string()) });
                false
            }
        };
        if !ok {
            code = exit::VERIFICATION;
        } else {
            match simulate_at(config, args.topology, Some(d), &args.snr, args.trials, derive_seed(args.seed, STREAM_SIMULATE)) {
                Ok(r) => {
                    let ok = slopes_in_band(&r);
                    stages.push(StageReport { stage: "simulate".into(), passed: ok, detail: slope_summary(&r) });
                    if !ok {
                        code = exit::VERIFICATION;
                    }
                }
                Err(e) => {
                    code = exit_code(&e);
                    stages.push(StageReport { stage: "simulate".into(), passed: false, detail: json!(e.to_string()) });
                }
            }
        }
    } else {
        code = exit::INFEASIBLE;
    }

    let manifest = RunManifest::new("pipeline", args, Some(args.seed), vec![report_path.to_path_buf()])?;
    Ok(PipelineReport {
        manifest,
        topology: args.topology,
        config,
        d_star: ratio_string(profile.d_star),
        d,
        passed: code == exit::OK,
        stages,
        exit_code: code,
    })
}

pub fn cmd_pipeline(args: &PipelineArgs) -> Result<i32> {
    let out = output_path(&args.report, "pipeline_report.json")?;
    let report = run_pipeline(args, &out)?;
    write_json(&out, &report)?;
    report.manifest.write()?;
    for s in &report.stages {
        println!("{:<5} {}", if s.passed { "ok" } else { "FAIL" }, s.stage);
    }
    if let Some(v) = report.stages.iter().find(|s| s.stage == "probe" && !s.passed) {
        println!("{}", serde_json::to_string_pretty(&v.detail)?);
    }
    println!("report: {}", out.display());
    Ok(report.exit_code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("relay-align").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors() {
        assert!(parse(&["pipeline", "--topology", "y", "--M", "3"]).is_err());
        assert!(parse(&["probe", "--topology", "z", "--M", "3", "--N", "7", "--d", "1"]).is_err());
        assert!(parse(&["solve", "--topology", "y"]).is_err());
        assert!(parse(&["solve", "--topology", "y", "--fixture"]).is_ok());
        assert_eq!(main_from(["relay-align", "frobnicate"]), exit::USAGE);
    }

    #[test]
    fn snr_list() {
        let Cli { command: Command::Simulate(a) } =
            parse(&["simulate", "--topology", "x", "--M", "2", "--N", "5", "--snr", "10,20.5"]).unwrap()
        else {
            panic!()
        };
        assert_eq!(a.snr, vec![10.0, 20.5]);
        assert_eq!(a.trials, 200);
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("out/rates.csv")), PathBuf::from("out/rates.csv.manifest.json"));
    }

    #[test]
    fn error_codes_distinct() {
        let inf = exit_code(&Error::Infeasible { d: 2, reason: String::new() });
        let ver = exit_code(&Error::Verification(String::new()));
        let usage = exit_code(&Error::InvalidArgument(String::new()));
        assert_eq!([inf, ver, usage], [exit::INFEASIBLE, exit::VERIFICATION, exit::USAGE]);
    }

    #[test]
    fn probe_cell_verdicts() {
        let cfg = AntennaConfig::new(3, 7).unwrap();
        assert_eq!(probe_grid_cell(Topology::AllUnicast, cfg, 1, 3, 0).verdict, "feasible");
        let s = probe_grid_cell(Topology::AllUnicast, cfg, 2, 3, 0);
        assert_eq!(s.verdict, "infeasible");
        assert!(s.violated.is_some());
    }
}
