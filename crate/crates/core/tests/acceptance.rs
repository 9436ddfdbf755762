//! Acceptance checks, one line per criterion. Run with
//! `cargo test --test acceptance`; `--release` for realistic timings.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use relay_align::aligner::{
    build_system, max_deviation_mod_scalar, pairwise_alignment_ranks, reference_fixture_set,
    relay_basis, solve_beamformers, solve_one_to_one, verify_pair_separability,
};
use relay_align::channel::{derive_seed, generate_generic, load_fixture};
use relay_align::dof::{classify, counting_bound, dof, transition_ratios, Rational};
use relay_align::feasibility::{construct_block_fixture, probe_infeasibility, Verdict};
use relay_align::linalg::{det, hstack, numeric_rank, CMat, DEFAULT_RANK_TOL};
use relay_align::transceiver::{noise_free_error, simulate, TwoPhaseLink};
use relay_align::{AntennaConfig, Topology};

const Y: Topology = Topology::AllUnicast;
const X: Topology = Topology::MultipleUnicast;

const FIXTURE_TOL: f64 = 1e-9;
const ALIGN_TOL: f64 = 1e-9;
const DECODE_TOL: f64 = 1e-8;
const SUITE_SEEDS: u64 = 100;
const PROBE_SEEDS: u64 = 20;
const PROBE_GRID: usize = 24;
const DOF_GRID: usize = 64;
const SLOPE_TRIALS: usize = 200;
const SLOPE_BAND: (f64, f64) = (0.9, 1.1);

type Outcome = Result<String, String>;

fn cfg(m: usize, n: usize) -> AntennaConfig {
    AntennaConfig::new(m, n).unwrap()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fixture_reproduction(t: Topology) -> Outcome {
    let start = Instant::now();
    let channels = load_fixture(t);
    let system = build_system(&channels, t, 1).map_err(|e| e.to_string())?;
    let beams = solve_beamformers(&system, 1, 1.0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let dev = max_deviation_mod_scalar(&beams.vectorized(), &reference_fixture_set(t).vectorized());
    ensure(dev <= FIXTURE_TOL, format!("deviation {dev:.2e}"))?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    let mut note = String::new();
    if t == X {
        let shared = beams.get(m(1, 3)) - beams.get(m(2, 3));
        let shared2 = beams.get(m(1, 4)) - beams.get(m(2, 4));
        ensure(shared.norm() + shared2.norm() <= FIXTURE_TOL, "[V13 V14] != [V23 V24]")?;
        note = ", [V13 V14] = [V23 V24]".into();
    }
    Ok(format!("max deviation {dev:.1e} in {:.1} ms{note}", elapsed.as_secs_f64() * 1e3))
}

fn m(s: u8, d: u8) -> relay_align::MessageId {
    relay_align::MessageId::new(s, d).unwrap()
}

fn criterion_1() -> Outcome {
    fixture_reproduction(Y)
}

fn criterion_2() -> Outcome {
    fixture_reproduction(X)
}

fn criterion_3() -> Outcome {
    let mut parts = Vec::new();
    for (t, shape) in [(Y, (35, 36)), (X, (15, 16))] {
        let system = build_system(&load_fixture(t), t, 1).map_err(|e| e.to_string())?;
        let h = &system.stacked;
        ensure(h.shape() == shape, format!("{t:?} shape {:?}", h.shape()))?;
        let gram_det = det(&(h * h.adjoint()));
        let svd_rank = numeric_rank(h, DEFAULT_RANK_TOL);
        let det_full = gram_det.norm() > 1e-6;
        let svd_full = svd_rank == shape.0;
        ensure(det_full && svd_full, format!("{t:?}: det {gram_det:.3e}, svd rank {svd_rank}"))?;
        parts.push(format!("{t:?} det(HH^H) = {:.3}, rank {svd_rank}", gram_det.re));
    }
    let channels = load_fixture(Y);
    let g = relay_basis(&channels, &reference_fixture_set(Y)).map_err(|e| e.to_string())?;
    let det_g = g.det.unwrap();
    ensure(g.rank.rank == 7 && det_g.norm() > 1e-6, format!("rank(G) {}, det {det_g}", g.rank.rank))?;
    parts.push(format!("rank(G) = 7, det(G) = {:.3}", det_g.re));
    Ok(parts.join("; "))
}

fn criterion_4() -> Outcome {
    for (t, mm, n) in [(Y, 3, 7), (X, 2, 5)] {
        let failures: Vec<u64> = (0..SUITE_SEEDS)
            .into_par_iter()
            .filter(|&s| {
                let ch = generate_generic(cfg(mm, n), s);
                let Ok(system) = build_system(&ch, t, 1) else { return true };
                let Ok(beams) = solve_beamformers(&system, s, 1.0) else { return true };
                let r = verify_pair_separability(&ch, &beams, t, DEFAULT_RANK_TOL);
                !(r.passed
                    && r.pairs.iter().all(|p| {
                        p.interference_rank == n - 1 && p.forward_gain == 1 && p.backward_gain == 1
                    }))
            })
            .collect();
        ensure(failures.is_empty(), format!("{t:?} failing seeds {failures:?}"))?;
    }
    Ok(format!("{SUITE_SEEDS} seeds each at (3,7) Y and (2,5) X, zero failures"))
}

fn criterion_5() -> Outcome {
    for (t, mm, n, d) in [(Y, 7, 12, 2), (X, 5, 8, 2)] {
        let failures: Vec<u64> = (0..SUITE_SEEDS)
            .into_par_iter()
            .filter(|&s| {
                let ch = generate_generic(cfg(mm, n), s);
                let Ok(beams) = solve_one_to_one(&ch, t, d, s, 1.0) else { return true };
                let pairwise = pairwise_alignment_ranks(&ch, &beams, DEFAULT_RANK_TOL)
                    .iter()
                    .all(|&(_, a, b, j)| (a, b, j) == (d, d, d));
                let imgs: Vec<CMat> = t.messages().iter().map(|id| beams.image(&ch, *id)).collect();
                let joint = numeric_rank(&hstack(n, &imgs.iter().collect::<Vec<_>>()), DEFAULT_RANK_TOL);
                !(pairwise && joint == n)
            })
            .collect();
        ensure(failures.is_empty(), format!("{t:?} failing seeds {failures:?}"))?;
    }
    Ok(format!("{SUITE_SEEDS} seeds each, joint span 12 at (7,12) Y and 8 at (5,8) X"))
}

fn criterion_6() -> Outcome {
    let mut tight = 0;
    for t in [Y, X] {
        let (lo, hi) = transition_ratios(t);
        for mm in 1..=DOF_GRID {
            for n in 1..=DOF_GRID {
                let d = dof(t, mm, n);
                let bound = counting_bound(t, mm, n);
                ensure(d <= bound, format!("{t:?} ({mm},{n}): {d} > {bound}"))?;
                let at_transition = [lo, hi]
                    .iter()
                    .any(|r| (mm as i64) * r.denom() == (n as i64) * r.numer());
                ensure((d == bound) == at_transition, format!("{t:?} ({mm},{n}): equality mismatch"))?;
                tight += usize::from(at_transition);
                for q in 1..=8usize {
                    let scaled = dof(t, q * mm, q * n);
                    ensure(
                        scaled == d * Rational::from_integer(q as i64),
                        format!("{t:?} ({mm},{n}) q={q}: {scaled} != {q}*{d}"),
                    )?;
                }
            }
        }
    }
    Ok(format!("2 x {DOF_GRID}^2 cells, {tight} tight exactly at the transition ratios, scaling q<=8"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let cells: Vec<(Topology, usize, usize)> = [Y, X]
        .into_iter()
        .flat_map(|t| (1..=PROBE_GRID).flat_map(move |mm| (1..=PROBE_GRID).map(move |n| (t, mm, n))))
        .collect();
    let bad: Vec<String> = cells
        .par_iter()
        .filter_map(|&(t, mm, n)| {
            let floor = classify(t, mm, n).feasible_floor;
            for s in 0..PROBE_SEEDS {
                let seed = derive_seed(s, (mm * 100 + n) as u64);
                let ch = generate_generic(cfg(mm, n), seed);
                if probe_infeasibility(&ch, t, floor, seed).verdict != Verdict::Feasible {
                    return Some(format!("{t:?} ({mm},{n}) d={floor} seed {s} not feasible"));
                }
                if probe_infeasibility(&ch, t, floor + 1, seed).verdict != Verdict::Infeasible {
                    return Some(format!("{t:?} ({mm},{n}) d={} seed {s} not infeasible", floor + 1));
                }
            }
            None
        })
        .collect();
    let elapsed = start.elapsed();
    ensure(bad.is_empty(), format!("{} cells wrong, first: {}", bad.len(), bad.first().cloned().unwrap_or_default()))?;
    ensure(elapsed < Duration::from_secs(600), format!("took {elapsed:?}"))?;
    Ok(format!("{} cells x {PROBE_SEEDS} seeds in {:.1} s", cells.len(), elapsed.as_secs_f64()))
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    for (t, mm, n) in [(Y, 3, 7), (X, 2, 5)] {
        let errs: Vec<Result<f64, String>> = (0..SUITE_SEEDS)
            .into_par_iter()
            .map(|s| {
                let ch = generate_generic(cfg(mm, n), s);
                let link = TwoPhaseLink::design(&ch, t, s, 1.0).map_err(|e| format!("{t:?} seed {s}: {e}"))?;
                ensure(link.d() == 1, format!("{t:?} seed {s}: d = {}", link.d()))?;
                noise_free_error(&link, s).map_err(|e| e.to_string())
            })
            .collect();
        for e in errs {
            worst = worst.max(e?);
        }
    }
    ensure(worst <= DECODE_TOL, format!("max error {worst:.2e}"))?;
    Ok(format!("12 (Y) and 8 (X) messages on {SUITE_SEEDS} seeds each, max error {worst:.1e}"))
}

fn criterion_9() -> Outcome {
    let grid = [30.0, 40.0, 50.0, 60.0];
    let mut parts = Vec::new();
    for (t, mm, n) in [(Y, 3, 7), (X, 2, 5)] {
        let r = simulate(cfg(mm, n), t, &grid, SLOPE_TRIALS, 2024).map_err(|e| e.to_string())?;
        let (lo, hi) = (r.min_slope(), r.max_slope());
        ensure(
            lo >= SLOPE_BAND.0 && hi <= SLOPE_BAND.1,
            format!("{t:?} slopes in [{lo:.3}, {hi:.3}]"),
        )?;
        parts.push(format!("{t:?} slopes [{lo:.3}, {hi:.3}]"));
    }
    Ok(format!("{SLOPE_TRIALS} trials: {}", parts.join(", ")))
}

fn criterion_10() -> Outcome {
    let mut sets = vec![(load_fixture(X), 1usize, 0u64)];
    for s in 0..SUITE_SEEDS {
        sets.push((generate_generic(cfg(2, 5), s), 1, s));
    }
    for (beta, s) in [(2usize, 1u64), (3, 2), (4, 3)] {
        sets.push((generate_generic(cfg(2 * beta, 5 * beta), s), beta, s));
    }
    let mut worst: f64 = 0.0;
    for (ch, d, s) in &sets {
        let system = build_system(ch, X, *d).map_err(|e| e.to_string())?;
        let beams = solve_beamformers(&system, *s, 1.0).map_err(|e| e.to_string())?;
        worst = worst.max(system.redundancy_identity_residual(&beams).map_err(|e| e.to_string())?);
    }
    ensure(worst <= ALIGN_TOL, format!("residual {worst:.2e}"))?;
    Ok(format!("{} solved X sets, max residual {worst:.1e}", sets.len()))
}

fn criterion_11() -> Outcome {
    for m1 in 1..=3 {
        for extra in [0, 2] {
            let fx = construct_block_fixture(m1, 3 * m1 + extra, m1 as u64).map_err(|e| e.to_string())?;
            let beams = fx.beams();
            let res = fx.pairwise_residual(&beams);
            ensure(res == 0.0, format!("m1={m1}: residual {res}"))?;
            ensure(fx.channels.config.n == 6 * m1, "relay size")?;
            let r = verify_pair_separability(&fx.channels, &beams, Y, DEFAULT_RANK_TOL);
            ensure(r.passed, format!("m1={m1}: not separable"))?;
        }
    }
    Ok("m1 = 1, 2, 3: zero residual, separable on 6 m1 relay antennas".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("fixture reproduction (Y)", criterion_1),
        ("fixture reproduction (X)", criterion_2),
        ("full-rank certificates", criterion_3),
        ("separability suite", criterion_4),
        ("one-to-one suite", criterion_5),
        ("DoF formula grid", criterion_6),
        ("feasibility boundary", criterion_7),
        ("end-to-end decoding", criterion_8),
        ("DoF slope", criterion_9),
        ("redundant-equation identity", criterion_10),
        ("block fixture", criterion_11),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {n:>2} PASS  {name}: {msg} [{secs:.2} s]"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {msg} [{secs:.2} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
