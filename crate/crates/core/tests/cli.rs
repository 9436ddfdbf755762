use std::path::Path;
use std::process::{Command, Output};

use relay_align::aligner::BeamformerSet;
use relay_align::cli::exit;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_relay-align"));
    c.env_remove("RELAYALIGN_OUT_DIR");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn dof_table_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["dof-table", "--topology", "y", "--M", "1..84", "--N", "84", "--out", "t.csv"]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "M,N,ratio,d_star_num,d_star_den,counting_num,counting_den,feasible_floor,regime,redundancy"
    );
    assert_eq!(lines.count(), 84);
    assert!(text.contains("\n36,84,"));
    assert!(dir.path().join("t.csv.manifest.json").exists());

    let o = run(dir.path(), &["dof-table", "--topology", "x", "--M", "16", "--N", "40", "--out", "x.csv"]);
    assert_eq!(code(&o), exit::OK);
    let row = std::fs::read_to_string(dir.path().join("x.csv")).unwrap();
    assert!(row.lines().nth(1).unwrap().starts_with("16,40,0.4,8,1,"), "{row}");

    let o = run(dir.path(), &["dof-table", "--topology", "y", "--M", "5..2", "--N", "7"]);
    assert_eq!(code(&o), exit::USAGE);
}

#[test]
fn default_output_dir_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("outs");
    let o = bin()
        .current_dir(dir.path())
        .env("RELAYALIGN_OUT_DIR", &out)
        .args(["dof-table", "--topology", "x", "--M", "1..3", "--N", "5"])
        .output()
        .unwrap();
    assert_eq!(code(&o), exit::OK);
    assert!(out.join("dof_table.csv").exists());
}

#[test]
fn solve_then_verify_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["solve", "--topology", "y", "--fixture", "--out", "beams.json"]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stderr));
    let beams = BeamformerSet::from_json(&std::fs::read_to_string(dir.path().join("beams.json")).unwrap()).unwrap();
    assert_eq!(beams.beams.len(), 12);
    let o = run(
        dir.path(),
        &["verify", "--beams", "beams.json", "--channels", "channels.json", "--report", "r.json"],
    );
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn verify_flags_broken_beams() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["solve", "--topology", "x", "--M", "2", "--N", "5", "--seed", "4"]);
    assert_eq!(code(&o), exit::OK);
    let path = dir.path().join("beams.json");
    let mut beams = BeamformerSet::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for v in beams.beams.values_mut().take(1) {
        v[(0, 0)] += relay_align::linalg::c(0.5, 0.0);
    }
    std::fs::write(&path, beams.to_json().unwrap()).unwrap();
    let o = run(dir.path(), &["verify", "--beams", "beams.json", "--channels", "channels.json"]);
    assert_eq!(code(&o), exit::VERIFICATION);
}

#[test]
fn solve_high_ratio_reduces_relay() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["solve", "--topology", "y", "--M", "13", "--N", "13", "--seed", "2"]);
    assert_eq!(code(&o), exit::OK);
    let s: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s["d"], 2);
    assert_eq!(s["scheme"], "one_to_one");
    assert_eq!(s["reduced"]["n"], 12);
    let o = run(dir.path(), &["verify", "--beams", "beams.json", "--channels", "channels.json"]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn probe_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["probe", "--topology", "y", "--M", "3", "--N", "7", "--d", "1", "--seeds", "5"]);
    assert_eq!(code(&o), exit::OK);
    let o = run(
        dir.path(),
        &["probe", "--topology", "y", "--M", "3", "--N", "7", "--d", "2", "--seeds", "5", "--out", "p.json"],
    );
    assert_eq!(code(&o), exit::INFEASIBLE);
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.json")).unwrap()).unwrap();
    assert_eq!(s["verdict"], "infeasible");
    assert_eq!(s["violated"]["required"], 6);
    assert_eq!(s["violated"]["available"], 3);
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec!["simulate", "--topology", "x", "--M", "2", "--N", "5", "--snr", "20,30,40", "--trials", "6", "--seed", "9", "--out", out]
    };
    assert_eq!(code(&run(dir.path(), &args("a.csv"))), exit::OK);
    assert_eq!(code(&run(dir.path(), &args("b.csv"))), exit::OK);
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().starts_with("power_dB,message_src,message_dst,mean_rate_bits,trials\n"));
    assert!(dir.path().join("a.summary.json").exists());

    let o = run(dir.path(), &["simulate", "--topology", "x", "--M", "2", "--N", "5", "--snr", "30"]);
    assert_eq!(code(&o), exit::USAGE);
}

#[test]
fn pipeline_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["pipeline", "--topology", "y", "--M", "3", "--N", "7", "--seed", "1", "--trials", "40"]);
    assert_eq!(code(&o), exit::OK, "{}", String::from_utf8_lossy(&o.stdout));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("pipeline_report.json")).unwrap()).unwrap();
    assert_eq!(r["passed"], true);
    assert_eq!(r["stages"].as_array().unwrap().len(), 5);

    let o = run(dir.path(), &["pipeline", "--topology", "y", "--M", "3", "--N", "7", "--d", "2", "--report", "inf.json"]);
    assert_eq!(code(&o), exit::INFEASIBLE);
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("inf.json")).unwrap()).unwrap();
    assert_eq!(r["stages"][1]["detail"]["verdict"], "infeasible");

    let o = run(dir.path(), &["pipeline", "--topology", "y", "--M", "3"]);
    assert_eq!(code(&o), exit::USAGE);
}
