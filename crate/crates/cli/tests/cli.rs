use std::path::Path;
use std::process::{Command, Output};

use sepauto::formats;
use sepauto::states::bell_projector;
use sepauto::HermitianOperator;

fn sepauto(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepauto")).current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).unwrap()
}

#[test]
fn gen_canonical_is_deterministic_and_decomposes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for out in ["a.json", "b.json"] {
        assert_eq!(code(&sepauto(d, &["gen", "--kind", "canonical", "--shape", "2x2", "--seed", "9", "--out", out])), 0);
    }
    assert_eq!(std::fs::read(d.join("a.json")).unwrap(), std::fs::read(d.join("b.json")).unwrap());

    let out = sepauto(d, &["decompose", "a.json", "--shape", "2x2", "--out", "report.json"]);
    assert_eq!(code(&out), 0);
    let report = json(&std::fs::read(d.join("report.json")).unwrap());
    assert_eq!(report["verdict"], "canonical");
    assert!(report["residual"].as_f64().unwrap() < 1e-8);
    assert_eq!(report["config"]["settings"]["accept_tol"], 1e-8);

    let answer = formats::read_automorphism(&std::fs::read_to_string(d.join("a.json.answer.json")).unwrap()).unwrap();
    let found: formats::AutomorphismRecord = serde_json::from_value(report["automorphism"].clone()).unwrap();
    let found = found.to_automorphism().unwrap();
    assert!(found.unitary_distance_up_to_phase(&answer).unwrap() < 1e-8);
}

#[test]
fn gen_lemma3_is_trace_preserving_and_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&sepauto(d, &["gen", "--kind", "lemma3", "--shape", "2x3", "--seed", "1", "--out", "l.json"])), 0);
    let map = formats::read_superop(&std::fs::read_to_string(d.join("l.json")).unwrap()).unwrap();
    assert!(map.is_trace_preserving(1e-10));
    let out = sepauto(d, &["decompose", "l.json"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out.stdout)["verdict"], "not-preserver");
}

#[test]
fn verify_reports_full_preservation_for_canonical_maps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    sepauto(d, &["gen", "--kind", "canonical", "--shape", "2x2x2", "--seed", "2", "--out", "c.json"]);
    let out = sepauto(d, &["verify", "c.json", "--samples", "100"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out.stdout)["pass_rate"], 1.0);
}

#[test]
fn ppt_flags_bell_state() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bell.json"), formats::write_hermitian(&bell_projector()).unwrap()).unwrap();
    let out = sepauto(d, &["ppt", "bell.json", "--shape", "2x2"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("entangled, min PT eigenvalue -0.5"));
    let report = json(&out.stdout);
    assert_eq!(report["verdict"], "entangled");
    assert!((report["min_eigenvalue"].as_f64().unwrap() + 0.5).abs() < 1e-10);
}

#[test]
fn pnr_of_identity_is_cosine() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("id.json"), formats::write_hermitian(&HermitianOperator::identity(4)).unwrap()).unwrap();
    let out = sepauto(d, &["pnr", "id.json", "--shape", "2x2", "--angles", "16", "--out", "h.csv"]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(d.join("h.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "theta,h");
    assert_eq!(rows.len(), 17);
    for row in &rows[1..] {
        let (theta, h) = row.split_once(',').unwrap();
        let (theta, h): (f64, f64) = (theta.parse().unwrap(), h.parse().unwrap());
        assert!((h - theta.cos()).abs() < 1e-12);
    }
    let points = std::fs::read_to_string(d.join("h.points.csv")).unwrap();
    assert!(points.lines().any(|l| l == "re,im"));
}

#[test]
fn errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    sepauto(d, &["gen", "--kind", "canonical", "--shape", "2x2", "--out", "c.json"]);
    let full = std::fs::read_to_string(d.join("c.json")).unwrap();
    std::fs::write(d.join("trunc.json"), &full[..full.len() / 2]).unwrap();

    let truncated = sepauto(d, &["decompose", "trunc.json"]);
    assert_eq!(code(&truncated), 64);
    assert!(String::from_utf8_lossy(&truncated.stderr).contains("format error"));
    assert_eq!(code(&sepauto(d, &["decompose", "c.json", "--shape", "2x3"])), 65);
    assert_eq!(code(&sepauto(d, &["decompose", "missing.json"])), 66);
    assert_eq!(code(&sepauto(d, &["decompose", "c.json", "--frobnicate"])), 72);
    assert_eq!(code(&sepauto(d, &["gen", "--kind", "canonical", "--shape", "2y2", "--out", "x.json"])), 65);
    assert_eq!(code(&sepauto(d, &["lemma3", "--shape", "2", "--t", "1,1,1"])), 70);
    assert_eq!(code(&sepauto(d, &["--version"])), 0);
}
