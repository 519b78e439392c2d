use std::path::Path;
use std::process::Command;

use pwtame::samples::load_samples;
use pwtame::solution::write_solution;
use pwtame_core::formulation::{build_axis_aligned, Hyperparams};
use pwtame_core::solver::{solve_mip, SolverConfig};

fn pwtame(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pwtame")).current_dir(dir).args(args).output().unwrap();
    let text = format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    (out.status.code().unwrap(), text)
}

fn sampled(dir: &Path) {
    let (code, text) = pwtame(dir, &["sample", "--fn", "l1", "--n", "8", "--seed", "4", "--dom", "0±1", "-o", "s.csv"]);
    assert_eq!(code, 0, "{text}");
}

#[test]
fn sample_then_fit_to_optimality() {
    let dir = tempfile::tempdir().unwrap();
    sampled(dir.path());
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("x1,x2,y\n"));
    assert_eq!(csv.lines().count(), 9);
    let fit = ["fit", "--formulation", "axis", "--depth", "1", "--nmin", "1", "--degree", "1", "--time-limit", "60", "-i", "s.csv", "-o", "m.json"];
    let (code, text) = pwtame(dir.path(), &fit);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("status optimal"));
    assert!(dir.path().join("m.json").exists());
    let (code, text) = pwtame(dir.path(), &["fit", "--engine", "oracle", "--depth", "1", "-i", "s.csv", "-o", "o.json"]);
    assert_eq!(code, 0, "{text}");
}

#[test]
fn stopping_before_any_incumbent_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    sampled(dir.path());
    let (code, text) = pwtame(dir.path(), &["fit", "--depth", "2", "--node-limit", "1", "-i", "s.csv", "-o", "m.json"]);
    assert_eq!(code, 3, "{text}");
    assert!(text.contains("infeasible_so_far"));
    assert!(!dir.path().join("m.json").exists());
}

#[test]
fn export_and_reimport_through_files() {
    let dir = tempfile::tempdir().unwrap();
    sampled(dir.path());
    let (code, text) = pwtame(dir.path(), &["fit", "--depth", "1", "--mps-out", "p.mps", "--export-only", "-i", "s.csv"]);
    assert_eq!(code, 0, "{text}");
    assert!(dir.path().join("p.names.csv").exists());

    let samples = load_samples(&dir.path().join("s.csv")).unwrap();
    let m = build_axis_aligned(&samples, &Hyperparams { depth: 1, ..Hyperparams::default() }).unwrap();
    let x = solve_mip(&m, &SolverConfig::default()).unwrap().x.unwrap();
    std::fs::write(dir.path().join("sol.txt"), write_solution(&m, &x, true)).unwrap();
    let (code, text) = pwtame(dir.path(), &["fit", "--depth", "1", "--sol-in", "sol.txt", "-i", "s.csv", "-o", "m.json"]);
    assert_eq!(code, 2, "{text}");
    assert!(dir.path().join("m.json").exists());

    std::fs::write(dir.path().join("bad.txt"), "nope 1\n").unwrap();
    let (code, text) = pwtame(dir.path(), &["fit", "--depth", "1", "--sol-in", "bad.txt", "-i", "s.csv", "-o", "m.json"]);
    assert_eq!(code, 1);
    assert!(text.contains("unknown variable"), "{text}");
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pwtame(dir.path(), &["fit", "--formulation", "diagonal", "-i", "s.csv", "-o", "m.json"]).0, 1);
    assert_eq!(pwtame(dir.path(), &["sample", "--fn", "l1", "--n", "3", "--dom", "0~1", "-o", "s.csv"]).0, 1);
    assert_eq!(pwtame(dir.path(), &["run"]).0, 1);
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = pwtame(dir.path(), &["run", "--scenario", "cone"]);
    assert_eq!(code, 0, "{text}");
    for f in ["samples.csv", "model.json", "pred_grid.csv", "truth_grid.csv", "report.json"] {
        assert!(dir.path().join("out/cone").join(f).exists(), "{f}");
    }
    let grid = std::fs::read_to_string(dir.path().join("out/cone/pred_grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 101);
    assert!(grid.lines().all(|l| l.split(',').count() == 101));

    let (code, toml) = pwtame(dir.path(), &["run", "--scenario", "cone", "--print-config"]);
    assert_eq!(code, 0);
    std::fs::write(dir.path().join("c.toml"), toml.replace("name = \"cone\"", "name = \"mine\"")).unwrap();
    let (code, text) = pwtame(dir.path(), &["run", "--config", "c.toml"]);
    assert_eq!(code, 0, "{text}");
    assert!(dir.path().join("out/mine/report.json").exists());
}
