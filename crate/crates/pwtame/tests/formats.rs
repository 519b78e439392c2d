use std::path::Path;

use pwtame::model_file::{load_model, model_from_json, model_to_json};
use pwtame::mps::{read_mps, write_mps, NameTable};
use pwtame::samples::{read_samples, write_samples};
use pwtame::solution::{import_solution, write_solution};
use pwtame_core::formulation::{build_axis_aligned, build_hyperplane, check_values, decode, Hyperparams, MipModel};
use pwtame_core::functions::{sample_uniform_at, Domain, SampleSet, ScaleTransform, TestFunction, ValueSite};
use pwtame_core::solver::{solve_mip, MipStatus, SolverConfig};
use pwtame_core::tree::SplitKind;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)).unwrap()
}

fn tiny() -> (SampleSet, Hyperparams) {
    let s = SampleSet::new(2, vec![0.25, 0.75, 0.5, 0.125], vec![1.0, -0.5], 0, ScaleTransform::unit(2)).unwrap();
    (s, Hyperparams { depth: 0, degree: 0, ..Hyperparams::default() })
}

/// Equal names, bounds, kinds, symbols, senses and right-hand sides, and the
/// same coefficients bit for bit up to their order within a row.
fn assert_same_program(a: &MipModel, b: &MipModel) {
    assert_eq!(a.name, b.name);
    assert_eq!(a.variables(), b.variables());
    for j in 0..a.variables().len() {
        assert_eq!(a.symbol(j), b.symbol(j));
    }
    assert_eq!(a.constraints().len(), b.constraints().len());
    let bits = |c: &[(usize, f64)]| {
        let mut v: Vec<(usize, u64)> = c.iter().map(|&(j, x)| (j, x.to_bits())).collect();
        v.sort();
        v
    };
    for (p, q) in a.constraints().iter().zip(b.constraints()) {
        assert_eq!((&p.name, p.sense, p.rhs.to_bits()), (&q.name, q.sense, q.rhs.to_bits()));
        assert_eq!(bits(&p.coeffs), bits(&q.coeffs), "row {}", p.name);
    }
    assert_eq!(bits(a.objective()), bits(b.objective()));
}

#[test]
fn tiny_program_matches_the_golden_file() {
    let (s, h) = tiny();
    let m = build_axis_aligned(&s, &h).unwrap();
    let e = write_mps(&m);
    assert_eq!(e.text, fixture("tiny_d0.mps"));
    assert_eq!(e.names.to_csv(), fixture("tiny_d0.names.csv"));
}

#[test]
fn golden_file_reads_back_bit_for_bit() {
    let table = NameTable::from_csv(&fixture("tiny_d0.names.csv")).unwrap();
    let m = read_mps(&fixture("tiny_d0.mps"), Some(&table)).unwrap();
    let (s, h) = tiny();
    assert_same_program(&m, &build_axis_aligned(&s, &h).unwrap());
    assert_eq!(write_mps(&m).text, fixture("tiny_d0.mps"));
}

#[test]
fn paper_sized_programs_round_trip() {
    let dom = Domain::symmetric(2, 1.0).unwrap();
    let s = sample_uniform_at(|x: &[f64]| TestFunction::Cone { r: 0.5, s: 0.5 }.eval(x), &dom, 40, 3, ValueSite::Drawn).unwrap();
    for m in [build_axis_aligned(&s, &Hyperparams::default()).unwrap(), build_hyperplane(&s, &Hyperparams::default()).unwrap()] {
        let e = write_mps(&m);
        let back = read_mps(&e.text, Some(&e.names)).unwrap();
        assert_same_program(&back, &m);
        assert_eq!(write_mps(&back), e);
    }
}

#[test]
fn solved_tiny_program_reimports_with_the_same_objective() {
    let dom = Domain::symmetric(2, 1.0).unwrap();
    let s = sample_uniform_at(|x: &[f64]| TestFunction::L1.eval(x), &dom, 6, 5, ValueSite::Drawn).unwrap();
    let h = Hyperparams { depth: 1, degree: 1, ..Hyperparams::default() };
    let m = build_axis_aligned(&s, &h).unwrap();
    let r = solve_mip(&m, &SolverConfig::default()).unwrap();
    assert_eq!(r.status, MipStatus::Optimal);
    let x = r.x.unwrap();

    let e = write_mps(&m);
    let exported = read_mps(&e.text, Some(&e.names)).unwrap();
    let full = import_solution(&exported, &write_solution(&m, &x, false), None).unwrap();
    assert_eq!(full.objective, r.objective);

    // Binaries only, under their MPS codes: the LP completion must reach the
    // same objective as the full solve.
    let coded: String = write_solution(&m, &x, true)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let (name, v) = l.split_once(' ').unwrap();
            let j = m.index_of(name).unwrap();
            format!("{} {v}\n", pwtame::mps::column_code(j))
        })
        .collect();
    let completed = import_solution(&m, &coded, Some(&e.names)).unwrap();
    assert!(completed.completed);
    assert!((completed.objective - r.objective).abs() <= 1e-6);
    assert!(check_values(&m, &completed.x).is_feasible());
    decode(&m, &completed.x, &s, &h).unwrap();
}

#[test]
fn fractional_assignment_files_are_rejected() {
    let (s, h) = tiny();
    let m = build_axis_aligned(&s, &h).unwrap();
    let text = "l_1 1\nz_1_1 0.4\nz_2_1 1\n";
    assert!(matches!(import_solution(&m, text, None), Err(pwtame::Error::Rejected(_))));
}

#[test]
fn first_release_model_file_still_parses() {
    let m = model_from_json(&fixture("model_v1.json")).unwrap();
    assert_eq!(m.kind(), SplitKind::AxisAligned);
    assert_eq!(m.depth(), 1);
    // Left leaf: 1 - 2 u1; right leaf: -1 + 2 u1 + 0.5 u2.
    assert_eq!(m.predict(&[0.25, 0.5]).unwrap(), 0.5);
    assert_eq!(m.predict(&[0.75, 0.5]).unwrap(), 0.75);
    assert_eq!(model_from_json(&model_to_json(&m)).unwrap(), m);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, fixture("model_v1.json")).unwrap();
    assert_eq!(load_model(&path).unwrap(), m);
}

#[test]
fn sample_files_keep_the_documented_precision() {
    let dom = Domain::symmetric(2, 1.0).unwrap();
    let s = sample_uniform_at(|x: &[f64]| TestFunction::Cone { r: 0.5, s: 0.5 }.eval(x), &dom, 50, 8, ValueSite::Drawn).unwrap();
    let mut buf = Vec::new();
    write_samples(&mut buf, &s).unwrap();
    let back = read_samples(buf.as_slice()).unwrap();
    assert_eq!(back.len(), 50);
    for i in 0..50 {
        assert_eq!(back.point(i), s.point(i));
        assert!((back.value(i) - s.value(i)).abs() <= 1e-11 * s.value(i).abs().max(1e-300));
    }
}
