use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::formulation::{build_axis_aligned, check_values, encode};
use crate::functions::{sample_uniform, Domain, ScaleTransform, TestFunction};
use crate::solver::{solve_mip, MipStatus, SolverConfig};
use crate::tree::monomial_basis;

fn unit_samples(points: &[[f64; 2]], values: &[f64]) -> SampleSet {
    let flat: Vec<f64> = points.iter().flatten().copied().collect();
    SampleSet::new(2, flat, values.to_vec(), 0, ScaleTransform::unit(2)).unwrap()
}

fn line_samples(values: &[f64]) -> SampleSet {
    let xs: Vec<f64> = (0..values.len()).map(|i| (i as f64 + 0.5) / values.len() as f64).collect();
    SampleSet::new(1, xs, values.to_vec(), 0, ScaleTransform::unit(1)).unwrap()
}

#[test]
fn single_point_fits_exactly() {
    let s = line_samples(&[3.5]);
    for degree in 0..3 {
        let (_, loss) = fit_leaf(&s, &[0], &monomial_basis(1, degree), Loss::Mae, None).unwrap();
        assert!(loss.abs() < 1e-12);
    }
}

#[test]
fn lad_constant_is_the_median_and_least_squares_the_mean() {
    let s = line_samples(&[0.0, 1.0, 10.0]);
    let b = monomial_basis(1, 0);
    let (c, loss) = fit_leaf(&s, &[0, 1, 2], &b, Loss::Mae, Some(100.0)).unwrap();
    assert!((c[0] - 1.0).abs() < 1e-9 && (loss - 10.0).abs() < 1e-9);
    let (c, loss) = fit_leaf(&s, &[0, 1, 2], &b, Loss::Mse, None).unwrap();
    assert!((c[0] - 11.0 / 3.0).abs() < 1e-12);
    let mean = 11.0 / 3.0;
    assert!((loss - [0.0, 1.0, 10.0].iter().map(|y: &f64| (y - mean) * (y - mean)).sum::<f64>()).abs() < 1e-9);
}

#[test]
fn singular_least_squares_uses_the_ridge() {
    // Both points share x, so the affine normal equations are singular.
    let s = SampleSet::new(1, vec![0.5, 0.5], vec![1.0, 3.0], 0, ScaleTransform::unit(1)).unwrap();
    let (c, loss) = fit_leaf(&s, &[0, 1], &monomial_basis(1, 1), Loss::Mse, None).unwrap();
    assert!((c[0] + 0.5 * c[1] - 2.0).abs() < 1e-6);
    assert!((loss - 2.0).abs() < 1e-6);
}

#[test]
fn depth_zero_is_a_single_leaf_fit() {
    let dom = Domain::symmetric(2, 1.0).unwrap();
    let s = sample_uniform(|x: &[f64]| TestFunction::Linf.eval(x), &dom, 9, 4).unwrap();
    let h = Hyperparams { depth: 0, degree: 1, ..Hyperparams::default() };
    let r = enumerate_axis_trees(&s, &h, OracleOptions::default()).unwrap();
    let bound = h.resolve_constants(&s).unwrap().1;
    let all: Vec<usize> = (0..9).collect();
    let (_, total) = fit_leaf(&s, &all, &monomial_basis(2, 1), Loss::Mae, Some(bound)).unwrap();
    assert!((r.objective - total / 9.0).abs() < 1e-12);
}

#[test]
fn quadrant_samples_of_l1_fit_exactly() {
    // One point per quadrant of [-1, 1]^2, stored on the unit cube.
    let pts = [[0.2, 0.3], [0.8, 0.1], [0.3, 0.7], [0.9, 0.6]];
    let ys: Vec<f64> = pts.iter().map(|p| TestFunction::L1.eval(&[2.0 * p[0] - 1.0, 2.0 * p[1] - 1.0])).collect();
    let s = unit_samples(&pts, &ys);
    let h = Hyperparams { depth: 2, degree: 1, ..Hyperparams::default() };
    let r = enumerate_axis_trees(&s, &h, OracleOptions::default()).unwrap();
    assert!(r.objective < 1e-9);
    let m = build_axis_aligned(&s, &h).unwrap();
    let report = check_values(&m, &encode(&m, &s, &r.model).unwrap());
    assert!(report.is_feasible(), "{:?}", report.violations);
    assert!(report.objective < 1e-9);
}

#[test]
fn guard_rejects_large_instances() {
    let dom = Domain::symmetric(2, 1.0).unwrap();
    let s = sample_uniform(|x: &[f64]| TestFunction::L1.eval(x), &dom, 41, 1).unwrap();
    let h = Hyperparams::default();
    assert!(matches!(enumerate_axis_trees(&s, &h, OracleOptions::default()), Err(Error::Capacity(_))));
    let small = s.subset(&(0..10).collect::<Vec<_>>());
    let deep = Hyperparams { depth: 3, ..Hyperparams::default() };
    assert!(matches!(enumerate_axis_trees(&small, &deep, OracleOptions::default()), Err(Error::Capacity(_))));
    assert!(enumerate_axis_trees(&small, &deep, OracleOptions { unguarded: true, ..OracleOptions::default() }).is_ok());
}

#[test]
fn small_instance_matches_branch_and_bound() {
    let dom = Domain::symmetric(2, 1.0).unwrap();
    let s = sample_uniform(|x: &[f64]| TestFunction::Linf.eval(x), &dom, 8, 11).unwrap();
    for depth in [1, 2] {
        let h = Hyperparams { depth, degree: 1, ..Hyperparams::default() };
        let oracle = enumerate_axis_trees(&s, &h, OracleOptions::default()).unwrap();
        let mip = solve_mip(&build_axis_aligned(&s, &h).unwrap(), &SolverConfig { gap_tolerance: 1e-9, ..SolverConfig::default() }).unwrap();
        assert_eq!(mip.status, MipStatus::Optimal);
        assert!((oracle.objective - mip.objective).abs() < 1e-6, "D={depth}: {} vs {}", oracle.objective, mip.objective);
    }
}

/// Left sets of a one-split partition over a fine grid of thresholds.
fn grid_partitions(s: &SampleSet, j: usize, eps: f64) -> BTreeSet<Vec<usize>> {
    (0..=100_000)
        .map(|k| k as f64 * 1e-5)
        .map(|b| (0..s.len()).filter(|&i| s.point(i)[j] + eps <= b + crate::tree::AXIS_ROUTE_TOL).collect())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn candidate_thresholds_reach_every_partition(n in 1usize..10, seed in 0u64..10_000) {
        let dom = Domain::symmetric(2, 1.0).unwrap();
        let s = sample_uniform(|x: &[f64]| TestFunction::L1.eval(x), &dom, n, seed).unwrap();
        let eps = compute_epsilon(&s).eps;
        let ts = threshold_set(&s);
        for j in 0..2 {
            let t = &ts.per_dim[j];
            prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(t.len() <= n + 1);
            let from_candidates: BTreeSet<Vec<usize>> = t
                .iter()
                .map(|&b| (0..n).filter(|&i| s.point(i)[j] + eps[j] <= b + crate::tree::AXIS_ROUTE_TOL).collect())
                .collect();
            prop_assert_eq!(from_candidates, grid_partitions(&s, j, eps[j]));
        }
    }

    #[test]
    fn deeper_and_richer_trees_never_fit_worse(n in 2usize..9, seed in 0u64..10_000, f in 0usize..3) {
        let dom = Domain::symmetric(2, 1.0).unwrap();
        let func = [TestFunction::L1, TestFunction::Linf, TestFunction::Cone { r: 0.5, s: 0.5 }][f];
        let s = sample_uniform(|x: &[f64]| func.eval(x), &dom, n, seed).unwrap();
        let obj = |depth, degree| {
            let h = Hyperparams { depth, degree, coeff_bound: crate::formulation::Constant::Value(100.0), ..Hyperparams::default() };
            enumerate_axis_trees(&s, &h, OracleOptions::default()).unwrap().objective
        };
        for degree in 0..2 {
            prop_assert!(obj(1, degree) <= obj(0, degree) + 1e-9);
            prop_assert!(obj(2, degree) <= obj(1, degree) + 1e-9);
        }
        for depth in 0..3 {
            prop_assert!(obj(depth, 1) <= obj(depth, 0) + 1e-9);
        }
    }

    #[test]
    fn reported_objective_is_the_model_loss(n in 2usize..12, seed in 0u64..10_000) {
        let dom = Domain::symmetric(2, 1.0).unwrap();
        let s = sample_uniform(|x: &[f64]| TestFunction::Cone { r: 0.5, s: 0.5 }.eval(x), &dom, n, seed).unwrap();
        let h = Hyperparams { depth: 2, degree: 1, ..Hyperparams::default() };
        for loss in [Loss::Mae, Loss::Mse] {
            let r = enumerate_axis_trees(&s, &h, OracleOptions { loss, unguarded: false }).unwrap();
            let total: f64 = (0..n)
                .map(|i| s.value(i) - r.model.predict(s.point(i)).unwrap())
                .map(|e| if loss == Loss::Mae { e.abs() } else { e * e })
                .sum();
            prop_assert!((r.objective - total / n as f64).abs() < 1e-9);
        }
    }
}

#[test]
fn min_leaf_points_leaves_are_full_or_empty() {
    let dom = Domain::symmetric(2, 1.0).unwrap();
    let s = sample_uniform(|x: &[f64]| TestFunction::L1.eval(x), &dom, 12, 8).unwrap();
    let h = Hyperparams { depth: 2, degree: 0, min_leaf_points: 4, ..Hyperparams::default() };
    let r = enumerate_axis_trees(&s, &h, OracleOptions::default()).unwrap();
    let mut counts = vec![0usize; 4];
    for i in 0..12 {
        counts[r.model.leaf_of(s.point(i)) - 4] += 1;
    }
    assert!(counts.iter().all(|&c| c == 0 || c >= 4), "{counts:?}");
}
