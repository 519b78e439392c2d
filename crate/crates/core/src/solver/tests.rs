use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::formulation::{check_values, Sense, VarKind};

fn lad_constant(ys: &[f64]) -> LpProblem {
    // min sum t_i, t_i >= |y_i - c|
    let mut p = LpProblem::default();
    let c = p.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY);
    for &y in ys {
        let t = p.add_var(1.0, 0.0, f64::INFINITY);
        p.add_row(vec![(t, 1.0), (c, 1.0)], y, f64::INFINITY);
        p.add_row(vec![(t, 1.0), (c, -1.0)], -y, f64::INFINITY);
    }
    p
}

#[test]
fn single_lower_bound() {
    let mut p = LpProblem::default();
    let x = p.add_var(1.0, f64::NEG_INFINITY, f64::INFINITY);
    p.add_row(vec![(x, 1.0)], 3.0, f64::INFINITY);
    let s = solve_lp(&p);
    assert_eq!(s.status, LpStatus::Optimal);
    assert!((s.objective - 3.0).abs() < 1e-12);
}

#[test]
fn collinear_lad_interpolates() {
    // y = 2x + 1 at x = 0, 0.5, 1; fit c1 + c2 x
    let pts = [(0.0, 1.0), (0.5, 2.0), (1.0, 3.0)];
    let mut p = LpProblem::default();
    let c1 = p.add_var(0.0, -10.0, 10.0);
    let c2 = p.add_var(0.0, -10.0, 10.0);
    for &(x, y) in &pts {
        let t = p.add_var(1.0, 0.0, f64::INFINITY);
        p.add_row(vec![(t, 1.0), (c1, 1.0), (c2, x)], y, f64::INFINITY);
        p.add_row(vec![(t, 1.0), (c1, -1.0), (c2, -x)], -y, f64::INFINITY);
    }
    let s = solve_lp(&p);
    assert_eq!(s.status, LpStatus::Optimal);
    assert!(s.objective.abs() < 1e-9);
    assert!((s.x[c1] - 1.0).abs() < 1e-9 && (s.x[c2] - 2.0).abs() < 1e-9);
}

#[test]
fn lad_constant_is_the_median() {
    let ys = [0.0, 1.0, 10.0];
    let s = solve_lp(&lad_constant(&ys));
    assert_eq!(s.status, LpStatus::Optimal);
    // Brute-force scan of sum |y - c| over a fine grid.
    let scan = (0..=10_000)
        .map(|k| k as f64 * 1e-3)
        .map(|c| (ys.iter().map(|y| (y - c).abs()).sum::<f64>(), c))
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    assert!((s.objective - scan.0).abs() < 1e-9);
    assert!((s.x[0] - scan.1).abs() < 1e-9);
    assert!((s.objective - 10.0).abs() < 1e-9);
}

#[test]
fn detects_infeasible_and_unbounded() {
    let mut p = LpProblem::default();
    let x = p.add_var(0.0, 0.0, 1.0);
    let y = p.add_var(0.0, 0.0, 1.0);
    p.add_row(vec![(x, 1.0), (y, 1.0)], 3.0, f64::INFINITY);
    assert_eq!(solve_lp(&p).status, LpStatus::Infeasible);

    let mut q = LpProblem::default();
    let x = q.add_var(-1.0, 0.0, f64::INFINITY);
    let y = q.add_var(0.0, 0.0, f64::INFINITY);
    q.add_row(vec![(x, 1.0), (y, -1.0)], f64::NEG_INFINITY, 1.0);
    assert_eq!(solve_lp(&q).status, LpStatus::Unbounded);
}

#[test]
fn warm_start_matches_cold_solve_after_bound_change() {
    let ys = [0.3, -1.0, 2.5, 4.0, 0.0];
    let p = lad_constant(&ys);
    let mut engine = LpEngine::new(&p);
    assert_eq!(engine.solve(10_000), LpStatus::Optimal);
    engine.set_bounds(0, 1.0, 1.0);
    assert_eq!(engine.solve(10_000), LpStatus::Optimal);
    let mut fixed = p.clone();
    fixed.var_lower[0] = 1.0;
    fixed.var_upper[0] = 1.0;
    let cold = solve_lp(&fixed);
    assert!((engine.objective() - cold.objective).abs() < 1e-9);
    let direct: f64 = ys.iter().map(|y| (y - 1.0).abs()).sum();
    assert!((cold.objective - direct).abs() < 1e-9);
}

/// Minimum of `c.x` over `{0 <= x <= u, A x <= b}` in two variables by
/// enumerating the intersections of every pair of boundary lines.
fn vertex_enumeration(c: [f64; 2], u: f64, rows: &[([f64; 2], f64)]) -> Option<f64> {
    let mut lines: Vec<([f64; 2], f64)> = rows.to_vec();
    lines.push(([1.0, 0.0], 0.0));
    lines.push(([0.0, 1.0], 0.0));
    lines.push(([1.0, 0.0], u));
    lines.push(([0.0, 1.0], u));
    let feasible = |x: [f64; 2]| {
        x.iter().all(|&v| (-1e-7..=u + 1e-7).contains(&v)) && rows.iter().all(|(a, b)| a[0] * x[0] + a[1] * x[1] <= b + 1e-7)
    };
    let mut best: Option<f64> = None;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let ((a, b), (p, q)) = (lines[i], lines[j]);
            let det = a[0] * p[1] - a[1] * p[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = [(b * p[1] - a[1] * q) / det, (a[0] * q - b * p[0]) / det];
            if feasible(x) {
                let v = c[0] * x[0] + c[1] * x[1];
                best = Some(best.map_or(v, |w: f64| w.min(v)));
            }
        }
    }
    best
}

proptest! {
    #[test]
    fn two_variable_lps_match_vertex_enumeration(
        c in prop::array::uniform2(-5.0f64..5.0),
        u in 0.5f64..4.0,
        rows in prop::collection::vec((prop::array::uniform2(-3.0f64..3.0), -2.0f64..6.0), 0..6),
    ) {
        let mut p = LpProblem::default();
        p.add_var(c[0], 0.0, u);
        p.add_var(c[1], 0.0, u);
        for (a, b) in &rows {
            p.add_row(vec![(0, a[0]), (1, a[1])], f64::NEG_INFINITY, *b);
        }
        let s = solve_lp(&p);
        match vertex_enumeration(c, u, &rows) {
            Some(best) => {
                prop_assert_eq!(s.status, LpStatus::Optimal);
                prop_assert!((s.objective - best).abs() < 1e-6, "{} vs {}", s.objective, best);
                prop_assert!(p.max_violation(&s.x) < 1e-8);
            }
            None => prop_assert_eq!(s.status, LpStatus::Infeasible),
        }
    }
}

/// Knapsack-like model small enough to enumerate: max value under a weight cap.
fn knapsack(values: &[f64], weights: &[f64], cap: f64) -> MipModel {
    let mut m = MipModel::new("KNAP");
    let vars: Vec<usize> =
        (0..values.len()).map(|i| m.add_variable(alloc::format!("x{i}"), 0.0, 1.0, VarKind::Binary, None).unwrap()).collect();
    m.set_objective(vars.iter().zip(values).map(|(&j, &v)| (j, -v)).collect());
    m.add_constraint("cap", vars.iter().zip(weights).map(|(&j, &w)| (j, w)).collect(), Sense::Le, cap).unwrap();
    m
}

fn brute_force_knapsack(values: &[f64], weights: &[f64], cap: f64) -> f64 {
    (0u32..1 << values.len())
        .filter(|mask| (0..values.len()).filter(|i| mask >> i & 1 == 1).map(|i| weights[i]).sum::<f64>() <= cap + 1e-9)
        .map(|mask| -(0..values.len()).filter(|i| mask >> i & 1 == 1).map(|i| values[i]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn knapsacks_match_enumeration(
        items in prop::collection::vec((1.0f64..10.0, 1.0f64..10.0), 1..9),
        frac in 0.2f64..0.8,
    ) {
        let values: Vec<f64> = items.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = items.iter().map(|p| p.1).collect();
        let cap = frac * weights.iter().sum::<f64>();
        let m = knapsack(&values, &weights, cap);
        let r = solve_mip(&m, &SolverConfig { gap_tolerance: 0.0, ..SolverConfig::default() }).unwrap();
        prop_assert_eq!(r.status, MipStatus::Optimal);
        prop_assert!((r.objective - brute_force_knapsack(&values, &weights, cap)).abs() < 1e-9);
        prop_assert!(check_values(&m, r.x.as_ref().unwrap()).is_feasible());
        // Bound never decreases, incumbent never increases.
        for w in r.trace.windows(2) {
            prop_assert!(w[1].best_bound >= w[0].best_bound);
            if let (Some(a), Some(b)) = (w[0].incumbent, w[1].incumbent) {
                prop_assert!(b <= a);
            }
        }
        prop_assert!(r.best_bound <= r.objective + 1e-9);
    }
}

#[test]
fn contradictory_assignment_rows_are_infeasible() {
    let mut m = MipModel::new("CONTRA");
    let a = m.add_variable("z1", 0.0, 1.0, VarKind::Binary, None).unwrap();
    let b = m.add_variable("z2", 0.0, 1.0, VarKind::Binary, None).unwrap();
    m.add_constraint("one", vec![(a, 1.0), (b, 1.0)], Sense::Eq, 1.0).unwrap();
    m.add_constraint("two", vec![(a, 1.0), (b, 1.0)], Sense::Eq, 2.0).unwrap();
    m.add_constraint("odd", vec![(a, 1.0), (b, -1.0)], Sense::Eq, 0.5).unwrap();
    let r = solve_mip(&m, &SolverConfig::default()).unwrap();
    assert_eq!(r.status, MipStatus::Infeasible);
    assert!(r.incumbent.is_none());
}

#[test]
fn node_limit_reports_limit_status() {
    let values = [5.0, 4.0, 3.0, 7.0, 2.0, 6.0, 1.0, 8.0];
    let weights = [4.0, 3.0, 2.0, 5.0, 1.0, 4.5, 1.0, 6.0];
    let m = knapsack(&values, &weights, 10.5);
    let r = solve_mip(&m, &SolverConfig { node_limit: Some(1), ..SolverConfig::default() }).unwrap();
    assert!(matches!(r.status, MipStatus::FeasibleTimeLimit | MipStatus::InfeasibleSoFar));
    assert_eq!(r.nodes, 1);
}

#[test]
fn invalid_config_is_rejected() {
    assert!(SolverConfig { time_limit: Some(0.0), ..SolverConfig::default() }.validate().is_err());
    assert!(SolverConfig { threads: 0, ..SolverConfig::default() }.validate().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn warm_starts_agree_with_cold_solves(
        items in prop::collection::vec((1.0f64..10.0, 1.0f64..10.0), 2..8),
        frac in 0.2f64..0.8,
        fixings in prop::collection::vec(prop::collection::vec((0usize..8, prop::bool::ANY), 0..5), 1..8),
    ) {
        let values: Vec<f64> = items.iter().map(|p| p.0).collect();
        let weights: Vec<f64> = items.iter().map(|p| p.1).collect();
        let cap = frac * weights.iter().sum::<f64>();
        let m = knapsack(&values, &weights, cap);
        let lp = m.lp_relaxation();
        let mut engine = LpEngine::new(&lp);
        for set in &fixings {
            let mut p = lp.clone();
            for j in 0..lp.num_vars() {
                engine.set_bounds(j, lp.var_lower[j], lp.var_upper[j]);
            }
            for &(j, up) in set {
                let j = j % lp.num_vars();
                let v = if up { 1.0 } else { 0.0 };
                engine.set_bounds(j, v, v);
                p.var_lower[j] = v;
                p.var_upper[j] = v;
            }
            let warm = engine.solve(10_000);
            let cold = solve_lp(&p);
            prop_assert_eq!(warm, cold.status);
            if warm == LpStatus::Optimal {
                prop_assert!((engine.objective() - cold.objective).abs() < 1e-9);
            }
        }
    }
}
