use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::lp::{default_iteration_limit, solve_lp, LpEngine, LpProblem, LpStatus};
use super::{Clock, MipResult, MipStatus, ProgressPoint, SolverConfig};
use crate::formulation::{check_values, FeasibilityReport, MipModel, VarKind};

/// A binary counts as integral within this distance of 0 or 1.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// An open subproblem: the root bounds plus binary fixings.
#[derive(Debug, Clone)]
pub struct Node {
    pub fixings: Vec<(usize, f64)>,
    /// Lower bound inherited from the parent relaxation.
    pub bound: f64,
    pub depth: usize,
    pub seq: u64,
}

impl Node {
    fn key(&self) -> f64 {
        if self.bound.is_finite() {
            libm::round(self.bound * 1e9)
        } else {
            self.bound
        }
    }
}

// Best bound first; among equal bounds (to 1e-9) the deeper, then the newer node.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key().total_cmp(&self.key()).then(self.depth.cmp(&other.depth)).then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

/// Result of solving one node relaxation.
#[derive(Debug, Clone)]
pub enum Outcome {
    Infeasible,
    /// Relaxation bound no better than the cutoff.
    Pruned,
    Integral { bound: f64, x: Vec<f64> },
    Branch { bound: f64, var: usize },
    Unbounded,
    /// The relaxation could not be solved reliably; the subtree is dropped
    /// and optimality can no longer be claimed.
    Failed,
}

/// Solves node relaxations on a warm-started simplex engine.
pub struct Worker<'a> {
    model: &'a MipModel,
    lp: &'a LpProblem,
    engine: LpEngine,
    touched: Vec<usize>,
    iteration_limit: usize,
    pub lp_iterations: u64,
}

impl<'a> Worker<'a> {
    pub fn new(model: &'a MipModel, lp: &'a LpProblem) -> Self {
        Self { model, lp, engine: LpEngine::new(lp), touched: Vec::new(), iteration_limit: default_iteration_limit(lp), lp_iterations: 0 }
    }

    pub fn evaluate(&mut self, node: &Node, cutoff: f64) -> Outcome {
        let mut status = self.solve_node(node);
        if matches!(status, LpStatus::IterationLimit | LpStatus::NumericalFailure) {
            self.engine = LpEngine::new(self.lp);
            self.touched.clear();
            status = self.solve_node(node);
        }
        match status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Outcome::Infeasible,
            LpStatus::Unbounded => return Outcome::Unbounded,
            LpStatus::IterationLimit | LpStatus::NumericalFailure => return Outcome::Failed,
        }
        let bound = self.engine.objective().max(node.bound);
        if bound >= cutoff {
            return Outcome::Pruned;
        }
        let x = self.engine.primal();
        let mut best: Option<(usize, f64)> = None;
        for (j, v) in self.model.variables().iter().enumerate() {
            if v.kind != VarKind::Binary {
                continue;
            }
            let frac = x[j] - libm::floor(x[j]);
            let dist = frac.min(1.0 - frac);
            if dist > INTEGRALITY_TOL && best.is_none_or(|(_, d)| dist > d) {
                best = Some((j, dist));
            }
        }
        if let Some((var, _)) = best {
            return Outcome::Branch { bound, var };
        }
        match polish(self.model, self.lp, x) {
            Some(x) => Outcome::Integral { bound, x },
            None => Outcome::Failed,
        }
    }

    fn solve_node(&mut self, node: &Node) -> LpStatus {
        for j in self.touched.drain(..) {
            self.engine.set_bounds(j, self.lp.var_lower[j], self.lp.var_upper[j]);
        }
        for &(j, v) in &node.fixings {
            self.engine.set_bounds(j, v, v);
            self.touched.push(j);
        }
        let before = self.engine.iterations();
        let status = self.engine.solve(self.iteration_limit);
        self.lp_iterations += (self.engine.iterations() - before) as u64;
        status
    }
}

/// Rounds the binaries of an integral relaxation solution; when the rounded
/// point is off by more than the feasibility tolerance, re-solves the
/// continuous part with the binaries fixed.
fn polish(model: &MipModel, lp: &LpProblem, x: &[f64]) -> Option<Vec<f64>> {
    let mut rounded = x.to_vec();
    for (j, v) in model.variables().iter().enumerate() {
        if v.kind == VarKind::Binary {
            rounded[j] = libm::round(x[j]);
        }
    }
    if check_values(model, &rounded).is_feasible() {
        return Some(rounded);
    }
    let fixed = fix_binaries(model, lp, &rounded);
    let sol = solve_lp(&fixed);
    (sol.status == LpStatus::Optimal && check_values(model, &sol.x).is_feasible()).then_some(sol.x)
}

fn fix_binaries(model: &MipModel, lp: &LpProblem, x: &[f64]) -> LpProblem {
    let mut fixed = lp.clone();
    for (j, v) in model.variables().iter().enumerate() {
        if v.kind == VarKind::Binary {
            fixed.var_lower[j] = x[j];
            fixed.var_upper[j] = x[j];
        }
    }
    fixed
}

/// Fixes the binaries to the values in `x` (rounded) and solves for the
/// continuous variables. Returns the completed point and its feasibility
/// report, or `None` when the fixed-binary program is infeasible.
pub fn complete_from_binaries(model: &MipModel, x: &[f64]) -> Option<(Vec<f64>, FeasibilityReport)> {
    let lp = model.lp_relaxation();
    let mut start = x.to_vec();
    for (j, v) in model.variables().iter().enumerate() {
        if v.kind == VarKind::Binary {
            start[j] = libm::round(x[j]);
        }
    }
    let sol = solve_lp(&fix_binaries(model, &lp, &start));
    if sol.status != LpStatus::Optimal {
        return None;
    }
    let report = check_values(model, &sol.x);
    Some((sol.x, report))
}

/// Shared branch-and-bound state: the frontier, the incumbent and the
/// counters. Workers take nodes with [`Search::next_node`] and hand back
/// outcomes with [`Search::complete`].
pub struct Search<'a> {
    model: &'a MipModel,
    cfg: SolverConfig,
    heap: BinaryHeap<Node>,
    in_flight: Vec<(u64, f64)>,
    incumbent: Option<(f64, Vec<f64>)>,
    best_bound: f64,
    nodes: u64,
    seq: u64,
    failed: u64,
    unbounded: bool,
    stopped: bool,
    trace: Vec<ProgressPoint>,
}

impl<'a> Search<'a> {
    pub fn new(model: &'a MipModel, cfg: SolverConfig) -> Self {
        let mut heap = BinaryHeap::new();
        heap.push(Node { fixings: Vec::new(), bound: f64::NEG_INFINITY, depth: 0, seq: 0 });
        Self {
            model,
            cfg,
            heap,
            in_flight: Vec::new(),
            incumbent: None,
            best_bound: f64::NEG_INFINITY,
            nodes: 0,
            seq: 1,
            failed: 0,
            unbounded: false,
            stopped: false,
            trace: Vec::new(),
        }
    }

    /// Nodes whose bound reaches this value cannot improve the incumbent by
    /// more than the gap tolerance.
    pub fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((obj, _)) => obj - self.cfg.gap_tolerance * obj.abs().max(1.0),
            None => f64::INFINITY,
        }
    }

    /// Offers a known feasible point as incumbent; rejected when infeasible
    /// or not better than the current one.
    pub fn offer(&mut self, x: Vec<f64>) -> bool {
        if x.len() != self.model.variables().len() || !check_values(self.model, &x).is_feasible() {
            return false;
        }
        let obj = self.model.objective_value(&x);
        if self.incumbent.as_ref().is_some_and(|(best, _)| obj >= *best) {
            return false;
        }
        self.incumbent = Some((obj, x));
        self.record();
        true
    }

    /// Next node to evaluate, or `None` when the search is over or a limit
    /// was hit. With several workers `None` can also mean that every open
    /// node is being evaluated; check [`Search::is_finished`].
    pub fn next_node(&mut self, clock: &dyn Clock) -> Option<Node> {
        if self.is_finished() {
            return None;
        }
        let out_of_time = self.cfg.time_limit.is_some_and(|t| clock.elapsed() >= t);
        let out_of_nodes = self.cfg.node_limit.is_some_and(|n| self.nodes >= n);
        if out_of_time || out_of_nodes {
            self.stopped = true;
            return None;
        }
        let cutoff = self.cutoff();
        while let Some(node) = self.heap.pop() {
            if node.bound >= cutoff {
                continue;
            }
            self.nodes += 1;
            self.in_flight.push((node.seq, node.bound));
            return Some(node);
        }
        self.update_bound();
        None
    }

    pub fn complete(&mut self, node: Node, outcome: Outcome) {
        self.in_flight.retain(|&(s, _)| s != node.seq);
        match outcome {
            Outcome::Infeasible | Outcome::Pruned => {}
            Outcome::Unbounded => {
                self.unbounded = true;
                self.heap.clear();
            }
            Outcome::Failed => self.failed += 1,
            Outcome::Integral { x, .. } => {
                let obj = self.model.objective_value(&x);
                if self.incumbent.as_ref().is_none_or(|(best, _)| obj < *best) {
                    self.incumbent = Some((obj, x));
                }
            }
            Outcome::Branch { bound, var } => {
                for v in [0.0, 1.0] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((var, v));
                    self.heap.push(Node { fixings, bound, depth: node.depth + 1, seq: self.seq });
                    self.seq += 1;
                }
            }
        }
        self.update_bound();
    }

    pub fn is_finished(&self) -> bool {
        self.stopped || self.unbounded || (self.heap.is_empty() && self.in_flight.is_empty())
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn incumbent_objective(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|(obj, _)| *obj)
    }

    fn update_bound(&mut self) {
        let cutoff = self.cutoff();
        let open = self
            .heap
            .peek()
            .map(|n| n.bound)
            .into_iter()
            .chain(self.in_flight.iter().map(|&(_, b)| b))
            .filter(|&b| b < cutoff)
            .fold(f64::INFINITY, f64::min);
        let candidate = match &self.incumbent {
            Some((obj, _)) => open.min(*obj),
            None => open,
        };
        if candidate > self.best_bound {
            self.best_bound = candidate;
        }
        self.record();
    }

    fn record(&mut self) {
        let point = ProgressPoint { nodes: self.nodes, incumbent: self.incumbent_objective(), best_bound: self.best_bound };
        if self.trace.last().is_none_or(|p| p.incumbent != point.incumbent || p.best_bound != point.best_bound) {
            self.trace.push(point);
        }
    }

    pub fn finish(mut self, lp_iterations: u64, wall_time: f64) -> MipResult {
        self.update_bound();
        let exhausted = self.heap.is_empty() && self.in_flight.is_empty();
        let status = if self.unbounded {
            MipStatus::Unbounded
        } else if exhausted && self.failed == 0 {
            if self.incumbent.is_some() {
                MipStatus::Optimal
            } else {
                MipStatus::Infeasible
            }
        } else if self.incumbent.is_some() {
            MipStatus::FeasibleTimeLimit
        } else {
            MipStatus::InfeasibleSoFar
        };
        let (objective, x) = match self.incumbent.take() {
            Some((obj, x)) => (obj, Some(x)),
            None => (f64::INFINITY, None),
        };
        let best_bound = if status == MipStatus::Optimal { self.best_bound.min(objective) } else { self.best_bound };
        let gap = if x.is_some() { ((objective - best_bound) / objective.abs().max(1.0)).max(0.0) } else { f64::INFINITY };
        MipResult {
            status,
            incumbent: x.as_ref().map(|x| self.model.assignment(x)),
            x,
            objective,
            best_bound,
            gap,
            nodes: self.nodes,
            lp_iterations,
            failed_nodes: self.failed,
            wall_time,
            trace: self.trace,
        }
    }
}

/// Serial branch-and-bound.
pub fn solve_mip_with_clock(model: &MipModel, cfg: &SolverConfig, clock: &dyn Clock) -> MipResult {
    let lp = model.lp_relaxation();
    let mut search = Search::new(model, cfg.clone());
    let mut worker = Worker::new(model, &lp);
    while let Some(node) = search.next_node(clock) {
        let outcome = worker.evaluate(&node, search.cutoff());
        search.complete(node, outcome);
    }
    let iterations = worker.lp_iterations;
    search.finish(iterations, clock.elapsed())
}
