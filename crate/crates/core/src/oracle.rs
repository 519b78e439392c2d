//! Exhaustive search over axis-aligned trees.
//!
//! For an axis split on coordinate `j` a point goes left when
//! `x_j + eps_j <= b` and right when `x_j >= b`, exactly as in the
//! axis-aligned program. Between two consecutive distinct sample values
//! `v < w` any `b` in `[v + eps_j, w]` produces the same partition, so one
//! candidate per gap plus the two extremes covers every partition the
//! program can express. The optimal tree is then found by dynamic
//! programming over (point subset, remaining depth), since the loss of a
//! tree is the sum of the losses of its two subtrees.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::formulation::{compute_epsilon, Hyperparams};
use crate::functions::SampleSet;
use crate::solver::lp::{solve_lp, LpProblem, LpStatus};
use crate::tree::{build_tree_shape, Leaf, MonomialBasis, PwPolyModel, Split, SplitKind, TreeShape};

/// Largest sample the subset encoding supports.
pub const MAX_POINTS: usize = 128;
/// Default complexity guard.
pub const GUARD_POINTS: usize = 40;
pub const GUARD_DEPTH: usize = 2;
pub const GUARD_DIM: usize = 3;

const RIDGE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Loss {
    #[default]
    Mae,
    Mse,
}

/// Candidate thresholds per dimension, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSet {
    pub per_dim: Vec<Vec<f64>>,
}

/// `0` (everything right), one threshold in every gap between consecutive
/// distinct values, and `1` when `max + eps <= 1` (everything left).
pub fn threshold_set(samples: &SampleSet) -> ThresholdSet {
    let eps = compute_epsilon(samples).eps;
    let per_dim = (0..samples.dim())
        .map(|j| {
            let mut v: Vec<f64> = samples.column(j).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            let mut t = vec![0.0];
            for w in v.windows(2) {
                let b = 0.5 * (w[0] + eps[j] + w[1]);
                if b > *t.last().unwrap() {
                    t.push(b);
                }
            }
            if v.last().is_some_and(|&top| top + eps[j] <= 1.0) && *t.last().unwrap() < 1.0 {
                t.push(1.0);
            }
            t
        })
        .collect();
    ThresholdSet { per_dim }
}

/// Best polynomial on a set of points. MAE is solved exactly as a linear
/// program with coefficients boxed in `[-bound, bound]` when a bound is
/// given; MSE through the normal equations, with a small ridge term when
/// they are singular. Returns the coefficients and the total loss.
pub fn fit_leaf(samples: &SampleSet, indices: &[usize], basis: &MonomialBasis, loss: Loss, bound: Option<f64>) -> Result<(Vec<f64>, f64)> {
    if indices.is_empty() {
        return Err(Error::EmptySample);
    }
    let rows: Vec<Vec<f64>> = indices.iter().map(|&i| basis.features(samples.point(i))).collect();
    let ys: Vec<f64> = indices.iter().map(|&i| samples.value(i)).collect();
    let k = basis.len();
    match loss {
        Loss::Mae => {
            // f.c + e+ - e- = y, minimize sum e+ + e-.
            let mut p = LpProblem::default();
            let (lo, hi) = bound.map_or((f64::NEG_INFINITY, f64::INFINITY), |c| (-c, c));
            for _ in 0..k {
                p.add_var(0.0, lo, hi);
            }
            for (f, &y) in rows.iter().zip(&ys) {
                let plus = p.add_var(1.0, 0.0, f64::INFINITY);
                let minus = p.add_var(1.0, 0.0, f64::INFINITY);
                let mut coeffs: Vec<(usize, f64)> = f.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j, v)).collect();
                coeffs.push((plus, 1.0));
                coeffs.push((minus, -1.0));
                p.add_row(coeffs, y, y);
            }
            let sol = solve_lp(&p);
            if sol.status != LpStatus::Optimal {
                return Err(Error::Numerical(format!("leaf LAD fit ended with {:?}", sol.status)));
            }
            let c = sol.x[..k].to_vec();
            let total = rows.iter().zip(&ys).map(|(f, y)| (y - dot(f, &c)).abs()).sum();
            Ok((c, total))
        }
        Loss::Mse => {
            let mut ata = vec![0.0; k * k];
            let mut aty = vec![0.0; k];
            for (f, &y) in rows.iter().zip(&ys) {
                for a in 0..k {
                    aty[a] += f[a] * y;
                    for b in 0..k {
                        ata[a * k + b] += f[a] * f[b];
                    }
                }
            }
            let c = match solve_dense(ata.clone(), aty.clone(), k) {
                Some(c) => c,
                None => {
                    for a in 0..k {
                        ata[a * k + a] += RIDGE;
                    }
                    solve_dense(ata, aty, k).ok_or_else(|| Error::Numerical("singular normal equations".into()))?
                }
            };
            let total = rows.iter().zip(&ys).map(|(f, y)| (y - dot(f, &c)) * (y - dot(f, &c))).sum();
            Ok((c, total))
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// Gaussian elimination with partial pivoting; `None` on a (near) singular matrix.
fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, k: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..k {
        let piv = (col..k).max_by(|&r, &s| a[r * k + col].abs().total_cmp(&a[s * k + col].abs()))?;
        if a[piv * k + col].abs() <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            for c in 0..k {
                a.swap(piv * k + c, col * k + c);
            }
            b.swap(piv, col);
        }
        for r in col + 1..k {
            let f = a[r * k + col] / a[col * k + col];
            if f != 0.0 {
                for c in col..k {
                    a[r * k + c] -= f * a[col * k + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let s: f64 = (r + 1..k).map(|c| a[r * k + c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r * k + r];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub loss: Loss,
    /// Lifts the default size guard (the subset encoding limit still applies).
    pub unguarded: bool,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { loss: Loss::Mae, unguarded: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub model: PwPolyModel,
    /// Total loss divided by `n`.
    pub objective: f64,
    /// Distinct (subset, depth) problems solved.
    pub subproblems: usize,
}

#[derive(Debug, Clone)]
enum Choice {
    Empty,
    Leaf(Vec<f64>),
    Split(usize, f64),
}

/// Dynamic program behind [`enumerate_axis_trees`], exposed so callers can
/// spread the root candidates over threads.
pub struct Oracle<'a> {
    samples: &'a SampleSet,
    h: Hyperparams,
    loss: Loss,
    basis: MonomialBasis,
    bound: Option<f64>,
    thresholds: ThresholdSet,
    eps: Vec<f64>,
    memo: BTreeMap<(u128, usize), (f64, Choice)>,
}

impl<'a> Oracle<'a> {
    pub fn new(samples: &'a SampleSet, h: &Hyperparams, opts: OracleOptions) -> Result<Self> {
        h.validate()?;
        let (n, d) = (samples.len(), samples.dim());
        if n == 0 {
            return Err(Error::EmptySample);
        }
        if n > MAX_POINTS {
            return Err(Error::Capacity(format!("the oracle handles at most {MAX_POINTS} points, got {n}")));
        }
        if !opts.unguarded && (n > GUARD_POINTS || h.depth > GUARD_DEPTH || d > GUARD_DIM) {
            return Err(Error::Capacity(format!(
                "n={n}, D={}, d={d} exceeds the oracle guard (n <= {GUARD_POINTS}, D <= {GUARD_DEPTH}, d <= {GUARD_DIM})",
                h.depth
            )));
        }
        build_tree_shape(h.depth)?;
        let bound = match opts.loss {
            Loss::Mae => Some(h.resolve_constants(samples)?.1),
            Loss::Mse => None,
        };
        Ok(Self {
            samples,
            h: h.clone(),
            loss: opts.loss,
            basis: crate::tree::monomial_basis(d, h.degree),
            bound,
            thresholds: threshold_set(samples),
            eps: compute_epsilon(samples).eps,
            memo: BTreeMap::new(),
        })
    }

    pub fn thresholds(&self) -> &ThresholdSet {
        &self.thresholds
    }

    fn all(&self) -> u128 {
        if self.samples.len() == 128 {
            u128::MAX
        } else {
            (1u128 << self.samples.len()) - 1
        }
    }

    /// Root splits in search order (dimension, then threshold).
    pub fn root_candidates(&self) -> Vec<(usize, f64)> {
        if self.h.depth == 0 {
            return Vec::new();
        }
        self.candidates()
    }

    fn candidates(&self) -> Vec<(usize, f64)> {
        self.thresholds.per_dim.iter().enumerate().flat_map(|(j, ts)| ts.iter().map(move |&b| (j, b))).collect()
    }

    /// Best total loss of a tree whose root uses `split`.
    pub fn best_with_root(&mut self, split: (usize, f64)) -> Result<f64> {
        let (left, right) = self.partition(self.all(), split);
        Ok(self.best(left, self.h.depth - 1)? + self.best(right, self.h.depth - 1)?)
    }

    fn partition(&self, set: u128, (j, b): (usize, f64)) -> (u128, u128) {
        let (mut left, mut right) = (0u128, 0u128);
        for i in members(set) {
            let u = self.samples.point(i)[j];
            if u + self.eps[j] <= b + crate::tree::AXIS_ROUTE_TOL {
                left |= 1 << i;
            } else {
                right |= 1 << i;
            }
        }
        (left, right)
    }

    fn best(&mut self, set: u128, depth: usize) -> Result<f64> {
        if let Some((v, _)) = self.memo.get(&(set, depth)) {
            return Ok(*v);
        }
        let (value, choice) = if set == 0 {
            (0.0, Choice::Empty)
        } else if depth == 0 {
            let idx: Vec<usize> = members(set).collect();
            if idx.len() < self.h.min_leaf_points {
                (f64::INFINITY, Choice::Empty)
            } else {
                let (c, total) = fit_leaf(self.samples, &idx, &self.basis, self.loss, self.bound)?;
                (total, Choice::Leaf(c))
            }
        } else {
            let mut best = (f64::INFINITY, Choice::Empty);
            let mut seen = alloc::collections::BTreeSet::new();
            for cand in self.candidates() {
                let (l, r) = self.partition(set, cand);
                if !seen.insert(l) {
                    continue;
                }
                let v = self.best(l, depth - 1)? + self.best(r, depth - 1)?;
                if v < best.0 {
                    best = (v, Choice::Split(cand.0, cand.1));
                }
            }
            best
        };
        self.memo.insert((set, depth), (value, choice));
        Ok(value)
    }

    /// Runs the whole search, optionally with a root split already chosen.
    pub fn solve(&mut self, root: Option<(usize, f64)>) -> Result<OracleResult> {
        let n = self.samples.len();
        let total = match root {
            Some(split) => self.best_with_root(split)?,
            None => self.best(self.all(), self.h.depth)?,
        };
        if !total.is_finite() {
            return Err(Error::InvalidInput(format!("no tree gives every nonempty leaf {} points", self.h.min_leaf_points)));
        }
        let shape = build_tree_shape(self.h.depth)?;
        let d = self.samples.dim();
        let mut splits = vec![Split::axis(d, 0, 0.0); shape.branch_count()];
        let mut leaves = vec![Leaf { coeffs: vec![0.0; self.basis.len()], active: false }; shape.leaf_count()];
        self.fill(&shape, 1, self.all(), root, &mut splits, &mut leaves)?;
        let model = PwPolyModel::new(SplitKind::AxisAligned, self.h.depth, self.h.degree, self.eps.clone(), splits, leaves)?;
        Ok(OracleResult { model, objective: total / n as f64, subproblems: self.memo.len() })
    }

    fn fill(&mut self, shape: &TreeShape, node: usize, set: u128, forced: Option<(usize, f64)>, splits: &mut [Split], leaves: &mut [Leaf]) -> Result<()> {
        let d = self.samples.dim();
        if shape.is_leaf(node) {
            self.best(set, 0)?;
            if let Some((_, Choice::Leaf(c))) = self.memo.get(&(set, 0)) {
                leaves[shape.leaf_position(node)] = Leaf { coeffs: c.clone(), active: true };
            }
            return Ok(());
        }
        let remaining = self.h.depth - depth_of(node);
        let split = match forced {
            Some(s) => Some(s),
            None => {
                self.best(set, remaining)?;
                match self.memo.get(&(set, remaining)) {
                    Some((_, Choice::Split(j, b))) => Some((*j, *b)),
                    _ => None,
                }
            }
        };
        let (j, b) = split.unwrap_or((0, 0.0));
        splits[node - 1] = Split::axis(d, j, b);
        let (l, r) = self.partition(set, (j, b));
        self.fill(shape, TreeShape::left(node), l, None, splits, leaves)?;
        self.fill(shape, TreeShape::right(node), r, None, splits, leaves)
    }
}

fn depth_of(node: usize) -> usize {
    (usize::BITS - 1 - node.leading_zeros()) as usize
}

fn members(set: u128) -> impl Iterator<Item = usize> {
    (0..128).filter(move |&i| set >> i & 1 == 1)
}

/// Globally optimal axis-aligned tree over the candidate thresholds.
pub fn enumerate_axis_trees(samples: &SampleSet, h: &Hyperparams, opts: OracleOptions) -> Result<OracleResult> {
    Oracle::new(samples, h, opts)?.solve(None)
}

#[cfg(test)]
mod tests;
