use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::basis::{eval_poly, monomial_basis, MonomialBasis};
use super::shape::{build_tree_shape, TreeShape};
use crate::error::{Error, Result};

/// Slack on the axis-aligned left test `a.(x + eps) <= b`, absorbing the
/// rounding of `x + eps` when two sample gaps are equal to `eps`.
pub const AXIS_ROUTE_TOL: f64 = 1e-9;

const NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    AxisAligned,
    Hyperplane,
}

/// Branch test `a.x < b` (left) versus `a.x >= b` (right).
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Split {
    /// Axis-aligned split on coordinate `j` (0-based).
    pub fn axis(dim: usize, j: usize, b: f64) -> Self {
        let mut a = vec![0.0; dim];
        a[j] = 1.0;
        Self { a, b }
    }

    /// Coordinate of an axis-aligned split vector.
    pub fn axis_index(&self) -> Option<usize> {
        self.a.iter().position(|&v| v == 1.0)
    }

    fn project(&self, x: &[f64]) -> f64 {
        self.a.iter().zip(x).map(|(a, x)| a * x).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub coeffs: Vec<f64>,
    pub active: bool,
}

/// A complete regression tree: splits at the branch nodes and one polynomial per leaf.
///
/// Routing starts at the root and goes left when
/// * axis-aligned: `a.x + a.eps <= b` (up to [`AXIS_ROUTE_TOL`]), mirroring the
///   epsilon rows of the axis-aligned program;
/// * hyperplane: `a.x < b`.
///
/// Points lying exactly on a hyperplane therefore go right.
#[derive(Debug, Clone, PartialEq)]
pub struct PwPolyModel {
    shape: TreeShape,
    basis: MonomialBasis,
    kind: SplitKind,
    epsilon: Vec<f64>,
    splits: Vec<Split>,
    leaves: Vec<Leaf>,
}

impl PwPolyModel {
    /// Checks every invariant. `splits` is indexed by branch node minus one,
    /// `leaves` by leaf position.
    pub fn new(
        kind: SplitKind,
        depth: usize,
        degree: usize,
        epsilon: Vec<f64>,
        splits: Vec<Split>,
        leaves: Vec<Leaf>,
    ) -> Result<Self> {
        let shape = build_tree_shape(depth)?;
        let dim = epsilon.len();
        if dim == 0 {
            return Err(Error::InvalidInput("model dimension must be at least 1".into()));
        }
        if epsilon.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidInput("epsilon entries must be positive".into()));
        }
        let basis = monomial_basis(dim, degree);
        if splits.len() != shape.branch_count() {
            return Err(Error::LengthMismatch { expected: shape.branch_count(), found: splits.len() });
        }
        if leaves.len() != shape.leaf_count() {
            return Err(Error::LengthMismatch { expected: shape.leaf_count(), found: leaves.len() });
        }
        for (m, s) in splits.iter().enumerate() {
            let node = m + 1;
            if s.a.len() != dim {
                return Err(Error::LengthMismatch { expected: dim, found: s.a.len() });
            }
            if !s.b.is_finite() || s.a.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("split {node} has non-finite parameters")));
            }
            match kind {
                SplitKind::AxisAligned => {
                    let ones = s.a.iter().filter(|&&v| v == 1.0).count();
                    let zeros = s.a.iter().filter(|&&v| v == 0.0).count();
                    if ones != 1 || zeros != dim - 1 {
                        return Err(Error::InvalidInput(format!("split {node} is not a coordinate vector")));
                    }
                    if !(0.0..=1.0).contains(&s.b) {
                        return Err(Error::InvalidInput(format!("split {node} threshold {} outside [0, 1]", s.b)));
                    }
                }
                SplitKind::Hyperplane => {
                    let norm: f64 = s.a.iter().map(|v| v.abs()).sum();
                    if (norm - 1.0).abs() > NORM_TOL || s.a.iter().any(|v| v.abs() > 1.0 + NORM_TOL) {
                        return Err(Error::InvalidInput(format!("split {node} has |a|_1 = {norm}, expected 1")));
                    }
                    if !(-1.0..=1.0).contains(&s.b) {
                        return Err(Error::InvalidInput(format!("split {node} offset {} outside [-1, 1]", s.b)));
                    }
                }
            }
        }
        for leaf in &leaves {
            if leaf.coeffs.len() != basis.len() {
                return Err(Error::LengthMismatch { expected: basis.len(), found: leaf.coeffs.len() });
            }
            if leaf.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidInput("leaf coefficients must be finite".into()));
            }
        }
        Ok(Self { shape, basis, kind, epsilon, splits, leaves })
    }

    /// Depth-0 model predicting `value` everywhere.
    pub fn constant(dim: usize, value: f64) -> Result<Self> {
        Self::new(SplitKind::AxisAligned, 0, 0, vec![1.0; dim], Vec::new(), vec![Leaf { coeffs: vec![value], active: true }])
    }

    pub fn shape(&self) -> &TreeShape {
        &self.shape
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn kind(&self) -> SplitKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.epsilon.len()
    }

    pub fn depth(&self) -> usize {
        self.shape.depth()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn epsilon(&self) -> &[f64] {
        &self.epsilon
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    /// Split of branch node `m` (1-based).
    pub fn split(&self, m: usize) -> &Split {
        &self.splits[m - 1]
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    /// Leaf attached to node `t`.
    pub fn leaf(&self, t: usize) -> &Leaf {
        &self.leaves[self.shape.leaf_position(t)]
    }

    /// Whether a point at `x` takes the left branch of node `m`.
    pub fn goes_left(&self, m: usize, x: &[f64]) -> bool {
        let s = self.split(m);
        match self.kind {
            SplitKind::AxisAligned => {
                let shifted: f64 = s.a.iter().zip(x.iter().zip(&self.epsilon)).map(|(a, (x, e))| a * (x + e)).sum();
                shifted <= s.b + AXIS_ROUTE_TOL
            }
            SplitKind::Hyperplane => s.project(x) < s.b,
        }
    }

    /// Leaf reached by `x`, whether or not it is active.
    pub fn leaf_of(&self, x: &[f64]) -> usize {
        let mut t = 1;
        while !self.shape.is_leaf(t) {
            t = if self.goes_left(t, x) { TreeShape::left(t) } else { TreeShape::right(t) };
        }
        t
    }

    /// Leaf reached by `x`; an inactive leaf is a model-integrity error.
    pub fn route(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), found: x.len() });
        }
        let t = self.leaf_of(x);
        if self.leaf(t).active {
            Ok(t)
        } else {
            Err(Error::InactiveLeaf { leaf: t })
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let t = self.route(x)?;
        eval_poly(&self.leaf(t).coeffs, &self.basis, x)
    }

    /// The same function as a tree of depth `depth >= self.depth()`: each old
    /// leaf becomes a subtree whose splits send every point right and whose
    /// leaves copy the old polynomial.
    pub fn deepen(&self, depth: usize) -> Result<Self> {
        let old = self.depth();
        if depth < old {
            return Err(Error::InvalidInput(format!("cannot deepen a depth-{old} model to depth {depth}")));
        }
        let shape = build_tree_shape(depth)?;
        let dim = self.dim();
        // All points satisfy x1 >= b for these thresholds.
        let pass_right = match self.kind {
            SplitKind::AxisAligned => Split::axis(dim, 0, 0.0),
            SplitKind::Hyperplane => Split::axis(dim, 0, -1.0),
        };
        let mut splits = Vec::with_capacity(shape.branch_count());
        for m in shape.branch_nodes() {
            let level = usize::BITS - 1 - m.leading_zeros();
            if (level as usize) < old {
                splits.push(self.split(m).clone());
            } else {
                splits.push(pass_right.clone());
            }
        }
        let shift = depth - old;
        let leaves = shape.leaf_nodes().map(|t| self.leaf(t >> shift).clone()).collect();
        Self::new(self.kind, depth, self.degree(), self.epsilon.clone(), splits, leaves)
    }
}
