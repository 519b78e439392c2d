use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::model::{MipModel, Symbol};
use super::{compute_epsilon, kind_of, FormulationKind, Hyperparams};
use crate::error::{Error, Result};
use crate::functions::SampleSet;
use crate::tree::{build_tree_shape, eval_poly, monomial_basis, Leaf, PwPolyModel, Split, SplitKind, TreeShape};

const RESIDUAL_TOL: f64 = 1e-6;

/// Reads a tree out of a solution vector of a program built by
/// [`super::build`] on `samples`.
///
/// Split vectors are cleaned up (axis vectors snapped to the coordinate with
/// the largest entry, hyperplane vectors rescaled to unit 1-norm) and an offset
/// is kept when it already routes every point to the leaf its `z` row names,
/// otherwise moved to the nearest offset that does. The decoded tree must then
/// route every point to that leaf and reproduce each `phi` as a residual.
pub fn decode(model: &MipModel, x: &[f64], samples: &SampleSet, h: &Hyperparams) -> Result<PwPolyModel> {
    if x.len() != model.variables().len() {
        return Err(Error::LengthMismatch { expected: model.variables().len(), found: x.len() });
    }
    let kind = kind_of(model).ok_or_else(|| Error::DecodeIntegrity("model carries no symbols".into()))?;
    let shape = build_tree_shape(h.depth)?;
    let d = samples.dim();
    let n = samples.len();
    let basis = monomial_basis(d, h.degree);
    let eps = compute_epsilon(samples).eps;
    let val = |s: Symbol| model.find(&s).map(|j| x[j]).ok_or_else(|| Error::MissingVariable(s.var_name()));

    let mut assigned = vec![0usize; n];
    for (i, slot) in assigned.iter_mut().enumerate() {
        let mut best = (f64::NEG_INFINITY, 0);
        for leaf in shape.leaf_nodes() {
            let v = val(Symbol::Z { point: i + 1, leaf })?;
            if v > best.0 {
                best = (v, leaf);
            }
        }
        if best.0 < 0.5 {
            return Err(Error::DecodeIntegrity(format!("point {} is assigned to no leaf", i + 1)));
        }
        *slot = best.1;
    }

    let mut splits = Vec::with_capacity(shape.branch_count());
    for node in shape.branch_nodes() {
        let raw: Vec<f64> = (1..=d).map(|dim| val(Symbol::A { dim, node })).collect::<Result<_>>()?;
        let b = val(Symbol::B { node })?;
        let (left, right) = split_sides(&shape, node, &assigned);
        let split = match kind {
            FormulationKind::AxisAligned => {
                let j = (0..d).fold(0, |best, j| if raw[j] > raw[best] { j } else { best });
                let lo = left.iter().map(|&i| samples.point(i)[j] + eps[j]).fold(f64::NEG_INFINITY, f64::max);
                let hi = right.iter().map(|&i| samples.point(i)[j]).fold(f64::INFINITY, f64::min);
                let (lo, hi) = (lo.max(0.0), hi.min(1.0));
                if lo > hi {
                    return Err(Error::DecodeIntegrity(format!("no threshold on x{} separates the points of node {node}", j + 1)));
                }
                Split::axis(d, j, b.clamp(lo, hi))
            }
            FormulationKind::Hyperplane => {
                let norm: f64 = raw.iter().map(|v| v.abs()).sum();
                if norm <= 0.0 {
                    return Err(Error::DecodeIntegrity(format!("split {node} has a zero vector")));
                }
                let a: Vec<f64> = raw.iter().map(|v| v / norm).collect();
                let proj = |i: usize| a.iter().zip(samples.point(i)).map(|(a, x)| a * x).sum::<f64>();
                let lo = left.iter().map(|&i| proj(i)).fold(f64::NEG_INFINITY, f64::max);
                let hi = right.iter().map(|&i| proj(i)).fold(f64::INFINITY, f64::min);
                let b = if b > lo && b <= hi {
                    b
                } else if lo < hi {
                    hi.min(lo + h.mu).clamp(-1.0, 1.0)
                } else {
                    return Err(Error::DecodeIntegrity(format!("no offset separates the points of node {node}")));
                };
                Split { a, b }
            }
        };
        splits.push(split);
    }

    let leaves = shape
        .leaf_nodes()
        .map(|leaf| {
            let active = val(Symbol::L { leaf })? > 0.5 || assigned.contains(&leaf);
            let coeffs = if active {
                (1..=basis.len()).map(|term| val(Symbol::C { leaf, term })).collect::<Result<Vec<_>>>()?
            } else {
                vec![0.0; basis.len()]
            };
            Ok(Leaf { coeffs, active })
        })
        .collect::<Result<Vec<_>>>()?;
    let leaves = fill_empty_leaves(&shape, leaves);
    let split_kind = match kind {
        FormulationKind::AxisAligned => SplitKind::AxisAligned,
        FormulationKind::Hyperplane => SplitKind::Hyperplane,
    };
    let tree = PwPolyModel::new(split_kind, h.depth, h.degree, eps, splits, leaves)?;

    for (i, &leaf) in assigned.iter().enumerate() {
        let p = samples.point(i);
        let got = tree.leaf_of(p);
        if got != leaf {
            return Err(Error::DecodeIntegrity(format!("point {} routes to leaf {got}, solution says {leaf}", i + 1)));
        }
        let residual = samples.value(i) - eval_poly(&tree.leaf(leaf).coeffs, tree.basis(), p)?;
        let phi = val(Symbol::Phi { point: i + 1, leaf })?;
        if (residual - phi).abs() > RESIDUAL_TOL * samples.value(i).abs().max(1.0) {
            return Err(Error::DecodeIntegrity(format!("point {}: residual {residual} but phi {phi}", i + 1)));
        }
    }
    Ok(tree)
}

/// An empty leaf still owns a region of the cube. It takes the polynomial of
/// the first active leaf below its nearest ancestor that has one, so the
/// decoded tree predicts everywhere without changing any training residual.
fn fill_empty_leaves(shape: &TreeShape, mut leaves: Vec<Leaf>) -> Vec<Leaf> {
    let source: Vec<Option<usize>> = shape
        .leaf_nodes()
        .map(|leaf| {
            if leaves[shape.leaf_position(leaf)].active {
                return None;
            }
            let mut node = leaf;
            while node > 1 {
                node /= 2;
                if let Some(t) = shape.leaf_nodes().find(|&t| is_below(t, node) && leaves[shape.leaf_position(t)].active) {
                    return Some(shape.leaf_position(t));
                }
            }
            None
        })
        .collect();
    for (k, src) in source.into_iter().enumerate() {
        if let Some(src) = src {
            leaves[k] = Leaf { coeffs: leaves[src].coeffs.clone(), active: true };
        }
    }
    leaves
}

fn is_below(mut t: usize, node: usize) -> bool {
    while t > node {
        t /= 2;
    }
    t == node
}

/// Points assigned below the left and right child of `node`.
fn split_sides(shape: &TreeShape, node: usize, assigned: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for (i, &leaf) in assigned.iter().enumerate() {
        if shape.left_ancestors(leaf).contains(&node) {
            left.push(i);
        } else if shape.right_ancestors(leaf).contains(&node) {
            right.push(i);
        }
    }
    (left, right)
}
