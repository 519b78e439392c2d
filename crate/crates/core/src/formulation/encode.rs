use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::model::{MipModel, Symbol};
use super::{kind_of, FormulationKind};
use crate::error::{Error, Result};
use crate::functions::SampleSet;
use crate::tree::{eval_poly, PwPolyModel, SplitKind};

/// Solution vector of `model` that represents `tree` on `samples`: every
/// point sits in the leaf the tree routes it to, leaves without points are
/// switched off, and residual variables take their implied values.
///
/// Nothing is checked here; pass the result to [`super::check_values`].
pub fn encode(model: &MipModel, samples: &SampleSet, tree: &PwPolyModel) -> Result<Vec<f64>> {
    let kind = kind_of(model).ok_or_else(|| Error::InvalidInput("model carries no symbols".into()))?;
    let expected = match kind {
        FormulationKind::AxisAligned => SplitKind::AxisAligned,
        FormulationKind::Hyperplane => SplitKind::Hyperplane,
    };
    // The two programs route boundary points differently, so a tree only
    // encodes into a program of its own kind.
    if tree.depth() > 0 && tree.kind() != expected {
        return Err(Error::InvalidInput(format!("a {:?} tree cannot be encoded into a {kind:?} program", tree.kind())));
    }
    let leaves = (0..model.variables().len()).filter(|&j| matches!(model.symbol(j), Some(Symbol::L { .. }))).count();
    if leaves != tree.shape().leaf_count() {
        return Err(Error::LengthMismatch { expected: leaves, found: tree.shape().leaf_count() });
    }
    if tree.dim() != samples.dim() {
        return Err(Error::LengthMismatch { expected: samples.dim(), found: tree.dim() });
    }
    let mut x = vec![0.0; model.variables().len()];
    let mut set = |s: Symbol, v: f64| -> Result<()> {
        let j = model.find(&s).ok_or_else(|| Error::MissingVariable(s.var_name()))?;
        x[j] = v;
        Ok(())
    };
    let shape = tree.shape();
    for node in shape.branch_nodes() {
        let split = tree.split(node);
        for (dim, &a) in split.a.iter().enumerate() {
            let dim = dim + 1;
            set(Symbol::A { dim, node }, a)?;
            if kind == FormulationKind::Hyperplane {
                set(Symbol::O { dim, node }, if a >= 0.0 { 1.0 } else { 0.0 })?;
                set(Symbol::APlus { dim, node }, a.max(0.0))?;
                set(Symbol::AMinus { dim, node }, (-a).max(0.0))?;
            }
        }
        set(Symbol::B { node }, split.b)?;
    }
    let mut used = vec![false; shape.leaf_count()];
    for i in 0..samples.len() {
        let p = samples.point(i);
        let leaf = tree.leaf_of(p);
        used[shape.leaf_position(leaf)] = true;
        let point = i + 1;
        for t in shape.leaf_nodes() {
            set(Symbol::Z { point, leaf: t }, if t == leaf { 1.0 } else { 0.0 })?;
            let phi = samples.value(i) - eval_poly(&tree.leaf(t).coeffs, tree.basis(), p)?;
            set(Symbol::Phi { point, leaf: t }, phi)?;
            if t == leaf {
                set(Symbol::Delta { point }, phi.abs())?;
            }
        }
    }
    for leaf in shape.leaf_nodes() {
        let on = used[shape.leaf_position(leaf)];
        set(Symbol::L { leaf }, if on { 1.0 } else { 0.0 })?;
        for (k, &c) in tree.leaf(leaf).coeffs.iter().enumerate() {
            set(Symbol::C { leaf, term: k + 1 }, c)?;
        }
    }
    Ok(x)
}
