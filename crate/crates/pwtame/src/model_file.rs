//! JSON model files.
//!
//! Version 1 layout:
//!
//! ```json
//! {
//!   "version": 1,
//!   "split_kind": "axis" | "hyperplane",
//!   "depth": 2,
//!   "degree": 1,
//!   "epsilon": [0.0001, 0.0002],
//!   "splits": [{ "node": 1, "a": [1.0, 0.0], "b": 0.5 }, ...],
//!   "leaves": [{ "node": 4, "active": true, "coeffs": [2.0, -2.0, -2.0] }, ...]
//! }
//! ```
//!
//! Splits are listed for branch nodes `1..2^D` and leaves for nodes
//! `2^D..2^(D+1)`, in order. The dimension is the length of `epsilon`. Leaf
//! coefficients follow the graded-lex monomial order of
//! [`pwtame_core::tree::monomial_basis`]. Reals are written in their shortest
//! round-trip form, so reading a written model gives back the same bits.

use std::path::Path;

use serde::{Deserialize, Serialize};

use pwtame_core::tree::{Leaf, PwPolyModel, Split, SplitKind};

use crate::error::{read_file, write_file, Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindTag {
    Axis,
    Hyperplane,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitRecord {
    node: usize,
    a: Vec<f64>,
    b: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeafRecord {
    node: usize,
    active: bool,
    coeffs: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    version: u32,
    split_kind: KindTag,
    depth: usize,
    degree: usize,
    epsilon: Vec<f64>,
    splits: Vec<SplitRecord>,
    leaves: Vec<LeafRecord>,
}

pub fn model_to_json(model: &PwPolyModel) -> String {
    let shape = model.shape();
    let doc = ModelDocument {
        version: FORMAT_VERSION,
        split_kind: match model.kind() {
            SplitKind::AxisAligned => KindTag::Axis,
            SplitKind::Hyperplane => KindTag::Hyperplane,
        },
        depth: model.depth(),
        degree: model.degree(),
        epsilon: model.epsilon().to_vec(),
        splits: shape
            .branch_nodes()
            .map(|node| {
                let s = model.split(node);
                SplitRecord { node, a: s.a.clone(), b: s.b }
            })
            .collect(),
        leaves: shape
            .leaf_nodes()
            .map(|node| {
                let l = model.leaf(node);
                LeafRecord { node, active: l.active, coeffs: l.coeffs.clone() }
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("model documents serialize");
    text.push('\n');
    text
}

pub fn model_from_json(text: &str) -> Result<PwPolyModel> {
    let doc: ModelDocument = serde_json::from_str(text)?;
    if doc.version != FORMAT_VERSION {
        return Err(Error::Invalid(format!("unsupported model file version {} (this build reads {FORMAT_VERSION})", doc.version)));
    }
    let branches = (1usize << doc.depth.min(63)) - 1;
    for (k, s) in doc.splits.iter().enumerate() {
        if s.node != k + 1 {
            return Err(Error::Invalid(format!("split {k} is for node {}, expected node {}", s.node, k + 1)));
        }
    }
    for (k, l) in doc.leaves.iter().enumerate() {
        if l.node != branches + 1 + k {
            return Err(Error::Invalid(format!("leaf {k} is for node {}, expected node {}", l.node, branches + 1 + k)));
        }
    }
    let kind = match doc.split_kind {
        KindTag::Axis => SplitKind::AxisAligned,
        KindTag::Hyperplane => SplitKind::Hyperplane,
    };
    let splits = doc.splits.into_iter().map(|s| Split { a: s.a, b: s.b }).collect();
    let leaves = doc.leaves.into_iter().map(|l| Leaf { coeffs: l.coeffs, active: l.active }).collect();
    Ok(PwPolyModel::new(kind, doc.depth, doc.degree, doc.epsilon, splits, leaves)?)
}

pub fn save_model(path: &Path, model: &PwPolyModel) -> Result<()> {
    write_file(path, &model_to_json(model))
}

pub fn load_model(path: &Path) -> Result<PwPolyModel> {
    model_from_json(&read_file(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_model() -> PwPolyModel {
        let splits = vec![Split::axis(2, 0, 0.5), Split::axis(2, 1, 0.25), Split::axis(2, 1, 0.75)];
        let leaves = (0..4).map(|k| Leaf { coeffs: vec![k as f64, 0.1, -1.0 / 3.0], active: k != 2 }).collect();
        PwPolyModel::new(SplitKind::AxisAligned, 2, 1, vec![1e-4, 0.1 + 0.2], splits, leaves).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let m = sample_model();
        assert_eq!(model_from_json(&model_to_json(&m)).unwrap(), m);
    }

    #[test]
    fn missing_splits_is_a_parse_error() {
        let mut v: serde_json::Value = serde_json::from_str(&model_to_json(&sample_model())).unwrap();
        v.as_object_mut().unwrap().remove("splits");
        assert!(matches!(model_from_json(&v.to_string()), Err(Error::Json(_))));
    }

    #[test]
    fn rejects_unknown_versions_and_misnumbered_nodes() {
        let text = model_to_json(&sample_model());
        assert!(model_from_json(&text.replace("\"version\": 1", "\"version\": 9")).is_err());
        assert!(model_from_json(&text.replace("\"node\": 4", "\"node\": 5")).is_err());
    }
}
