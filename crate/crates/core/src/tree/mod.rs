//! Complete binary trees, monomial bases and the decoded piecewise-polynomial model.

mod basis;
mod model;
mod shape;

pub use basis::{eval_poly, monomial_basis, MonomialBasis};
pub use model::{Leaf, PwPolyModel, Split, SplitKind, AXIS_ROUTE_TOL};
pub use shape::{build_tree_shape, TreeShape, MAX_DEPTH};
