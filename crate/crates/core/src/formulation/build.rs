use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::model::{MipModel, Sense, Symbol, VarKind};
use super::{compute_epsilon, FormulationKind, Hyperparams, AXIS_NAME, HYPERPLANE_NAME};
use crate::error::{Error, Result};
use crate::functions::SampleSet;
use crate::tree::{build_tree_shape, monomial_basis, TreeShape};

/// Axis-aligned regression-tree program.
pub fn build_axis_aligned(samples: &SampleSet, h: &Hyperparams) -> Result<MipModel> {
    build(samples, h, FormulationKind::AxisAligned)
}

/// Affine-hyperplane regression-tree program.
pub fn build_hyperplane(samples: &SampleSet, h: &Hyperparams) -> Result<MipModel> {
    build(samples, h, FormulationKind::Hyperplane)
}

pub fn build(samples: &SampleSet, h: &Hyperparams, kind: FormulationKind) -> Result<MipModel> {
    h.validate()?;
    let n = samples.len();
    if n < h.min_leaf_points {
        return Err(Error::InvalidInput(format!("{n} samples cannot fill a leaf of {} points", h.min_leaf_points)));
    }
    let (big_m, coeff_bound) = h.resolve_constants(samples)?;
    let shape = build_tree_shape(h.depth)?;
    let d = samples.dim();
    let basis = monomial_basis(d, h.degree);
    let k = basis.len();
    let eps = compute_epsilon(samples);

    let name = match kind {
        FormulationKind::AxisAligned => AXIS_NAME,
        FormulationKind::Hyperplane => HYPERPLANE_NAME,
    };
    let mut m = MipModel::new(name);

    // Split variables, indexed [node-1][dim-1].
    let mut a = vec![vec![0usize; d]; shape.branch_count()];
    let mut o = vec![vec![0usize; d]; shape.branch_count()];
    let mut ap = vec![vec![0usize; d]; shape.branch_count()];
    let mut am = vec![vec![0usize; d]; shape.branch_count()];
    let mut b = vec![0usize; shape.branch_count()];
    for node in shape.branch_nodes() {
        for dim in 1..=d {
            match kind {
                FormulationKind::AxisAligned => {
                    a[node - 1][dim - 1] = m.add_symbol(Symbol::A { dim, node }, 0.0, 1.0, VarKind::Binary);
                }
                FormulationKind::Hyperplane => {
                    o[node - 1][dim - 1] = m.add_symbol(Symbol::O { dim, node }, 0.0, 1.0, VarKind::Binary);
                    a[node - 1][dim - 1] = m.add_symbol(Symbol::A { dim, node }, -1.0, 1.0, VarKind::Continuous);
                    ap[node - 1][dim - 1] = m.add_symbol(Symbol::APlus { dim, node }, 0.0, 1.0, VarKind::Continuous);
                    am[node - 1][dim - 1] = m.add_symbol(Symbol::AMinus { dim, node }, 0.0, 1.0, VarKind::Continuous);
                }
            }
        }
        let (lo, hi) = match kind {
            FormulationKind::AxisAligned => (0.0, 1.0),
            FormulationKind::Hyperplane => (-1.0, 1.0),
        };
        b[node - 1] = m.add_symbol(Symbol::B { node }, lo, hi, VarKind::Continuous);
    }
    let leaves: Vec<usize> = shape.leaf_nodes().collect();
    let l: Vec<usize> = leaves.iter().map(|&leaf| m.add_symbol(Symbol::L { leaf }, 0.0, 1.0, VarKind::Binary)).collect();
    let mut z = vec![vec![0usize; leaves.len()]; n];
    for (i, row) in z.iter_mut().enumerate() {
        for (p, &leaf) in leaves.iter().enumerate() {
            row[p] = m.add_symbol(Symbol::Z { point: i + 1, leaf }, 0.0, 1.0, VarKind::Binary);
        }
    }
    let mut phi = vec![vec![0usize; leaves.len()]; n];
    for (i, row) in phi.iter_mut().enumerate() {
        for (p, &leaf) in leaves.iter().enumerate() {
            row[p] = m.add_symbol(Symbol::Phi { point: i + 1, leaf }, f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous);
        }
    }
    let delta: Vec<usize> = (1..=n).map(|point| m.add_symbol(Symbol::Delta { point }, 0.0, f64::INFINITY, VarKind::Continuous)).collect();
    let c: Vec<Vec<usize>> = leaves
        .iter()
        .map(|&leaf| (1..=k).map(|term| m.add_symbol(Symbol::C { leaf, term }, -coeff_bound, coeff_bound, VarKind::Continuous)).collect())
        .collect();

    m.set_objective(delta.iter().map(|&j| (j, 1.0 / n as f64)).collect());

    // Absolute residuals: delta_i >= +-phi_it - M (1 - z_it).
    for i in 0..n {
        for (p, &leaf) in leaves.iter().enumerate() {
            let tag = format!("{}_{leaf}", i + 1);
            m.add_constraint(format!("dpos_{tag}"), vec![(delta[i], 1.0), (phi[i][p], -1.0), (z[i][p], -big_m)], Sense::Ge, -big_m)?;
            m.add_constraint(format!("dneg_{tag}"), vec![(delta[i], 1.0), (phi[i][p], 1.0), (z[i][p], -big_m)], Sense::Ge, -big_m)?;
        }
    }
    // phi_it + poly(x_i; c_t) = y_i.
    for i in 0..n {
        let features = basis.features(samples.point(i));
        for (p, &leaf) in leaves.iter().enumerate() {
            let mut coeffs = vec![(phi[i][p], 1.0)];
            coeffs.extend(features.iter().zip(&c[p]).filter(|(f, _)| **f != 0.0).map(|(f, &cj)| (cj, *f)));
            m.add_constraint(format!("fit_{}_{leaf}", i + 1), coeffs, Sense::Eq, samples.value(i))?;
        }
    }
    // Routing rows.
    for i in 0..n {
        let x = samples.point(i);
        for (p, &leaf) in leaves.iter().enumerate() {
            add_routing_rows(&mut m, &shape, kind, h.mu, &eps.eps, eps.eps_max, x, leaf, i, &a, &b, z[i][p])?;
        }
    }
    for (i, row) in z.iter().enumerate() {
        m.add_constraint(format!("assign_{}", i + 1), row.iter().map(|&j| (j, 1.0)).collect(), Sense::Eq, 1.0)?;
    }
    for (i, row) in z.iter().enumerate() {
        for (p, &leaf) in leaves.iter().enumerate() {
            m.add_constraint(format!("active_{}_{leaf}", i + 1), vec![(row[p], 1.0), (l[p], -1.0)], Sense::Le, 0.0)?;
        }
    }
    for (p, &leaf) in leaves.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = z.iter().map(|row| (row[p], 1.0)).collect();
        coeffs.push((l[p], -(h.min_leaf_points as f64)));
        m.add_constraint(format!("nmin_{leaf}"), coeffs, Sense::Ge, 0.0)?;
    }
    for node in shape.branch_nodes() {
        let row = node - 1;
        match kind {
            FormulationKind::AxisAligned => {
                m.add_constraint(format!("onehot_{node}"), a[row].iter().map(|&j| (j, 1.0)).collect(), Sense::Eq, 1.0)?;
            }
            FormulationKind::Hyperplane => {
                let coeffs = ap[row].iter().chain(&am[row]).map(|&j| (j, 1.0)).collect();
                m.add_constraint(format!("norm_{node}"), coeffs, Sense::Eq, 1.0)?;
                for dim in 0..d {
                    let tag = format!("{}_{node}", dim + 1);
                    m.add_constraint(format!("parts_{tag}"), vec![(a[row][dim], 1.0), (ap[row][dim], -1.0), (am[row][dim], 1.0)], Sense::Eq, 0.0)?;
                    m.add_constraint(format!("pos_{tag}"), vec![(ap[row][dim], 1.0), (o[row][dim], -1.0)], Sense::Le, 0.0)?;
                    m.add_constraint(format!("neg_{tag}"), vec![(am[row][dim], 1.0), (o[row][dim], 1.0)], Sense::Le, 1.0)?;
                }
            }
        }
    }
    Ok(m)
}

#[allow(clippy::too_many_arguments)]
fn add_routing_rows(
    m: &mut MipModel,
    shape: &TreeShape,
    kind: FormulationKind,
    mu: f64,
    eps: &[f64],
    eps_max: f64,
    x: &[f64],
    leaf: usize,
    i: usize,
    a: &[Vec<usize>],
    b: &[usize],
    z: usize,
) -> Result<()> {
    for &node in shape.right_ancestors(leaf) {
        // a.x_i >= b - s (1 - z): a.x - b - s z >= -s
        let slack = match kind {
            FormulationKind::AxisAligned => 1.0,
            FormulationKind::Hyperplane => 2.0,
        };
        let mut coeffs: Vec<(usize, f64)> = a[node - 1].iter().zip(x).filter(|(_, xv)| **xv != 0.0).map(|(&j, &xv)| (j, xv)).collect();
        coeffs.push((b[node - 1], -1.0));
        coeffs.push((z, -slack));
        m.add_constraint(format!("right_{}_{leaf}_{node}", i + 1), coeffs, Sense::Ge, -slack)?;
    }
    for &node in shape.left_ancestors(leaf) {
        let mut coeffs: Vec<(usize, f64)>;
        let (z_coeff, rhs) = match kind {
            // a.(x + eps) <= b + (1 + eps_max)(1 - z)
            FormulationKind::AxisAligned => {
                coeffs = a[node - 1].iter().zip(x.iter().zip(eps)).map(|(&j, (xv, e))| (j, xv + e)).collect();
                (1.0 + eps_max, 1.0 + eps_max)
            }
            // a.x + mu <= b + (2 + mu)(1 - z)
            FormulationKind::Hyperplane => {
                coeffs = a[node - 1].iter().zip(x).map(|(&j, &xv)| (j, xv)).collect();
                (2.0 + mu, (2.0 + mu) - mu)
            }
        };
        coeffs.retain(|&(_, v)| v != 0.0);
        coeffs.push((b[node - 1], -1.0));
        coeffs.push((z, z_coeff));
        m.add_constraint(format!("left_{}_{leaf}_{node}", i + 1), coeffs, Sense::Le, rhs)?;
    }
    Ok(())
}
