//! Mixed-integer programs for regression trees with polynomial leaves.
//!
//! Both programs minimize the mean absolute residual `(1/n) sum delta_i` over
//! a complete tree of depth `D`:
//!
//! * `delta_i >= +-phi_it - M (1 - z_it)` and `phi_it = y_i - poly(x_i; c_t)`;
//! * `sum_t z_it = 1`, `z_it <= l_t`, `sum_i z_it >= N_min l_t`;
//! * routing rows for every leaf and ancestor. The axis-aligned program uses
//!   binary `a_m` with `sum_j a_jm = 1`, `b_m` in `[0, 1]`, and models the
//!   strict left inequality with the per-dimension increments `eps`:
//!   `a_m.x_i >= b_m - (1 - z_it)` (right) and
//!   `a_m.(x_i + eps) <= b_m + (1 + eps_max)(1 - z_it)` (left). The
//!   hyperplane program lets `a_m` range over `[-1, 1]^d` with
//!   `|a_m|_1 = 1` through the split `a = a+ - a-`, `a+ <= o`, `a- <= 1 - o`,
//!   `b_m` in `[-1, 1]`, and uses `a_m.x_i >= b_m - 2(1 - z_it)` and
//!   `a_m.x_i + mu <= b_m + (2 + mu)(1 - z_it)`.
//!
//! Leaf coefficients are boxed in `[-C, C]` so that
//! `M = max|y| + C * (number of monomials)` bounds every residual on the
//! unit cube. With `auto`, `C = 10 max(1, max|y|)`.

mod build;
mod decode;
mod encode;
mod model;

use alloc::format;
use alloc::vec::Vec;

pub use build::{build, build_axis_aligned, build_hyperplane};
pub use decode::decode;
pub use encode::encode;
pub use model::{Assignment, Constraint, MipModel, Sense, Symbol, VarKind, Variable};

use crate::error::{Error, Result};
use crate::functions::SampleSet;
use crate::tree::monomial_basis;

/// Tolerance of [`check_feasible`].
pub const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulationKind {
    AxisAligned,
    Hyperplane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Mean absolute error.
    #[default]
    Mae,
}

/// A constant that is either given or derived from the sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Constant {
    #[default]
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    pub depth: usize,
    pub min_leaf_points: usize,
    pub degree: usize,
    /// Margin of the strict hyperplane inequality.
    pub mu: f64,
    pub objective: Objective,
    pub big_m: Constant,
    pub coeff_bound: Constant,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self { depth: 2, min_leaf_points: 1, degree: 1, mu: 1e-4, objective: Objective::Mae, big_m: Constant::Auto, coeff_bound: Constant::Auto }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf_points == 0 {
            return Err(Error::InvalidInput("N_min must be at least 1".into()));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidInput(format!("mu must be positive, got {}", self.mu)));
        }
        for (name, c) in [("big-M", self.big_m), ("coefficient bound", self.coeff_bound)] {
            if let Constant::Value(v) = c {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }

    /// `(M, C)` for a sample.
    pub fn resolve_constants(&self, samples: &SampleSet) -> Result<(f64, f64)> {
        let needs_sample = matches!(self.big_m, Constant::Auto) || matches!(self.coeff_bound, Constant::Auto);
        if needs_sample && samples.is_empty() {
            return Err(Error::EmptySample);
        }
        let ymax = samples.max_abs_value();
        let coeff_bound = match self.coeff_bound {
            Constant::Auto => 10.0 * ymax.max(1.0),
            Constant::Value(v) => v,
        };
        let terms = monomial_basis(samples.dim(), self.degree).len() as f64;
        let big_m = match self.big_m {
            Constant::Auto => ymax + coeff_bound * terms,
            Constant::Value(v) => v,
        };
        Ok((big_m, coeff_bound))
    }
}

/// Smallest gap between distinct sorted coordinates, per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonInfo {
    pub eps: Vec<f64>,
    pub eps_max: f64,
}

/// Per-dimension increments; a dimension where every coordinate is equal gets 1.
pub fn compute_epsilon(samples: &SampleSet) -> EpsilonInfo {
    let eps: Vec<f64> = (0..samples.dim())
        .map(|j| {
            let mut v: Vec<f64> = samples.column(j).collect();
            v.sort_by(f64::total_cmp);
            v.windows(2).map(|w| w[1] - w[0]).filter(|&g| g > 0.0).fold(f64::INFINITY, f64::min)
        })
        .map(|e| if e.is_finite() { e } else { 1.0 })
        .collect();
    let eps_max = eps.iter().copied().fold(0.0, f64::max);
    EpsilonInfo { eps, eps_max }
}

/// Variable and row counts of a program as closed-form functions of the sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelCounts {
    pub variables: usize,
    pub binaries: usize,
    pub constraints: usize,
}

/// With `L = 2^D` leaves, `B = 2^D - 1` branch nodes and `K = C(r+d, d)`:
///
/// * axis-aligned: binaries `nL + L + dB`; continuous `B + nL + n + LK`;
///   rows `2nL + nL + nLD + n + nL + L + B`;
/// * hyperplane: binaries `nL + L + dB`; continuous `3dB + B + nL + n + LK`;
///   rows as above plus `3dB`.
pub fn expected_counts(kind: FormulationKind, n: usize, d: usize, depth: usize, degree: usize) -> ModelCounts {
    let leaves = 1usize << depth;
    let branches = leaves - 1;
    let terms = monomial_basis(d, degree).len();
    let binaries = n * leaves + leaves + d * branches;
    let base_rows = 2 * n * leaves + n * leaves + n * leaves * depth + n + n * leaves + leaves + branches;
    let base_cont = branches + n * leaves + n + leaves * terms;
    match kind {
        FormulationKind::AxisAligned => ModelCounts { variables: binaries + base_cont, binaries, constraints: base_rows },
        FormulationKind::Hyperplane => ModelCounts {
            variables: binaries + base_cont + 3 * d * branches,
            binaries,
            constraints: base_rows + 3 * d * branches,
        },
    }
}

/// Program name given by [`build`] to hyperplane models.
pub const HYPERPLANE_NAME: &str = "PWHPLANE";
/// Program name given by [`build`] to axis-aligned models.
pub const AXIS_NAME: &str = "PWAXIS";

/// Which formulation a model was built from, inferred from its symbols
/// (depth-0 programs have no split variables and fall back on the name).
pub fn kind_of(model: &MipModel) -> Option<FormulationKind> {
    let mut has_symbols = false;
    for j in 0..model.variables().len() {
        match model.symbol(j) {
            Some(Symbol::O { .. }) => return Some(FormulationKind::Hyperplane),
            Some(_) => has_symbols = true,
            None => {}
        }
    }
    match (has_symbols, model.name == HYPERPLANE_NAME) {
        (false, _) => None,
        (true, true) => Some(FormulationKind::Hyperplane),
        (true, false) => Some(FormulationKind::AxisAligned),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Constraint name, or `bound:<var>` / `integrality:<var>`.
    pub item: alloc::string::String,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
    pub objective: f64,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_violation(&self) -> f64 {
        self.violations.iter().map(|v| v.magnitude).fold(0.0, f64::max)
    }
}

/// Every row, bound and integrality requirement violated by more than
/// [`FEASIBILITY_TOL`], plus the objective at the assignment.
pub fn check_feasible(model: &MipModel, assignment: &Assignment) -> Result<FeasibilityReport> {
    let x = model.dense_values(assignment)?;
    Ok(check_values(model, &x))
}

pub fn check_values(model: &MipModel, x: &[f64]) -> FeasibilityReport {
    let mut violations = Vec::new();
    for (v, &value) in model.variables().iter().zip(x) {
        let out = (v.lower - value).max(value - v.upper);
        if !value.is_finite() || out > FEASIBILITY_TOL {
            violations.push(Violation { item: format!("bound:{}", v.name), magnitude: if value.is_finite() { out } else { f64::INFINITY } });
        }
        if v.kind == VarKind::Binary {
            let frac = (value - libm::round(value)).abs();
            if frac > FEASIBILITY_TOL {
                violations.push(Violation { item: format!("integrality:{}", v.name), magnitude: frac });
            }
        }
    }
    for c in model.constraints() {
        let viol = c.violation(x);
        if !(viol <= FEASIBILITY_TOL) {
            violations.push(Violation { item: c.name.clone(), magnitude: viol });
        }
    }
    FeasibilityReport { violations, objective: model.objective_value(x) }
}
