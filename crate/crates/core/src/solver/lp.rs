//! Dense bounded-variable simplex.
//!
//! Every row `i` gets a logical variable `r_i = a_i.x` carrying the row
//! bounds, so the constraint matrix is `[A | -I]` with right-hand side zero
//! and all structure lives in variable bounds. The engine keeps an explicit
//! dense basis inverse, updated by elementary row operations and rebuilt
//! from scratch every [`REFACTOR_INTERVAL`] pivots.
//!
//! A solve starts from whatever basis the engine holds. If that basis is
//! dual feasible (always true right after [`LpEngine::new`] for nonnegative
//! costs, and after any previous optimal solve whatever the bounds), the dual
//! simplex runs directly. Otherwise the costs are zeroed, the dual simplex
//! restores primal feasibility, and the primal simplex finishes with the
//! true costs. Both loops use Harris ratio tests and switch to Bland's rule
//! after [`STALL_LIMIT`] iterations without objective progress.

use alloc::vec;
use alloc::vec::Vec;

/// Absolute primal feasibility tolerance on variable and row bounds.
pub const PRIMAL_TOL: f64 = 1e-9;
/// Dual feasibility tolerance on reduced costs.
pub const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
/// Pivots between two rebuilds of the basis inverse.
pub const REFACTOR_INTERVAL: usize = 100;
/// Iterations without objective progress before Bland's rule takes over.
pub const STALL_LIMIT: usize = 200;
const BLOWUP: f64 = 1e14;
const NONBASIC: usize = usize::MAX;

/// One linear row `lower <= sum coeffs * x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

/// `minimize c.x` subject to row and variable bounds; infinite bounds allowed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub var_lower: Vec<f64>,
    pub var_upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        self.objective.push(cost);
        self.var_lower.push(lower);
        self.var_upper.push(upper);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, lower: f64, upper: f64) {
        self.rows.push(LpRow { coeffs, lower, upper });
    }

    /// Largest violation of a row or variable bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, v) in x.iter().enumerate() {
            worst = worst.max(self.var_lower[j] - v).max(v - self.var_upper[j]);
        }
        for row in &self.rows {
            let a: f64 = row.coeffs.iter().map(|&(j, c)| c * x[j]).sum();
            worst = worst.max(row.lower - a).max(a - row.upper);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The basis inverse became singular or blew up.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Solves `p` from a slack basis after removing fixed variables and empty rows.
pub fn solve_lp(p: &LpProblem) -> LpSolution {
    let n = p.num_vars();
    let fixed: Vec<bool> = (0..n).map(|j| p.var_lower[j] == p.var_upper[j]).collect();
    let mut map = vec![usize::MAX; n];
    let mut reduced = LpProblem::default();
    let mut offset = 0.0;
    for j in 0..n {
        if fixed[j] {
            offset += p.objective[j] * p.var_lower[j];
        } else {
            map[j] = reduced.add_var(p.objective[j], p.var_lower[j], p.var_upper[j]);
        }
    }
    let infeasible = |x: Vec<f64>| LpSolution { status: LpStatus::Infeasible, x, objective: f64::NAN, iterations: 0 };
    if (0..n).any(|j| p.var_lower[j] > p.var_upper[j]) {
        return infeasible(vec![0.0; n]);
    }
    for row in &p.rows {
        let mut shift = 0.0;
        let mut coeffs = Vec::new();
        for &(j, c) in &row.coeffs {
            if c == 0.0 {
                continue;
            }
            if fixed[j] {
                shift += c * p.var_lower[j];
            } else {
                coeffs.push((map[j], c));
            }
        }
        let (lo, hi) = (row.lower - shift, row.upper - shift);
        if coeffs.is_empty() {
            if lo > PRIMAL_TOL || hi < -PRIMAL_TOL {
                return infeasible(vec![0.0; n]);
            }
            continue;
        }
        reduced.add_row(coeffs, lo, hi);
    }
    let mut engine = LpEngine::new(&reduced);
    let status = engine.solve(default_iteration_limit(&reduced));
    let mut x = vec![0.0; n];
    for j in 0..n {
        x[j] = if fixed[j] { p.var_lower[j] } else { engine.x[map[j]] };
    }
    let objective = if status == LpStatus::Optimal { engine.objective() + offset } else { f64::NAN };
    LpSolution { status, x, objective, iterations: engine.iterations }
}

pub(crate) fn default_iteration_limit(p: &LpProblem) -> usize {
    50 * (p.num_vars() + p.rows.len()) + 1000
}

/// Warm-startable simplex state over a fixed constraint matrix.
#[derive(Debug, Clone)]
pub struct LpEngine {
    n: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    rows: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
    head: Vec<usize>,
    pos: Vec<usize>,
    at_upper: Vec<bool>,
    binv: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
    bland: bool,
    // Scratch.
    rho: Vec<f64>,
    alpha_row: Vec<f64>,
    alpha_col: Vec<f64>,
}

enum Step {
    Done(LpStatus),
    Continue,
}

impl LpEngine {
    pub fn new(p: &LpProblem) -> Self {
        let n = p.num_vars();
        let m = p.rows.len();
        let mut cols = vec![Vec::new(); n];
        let mut rows = vec![Vec::new(); m];
        for (i, row) in p.rows.iter().enumerate() {
            for &(j, c) in &row.coeffs {
                if c != 0.0 {
                    cols[j].push((i, c));
                    rows[i].push((j, c));
                }
            }
        }
        let mut cost = p.objective.clone();
        cost.resize(n + m, 0.0);
        let mut lo = p.var_lower.clone();
        let mut hi = p.var_upper.clone();
        for row in &p.rows {
            lo.push(row.lower);
            hi.push(row.upper);
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = -1.0;
        }
        let mut pos = vec![NONBASIC; n + m];
        for i in 0..m {
            pos[n + i] = i;
        }
        let mut engine = Self {
            n,
            m,
            cols,
            rows,
            d: cost.clone(),
            cost,
            lo,
            hi,
            x: vec![0.0; n + m],
            head: (n..n + m).collect(),
            pos,
            at_upper: vec![false; n + m],
            binv,
            since_refactor: 0,
            iterations: 0,
            bland: false,
            rho: vec![0.0; m],
            alpha_row: vec![0.0; n + m],
            alpha_col: vec![0.0; m],
        };
        for j in 0..n {
            engine.at_upper[j] = engine.lo[j] == f64::NEG_INFINITY && engine.hi[j] < f64::INFINITY;
        }
        engine
    }

    pub fn num_structural(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lo[j], self.hi[j])
    }

    /// Changes the bounds of structural variable `j`; takes effect on the next solve.
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lo[j] = lower;
        self.hi[j] = upper;
    }

    /// Structural variable values.
    pub fn primal(&self) -> &[f64] {
        &self.x[..self.n]
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Re-optimizes from the current basis under the current bounds.
    pub fn solve(&mut self, iteration_limit: usize) -> LpStatus {
        if (0..self.n + self.m).any(|j| self.lo[j] > self.hi[j] + PRIMAL_TOL) {
            return LpStatus::Infeasible;
        }
        let limit = self.iterations + iteration_limit;
        self.bland = false;
        self.compute_duals();
        if self.place_nonbasic() {
            self.compute_basic_values();
            return self.dual_loop(limit);
        }
        // Dual infeasible start: find a feasible point with zero costs first.
        let saved = core::mem::replace(&mut self.cost, vec![0.0; self.n + self.m]);
        self.d.iter_mut().for_each(|v| *v = 0.0);
        self.place_nonbasic();
        self.compute_basic_values();
        let status = self.dual_loop(limit);
        self.cost = saved;
        if status != LpStatus::Optimal {
            self.compute_duals();
            return status;
        }
        self.compute_duals();
        self.bland = false;
        self.primal_loop(limit)
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.lo[j] == self.hi[j]
    }

    // Puts nonbasic variables on the bound their reduced cost asks for.
    // Returns false if some variable cannot be placed dual feasibly.
    fn place_nonbasic(&mut self) -> bool {
        let mut feasible = true;
        for j in 0..self.n + self.m {
            if self.pos[j] != NONBASIC {
                continue;
            }
            let (lo, hi) = (self.lo[j], self.hi[j]);
            let lo_ok = lo > f64::NEG_INFINITY;
            let hi_ok = hi < f64::INFINITY;
            let dj = self.d[j];
            let upper = if lo == hi {
                false
            } else if dj > DUAL_TOL {
                if !lo_ok {
                    feasible = false;
                }
                !lo_ok && hi_ok
            } else if dj < -DUAL_TOL {
                if !hi_ok {
                    feasible = false;
                }
                hi_ok
            } else if self.at_upper[j] {
                hi_ok || !lo_ok
            } else {
                !lo_ok
            };
            self.at_upper[j] = upper;
            self.x[j] = if upper {
                if hi_ok { hi } else { 0.0 }
            } else if lo_ok {
                lo
            } else if hi_ok {
                hi
            } else {
                0.0
            };
        }
        feasible
    }

    fn column_into(&self, j: usize, out: &mut [f64]) {
        // out = B^-1 a_j
        out.iter_mut().for_each(|v| *v = 0.0);
        let m = self.m;
        if j < self.n {
            for &(i, c) in &self.cols[j] {
                for (p, o) in out.iter_mut().enumerate() {
                    *o += self.binv[p * m + i] * c;
                }
            }
        } else {
            let i = j - self.n;
            for (p, o) in out.iter_mut().enumerate() {
                *o = -self.binv[p * m + i];
            }
        }
    }

    fn compute_basic_values(&mut self) {
        let m = self.m;
        let mut v = vec![0.0; m];
        for j in 0..self.n + m {
            if self.pos[j] != NONBASIC || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            if j < self.n {
                for &(i, c) in &self.cols[j] {
                    v[i] -= c * xj;
                }
            } else {
                v[j - self.n] += xj;
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            self.x[self.head[p]] = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        }
    }

    fn compute_duals(&mut self) {
        let m = self.m;
        // y = c_B^T B^-1; d_j = c_j - y.a'_j
        let mut y = vec![0.0; m];
        for p in 0..m {
            let cb = self.cost[self.head[p]];
            if cb != 0.0 {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi += cb * self.binv[p * m + i];
                }
            }
        }
        for j in 0..self.n + m {
            if self.pos[j] != NONBASIC {
                self.d[j] = 0.0;
                continue;
            }
            let ya = if j < self.n {
                self.cols[j].iter().map(|&(i, c)| y[i] * c).sum::<f64>()
            } else {
                -y[j - self.n]
            };
            self.d[j] = self.cost[j] - ya;
        }
    }

    /// Rebuilds the basis inverse from the basis heading. The logical columns
    /// are unit vectors, so only the square block of structural basic columns
    /// on the rows whose logical is nonbasic needs a real inversion.
    fn refactor(&mut self) -> bool {
        let (n, m) = (self.n, self.m);
        let structural: Vec<usize> = (0..m).filter(|&p| self.head[p] < n).collect();
        let mut logical_row = vec![false; m];
        for p in 0..m {
            if self.head[p] >= n {
                logical_row[self.head[p] - n] = true;
            }
        }
        let free_rows: Vec<usize> = (0..m).filter(|&i| !logical_row[i]).collect();
        let k = structural.len();
        if free_rows.len() != k {
            return false;
        }
        let mut row_index = vec![usize::MAX; m];
        for (a, &i) in free_rows.iter().enumerate() {
            row_index[i] = a;
        }
        // M = A[free_rows, structural columns], inverted in place alongside identity.
        let mut mat = vec![0.0; k * k];
        for (b, &p) in structural.iter().enumerate() {
            for &(i, c) in &self.cols[self.head[p]] {
                if row_index[i] != usize::MAX {
                    mat[row_index[i] * k + b] = c;
                }
            }
        }
        let Some(inv) = invert(&mut mat, k) else {
            return false;
        };
        let mut col_of = vec![usize::MAX; n];
        for (b, &p) in structural.iter().enumerate() {
            col_of[self.head[p]] = b;
        }
        self.binv.iter_mut().for_each(|v| *v = 0.0);
        for (b, &p) in structural.iter().enumerate() {
            for (a, &i) in free_rows.iter().enumerate() {
                self.binv[p * m + i] = inv[b * k + a];
            }
        }
        for p in 0..m {
            let j = self.head[p];
            if j < n {
                continue;
            }
            let l = j - n;
            self.binv[p * m + l] = -1.0;
            for &(s, c) in &self.rows[l] {
                let b = col_of[s];
                if b == usize::MAX {
                    continue;
                }
                for (a, &i) in free_rows.iter().enumerate() {
                    self.binv[p * m + i] += c * inv[b * k + a];
                }
            }
        }
        if self.binv.iter().any(|v| !v.is_finite() || v.abs() > BLOWUP) {
            return false;
        }
        self.since_refactor = 0;
        self.compute_basic_values();
        self.compute_duals();
        true
    }

    fn pivot_row(&mut self, r: usize) {
        let m = self.m;
        self.rho.copy_from_slice(&self.binv[r * m..(r + 1) * m]);
        for j in 0..self.n + m {
            // Fixed columns never enter but their reduced costs must stay current.
            if self.pos[j] != NONBASIC {
                self.alpha_row[j] = 0.0;
                continue;
            }
            self.alpha_row[j] = if j < self.n {
                self.cols[j].iter().map(|&(i, c)| self.rho[i] * c).sum()
            } else {
                -self.rho[j - self.n]
            };
        }
    }

    // Swaps q into basis position r; `leaving_upper` tells where the leaving variable rests.
    fn pivot(&mut self, r: usize, q: usize, leaving_upper: bool) -> bool {
        let m = self.m;
        let piv = self.alpha_col[r];
        if piv.abs() < 1e-12 || !piv.is_finite() {
            return false;
        }
        let p_var = self.head[r];
        let inv_piv = 1.0 / piv;
        for v in &mut self.binv[r * m..(r + 1) * m] {
            *v *= inv_piv;
        }
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (pivot_row, after) = rest.split_at_mut(m);
        for p in 0..m {
            if p == r {
                continue;
            }
            let f = self.alpha_col[p];
            if f == 0.0 {
                continue;
            }
            let row = if p < r { &mut before[p * m..(p + 1) * m] } else { &mut after[(p - r - 1) * m..(p - r) * m] };
            for (a, b) in row.iter_mut().zip(pivot_row.iter()) {
                *a -= f * b;
            }
        }
        self.head[r] = q;
        self.pos[q] = r;
        self.pos[p_var] = NONBASIC;
        self.at_upper[p_var] = leaving_upper;
        self.since_refactor += 1;
        self.iterations += 1;
        true
    }

    fn maybe_refactor(&mut self) -> bool {
        if self.since_refactor >= REFACTOR_INTERVAL {
            return self.refactor();
        }
        true
    }

    fn dual_loop(&mut self, limit: usize) -> LpStatus {
        let mut best = f64::NEG_INFINITY;
        let mut stalled = 0usize;
        loop {
            if self.iterations >= limit {
                return LpStatus::IterationLimit;
            }
            if !self.maybe_refactor() {
                return LpStatus::NumericalFailure;
            }
            match self.dual_iteration() {
                Step::Done(s) => return s,
                Step::Continue => {}
            }
            let obj = self.objective();
            if obj > best + 1e-12 * (1.0 + best.abs()) {
                best = obj;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= STALL_LIMIT {
                    self.bland = true;
                }
            }
        }
    }

    fn dual_iteration(&mut self) -> Step {
        let m = self.m;
        // Leaving row: largest bound violation (Bland: smallest variable index).
        let mut r = usize::MAX;
        let mut best = PRIMAL_TOL;
        let mut best_index = usize::MAX;
        for p in 0..m {
            let j = self.head[p];
            let v = self.x[j];
            let viol = (self.lo[j] - v).max(v - self.hi[j]);
            if viol > PRIMAL_TOL {
                if self.bland {
                    if j < best_index {
                        best_index = j;
                        r = p;
                    }
                } else if viol > best {
                    best = viol;
                    r = p;
                }
            }
        }
        if r == usize::MAX {
            return Step::Done(LpStatus::Optimal);
        }
        let leaving = self.head[r];
        let increase = self.x[leaving] < self.lo[leaving];
        let target = if increase { self.lo[leaving] } else { self.hi[leaving] };
        self.pivot_row(r);

        // Harris ratio test on the dual step.
        let mut bound = f64::INFINITY;
        for j in 0..self.n + m {
            if let Some((slack, a)) = self.dual_candidate(j, increase) {
                bound = bound.min((slack + DUAL_TOL) / a);
            }
        }
        if bound == f64::INFINITY {
            return Step::Done(LpStatus::Infeasible);
        }
        let mut q = usize::MAX;
        let mut best_alpha = 0.0;
        let mut best_ratio = f64::INFINITY;
        for j in 0..self.n + m {
            if let Some((slack, a)) = self.dual_candidate(j, increase) {
                let ratio = slack.max(0.0) / a;
                if self.bland {
                    if ratio < best_ratio - 1e-15 {
                        best_ratio = ratio;
                        q = j;
                    }
                } else if ratio <= bound && a > best_alpha {
                    best_alpha = a;
                    q = j;
                }
            }
        }
        if q == usize::MAX {
            return Step::Done(LpStatus::Infeasible);
        }
        let mut col = core::mem::take(&mut self.alpha_col);
        self.column_into(q, &mut col);
        self.alpha_col = col;
        let arq = self.alpha_col[r];
        if arq.abs() < 1e-11 {
            return if self.refactor() { Step::Continue } else { Step::Done(LpStatus::NumericalFailure) };
        }
        // Primal update.
        let t = (self.x[leaving] - target) / arq;
        self.x[q] += t;
        for p in 0..m {
            let f = self.alpha_col[p];
            if f != 0.0 {
                self.x[self.head[p]] -= f * t;
            }
        }
        self.x[leaving] = target;
        // Dual update.
        let theta = self.d[q] / self.alpha_row[q];
        for j in 0..self.n + m {
            if self.pos[j] == NONBASIC && self.alpha_row[j] != 0.0 {
                self.d[j] -= theta * self.alpha_row[j];
            }
        }
        self.d[q] = 0.0;
        self.d[leaving] = -theta;
        let leaving_upper = !increase;
        if !self.pivot(r, q, leaving_upper) {
            return Step::Done(LpStatus::NumericalFailure);
        }
        Step::Continue
    }

    // For an entering candidate in the dual ratio test: (dual slack, |alpha|).
    fn dual_candidate(&self, j: usize, increase: bool) -> Option<(f64, f64)> {
        if self.pos[j] != NONBASIC || self.is_fixed(j) {
            return None;
        }
        let a = self.alpha_row[j];
        if a.abs() <= PIVOT_TOL {
            return None;
        }
        let free = self.lo[j] == f64::NEG_INFINITY && self.hi[j] == f64::INFINITY;
        let can_up = free || !self.at_upper[j];
        let can_down = free || self.at_upper[j];
        // Moving x_j by t changes the leaving variable by -a t.
        let up_ok = if increase { a < 0.0 } else { a > 0.0 };
        if up_ok && can_up {
            Some((self.d[j], a.abs()))
        } else if !up_ok && can_down {
            Some((-self.d[j], a.abs()))
        } else {
            None
        }
    }

    fn primal_loop(&mut self, limit: usize) -> LpStatus {
        let mut best = f64::INFINITY;
        let mut stalled = 0usize;
        loop {
            if self.iterations >= limit {
                return LpStatus::IterationLimit;
            }
            if !self.maybe_refactor() {
                return LpStatus::NumericalFailure;
            }
            match self.primal_iteration() {
                Step::Done(s) => return s,
                Step::Continue => {}
            }
            let obj = self.objective();
            if obj < best - 1e-12 * (1.0 + best.abs()) {
                best = obj;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= STALL_LIMIT {
                    self.bland = true;
                }
            }
        }
    }

    fn primal_iteration(&mut self) -> Step {
        let m = self.m;
        // Pricing.
        let mut q = usize::MAX;
        let mut best = DUAL_TOL;
        for j in 0..self.n + m {
            if self.pos[j] != NONBASIC || self.is_fixed(j) {
                continue;
            }
            let free = self.lo[j] == f64::NEG_INFINITY && self.hi[j] == f64::INFINITY;
            let dj = self.d[j];
            let attractive = (dj < -DUAL_TOL && (free || !self.at_upper[j])) || (dj > DUAL_TOL && (free || self.at_upper[j]));
            if !attractive {
                continue;
            }
            if self.bland {
                q = j;
                break;
            }
            if dj.abs() > best {
                best = dj.abs();
                q = j;
            }
        }
        if q == usize::MAX {
            return Step::Done(LpStatus::Optimal);
        }
        let dir = if self.d[q] < 0.0 { 1.0 } else { -1.0 };
        let mut col = core::mem::take(&mut self.alpha_col);
        self.column_into(q, &mut col);
        self.alpha_col = col;

        // Harris ratio test: basic x_p moves by -alpha_p * dir * t.
        let limit_of = |engine: &Self, p: usize, tol: f64| -> Option<f64> {
            let a = engine.alpha_col[p];
            if a.abs() <= PIVOT_TOL {
                return None;
            }
            let j = engine.head[p];
            let rate = -a * dir;
            if rate < 0.0 && engine.lo[j] > f64::NEG_INFINITY {
                Some(((engine.x[j] - engine.lo[j]) + tol).max(0.0) / -rate)
            } else if rate > 0.0 && engine.hi[j] < f64::INFINITY {
                Some(((engine.hi[j] - engine.x[j]) + tol).max(0.0) / rate)
            } else {
                None
            }
        };
        let mut bound = f64::INFINITY;
        for p in 0..m {
            if let Some(t) = limit_of(self, p, PRIMAL_TOL) {
                bound = bound.min(t);
            }
        }
        let own = self.hi[q] - self.lo[q];
        if bound == f64::INFINITY && own == f64::INFINITY {
            return Step::Done(LpStatus::Unbounded);
        }
        let mut r = usize::MAX;
        let mut best_alpha = 0.0;
        let mut best_t = f64::INFINITY;
        let mut best_index = usize::MAX;
        for p in 0..m {
            if let Some(t_exact) = limit_of(self, p, 0.0) {
                if self.bland {
                    let j = self.head[p];
                    if t_exact < best_t - 1e-15 || (t_exact <= best_t + 1e-15 && j < best_index) {
                        best_t = t_exact;
                        best_index = j;
                        r = p;
                    }
                } else if t_exact <= bound && self.alpha_col[p].abs() > best_alpha {
                    best_alpha = self.alpha_col[p].abs();
                    r = p;
                }
            }
        }
        let step_to_basic = if r == usize::MAX { f64::INFINITY } else { limit_of(self, r, 0.0).unwrap_or(f64::INFINITY) };
        if own <= step_to_basic {
            // Bound flip, no basis change.
            let t = own * dir;
            self.x[q] += t;
            for p in 0..m {
                let f = self.alpha_col[p];
                if f != 0.0 {
                    self.x[self.head[p]] -= f * t;
                }
            }
            self.at_upper[q] = !self.at_upper[q];
            self.x[q] = if self.at_upper[q] { self.hi[q] } else { self.lo[q] };
            self.iterations += 1;
            return Step::Continue;
        }
        let leaving = self.head[r];
        let a_r = self.alpha_col[r];
        let leaving_upper = -a_r * dir > 0.0;
        let target = if leaving_upper { self.hi[leaving] } else { self.lo[leaving] };
        let t = (self.x[leaving] - target) / a_r;
        self.x[q] += t;
        for p in 0..m {
            let f = self.alpha_col[p];
            if f != 0.0 {
                self.x[self.head[p]] -= f * t;
            }
        }
        self.x[leaving] = target;
        self.pivot_row(r);
        let theta = self.d[q] / self.alpha_row[q];
        for j in 0..self.n + m {
            if self.pos[j] == NONBASIC && self.alpha_row[j] != 0.0 {
                self.d[j] -= theta * self.alpha_row[j];
            }
        }
        self.d[q] = 0.0;
        self.d[leaving] = -theta;
        if !self.pivot(r, q, leaving_upper) {
            return Step::Done(LpStatus::NumericalFailure);
        }
        Step::Continue
    }
}

// Gauss-Jordan inverse with partial pivoting; `None` when singular.
fn invert(mat: &mut [f64], k: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    for c in 0..k {
        let mut piv = c;
        let mut best = mat[c * k + c].abs();
        for rr in c + 1..k {
            let v = mat[rr * k + c].abs();
            if v > best {
                best = v;
                piv = rr;
            }
        }
        if best < 1e-12 {
            return None;
        }
        if piv != c {
            for col in 0..k {
                mat.swap(c * k + col, piv * k + col);
                inv.swap(c * k + col, piv * k + col);
            }
        }
        let f = 1.0 / mat[c * k + c];
        for col in 0..k {
            mat[c * k + col] *= f;
            inv[c * k + col] *= f;
        }
        for rr in 0..k {
            if rr == c {
                continue;
            }
            let g = mat[rr * k + c];
            if g == 0.0 {
                continue;
            }
            for col in 0..k {
                mat[rr * k + col] -= g * mat[c * k + col];
                inv[rr * k + col] -= g * inv[c * k + col];
            }
        }
    }
    Some(inv)
}
