//! LP relaxations and branch-and-bound for binary MIPs.

mod bnb;
pub mod lp;

use alloc::format;
use alloc::vec::Vec;

pub use bnb::{complete_from_binaries, solve_mip_with_clock, Node, Outcome, Search, Worker, INTEGRALITY_TOL};
pub use lp::{solve_lp, LpEngine, LpProblem, LpSolution, LpStatus};

use crate::error::{Error, Result};
use crate::formulation::{Assignment, MipModel};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Seconds; `None` runs to completion.
    pub time_limit: Option<f64>,
    /// Relative gap `(incumbent - bound) / max(1, |incumbent|)` at which the
    /// search stops.
    pub gap_tolerance: f64,
    pub node_limit: Option<u64>,
    pub deterministic: bool,
    pub threads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { time_limit: None, gap_tolerance: 1e-6, node_limit: None, deterministic: true, threads: 1 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.time_limit {
            if !(t > 0.0) {
                return Err(Error::InvalidInput(format!("time limit must be positive, got {t}")));
            }
        }
        if !(self.gap_tolerance >= 0.0) {
            return Err(Error::InvalidInput(format!("gap tolerance must be nonnegative, got {}", self.gap_tolerance)));
        }
        if self.threads == 0 {
            return Err(Error::InvalidInput("threads must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    /// Stopped at a limit with an incumbent.
    FeasibleTimeLimit,
    Infeasible,
    Unbounded,
    /// Stopped at a limit before any feasible point was found.
    InfeasibleSoFar,
}

impl MipStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            MipStatus::Optimal => "optimal",
            MipStatus::FeasibleTimeLimit => "feasible_time_limit",
            MipStatus::Infeasible => "infeasible",
            MipStatus::Unbounded => "unbounded",
            MipStatus::InfeasibleSoFar => "infeasible_so_far",
        }
    }
}

/// Incumbent and bound after a node was processed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgressPoint {
    pub nodes: u64,
    pub incumbent: Option<f64>,
    pub best_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipResult {
    pub status: MipStatus,
    pub incumbent: Option<Assignment>,
    /// Incumbent as a dense vector in model variable order.
    pub x: Option<Vec<f64>>,
    /// Incumbent objective, `+inf` without one.
    pub objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    pub nodes: u64,
    pub lp_iterations: u64,
    /// Nodes whose relaxation could not be solved.
    pub failed_nodes: u64,
    pub wall_time: f64,
    pub trace: Vec<ProgressPoint>,
}

/// Seconds elapsed since the solve started.
pub trait Clock {
    fn elapsed(&self) -> f64;
}

/// A clock that never advances; time limits never trigger.
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed(&self) -> f64 {
        0.0
    }
}

/// Serial branch-and-bound without a time source.
pub fn solve_mip(model: &MipModel, cfg: &SolverConfig) -> Result<MipResult> {
    cfg.validate()?;
    Ok(solve_mip_with_clock(model, cfg, &NoClock))
}

#[cfg(test)]
mod tests;
