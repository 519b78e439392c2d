//! Solving with a wall clock and worker threads, and the fitting front end
//! shared by the CLI and the experiment runner.

use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use pwtame_core::formulation::{build, decode, FormulationKind, Hyperparams, MipModel};
use pwtame_core::oracle::{enumerate_axis_trees, Loss, Oracle, OracleOptions};
use pwtame_core::solver::{solve_mip_with_clock, Clock, MipResult, MipStatus, Search, SolverConfig, Worker};
use pwtame_core::functions::SampleSet;
use pwtame_core::tree::PwPolyModel;

use crate::error::{Error, Result};

pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Branch-and-bound under a wall clock. Deterministic configurations and a
/// single thread run the serial search; otherwise `threads` workers share
/// the node queue, each with its own simplex engine.
pub fn solve(model: &MipModel, cfg: &SolverConfig) -> Result<MipResult> {
    cfg.validate()?;
    let clock = WallClock::start();
    if cfg.deterministic || cfg.threads == 1 {
        return Ok(solve_mip_with_clock(model, cfg, &clock));
    }
    let lp = model.lp_relaxation();
    let search = Mutex::new(Search::new(model, cfg.clone()));
    let iterations: u64 = thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.threads)
            .map(|_| {
                scope.spawn(|| {
                    let mut worker = Worker::new(model, &lp);
                    loop {
                        let next = {
                            let mut s = search.lock().expect("search lock");
                            if s.is_finished() {
                                break;
                            }
                            s.next_node(&clock).map(|node| (node, s.cutoff()))
                        };
                        match next {
                            Some((node, cutoff)) => {
                                let outcome = worker.evaluate(&node, cutoff);
                                search.lock().expect("search lock").complete(node, outcome);
                            }
                            // Every open node is being evaluated by another worker.
                            None => thread::sleep(Duration::from_micros(50)),
                        }
                    }
                    worker.lp_iterations
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).sum()
    });
    let search = search.into_inner().expect("search lock");
    Ok(search.finish(iterations, clock.elapsed()))
}

/// Exhaustive axis-aligned search, spreading the root splits over `threads`.
/// The winner is the first best root in candidate order, as in the serial
/// search.
pub fn enumerate_parallel(samples: &SampleSet, h: &Hyperparams, opts: OracleOptions, threads: usize) -> Result<pwtame_core::oracle::OracleResult> {
    let probe = Oracle::new(samples, h, opts)?;
    let roots = probe.root_candidates();
    if threads <= 1 || roots.len() < 2 {
        return Ok(enumerate_axis_trees(samples, h, opts)?);
    }
    let chunk = roots.len().div_ceil(threads);
    let scores: Vec<f64> = thread::scope(|scope| {
        let handles: Vec<_> = roots
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || -> pwtame_core::Result<Vec<f64>> {
                    let mut oracle = Oracle::new(samples, h, opts)?;
                    part.iter().map(|&r| oracle.best_with_root(r)).collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("oracle worker panicked")).collect::<pwtame_core::Result<Vec<_>>>()
    })?
    .into_iter()
    .flatten()
    .collect();
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = k;
        }
    }
    Ok(Oracle::new(samples, h, opts)?.solve(Some(roots[best]))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Mip,
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub formulation: FormulationKind,
    pub engine: Engine,
    pub h: Hyperparams,
    pub solver: SolverConfig,
    /// Oracle only.
    pub loss: Loss,
    /// Oracle only: lift the size guard.
    pub unguarded: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            formulation: FormulationKind::AxisAligned,
            engine: Engine::Mip,
            h: Hyperparams::default(),
            solver: SolverConfig::default(),
            loss: Loss::Mae,
            unguarded: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub status: MipStatus,
    pub model: Option<PwPolyModel>,
    pub objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    /// Branch-and-bound nodes, or oracle subproblems.
    pub nodes: u64,
    pub wall_time: f64,
    /// Branch-and-bound incumbent in model variable order.
    pub incumbent: Option<Vec<f64>>,
}

/// Exit code of `pwtame fit` for a status.
pub fn exit_code(status: MipStatus) -> i32 {
    match status {
        MipStatus::Optimal => 0,
        MipStatus::FeasibleTimeLimit => 2,
        MipStatus::Infeasible | MipStatus::InfeasibleSoFar => 3,
        MipStatus::Unbounded => 1,
    }
}

/// Fits a tree with the chosen engine. `mip` is the program to solve when
/// the caller already built it.
pub fn fit(samples: &SampleSet, opts: &FitOptions, mip: Option<&MipModel>) -> Result<FitOutcome> {
    match opts.engine {
        Engine::Oracle => {
            if opts.formulation != FormulationKind::AxisAligned {
                return Err(Error::Invalid("the oracle only searches axis-aligned trees".into()));
            }
            let clock = WallClock::start();
            let oracle_opts = OracleOptions { loss: opts.loss, unguarded: opts.unguarded };
            let threads = if opts.solver.deterministic { 1 } else { opts.solver.threads };
            let r = enumerate_parallel(samples, &opts.h, oracle_opts, threads)?;
            Ok(FitOutcome {
                status: MipStatus::Optimal,
                model: Some(r.model),
                objective: r.objective,
                best_bound: r.objective,
                gap: 0.0,
                nodes: r.subproblems as u64,
                wall_time: clock.elapsed(),
                incumbent: None,
            })
        }
        Engine::Mip => {
            if opts.loss != Loss::Mae {
                return Err(Error::Invalid("the MIP engine minimizes the mean absolute error only".into()));
            }
            let built;
            let model = match mip {
                Some(m) => m,
                None => {
                    built = build(samples, &opts.h, opts.formulation)?;
                    &built
                }
            };
            let r = solve(model, &opts.solver)?;
            let tree = match &r.x {
                Some(x) => Some(decode(model, x, samples, &opts.h)?),
                None => None,
            };
            Ok(FitOutcome {
                status: r.status,
                model: tree,
                objective: r.objective,
                best_bound: r.best_bound,
                gap: r.gap,
                nodes: r.nodes,
                wall_time: r.wall_time,
                incumbent: r.x,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use pwtame_core::functions::{sample_uniform_at, Domain, TestFunction, ValueSite};
    use pwtame_core::solver::solve_mip;

    fn linf(n: usize, seed: u64) -> SampleSet {
        let dom = Domain::symmetric(2, 1.0).unwrap();
        sample_uniform_at(|x: &[f64]| TestFunction::Linf.eval(x), &dom, n, seed, ValueSite::Drawn).unwrap()
    }

    #[test]
    fn threaded_search_reaches_the_serial_optimum() {
        let s = linf(8, 3);
        let h = Hyperparams { depth: 1, degree: 1, ..Hyperparams::default() };
        let m = build(&s, &h, FormulationKind::AxisAligned).unwrap();
        let serial = solve_mip(&m, &SolverConfig::default()).unwrap();
        let threaded = solve(&m, &SolverConfig { deterministic: false, threads: 3, ..SolverConfig::default() }).unwrap();
        assert_eq!(threaded.status, MipStatus::Optimal);
        assert!((threaded.objective - serial.objective).abs() < 1e-6);
    }

    #[test]
    fn threaded_oracle_matches_the_serial_tree() {
        let s = linf(14, 9);
        let h = Hyperparams { depth: 2, degree: 0, ..Hyperparams::default() };
        let serial = enumerate_axis_trees(&s, &h, OracleOptions::default()).unwrap();
        let threaded = enumerate_parallel(&s, &h, OracleOptions::default(), 4).unwrap();
        assert_eq!(threaded.objective.to_bits(), serial.objective.to_bits());
        assert_eq!(threaded.model, serial.model);
    }

    #[test]
    fn oracle_rejects_hyperplanes_and_mip_rejects_squares() {
        let s = linf(5, 1);
        let hp = FitOptions { formulation: FormulationKind::Hyperplane, engine: Engine::Oracle, ..FitOptions::default() };
        assert!(fit(&s, &hp, None).is_err());
        let mse = FitOptions { loss: Loss::Mse, ..FitOptions::default() };
        assert!(fit(&s, &mse, None).is_err());
    }

    #[test]
    fn exit_codes_follow_the_status() {
        assert_eq!(exit_code(MipStatus::Optimal), 0);
        assert_eq!(exit_code(MipStatus::FeasibleTimeLimit), 2);
        assert_eq!(exit_code(MipStatus::Infeasible), 3);
    }
}
