//! Experiment configurations and runners.
//!
//! A scenario samples a test function (or a noisy block signal), fits a tree,
//! and writes into its output directory:
//!
//! * `samples.csv`: the training sample;
//! * `model.json`: the fitted tree;
//! * `pred_grid.csv`, `truth_grid.csv`: model and ground truth on a
//!   `resolution x resolution` lattice of the unit square, one lattice row
//!   (fixed `x2`) per line;
//! * `report.json`: solver status and metrics.
//!
//! Configurations are TOML documents mirroring [`ScenarioConfig`]; see
//! [`ScenarioConfig::preset`] for the shipped ones.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use pwtame_core::experiments::{block_estimates, eval_grid, sup_norm_error, training_mae, truth_grid, BlockEstimate, Grid};
use pwtame_core::formulation::{Constant, FormulationKind, Hyperparams};
use pwtame_core::functions::{make_grid_signal, sample_uniform_at, Domain, GridSignalSpec, SampleSet, TestFunction, ValueSite};
use pwtame_core::oracle::Loss;
use pwtame_core::solver::{MipStatus, SolverConfig};
use pwtame_core::tree::PwPolyModel;

use crate::drive::{fit, Engine, FitOptions, FitOutcome};
use crate::error::{read_file, write_file, Error, Result};
use crate::model_file::model_to_json;
use crate::samples::write_samples;

pub const SCENARIOS: [&str; 5] = ["l1", "linf", "cone", "cone-d3", "denoise"];

/// Training MAE and solver objective must agree this closely on optimal runs.
pub const CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    L1,
    Linf,
    Cone {
        r: f64,
        s: f64,
    },
    /// Four quadrant blocks on a `size x size` grid (lower-left,
    /// lower-right, upper-left, upper-right) plus Gaussian noise.
    Grid {
        size: usize,
        values: [f64; 4],
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Site {
    Drawn,
    Rounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Axis,
    Hplane,
}

impl From<Formulation> for FormulationKind {
    fn from(f: Formulation) -> Self {
        match f {
            Formulation::Axis => FormulationKind::AxisAligned,
            Formulation::Hplane => FormulationKind::Hyperplane,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineName {
    Mip,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    /// Ignored for grid signals, which have one sample per cell.
    pub n: usize,
    /// Sampling seed, or the noise seed of a grid signal.
    pub seed: u64,
    /// Half-width of the domain `[-radius, radius]^2`.
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default = "drawn")]
    pub value_site: Site,
}

fn one() -> f64 {
    1.0
}

fn drawn() -> Site {
    Site::Drawn
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSpec {
    pub formulation: Formulation,
    pub engine: EngineName,
    pub depth: usize,
    pub degree: usize,
    pub min_leaf_points: usize,
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_bound: Option<f64>,
    /// Lift the oracle size guard.
    #[serde(default)]
    pub unguarded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_limit: Option<f64>,
    pub gap_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_limit: Option<u64>,
    pub deterministic: bool,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Lattice size of the evaluation grids.
    pub resolution: usize,
    /// Marks configurations whose optimality needs an external solver.
    #[serde(default)]
    pub paper_scale: bool,
    pub function: FunctionSpec,
    pub sampling: SamplingSpec,
    pub fit: FitSpec,
    pub solver: SolverSpec,
}

impl ScenarioConfig {
    /// Shipped configuration of a scenario. Desk scale runs to proven
    /// optimality on one core; paper scale uses the sizes and time limits of
    /// the original experiments and usually stops at the limit.
    pub fn preset(name: &str, paper_scale: bool) -> Result<Self> {
        let fit = |formulation, engine, depth, degree| FitSpec {
            formulation,
            engine,
            depth,
            degree,
            min_leaf_points: 1,
            mu: 1e-4,
            big_m: None,
            coeff_bound: None,
            unguarded: false,
        };
        let solver = |time_limit: Option<f64>| SolverSpec { time_limit, gap_tolerance: 1e-6, node_limit: None, deterministic: true, threads: 1 };
        let cone = FunctionSpec::Cone { r: 0.5, s: 0.5 };
        let mut cfg = match name {
            "l1" => Self {
                name: name.into(),
                resolution: 101,
                paper_scale: false,
                function: FunctionSpec::L1,
                sampling: SamplingSpec { n: 30, seed: 1, radius: 1.0, value_site: Site::Rounded },
                fit: fit(Formulation::Axis, EngineName::Mip, 2, 1),
                solver: solver(Some(600.0)),
            },
            "linf" => Self {
                name: name.into(),
                resolution: 101,
                paper_scale: false,
                function: FunctionSpec::Linf,
                sampling: SamplingSpec { n: 20, seed: 1, radius: 1.0, value_site: Site::Rounded },
                fit: fit(Formulation::Hplane, EngineName::Mip, 2, 1),
                solver: solver(Some(1800.0)),
            },
            "cone" => Self {
                name: name.into(),
                resolution: 101,
                paper_scale: false,
                function: cone,
                sampling: SamplingSpec { n: 30, seed: 1, radius: 1.0, value_site: Site::Drawn },
                fit: fit(Formulation::Axis, EngineName::Oracle, 2, 1),
                solver: solver(None),
            },
            "cone-d3" => Self {
                name: name.into(),
                resolution: 101,
                paper_scale: false,
                function: cone,
                sampling: SamplingSpec { n: 30, seed: 1, radius: 1.0, value_site: Site::Drawn },
                fit: FitSpec { unguarded: true, ..fit(Formulation::Axis, EngineName::Oracle, 3, 1) },
                solver: solver(None),
            },
            "denoise" => Self {
                name: name.into(),
                resolution: 101,
                paper_scale: false,
                function: FunctionSpec::Grid { size: 8, values: [0.0, 1.0, 2.0, 3.0], sigma: 0.5 },
                sampling: SamplingSpec { n: 64, seed: 1, radius: 1.0, value_site: Site::Drawn },
                fit: FitSpec { unguarded: true, ..fit(Formulation::Axis, EngineName::Oracle, 2, 0) },
                solver: solver(None),
            },
            other => {
                return Err(Error::Invalid(format!("unknown scenario `{other}`, expected one of {}", SCENARIOS.join(", "))));
            }
        };
        if paper_scale {
            cfg.paper_scale = true;
            cfg.sampling.n = 250;
            cfg.sampling.value_site = Site::Drawn;
            cfg.fit.engine = EngineName::Mip;
            cfg.fit.unguarded = false;
            cfg.solver.time_limit = Some(300.0);
            match name {
                "cone-d3" => cfg.solver.time_limit = Some(600.0),
                "denoise" => {
                    cfg.function = FunctionSpec::Grid { size: 25, values: [0.0, 1.0, 2.0, 3.0], sigma: 0.5 };
                    cfg.sampling.n = 625;
                    cfg.fit.depth = 4;
                    cfg.solver.time_limit = Some(1200.0);
                }
                _ => {}
            }
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configurations serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read_file(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::Invalid(format!("resolution must be at least 2, got {}", self.resolution)));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            return Err(Error::Invalid(format!("scenario name `{}` cannot name an output directory", self.name)));
        }
        if !matches!(self.function, FunctionSpec::Grid { .. }) && self.sampling.n == 0 {
            return Err(Error::Invalid("sample size must be at least 1".into()));
        }
        self.hyperparams().validate()?;
        self.solver_config().validate()?;
        Ok(())
    }

    pub fn hyperparams(&self) -> Hyperparams {
        let constant = |v: Option<f64>| v.map(Constant::Value).unwrap_or(Constant::Auto);
        Hyperparams {
            depth: self.fit.depth,
            min_leaf_points: self.fit.min_leaf_points,
            degree: self.fit.degree,
            mu: self.fit.mu,
            big_m: constant(self.fit.big_m),
            coeff_bound: constant(self.fit.coeff_bound),
            ..Hyperparams::default()
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            time_limit: self.solver.time_limit,
            gap_tolerance: self.solver.gap_tolerance,
            node_limit: self.solver.node_limit,
            deterministic: self.solver.deterministic,
            threads: self.solver.threads,
        }
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            formulation: self.fit.formulation.into(),
            engine: match self.fit.engine {
                EngineName::Mip => Engine::Mip,
                EngineName::Oracle => Engine::Oracle,
            },
            h: self.hyperparams(),
            solver: self.solver_config(),
            loss: Loss::Mae,
            unguarded: self.fit.unguarded,
        }
    }

    pub fn grid_spec(&self) -> Option<GridSignalSpec> {
        match self.function {
            FunctionSpec::Grid { size, values, sigma } => Some(GridSignalSpec::quadrants(size, values, sigma, self.sampling.seed)),
            _ => None,
        }
    }

    fn test_function(&self) -> Option<TestFunction> {
        match self.function {
            FunctionSpec::L1 => Some(TestFunction::L1),
            FunctionSpec::Linf => Some(TestFunction::Linf),
            FunctionSpec::Cone { r, s } => Some(TestFunction::Cone { r, s }),
            FunctionSpec::Grid { .. } => None,
        }
    }

    /// The training sample.
    pub fn samples(&self) -> Result<SampleSet> {
        if let Some(spec) = self.grid_spec() {
            return Ok(make_grid_signal(&spec)?);
        }
        let f = self.test_function().expect("non-grid functions are test functions");
        let dom = Domain::symmetric(2, self.sampling.radius)?;
        let site = match self.sampling.value_site {
            Site::Drawn => ValueSite::Drawn,
            Site::Rounded => ValueSite::Rounded,
        };
        Ok(sample_uniform_at(|x: &[f64]| f.eval(x), &dom, self.sampling.n, self.sampling.seed, site)?)
    }

    /// Ground truth on the evaluation lattice.
    pub fn truth(&self, samples: &SampleSet) -> Result<Grid> {
        match self.grid_spec() {
            Some(spec) => {
                let owners = spec.cell_owners()?;
                let g = spec.grid_size;
                let cell = |u: f64| ((u * g as f64) as usize).min(g - 1);
                Ok(truth_grid(|x| spec.blocks[owners[cell(x[1]) * g + cell(x[0])]].value, &samples.transform, self.resolution)?)
            }
            None => {
                let f = self.test_function().expect("non-grid functions are test functions");
                Ok(truth_grid(|x| f.eval(x), &samples.transform, self.resolution)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub truth: f64,
    pub recovered: f64,
    pub cells: usize,
    pub error: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

impl From<&BlockEstimate> for BlockReport {
    fn from(b: &BlockEstimate) -> Self {
        Self { truth: b.truth, recovered: b.recovered, cells: b.cells, error: b.error, tolerance: b.tolerance, within_tolerance: b.within_tolerance() }
    }
}

/// Outcome of a scenario. Non-finite values (no incumbent, no bound) are
/// written as `null`; the wall time is left out in deterministic runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: String,
    pub engine: EngineName,
    pub formulation: Formulation,
    pub n: usize,
    pub depth: usize,
    pub degree: usize,
    pub status: String,
    pub objective: Option<f64>,
    pub best_bound: Option<f64>,
    pub gap: Option<f64>,
    /// Branch-and-bound nodes, or subproblems for the oracle.
    pub nodes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    pub training_mae: Option<f64>,
    /// Over the grid points that have a prediction.
    pub sup_norm_error: Option<f64>,
    /// Grid points routed to an empty leaf, written as NaN.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub uncovered_grid_points: usize,
    /// Training MAE equals the objective within [`CONSISTENCY_TOL`]; only
    /// judged on optimal runs.
    pub objective_consistent: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<BlockReport>>,
    /// File names inside the output directory.
    pub artifacts: Vec<String>,
}

fn is_zero(k: &usize) -> bool {
    *k == 0
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }
}

/// Everything a scenario run produced, before anything is written.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub samples: SampleSet,
    pub fit: FitOutcome,
    pub pred_grid: Option<Grid>,
    pub truth_grid: Grid,
    pub report: Report,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// One lattice row per line.
pub fn grid_to_csv(grid: &Grid) -> String {
    let mut out = String::new();
    for row in grid.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}

/// Piecewise-constant fit of a noisy block signal with per-block recovery.
#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub samples: SampleSet,
    pub fit: FitOutcome,
    pub blocks: Vec<BlockEstimate>,
}

pub fn run_denoise(spec: &GridSignalSpec, opts: &FitOptions) -> Result<DenoiseOutcome> {
    let samples = make_grid_signal(spec)?;
    let outcome = fit(&samples, opts, None)?;
    let blocks = match &outcome.model {
        Some(m) => block_estimates(m, spec, &samples)?,
        None => Vec::new(),
    };
    Ok(DenoiseOutcome { samples, fit: outcome, blocks })
}

/// Samples, fits and evaluates without touching the file system.
pub fn evaluate_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    cfg.validate()?;
    let opts = cfg.fit_options();
    let (samples, outcome, blocks) = match cfg.grid_spec() {
        Some(spec) => {
            let d = run_denoise(&spec, &opts)?;
            (d.samples, d.fit, Some(d.blocks.iter().map(BlockReport::from).collect()))
        }
        None => {
            let samples = cfg.samples()?;
            let outcome = fit(&samples, &opts, None)?;
            (samples, outcome, None)
        }
    };
    let truth = cfg.truth(&samples)?;
    let model: Option<&PwPolyModel> = outcome.model.as_ref();
    let pred = model.map(|m| eval_grid(m, cfg.resolution)).transpose()?;
    let mae = model.map(|m| training_mae(m, &samples)).transpose()?;
    let sup = pred.as_ref().map(|p| sup_norm_error(p, &truth)).transpose()?;
    let consistent = match (outcome.status, mae) {
        (MipStatus::Optimal, Some(mae)) => Some((mae - outcome.objective).abs() <= CONSISTENCY_TOL),
        _ => None,
    };
    let mut artifacts = vec!["samples.csv".to_string()];
    if pred.is_some() {
        artifacts.extend(["model.json".into(), "pred_grid.csv".into()]);
    }
    artifacts.extend(["truth_grid.csv".into(), "report.json".into()]);
    let report = Report {
        scenario: cfg.name.clone(),
        engine: cfg.fit.engine,
        formulation: cfg.fit.formulation,
        n: samples.len(),
        depth: cfg.fit.depth,
        degree: cfg.fit.degree,
        status: outcome.status.as_str().into(),
        objective: finite(outcome.objective),
        best_bound: finite(outcome.best_bound),
        gap: finite(outcome.gap),
        nodes: outcome.nodes,
        wall_time: (!cfg.solver.deterministic).then_some(outcome.wall_time),
        training_mae: mae,
        sup_norm_error: sup,
        uncovered_grid_points: pred.as_ref().map_or(0, Grid::uncovered),
        objective_consistent: consistent,
        blocks,
        artifacts,
    };
    Ok(ScenarioRun { samples, fit: outcome, pred_grid: pred, truth_grid: truth, report })
}

/// Runs a scenario and writes its artifacts into `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioRun> {
    let run = evaluate_scenario(cfg)?;
    let mut samples_csv = Vec::new();
    write_samples(&mut samples_csv, &run.samples)?;
    write_file(&out_dir.join("samples.csv"), &String::from_utf8(samples_csv).expect("csv output is utf-8"))?;
    if let (Some(model), Some(pred)) = (&run.fit.model, &run.pred_grid) {
        write_file(&out_dir.join("model.json"), &model_to_json(model))?;
        write_file(&out_dir.join("pred_grid.csv"), &grid_to_csv(pred))?;
    }
    write_file(&out_dir.join("truth_grid.csv"), &grid_to_csv(&run.truth_grid))?;
    write_file(&out_dir.join("report.json"), &run.report.to_json())?;
    Ok(run)
}
