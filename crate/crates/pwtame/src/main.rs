use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pwtame::drive::{exit_code, fit, Engine, FitOptions};
use pwtame::model_file::save_model;
use pwtame::mps::{names_path, save_mps, NameTable};
use pwtame::samples::{load_samples, save_samples};
use pwtame::scenario::{run_scenario, EngineName, Formulation, ScenarioConfig};
use pwtame::solution::import_solution;
use pwtame::{Error, Result};
use pwtame_core::formulation::{build, decode, Constant, FormulationKind, Hyperparams};
use pwtame_core::functions::{make_grid_signal, sample_uniform_at, Domain, GridSignalSpec, TestFunction, ValueSite};
use pwtame_core::oracle::Loss;
use pwtame_core::solver::{MipStatus, SolverConfig};

#[derive(Parser)]
#[command(name = "pwtame", version, about = "Optimal piecewise-polynomial regression trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a test function and write a sample CSV.
    Sample(SampleArgs),
    /// Fit a tree to a sample CSV.
    Fit(FitArgs),
    /// Run an experiment scenario.
    Run(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FnName {
    L1,
    Linf,
    Cone,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum SiteArg {
    Drawn,
    Rounded,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long = "fn", value_enum)]
    function: FnName,
    /// Number of points (grid signals use --grid-size instead).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Domain as `c±r` (or `c+-r`); `c` is one center per dimension,
    /// comma-separated, or a single value used for every dimension.
    #[arg(long, default_value = "0±1")]
    dom: String,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0.5)]
    cone_r: f64,
    #[arg(long, default_value_t = 0.5)]
    cone_s: f64,
    /// Where function values are taken: at the drawn point or at the rounded one.
    #[arg(long, value_enum, default_value = "drawn")]
    site: SiteArg,
    #[arg(long, default_value_t = 8)]
    grid_size: usize,
    /// Quadrant values of the grid signal: lower-left, lower-right, upper-left, upper-right.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0, 3.0])]
    values: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(short = 'o', long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Axis,
    Hplane,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Mip,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Mae,
    Mse,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_enum, default_value = "axis")]
    formulation: FormulationArg,
    #[arg(long, value_enum, default_value = "mip")]
    engine: EngineArg,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Minimum number of points in a nonempty leaf.
    #[arg(long, default_value_t = 1)]
    nmin: usize,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Seconds.
    #[arg(long, default_value_t = 300.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 1e-4)]
    mu: f64,
    #[arg(long)]
    big_m: Option<f64>,
    #[arg(long)]
    coeff_bound: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    gap: f64,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Worker threads; more than one gives up run-to-run reproducibility.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Oracle engine only.
    #[arg(long, value_enum, default_value = "mae")]
    loss: LossArg,
    /// Lift the oracle size guard.
    #[arg(long)]
    unguarded: bool,
    /// Write the program in MPS format, with its name table next to it.
    #[arg(long)]
    mps_out: Option<PathBuf>,
    /// Stop after writing the MPS file.
    #[arg(long, requires = "mps_out")]
    export_only: bool,
    /// Decode a solution file instead of solving.
    #[arg(long)]
    sol_in: Option<PathBuf>,
    /// Name table for MPS codes in the solution file.
    #[arg(long)]
    names: Option<PathBuf>,
    #[arg(short = 'i', long)]
    input: PathBuf,
    #[arg(short = 'o', long, required_unless_present = "export_only")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    paper_scale: bool,
    /// Run a TOML configuration instead of a preset.
    #[arg(long, conflicts_with_all = ["scenario", "paper_scale"])]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    formulation: Option<FormulationArg>,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Print the configuration as TOML and exit.
    #[arg(long)]
    print_config: bool,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

fn parse_domain(text: &str, dim: usize) -> Result<Domain> {
    let (c, r) = text
        .split_once('±')
        .or_else(|| text.split_once("+-"))
        .ok_or_else(|| Error::Invalid(format!("domain `{text}` is not of the form c±r")))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Invalid(format!("`{s}` is not a number in domain `{text}`")));
    let centers = c.split(',').map(num).collect::<Result<Vec<f64>>>()?;
    let center = match centers.len() {
        1 => vec![centers[0]; dim],
        k if k == dim => centers,
        k => return Err(Error::Invalid(format!("domain has {k} centers for dimension {dim}"))),
    };
    Ok(Domain::new(center, num(r)?)?)
}

fn sample(args: SampleArgs) -> Result<i32> {
    let samples = match args.function {
        FnName::Grid => {
            let values: [f64; 4] = args.values.as_slice().try_into().map_err(|_| Error::Invalid("--values takes four numbers".into()))?;
            if !args.grid_size.is_multiple_of(2) {
                return Err(Error::Invalid("quadrant grids need an even --grid-size".into()));
            }
            make_grid_signal(&GridSignalSpec::quadrants(args.grid_size, values, args.sigma, args.seed))?
        }
        name => {
            let f = match name {
                FnName::L1 => TestFunction::L1,
                FnName::Linf => TestFunction::Linf,
                _ => TestFunction::Cone { r: args.cone_r, s: args.cone_s },
            };
            let dim = if matches!(f, TestFunction::Cone { .. }) { 2 } else { args.dim };
            let n = args.n.ok_or_else(|| Error::Invalid("--n is required".into()))?;
            let site = match args.site {
                SiteArg::Drawn => ValueSite::Drawn,
                SiteArg::Rounded => ValueSite::Rounded,
            };
            sample_uniform_at(|x: &[f64]| f.eval(x), &parse_domain(&args.dom, dim)?, n, args.seed, site)?
        }
    };
    save_samples(&args.output, &samples)?;
    println!("wrote {} samples to {}", samples.len(), args.output.display());
    Ok(0)
}

fn fit_command(args: FitArgs) -> Result<i32> {
    let samples = load_samples(&args.input)?;
    let constant = |v: Option<f64>| v.map(Constant::Value).unwrap_or(Constant::Auto);
    let h = Hyperparams {
        depth: args.depth,
        min_leaf_points: args.nmin,
        degree: args.degree,
        mu: args.mu,
        big_m: constant(args.big_m),
        coeff_bound: constant(args.coeff_bound),
        ..Hyperparams::default()
    };
    let formulation = match args.formulation {
        FormulationArg::Axis => FormulationKind::AxisAligned,
        FormulationArg::Hplane => FormulationKind::Hyperplane,
    };
    let opts = FitOptions {
        formulation,
        engine: match args.engine {
            EngineArg::Mip => Engine::Mip,
            EngineArg::Oracle => Engine::Oracle,
        },
        h: h.clone(),
        solver: SolverConfig {
            time_limit: Some(args.time_limit),
            gap_tolerance: args.gap,
            node_limit: args.node_limit,
            deterministic: args.threads <= 1,
            threads: args.threads.max(1),
        },
        loss: match args.loss {
            LossArg::Mae => Loss::Mae,
            LossArg::Mse => Loss::Mse,
        },
        unguarded: args.unguarded,
    };

    let needs_program = matches!(opts.engine, Engine::Mip) || args.mps_out.is_some() || args.sol_in.is_some();
    let program = if needs_program { Some(build(&samples, &h, formulation)?) } else { None };
    let mut table: Option<NameTable> = None;
    if let (Some(path), Some(m)) = (&args.mps_out, &program) {
        table = Some(save_mps(path, m)?.names);
        println!("wrote {} and {}", path.display(), names_path(path).display());
    }
    if args.export_only {
        return Ok(0);
    }
    let output = args.output.expect("clap requires -o unless --export-only");

    if let Some(sol) = &args.sol_in {
        let m = program.as_ref().expect("built above");
        if let Some(path) = &args.names {
            table = Some(NameTable::from_csv(&std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.clone(), source })?)?);
        }
        let text = std::fs::read_to_string(sol).map_err(|source| Error::Io { path: sol.clone(), source })?;
        let imported = import_solution(m, &text, table.as_ref())?;
        let tree = decode(m, &imported.x, &samples, &h)?;
        save_model(&output, &tree)?;
        println!("status imported objective {} completed {}", imported.objective, imported.completed);
        // The file is feasible but its optimality is not certified here.
        return Ok(exit_code(MipStatus::FeasibleTimeLimit));
    }

    let outcome = fit(&samples, &opts, program.as_ref())?;
    if let Some(tree) = &outcome.model {
        save_model(&output, tree)?;
    }
    println!(
        "status {} objective {} bound {} gap {} nodes {} time {:.3}s",
        outcome.status.as_str(),
        outcome.objective,
        outcome.best_bound,
        outcome.gap,
        outcome.nodes,
        outcome.wall_time
    );
    Ok(exit_code(outcome.status))
}

fn run(args: RunArgs) -> Result<i32> {
    let mut cfg = match (&args.config, &args.scenario) {
        (Some(path), _) => ScenarioConfig::load(path)?,
        (None, Some(name)) => ScenarioConfig::preset(name, args.paper_scale)?,
        (None, None) => return Err(Error::Invalid("pass --scenario or --config".into())),
    };
    if let Some(f) = args.formulation {
        cfg.fit.formulation = match f {
            FormulationArg::Axis => Formulation::Axis,
            FormulationArg::Hplane => Formulation::Hplane,
        };
    }
    if let Some(e) = args.engine {
        cfg.fit.engine = match e {
            EngineArg::Mip => EngineName::Mip,
            EngineArg::Oracle => EngineName::Oracle,
        };
    }
    if let Some(t) = args.time_limit {
        cfg.solver.time_limit = Some(t);
    }
    if let Some(t) = args.threads {
        cfg.solver.threads = t;
        cfg.solver.deterministic = t <= 1;
    }
    cfg.validate()?;
    if args.print_config {
        print!("{}", cfg.to_toml());
        return Ok(0);
    }
    let dir = args.out_dir.join(&cfg.name);
    let run = run_scenario(&cfg, &dir)?;
    let r = &run.report;
    let show = |v: Option<f64>| v.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into());
    println!(
        "{}: status {} objective {} training MAE {} sup-norm error {} nodes {}",
        r.scenario,
        r.status,
        show(r.objective),
        show(r.training_mae),
        show(r.sup_norm_error),
        r.nodes
    );
    println!("wrote {}", dir.display());
    Ok(exit_code(run.fit.status))
}

fn main() -> ExitCode {
    // Usage errors exit with 1; 2 and 3 are reserved for solver outcomes.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Sample(a) => sample(a),
        Command::Fit(a) => fit_command(a),
        Command::Run(a) => run(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
