//! `gridopt` command-line harness.
//!
//! Exit codes: 0 on success, 2 for bad parameters, 3 for bad instances,
//! 1 for anything else (usually I/O on outputs).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gridopt::algorithm::{Algorithm, Params};
use gridopt::bench::{compare, compare_csv, convergence_csv};
use gridopt::dsm::{generate_dsm_instance, metrics, DsmInstance, MetricsReport, Schedule, TariffShape};
use gridopt::heuristic::RunResult;
use gridopt::idfpa::{CostMatrixState, IdfpaParams, TspSearch};
use gridopt::parallel::{measure_speedup, run_independent, run_tsp_plan, ParallelPlan, SpeedupReport, Strategy};
use gridopt::tsp::tsplib::{parse_tsplib, write_tsplib};
use gridopt::tsp::{Tour, TspInstance};

#[derive(Parser)]
#[command(name = "gridopt", version, about = "Appliance scheduling and TSP metaheuristics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic household instance as JSON.
    Generate(GenerateArgs),
    /// Write a random Euclidean instance in TSPLIB format.
    GenTsp(GenTspArgs),
    /// Run one solver on a household instance.
    Run(RunArgs),
    /// Compare solvers over several seeds; prints a CSV table.
    Compare(CompareArgs),
    /// Run dfpa or idfpa on a TSP instance.
    Tsp(TspArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 10)]
    appliances: usize,
    #[arg(long, default_value_t = 24)]
    horizon: usize,
    /// flat, two_tier or random.
    #[arg(long, default_value = "two_tier")]
    tariff: String,
    #[arg(long, env = "GRIDOPT_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenTspArgs {
    #[arg(long)]
    nodes: usize,
    #[arg(long, env = "GRIDOPT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Overrides applied on top of a parameter document.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// JSON parameter document.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Population size, or agent count for dfpa/idfpa.
    #[arg(long)]
    population: Option<usize>,
}

#[derive(Args)]
struct PlanArgs {
    /// independent, interacting, parallel_ants, parallel_eval or combined.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 10)]
    exchange_every: usize,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    algo: String,
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, env = "GRIDOPT_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    plan: PlanArgs,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Comma-separated solver names.
    #[arg(long, value_delimiter = ',', default_value = "ga,ba,fpa,tlbo,fbat,hfba,fga,ftlbo,gtlbo,idfpa")]
    algo: Vec<String>,
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
    /// Seed list `1,2,3` or half-open range `0..30`.
    #[arg(long, default_value = "0..10")]
    seeds: String,
    /// Add an exhaustive-search row.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct TspArgs {
    #[arg(long, default_value = "idfpa")]
    algo: String,
    /// TSPLIB file; a random instance is generated when omitted.
    #[arg(long, conflicts_with = "nodes")]
    instance: Option<PathBuf>,
    /// Node count of the generated instance.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    instance_seed: u64,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, env = "GRIDOPT_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    plan: PlanArgs,
    /// Also time a serial reference run and write speedup.json.
    #[arg(long)]
    speedup: bool,
    /// Write the final cost matrix of a single-colony run.
    #[arg(long)]
    dump_matrix: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

enum Failure {
    Parameter(anyhow::Error),
    Instance(anyhow::Error),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parameter(_) => 2,
            Failure::Instance(_) => 3,
            Failure::Other(_) => 1,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Parameter(e) | Failure::Instance(e) | Failure::Other(e) => e,
        }
    }
}

/// Solver errors: parameter errors map to 2, I/O to 1, the rest concern the instance.
impl From<gridopt::Error> for Failure {
    fn from(e: gridopt::Error) -> Self {
        if e.is_parameter_error() {
            Failure::Parameter(e.into())
        } else if matches!(e, gridopt::Error::Io(_)) {
            Failure::Other(e.into())
        } else {
            Failure::Instance(e.into())
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn param<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Parameter(e.into())
}

fn output<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Other(e.into())
}

fn read_instance_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read instance {}", path.display()))
        .map_err(Failure::Instance)
}

fn load_dsm(path: &Path) -> Outcome<DsmInstance> {
    DsmInstance::from_json(&read_instance_text(path)?)
        .with_context(|| format!("instance {}", path.display()))
        .map_err(Failure::Instance)
}

fn load_tsp(path: &Path) -> Outcome<TspInstance> {
    parse_tsplib(&read_instance_text(path)?)
        .with_context(|| format!("instance {}", path.display()))
        .map_err(Failure::Instance)
}

fn parse_algo(name: &str) -> Outcome<Algorithm> {
    name.parse::<Algorithm>().map_err(param)
}

impl Overrides {
    fn params(&self, algo: Algorithm) -> Outcome<Params> {
        let mut params = match &self.params {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("cannot read parameters {}", path.display()))
                    .map_err(Failure::Parameter)?;
                algo.params_from_json(&text)
                    .with_context(|| format!("parameters {}", path.display()))
                    .map_err(Failure::Parameter)?
            }
            None => algo.default_params(),
        };
        match &mut params {
            Params::Classic(p) => {
                if let Some(n) = self.iterations {
                    p.termination.max_iterations = n;
                }
                if let Some(n) = self.population {
                    p.population = n;
                }
            }
            Params::Idfpa(p) => {
                if let Some(n) = self.iterations {
                    p.iterations = n;
                }
                if let Some(n) = self.population {
                    p.m = n;
                }
            }
        }
        Ok(params)
    }

    fn idfpa_params(&self, algo: Algorithm) -> Outcome<IdfpaParams> {
        match self.params(algo)? {
            Params::Idfpa(p) => Ok(p),
            Params::Classic(_) => Err(param(anyhow::anyhow!("{algo} does not solve tour instances"))),
        }
    }
}

impl PlanArgs {
    fn plan(&self) -> Outcome<Option<ParallelPlan>> {
        let Some(name) = &self.strategy else {
            return Ok(None);
        };
        let strategy = name.parse::<Strategy>().map_err(param)?;
        let plan = ParallelPlan {
            exchange_every: self.exchange_every,
            ..ParallelPlan::new(strategy, self.workers)
        };
        plan.validate().map_err(param)?;
        Ok(Some(plan))
    }
}

fn parse_seeds(spec: &str) -> Outcome<Vec<u64>> {
    let bad = || param(anyhow::anyhow!("bad seed list '{spec}', expected 1,2,3 or 0..30"));
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        (a..b).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Outcome<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn write_file(path: &Path, contents: &str) -> Outcome<()> {
    fs::write(path, contents)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::Other)
}

fn write_or_print(out: Option<&Path>, contents: &str) -> Outcome<()> {
    match out {
        Some(p) => write_file(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Outcome<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(output)?;
    s.push('\n');
    Ok(s)
}

fn prepare_out_dir(dir: &Path) -> Outcome<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .map_err(Failure::Other)
}

fn cmd_generate(args: GenerateArgs) -> Outcome<()> {
    let shape = args.tariff.parse::<TariffShape>().map_err(param)?;
    let inst = generate_dsm_instance(args.appliances, args.horizon, shape, args.seed)?;
    let mut text = inst.to_json();
    text.push('\n');
    write_or_print(args.out.as_deref(), &text)
}

fn cmd_gen_tsp(args: GenTspArgs) -> Outcome<()> {
    let inst = TspInstance::random_euclidean(args.nodes, args.seed)?;
    let text = write_tsplib(&inst, &format!("random{}_{}", args.nodes, args.seed))?;
    write_or_print(args.out.as_deref(), &text)
}

#[derive(Serialize)]
struct RunReport<'a> {
    algorithm: &'a str,
    result: &'a RunResult<Schedule>,
    metrics: MetricsReport,
}

fn cmd_run(args: RunArgs) -> Outcome<()> {
    let algo = parse_algo(&args.algo)?;
    let params = args.overrides.params(algo)?;
    let plan = args.plan.plan()?;
    let inst = load_dsm(&args.instance)?;
    let result = match plan {
        None => algo.run_schedule(&inst, &params, args.seed)?,
        Some(plan) if plan.strategy == Strategy::Independent => {
            let sets = vec![params.clone(); plan.workers];
            let seeds: Vec<u64> = (0..plan.workers as u64).map(|k| args.seed.wrapping_add(k)).collect();
            run_independent(|p, s| algo.run_schedule(&inst, p, s), &plan, &sets, &seeds)?
        }
        Some(plan) => {
            return Err(gridopt::Error::UnsupportedStrategy(format!(
                "schedules support only the independent strategy, got {}",
                plan.strategy
            ))
            .into())
        }
    };
    let report = RunReport {
        algorithm: algo.name(),
        metrics: metrics(&result.best_solution, &inst)?,
        result: &result,
    };
    prepare_out_dir(&args.out_dir)?;
    write_file(&args.out_dir.join("result.json"), &to_json(&report)?)?;
    write_file(&args.out_dir.join("convergence.csv"), &convergence_csv(&result.trajectory))?;
    eprintln!(
        "{}: best {} after {} evaluations",
        algo, result.best_value, result.evaluations
    );
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Outcome<()> {
    let algos = args
        .algo
        .iter()
        .map(|a| parse_algo(a))
        .collect::<Outcome<Vec<_>>>()?;
    let seeds = parse_seeds(&args.seeds)?;
    // Resolve every parameter document before any solver runs.
    let params = algos
        .iter()
        .map(|&a| args.overrides.params(a))
        .collect::<Outcome<Vec<_>>>()?;
    let inst = load_dsm(&args.instance)?;
    let rows = compare(
        &inst,
        &algos,
        &seeds,
        |a| {
            let k = algos.iter().position(|&x| x == a).expect("listed algorithm");
            Ok(params[k].clone())
        },
        args.oracle,
    )?;
    print!("{}", compare_csv(&rows));
    Ok(())
}

#[derive(Serialize)]
struct TspReport<'a> {
    algorithm: &'a str,
    nodes: usize,
    strategy: Option<Strategy>,
    workers: usize,
    result: &'a RunResult<Tour>,
}

fn single_colony(
    algo: Algorithm,
    inst: &TspInstance,
    params: &IdfpaParams,
    seed: u64,
) -> Outcome<(RunResult<Tour>, CostMatrixState)> {
    let mut search = match algo {
        Algorithm::Dfpa => TspSearch::memoryless(inst, params, seed)?,
        _ => TspSearch::new(inst, params, seed)?,
    };
    while !search.finished() {
        search.step()?;
    }
    let matrix = search.matrix().clone();
    Ok((search.finish(), matrix))
}

fn cmd_tsp(args: TspArgs) -> Outcome<()> {
    let algo = parse_algo(&args.algo)?;
    let params = args.overrides.idfpa_params(algo)?;
    let plan = args.plan.plan()?;
    if plan.is_some() && args.dump_matrix.is_some() {
        return Err(param(anyhow::anyhow!("--dump-matrix needs a single-colony run (no --strategy)")));
    }
    if args.speedup && plan.is_none() {
        return Err(param(anyhow::anyhow!("--speedup needs --strategy")));
    }
    let inst = match (&args.instance, args.nodes) {
        (Some(path), _) => load_tsp(path)?,
        (None, Some(n)) => TspInstance::random_euclidean(n, args.instance_seed)?,
        (None, None) => return Err(param(anyhow::anyhow!("give --instance or --nodes"))),
    };
    prepare_out_dir(&args.out_dir)?;

    let (result, speedup): (RunResult<Tour>, Option<SpeedupReport>) = match plan {
        None => {
            let (result, matrix) = single_colony(algo, &inst, &params, args.seed)?;
            if let Some(path) = &args.dump_matrix {
                write_file(path, &to_json(&matrix)?)?;
            }
            (result, None)
        }
        Some(plan) if args.speedup => {
            let mut parallel = None;
            let report = measure_speedup(
                plan.workers,
                || Ok(algo.run_tsp(&inst, &params, args.seed)?.best_value),
                || {
                    let r = run_tsp_plan(algo, &inst, &plan, &params, args.seed)?;
                    let best = r.best_value;
                    parallel = Some(r);
                    Ok(best)
                },
            )?;
            (parallel.expect("parallel run completed"), Some(report))
        }
        Some(plan) => (run_tsp_plan(algo, &inst, &plan, &params, args.seed)?, None),
    };

    let report = TspReport {
        algorithm: algo.name(),
        nodes: inst.n(),
        strategy: plan.map(|p| p.strategy),
        workers: plan.map_or(1, |p| p.workers),
        result: &result,
    };
    write_file(&args.out_dir.join("result.json"), &to_json(&report)?)?;
    write_file(&args.out_dir.join("convergence.csv"), &convergence_csv(&result.trajectory))?;
    if let Some(s) = speedup {
        write_file(&args.out_dir.join("speedup.json"), &to_json(&s)?)?;
        eprintln!("speedup {:.3} on {} workers", s.speedup, s.workers);
    }
    eprintln!("{}: best length {}", algo, result.best_value);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::GenTsp(a) => cmd_gen_tsp(a),
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Tsp(a) => cmd_tsp(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
