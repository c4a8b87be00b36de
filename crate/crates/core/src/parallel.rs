//! Parallel execution strategies.
//!
//! Workers never share mutable state. Colonies and agent groups exchange data
//! by value at iteration barriers only, and every agent keeps its own seeded
//! stream, so results do not depend on the worker count.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::algorithm::Algorithm;
use crate::dsm::{metrics, DsmInstance, MetricsReport, Objective, Schedule};
use crate::error::{Error, Result};
use crate::heuristic::RunResult;
use crate::idfpa::{construct_order, IdfpaParams, TspSearch};
use crate::tsp::{cycle_length, Tour, TspInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Isolated colonies with their own parameters and seeds.
    Independent,
    /// Colonies that periodically adopt the best colony's cost matrix.
    Interacting,
    /// One colony whose agents are spread over the workers.
    ParallelAnts,
    /// Objective evaluations spread over the workers.
    ParallelEval,
    /// Agent groups on the workers, each evaluating its tours in parallel.
    Combined,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Independent,
        Strategy::Interacting,
        Strategy::ParallelAnts,
        Strategy::ParallelEval,
        Strategy::Combined,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Independent => "independent",
            Strategy::Interacting => "interacting",
            Strategy::ParallelAnts => "parallel_ants",
            Strategy::ParallelEval => "parallel_eval",
            Strategy::Combined => "combined",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == norm)
            .ok_or_else(|| Error::param(format!("unknown strategy '{s}'")))
    }
}

/// Partner-exchange settings for PACO colonies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacoParams {
    pub initial_period: usize,
    pub period_scale: f64,
}

impl Default for PacoParams {
    fn default() -> Self {
        Self {
            initial_period: 10,
            period_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelPlan {
    pub strategy: Strategy,
    pub workers: usize,
    /// Iterations between matrix broadcasts for interacting colonies.
    pub exchange_every: usize,
    #[serde(default)]
    pub paco: Option<PacoParams>,
}

impl ParallelPlan {
    pub fn new(strategy: Strategy, workers: usize) -> Self {
        Self {
            strategy,
            workers,
            exchange_every: 10,
            paco: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers < 1 {
            return Err(Error::param("workers must be >= 1"));
        }
        if self.exchange_every < 1 {
            return Err(Error::param("exchange_every must be >= 1"));
        }
        if let Some(p) = self.paco {
            if p.initial_period < 1 {
                return Err(Error::param("paco initial_period must be >= 1"));
            }
            if !(p.period_scale > 0.0 && p.period_scale.is_finite()) {
                return Err(Error::param("paco period_scale must be > 0"));
            }
        }
        Ok(())
    }

    fn pool(&self) -> Result<ThreadPool> {
        self.validate()?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::param(format!("cannot start {} workers: {e}", self.workers)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupReport {
    pub serial_seconds: f64,
    pub parallel_seconds: f64,
    pub speedup: f64,
    pub efficiency: f64,
    pub workers: usize,
    /// Parallel best over serial best.
    pub quality_ratio: f64,
}

impl SpeedupReport {
    pub fn new(
        serial_seconds: f64,
        parallel_seconds: f64,
        workers: usize,
        serial_best: f64,
        parallel_best: f64,
    ) -> Self {
        let speedup = serial_seconds / parallel_seconds;
        Self {
            serial_seconds,
            parallel_seconds,
            speedup,
            efficiency: speedup / workers as f64,
            workers,
            quality_ratio: parallel_best / serial_best,
        }
    }
}

/// Times a serial reference and a parallel run; each closure returns its best value.
pub fn measure_speedup<S, P>(workers: usize, serial: S, parallel: P) -> Result<SpeedupReport>
where
    S: FnOnce() -> Result<f64>,
    P: FnOnce() -> Result<f64>,
{
    let t = Instant::now();
    let serial_best = serial()?;
    let serial_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let parallel_best = parallel()?;
    let parallel_seconds = t.elapsed().as_secs_f64();
    Ok(SpeedupReport::new(
        serial_seconds,
        parallel_seconds,
        workers,
        serial_best,
        parallel_best,
    ))
}

/// Best colony's result, first colony on ties, with evaluations summed over colonies.
fn best_of<S>(results: Vec<RunResult<S>>, started: Instant) -> RunResult<S> {
    let evaluations = results.iter().map(|r| r.evaluations).sum();
    let mut best = 0;
    for (k, r) in results.iter().enumerate() {
        if r.best_value < results[best].best_value {
            best = k;
        }
    }
    let mut out = results.into_iter().nth(best).expect("non-empty");
    out.evaluations = evaluations;
    out.wall_seconds = started.elapsed().as_secs_f64();
    out
}

/// Runs one isolated colony per worker; `solver` receives a colony's
/// parameters and seed.
pub fn run_independent<S, P, F>(
    solver: F,
    plan: &ParallelPlan,
    param_sets: &[P],
    seeds: &[u64],
) -> Result<RunResult<S>>
where
    S: Send,
    P: Sync,
    F: Fn(&P, u64) -> Result<RunResult<S>> + Sync,
{
    if param_sets.len() != plan.workers || seeds.len() != plan.workers {
        return Err(Error::param(format!(
            "{} workers need as many parameter sets and seeds, got {} and {}",
            plan.workers,
            param_sets.len(),
            seeds.len()
        )));
    }
    let started = Instant::now();
    let pool = plan.pool()?;
    let results: Vec<RunResult<S>> = pool.install(|| {
        param_sets
            .par_iter()
            .zip(seeds)
            .map(|(p, &s)| solver(p, s))
            .collect::<Result<_>>()
    })?;
    Ok(best_of(results, started))
}

fn matrix_search<'a>(
    algo: Algorithm,
    instance: &'a TspInstance,
    params: &IdfpaParams,
    seed: u64,
) -> Result<TspSearch<'a>> {
    match algo {
        Algorithm::Idfpa => TspSearch::new(instance, params, seed),
        Algorithm::Dfpa => TspSearch::memoryless(instance, params, seed),
        _ => Err(Error::UnsupportedStrategy(format!(
            "{algo} has no cost matrix to share"
        ))),
    }
}

fn check_matrix_based(algo: Algorithm, strategy: &str) -> Result<()> {
    if algo.is_matrix_based() {
        Ok(())
    } else {
        Err(Error::UnsupportedStrategy(format!(
            "{strategy} needs a matrix-based solver, got {algo}"
        )))
    }
}

/// Index of the shortest best tour, first on ties.
fn leader(colonies: &[TspSearch<'_>]) -> usize {
    let mut best = 0;
    for (k, c) in colonies.iter().enumerate() {
        if c.best_length() < colonies[best].best_length() {
            best = k;
        }
    }
    best
}

fn finish_colonies(colonies: Vec<TspSearch<'_>>, started: Instant) -> RunResult<Tour> {
    best_of(colonies.into_iter().map(TspSearch::finish).collect(), started)
}

/// Colonies step in parallel; every `exchange_every` iterations the colony
/// holding the best tour broadcasts its matrix and the others replace theirs.
pub fn run_interacting(
    algo: Algorithm,
    instance: &TspInstance,
    plan: &ParallelPlan,
    params: &IdfpaParams,
    seeds: &[u64],
) -> Result<RunResult<Tour>> {
    check_matrix_based(algo, "interacting colonies")?;
    if seeds.len() != plan.workers {
        return Err(Error::param(format!(
            "{} workers need {} seeds, got {}",
            plan.workers,
            plan.workers,
            seeds.len()
        )));
    }
    let started = Instant::now();
    let pool = plan.pool()?;
    let mut colonies = seeds
        .iter()
        .map(|&s| matrix_search(algo, instance, params, s))
        .collect::<Result<Vec<_>>>()?;
    while !colonies[0].finished() {
        pool.install(|| colonies.par_iter_mut().try_for_each(TspSearch::step))?;
        if colonies[0].iterations() % plan.exchange_every == 0 {
            let from = leader(&colonies);
            let matrix = colonies[from].matrix().clone();
            for (k, c) in colonies.iter_mut().enumerate() {
                if k != from {
                    c.replace_matrix(matrix.clone())?;
                }
            }
        }
    }
    Ok(finish_colonies(colonies, started))
}

/// Agent `k` goes to group `k % groups`.
fn round_robin(m: usize, groups: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); groups.min(m).max(1)];
    let g = out.len();
    for k in 0..m {
        out[k % g].push(k);
    }
    out
}

/// One iteration's tours built by agent groups in parallel. With
/// `parallel_eval`, each group also evaluates its tour lengths in parallel.
fn grouped_iteration(
    search: &mut TspSearch<'_>,
    pool: &ThreadPool,
    groups: &[Vec<usize>],
    parallel_eval: bool,
) -> Result<Vec<Tour>> {
    let instance = search.instance();
    let (state, params, agents) = search.split();
    let m = agents.len();
    // Hand each group exclusive ownership of its agents' streams.
    let mut slots: Vec<Option<&mut crate::heuristic::RngStream>> = agents.iter_mut().map(Some).collect();
    let owned: Vec<Vec<(usize, &mut crate::heuristic::RngStream)>> = groups
        .iter()
        .map(|g| g.iter().map(|&k| (k, slots[k].take().expect("agent in one group"))).collect())
        .collect();

    let built: Vec<Vec<(usize, Tour)>> = pool.install(|| {
        owned
            .into_par_iter()
            .map(|group| -> Result<Vec<(usize, Tour)>> {
                let mut orders = Vec::with_capacity(group.len());
                for (k, rng) in group {
                    orders.push((k, construct_order(state, instance, params, rng, &mut |_| {})?));
                }
                let eval = |(k, order): (usize, Vec<usize>)| {
                    let length = cycle_length(&order, instance);
                    (k, Tour { order, length })
                };
                Ok(if parallel_eval {
                    orders.into_par_iter().map(eval).collect()
                } else {
                    orders.into_iter().map(eval).collect()
                })
            })
            .collect::<Result<_>>()
    })?;

    let mut tours: Vec<Option<Tour>> = vec![None; m];
    for (k, t) in built.into_iter().flatten() {
        tours[k] = Some(t);
    }
    Ok(tours.into_iter().map(|t| t.expect("every agent built")).collect())
}

fn run_grouped(
    algo: Algorithm,
    instance: &TspInstance,
    plan: &ParallelPlan,
    params: &IdfpaParams,
    seed: u64,
    groups: usize,
    parallel_eval: bool,
) -> Result<RunResult<Tour>> {
    check_matrix_based(algo, plan.strategy.name())?;
    let pool = plan.pool()?;
    let mut search = matrix_search(algo, instance, params, seed)?;
    let groups = round_robin(params.m, groups);
    while !search.finished() {
        let tours = grouped_iteration(&mut search, &pool, &groups, parallel_eval)?;
        search.absorb(tours)?;
    }
    Ok(search.finish())
}

/// One colony; each iteration its agents are split over the workers, built
/// against the same matrix snapshot and merged in agent order at the barrier.
pub fn run_parallel_ants(
    algo: Algorithm,
    instance: &TspInstance,
    plan: &ParallelPlan,
    params: &IdfpaParams,
    seed: u64,
) -> Result<RunResult<Tour>> {
    run_grouped(algo, instance, plan, params, seed, plan.workers, false)
}

/// Agents divided into `workers` groups (remainder round-robin); each group
/// builds its tours and evaluates their lengths in parallel.
pub fn run_combined(
    algo: Algorithm,
    instance: &TspInstance,
    plan: &ParallelPlan,
    params: &IdfpaParams,
    seed: u64,
) -> Result<RunResult<Tour>> {
    run_grouped(algo, instance, plan, params, seed, plan.workers, true)
}

/// A schedule's metrics and objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluated {
    pub report: MetricsReport,
    pub value: f64,
}

/// Evaluates a batch of schedules on the workers, in input order.
pub fn run_parallel_eval(
    instance: &DsmInstance,
    plan: &ParallelPlan,
    objective: &Objective,
    batch: &[Schedule],
) -> Result<Vec<Evaluated>> {
    let pool = plan.pool()?;
    pool.install(|| {
        batch
            .par_iter()
            .map(|s| {
                let report = metrics(s, instance)?;
                Ok(Evaluated {
                    value: objective.score(&report),
                    report,
                })
            })
            .collect()
    })
}

/// Undirected arcs shared by two tours.
pub fn common_edges(a: &Tour, b: &Tour) -> Result<usize> {
    let n = a.order.len();
    if b.order.len() != n {
        return Err(Error::param(format!(
            "tours have {} and {} nodes",
            n,
            b.order.len()
        )));
    }
    let mut adj = vec![[usize::MAX; 2]; n];
    for (i, j) in a.arcs() {
        if i >= n || j >= n {
            return Err(Error::param("tour node out of range"));
        }
        let slot = usize::from(adj[i][0] != usize::MAX);
        adj[i][slot] = j;
        let slot = usize::from(adj[j][0] != usize::MAX);
        adj[j][slot] = i;
    }
    let mut shared = 0;
    for (i, j) in b.arcs() {
        if i >= n || j >= n {
            return Err(Error::param("tour node out of range"));
        }
        if adj[i].contains(&j) {
            shared += 1;
        }
    }
    Ok(shared)
}

/// Next exchange period: `initial * (1 - similarity) * scale`, rounded, at least 1.
pub fn next_period(initial: usize, similarity: f64, scale: f64) -> usize {
    ((initial as f64 * (1.0 - similarity) * scale).round() as usize).max(1)
}

/// Partner-exchange colonies. When a colony's period elapses it reinforces its
/// matrix with the best tour of the colony sharing the fewest edges with its
/// own best, then sets its next period from that similarity.
pub fn paco_run(
    instance: &TspInstance,
    plan: &ParallelPlan,
    params: &IdfpaParams,
    seeds: &[u64],
) -> Result<RunResult<Tour>> {
    plan.validate()?;
    if plan.workers < 2 {
        return Err(Error::param("partner exchange needs at least 2 workers"));
    }
    if seeds.len() != plan.workers {
        return Err(Error::param(format!(
            "{} workers need {} seeds, got {}",
            plan.workers,
            plan.workers,
            seeds.len()
        )));
    }
    let paco = plan.paco.unwrap_or_default();
    let started = Instant::now();
    let pool = plan.pool()?;
    let mut colonies = seeds
        .iter()
        .map(|&s| TspSearch::new(instance, params, s))
        .collect::<Result<Vec<_>>>()?;
    let mut period = vec![paco.initial_period; colonies.len()];
    let mut since = vec![0usize; colonies.len()];
    let n = instance.n() as f64;

    while !colonies[0].finished() {
        pool.install(|| colonies.par_iter_mut().try_for_each(TspSearch::step))?;
        let bests: Vec<Tour> = colonies
            .iter()
            .map(|c| c.best().expect("stepped").clone())
            .collect();
        for g in 0..colonies.len() {
            since[g] += 1;
            if since[g] < period[g] {
                continue;
            }
            let mut partner = None;
            let mut fewest = usize::MAX;
            for (h, tour) in bests.iter().enumerate() {
                if h == g {
                    continue;
                }
                let shared = common_edges(&bests[g], tour)?;
                if shared < fewest {
                    fewest = shared;
                    partner = Some(h);
                }
            }
            let partner = partner.expect("at least two colonies");
            colonies[g].reinforce(&bests[partner]);
            period[g] = next_period(paco.initial_period, fewest as f64 / n, paco.period_scale);
            since[g] = 0;
        }
    }
    Ok(finish_colonies(colonies, started))
}

/// Runs a matrix-based solver on tours under any plan. Colony `k` of the
/// colony strategies uses seed `seed + k`.
pub fn run_tsp_plan(
    algo: Algorithm,
    instance: &TspInstance,
    plan: &ParallelPlan,
    params: &IdfpaParams,
    seed: u64,
) -> Result<RunResult<Tour>> {
    plan.validate()?;
    check_matrix_based(algo, plan.strategy.name())?;
    let seeds: Vec<u64> = (0..plan.workers as u64).map(|k| seed.wrapping_add(k)).collect();
    match plan.strategy {
        Strategy::Independent => {
            let sets = vec![params.clone(); plan.workers];
            run_independent(|p, s| algo.run_tsp(instance, p, s), plan, &sets, &seeds)
        }
        Strategy::Interacting if plan.paco.is_some() => paco_run(instance, plan, params, &seeds),
        Strategy::Interacting => run_interacting(algo, instance, plan, params, &seeds),
        Strategy::ParallelAnts => run_parallel_ants(algo, instance, plan, params, seed),
        Strategy::ParallelEval => run_grouped(algo, instance, plan, params, seed, 1, true),
        Strategy::Combined => run_combined(algo, instance, plan, params, seed),
    }
}
