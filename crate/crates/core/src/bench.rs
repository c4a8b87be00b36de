//! Algorithm comparison tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::algorithm::{Algorithm, Params};
use crate::dsm::{baseline_schedule, brute_force_schedule, metrics, DsmInstance, Objective, Schedule};
use crate::error::Result;

pub const COMPARE_HEADER: &str = "algorithm,cost_reduction_pct,par,discomfort,median,iqr,seeds";
pub const CONVERGENCE_HEADER: &str = "iteration,best_value";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub algorithm: String,
    /// `100 * (baseline - median cost) / baseline`.
    pub cost_reduction_pct: f64,
    /// Median PAR of the best schedules.
    pub par: f64,
    /// Median discomfort of the best schedules.
    pub discomfort: f64,
    /// Median best objective value.
    pub median: f64,
    /// Interquartile range of the best objective values.
    pub iqr: f64,
    pub seeds: usize,
}

/// Per-seed outcome of one solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub value: f64,
    pub cost: f64,
    pub par: f64,
    pub discomfort: f64,
}

/// Linear-interpolation quantile of sorted data, `q` in `[0, 1]`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(values: &[f64]) -> f64 {
    quantile(&sorted(values), 0.5)
}

pub fn iqr(values: &[f64]) -> f64 {
    let s = sorted(values);
    quantile(&s, 0.75) - quantile(&s, 0.25)
}

fn outcome(instance: &DsmInstance, objective: &Objective, schedule: &Schedule, seed: u64) -> Result<SeedOutcome> {
    let report = metrics(schedule, instance)?;
    Ok(SeedOutcome {
        seed,
        value: objective.score(&report),
        cost: report.cost,
        par: report.par,
        discomfort: report.discomfort,
    })
}

/// Runs `algo` once per seed.
pub fn run_seeds(
    algo: Algorithm,
    instance: &DsmInstance,
    params: &Params,
    seeds: &[u64],
) -> Result<Vec<SeedOutcome>> {
    let objective = objective_of(instance, params)?;
    seeds
        .iter()
        .map(|&seed| {
            let r = algo.run_schedule(instance, params, seed)?;
            outcome(instance, &objective, &r.best_solution, seed)
        })
        .collect()
}

fn objective_of(instance: &DsmInstance, params: &Params) -> Result<Objective> {
    match params {
        Params::Classic(p) => p.objective(instance),
        Params::Idfpa(p) => Objective::new(instance, p.weights, p.penalty),
    }
}

pub fn summarize(name: &str, baseline_cost: f64, outcomes: &[SeedOutcome]) -> CompareRow {
    let pick = |f: fn(&SeedOutcome) -> f64| outcomes.iter().map(f).collect::<Vec<_>>();
    let values = pick(|o| o.value);
    CompareRow {
        algorithm: name.to_string(),
        cost_reduction_pct: 100.0 * (baseline_cost - median(&pick(|o| o.cost))) / baseline_cost,
        par: median(&pick(|o| o.par)),
        discomfort: median(&pick(|o| o.discomfort)),
        median: median(&values),
        iqr: iqr(&values),
        seeds: outcomes.len(),
    }
}

/// One row per algorithm over `seeds`, after a baseline row and, when
/// requested, an exhaustive-search row. `params_for` supplies each
/// algorithm's parameters; the first algorithm's weights score the
/// baseline and oracle rows.
pub fn compare<F>(
    instance: &DsmInstance,
    algos: &[Algorithm],
    seeds: &[u64],
    mut params_for: F,
    oracle: bool,
) -> Result<Vec<CompareRow>>
where
    F: FnMut(Algorithm) -> Result<Params>,
{
    let reference = match algos.first() {
        Some(&a) => params_for(a)?,
        None => Algorithm::Ga.default_params(),
    };
    let objective = objective_of(instance, &reference)?;
    let base = outcome(instance, &objective, &baseline_schedule(instance), 0)?;
    let mut rows = vec![summarize("baseline", base.cost, std::slice::from_ref(&base))];
    rows[0].seeds = 0;
    if oracle {
        let best = brute_force_schedule(instance, &objective)?;
        let o = outcome(instance, &objective, &best, 0)?;
        let mut row = summarize("oracle", base.cost, &[o]);
        row.seeds = 0;
        rows.push(row);
    }
    for &algo in algos {
        let params = params_for(algo)?;
        rows.push(summarize(algo.name(), base.cost, &run_seeds(algo, instance, &params, seeds)?));
    }
    Ok(rows)
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.algorithm, r.cost_reduction_pct, r.par, r.discomfort, r.median, r.iqr, r.seeds
        )
        .expect("write to string");
    }
    out
}

pub fn convergence_csv(trajectory: &[f64]) -> String {
    let mut out = String::from(CONVERGENCE_HEADER);
    out.push('\n');
    for (i, v) in trajectory.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, v).expect("write to string");
    }
    out
}
