use rand::Rng;

use super::{init_population, setup, AlgoParams, Individual, ScheduleProblem, Tracker};
use crate::dsm::{DsmInstance, Schedule};
use crate::error::Result;
use crate::heuristic::{RngStream, RunResult};

/// Winner of a `k`-way tournament drawn with replacement.
pub(crate) fn tournament<'p>(
    population: &'p [Individual],
    k: usize,
    rng: &mut RngStream,
) -> &'p Individual {
    let mut best = &population[rng.random_range(0..population.len())];
    for _ in 1..k {
        let c = &population[rng.random_range(0..population.len())];
        if c.value < best.value {
            best = c;
        }
    }
    best
}

pub(crate) fn single_point_crossover(a: &[f64], b: &[f64], rng: &mut RngStream) -> Vec<f64> {
    if a.len() < 2 {
        return a.to_vec();
    }
    let cut = rng.random_range(1..a.len());
    a[..cut].iter().chain(&b[cut..]).copied().collect()
}

/// Resets each gene to a uniform value in its bounds with probability `rate`.
/// Returns whether any gene changed.
pub(crate) fn uniform_mutation(
    genes: &mut [f64],
    rate: f64,
    problem: &ScheduleProblem<'_>,
    rng: &mut RngStream,
) -> bool {
    let mut changed = false;
    for (k, g) in genes.iter_mut().enumerate() {
        if rng.random::<f64>() < rate {
            *g = problem.decoder.random_gene(k, rng);
            changed = true;
        }
    }
    changed
}

/// Sorts best-first and keeps the elites; the rest is replaced by offspring.
pub(crate) fn replace_worst(
    population: &mut Vec<Individual>,
    elitism: usize,
    offspring: Vec<Individual>,
) {
    population.sort_by(|a, b| a.value.total_cmp(&b.value));
    population.truncate(elitism);
    population.extend(offspring);
}

/// Generational GA loop with a pluggable variation step.
pub(crate) fn ga_loop<F>(
    instance: &DsmInstance,
    params: &AlgoParams,
    seed: u64,
    mut vary: F,
) -> Result<RunResult<Schedule>>
where
    F: FnMut(&[Individual], &Individual, &ScheduleProblem<'_>, &mut RngStream) -> Vec<f64>,
{
    let mut problem = setup(instance, params)?;
    let mut rng = RngStream::new(seed, 0);
    let mut population = init_population(&mut problem, params.population, &mut rng);
    let mut tracker = Tracker::new(params.termination, &population);

    loop {
        let n_offspring = params.population - params.elitism_count;
        let mut offspring = Vec::with_capacity(n_offspring);
        for _ in 0..n_offspring {
            let genes = vary(&population, &tracker.best, &problem, &mut rng);
            let child = problem.evaluate(genes);
            tracker.offer(&child);
            offspring.push(child);
        }
        replace_worst(&mut population, params.elitism_count, offspring);
        tracker.end_iteration();
        if tracker.finished(&problem) {
            break;
        }
    }
    Ok(tracker.finish(&problem, seed))
}

/// Genetic algorithm: tournament selection, single-point crossover, uniform
/// per-gene mutation, offspring replacing all but the elites.
pub fn ga_run(instance: &DsmInstance, params: &AlgoParams, seed: u64) -> Result<RunResult<Schedule>> {
    ga_loop(instance, params, seed, |pop, _best, problem, rng| {
        let a = tournament(pop, params.tournament_k, rng);
        let b = tournament(pop, params.tournament_k, rng);
        let mut child = if rng.random::<f64>() < params.crossover_rate {
            single_point_crossover(&a.genes, &b.genes, rng)
        } else {
            a.genes.clone()
        };
        uniform_mutation(&mut child, params.mutation_rate, problem, rng);
        child
    })
}
