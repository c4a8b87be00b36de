use rand::Rng;

use super::{best_index, init_population, setup, AlgoParams, Individual, ScheduleProblem, Tracker};
use crate::dsm::{DsmInstance, Schedule};
use crate::error::Result;
use crate::heuristic::{deb_compare, RngStream, RunResult, Winner};

/// Teacher move `x + r * (teacher - tf * mean)`, elementwise.
pub fn teacher_update(x: &[f64], teacher: &[f64], mean: &[f64], tf: f64, r: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(teacher)
        .zip(mean)
        .zip(r)
        .map(|(((xi, t), m), ri)| xi + ri * (t - tf * m))
        .collect()
}

/// Learner move: toward `other` when it is better, away from it otherwise.
pub fn learner_update(x: &[f64], other: &[f64], other_is_better: bool, r: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(other)
        .zip(r)
        .map(|((xi, o), ri)| {
            if other_is_better {
                xi + ri * (o - xi)
            } else {
                xi + ri * (xi - o)
            }
        })
        .collect()
}

/// Teaching factor, 1 or 2 with equal probability.
fn teaching_factor(rng: &mut RngStream) -> f64 {
    (1.0 + rng.random::<f64>()).round()
}

fn uniform_vec(dim: usize, rng: &mut RngStream) -> Vec<f64> {
    (0..dim).map(|_| rng.random::<f64>()).collect()
}

/// Replaces `population[i]` when Deb's rules prefer the candidate.
pub(crate) fn deb_accept(population: &mut [Individual], i: usize, cand: Individual) {
    if deb_compare(&population[i].candidate(), &cand.candidate()) == Winner::Second {
        population[i] = cand;
    }
}

fn mean_genes(population: &[Individual], dim: usize) -> Vec<f64> {
    let mut mean = vec![0.0; dim];
    for ind in population {
        for (m, g) in mean.iter_mut().zip(&ind.genes) {
            *m += g;
        }
    }
    mean.iter_mut().for_each(|m| *m /= population.len() as f64);
    mean
}

pub(crate) fn teacher_phase(
    problem: &mut ScheduleProblem<'_>,
    population: &mut [Individual],
    tracker: &mut Tracker,
    rng: &mut RngStream,
) {
    let dim = problem.decoder.dim();
    let teacher = population[best_index(population)].genes.clone();
    let mean = mean_genes(population, dim);
    for i in 0..population.len() {
        let tf = teaching_factor(rng);
        let r = uniform_vec(dim, rng);
        let cand = problem.evaluate(teacher_update(&population[i].genes, &teacher, &mean, tf, &r));
        tracker.offer(&cand);
        deb_accept(population, i, cand);
    }
}

pub(crate) fn learner_phase(
    problem: &mut ScheduleProblem<'_>,
    population: &mut [Individual],
    tracker: &mut Tracker,
    rng: &mut RngStream,
) {
    let dim = problem.decoder.dim();
    let n = population.len();
    for i in 0..n {
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let other_is_better = crate::heuristic::deb_order(
            &population[j].candidate(),
            &population[i].candidate(),
        )
        .is_lt();
        let r = uniform_vec(dim, rng);
        let genes = learner_update(&population[i].genes, &population[j].genes, other_is_better, &r);
        let cand = problem.evaluate(genes);
        tracker.offer(&cand);
        deb_accept(population, i, cand);
    }
}

/// Teaching-learning-based optimization with Deb's acceptance rules.
pub fn tlbo_run(instance: &DsmInstance, params: &AlgoParams, seed: u64) -> Result<RunResult<Schedule>> {
    tlbo_with(instance, params, seed, |_, _, _| {})
}

/// TLBO with a hook run after each learner phase.
pub(crate) fn tlbo_with<F>(
    instance: &DsmInstance,
    params: &AlgoParams,
    seed: u64,
    mut after_learners: F,
) -> Result<RunResult<Schedule>>
where
    F: FnMut(&mut ScheduleProblem<'_>, &mut [Individual], &mut Tracker),
{
    let mut problem = setup(instance, params)?;
    let mut rng = RngStream::new(seed, 0);
    let mut population = init_population(&mut problem, params.population, &mut rng);
    let mut tracker = Tracker::new(params.termination, &population);

    loop {
        teacher_phase(&mut problem, &mut population, &mut tracker, &mut rng);
        learner_phase(&mut problem, &mut population, &mut tracker, &mut rng);
        after_learners(&mut problem, &mut population, &mut tracker);
        tracker.end_iteration();
        if tracker.finished(&problem) {
            break;
        }
    }
    Ok(tracker.finish(&problem, seed))
}
