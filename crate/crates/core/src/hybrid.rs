//! Hybrids assembled from the classic operators.
//!
//! - FBAT (also registered as HFBA): the bat loop with its random local step
//!   swapped for a pollination move.
//! - FGA: the GA loop with crossover and mutation swapped for one pollination
//!   move per offspring.
//! - FTLBO: TLBO initialization and Deb acceptance, both phases swapped for
//!   pollination passes.
//! - GTLBO: a full TLBO iteration followed by GA mutation over the population.

use crate::classic::ba::bat_loop;
use crate::classic::ga::{ga_loop, tournament, uniform_mutation};
use crate::classic::tlbo::{deb_accept, tlbo_with};
use crate::classic::{
    init_population, pollinate, setup, AlgoParams, Individual, ScheduleProblem, Tracker,
};
use crate::dsm::{DsmInstance, Schedule};
use crate::error::Result;
use crate::heuristic::{RngStream, RunResult};

pub fn fbat_run(instance: &DsmInstance, params: &AlgoParams, seed: u64) -> Result<RunResult<Schedule>> {
    bat_loop(instance, params, seed, |step, rng| {
        let (genes, _) = pollinate(
            step.position,
            step.best,
            step.population,
            params.switch_p,
            params.levy_lambda,
            rng,
        )?;
        Ok(genes)
    })
}

/// Same solver as [`fbat_run`].
pub fn hfba_run(instance: &DsmInstance, params: &AlgoParams, seed: u64) -> Result<RunResult<Schedule>> {
    fbat_run(instance, params, seed)
}

pub fn fga_run(instance: &DsmInstance, params: &AlgoParams, seed: u64) -> Result<RunResult<Schedule>> {
    // The closure cannot return an error; lambda is validated by ga_loop first.
    ga_loop(instance, params, seed, |pop, best, _problem, rng| {
        let parent = tournament(pop, params.tournament_k, rng);
        pollinate(
            &parent.genes,
            &best.genes,
            pop,
            params.switch_p,
            params.levy_lambda,
            rng,
        )
        .map(|(g, _)| g)
        .expect("levy lambda validated")
    })
}

fn pollination_pass(
    problem: &mut ScheduleProblem<'_>,
    population: &mut [Individual],
    tracker: &mut Tracker,
    params: &AlgoParams,
    rng: &mut RngStream,
) -> Result<()> {
    for i in 0..population.len() {
        let (genes, _) = pollinate(
            &population[i].genes,
            &tracker.best.genes,
            population,
            params.switch_p,
            params.levy_lambda,
            rng,
        )?;
        let cand = problem.evaluate(genes);
        tracker.offer(&cand);
        deb_accept(population, i, cand);
    }
    Ok(())
}

pub fn ftlbo_run(instance: &DsmInstance, params: &AlgoParams, seed: u64) -> Result<RunResult<Schedule>> {
    let mut problem = setup(instance, params)?;
    let mut rng = RngStream::new(seed, 0);
    let mut population = init_population(&mut problem, params.population, &mut rng);
    let mut tracker = Tracker::new(params.termination, &population);

    loop {
        // one pass in place of the teacher phase, one in place of the learner phase
        for _ in 0..2 {
            pollination_pass(&mut problem, &mut population, &mut tracker, params, &mut rng)?;
        }
        tracker.end_iteration();
        if tracker.finished(&problem) {
            break;
        }
    }
    Ok(tracker.finish(&problem, seed))
}

/// Mutation draws come from their own stream, so a zero mutation rate
/// leaves the TLBO trajectory untouched.
pub fn gtlbo_run(instance: &DsmInstance, params: &AlgoParams, seed: u64) -> Result<RunResult<Schedule>> {
    let mut mutation_rng = RngStream::new(seed, 1);
    tlbo_with(instance, params, seed, |problem, population, tracker| {
        for i in 0..population.len() {
            let mut genes = population[i].genes.clone();
            if uniform_mutation(&mut genes, params.mutation_rate, problem, &mut mutation_rng) {
                let cand = problem.evaluate(genes);
                tracker.offer(&cand);
                deb_accept(population, i, cand);
            }
        }
    })
}
