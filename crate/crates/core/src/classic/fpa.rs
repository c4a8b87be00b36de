use rand::Rng;

use super::{init_population, setup, AlgoParams, Individual, Tracker};
use crate::dsm::{DsmInstance, Schedule};
use crate::error::Result;
use crate::heuristic::{levy_step, RngStream, RunResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Lévy flight toward the best flower.
    Global,
    /// Difference of two random flowers scaled by a uniform factor.
    Local,
}

/// One pollination move from `x`; `switch_p` is the probability of a local move.
///
/// Global: `x + L * (best - x)` with a Lévy step `L` per gene.
/// Local: `x + u * (x_j - x_k)` for two random members and `u ~ U(0,1)`.
/// The result is not clamped.
pub fn pollinate(
    x: &[f64],
    best: &[f64],
    population: &[Individual],
    switch_p: f64,
    lambda: f64,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, Move)> {
    if rng.random::<f64>() < switch_p {
        let j = &population[rng.random_range(0..population.len())].genes;
        let k = &population[rng.random_range(0..population.len())].genes;
        let u: f64 = rng.random();
        let out = x
            .iter()
            .zip(j.iter().zip(k))
            .map(|(xi, (a, b))| xi + u * (a - b))
            .collect();
        Ok((out, Move::Local))
    } else {
        let step = levy_step(rng, lambda, x.len())?;
        let out = x
            .iter()
            .zip(best)
            .zip(step)
            .map(|((xi, bi), l)| xi + l * (bi - xi))
            .collect();
        Ok((out, Move::Global))
    }
}

/// Flower pollination with greedy per-flower acceptance.
pub fn fpa_run(instance: &DsmInstance, params: &AlgoParams, seed: u64) -> Result<RunResult<Schedule>> {
    let mut problem = setup(instance, params)?;
    let mut rng = RngStream::new(seed, 0);
    let mut population = init_population(&mut problem, params.population, &mut rng);
    let mut tracker = Tracker::new(params.termination, &population);

    loop {
        for i in 0..population.len() {
            let (genes, _) = pollinate(
                &population[i].genes,
                &tracker.best.genes,
                &population,
                params.switch_p,
                params.levy_lambda,
                &mut rng,
            )?;
            let cand = problem.evaluate(genes);
            tracker.offer(&cand);
            if cand.value <= population[i].value {
                population[i] = cand;
            }
        }
        tracker.end_iteration();
        if tracker.finished(&problem) {
            break;
        }
    }
    Ok(tracker.finish(&problem, seed))
}
