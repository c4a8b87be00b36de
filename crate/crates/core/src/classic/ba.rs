use rand::Rng;

use super::{init_population, setup, AlgoParams, Individual, Tracker};
use crate::dsm::{DsmInstance, Schedule};
use crate::error::Result;
use crate::heuristic::{RngStream, RunResult};

/// Velocity, loudness and pulse rate of one bat.
#[derive(Debug, Clone, PartialEq)]
pub struct Bat {
    pub velocity: Vec<f64>,
    pub loudness: f64,
    pub pulse: f64,
}

impl Bat {
    pub fn new(dim: usize, params: &AlgoParams) -> Self {
        Self {
            velocity: vec![0.0; dim],
            loudness: params.loudness_a0,
            pulse: params.pulse_r0,
        }
    }

    /// Quieter and more pulsing after an accepted move at iteration `t`.
    pub fn on_accept(&mut self, params: &AlgoParams, t: usize) {
        self.loudness *= params.loudness_decay;
        self.pulse = params.pulse_r0 * (1.0 - (-params.pulse_gamma * t as f64).exp());
    }
}

/// Context handed to the local step that replaces a bat's velocity move.
pub(crate) struct LocalStep<'a> {
    pub position: &'a [f64],
    pub best: &'a [f64],
    pub population: &'a [Individual],
    pub mean_loudness: f64,
}

pub(crate) fn bat_loop<F>(
    instance: &DsmInstance,
    params: &AlgoParams,
    seed: u64,
    mut local_step: F,
) -> Result<RunResult<Schedule>>
where
    F: FnMut(LocalStep<'_>, &mut RngStream) -> Result<Vec<f64>>,
{
    let mut problem = setup(instance, params)?;
    let mut rng = RngStream::new(seed, 0);
    let mut population = init_population(&mut problem, params.population, &mut rng);
    let dim = problem.decoder.dim();
    let mut bats: Vec<Bat> = (0..population.len()).map(|_| Bat::new(dim, params)).collect();
    let mut tracker = Tracker::new(params.termination, &population);
    let mut t = 0usize;

    loop {
        t += 1;
        let mean_loudness = bats.iter().map(|b| b.loudness).sum::<f64>() / bats.len() as f64;
        for i in 0..population.len() {
            let freq = params.f_min + (params.f_max - params.f_min) * rng.random::<f64>();
            let bat = &mut bats[i];
            let mut cand: Vec<f64> = population[i]
                .genes
                .iter()
                .zip(&tracker.best.genes)
                .zip(bat.velocity.iter_mut())
                .map(|((x, b), v)| {
                    *v += (x - b) * freq;
                    x + *v
                })
                .collect();
            if rng.random::<f64>() > bat.pulse {
                cand = local_step(
                    LocalStep {
                        position: &population[i].genes,
                        best: &tracker.best.genes,
                        population: &population,
                        mean_loudness,
                    },
                    &mut rng,
                )?;
            }
            let cand = problem.evaluate(cand);
            tracker.offer(&cand);
            let bat = &mut bats[i];
            if cand.value <= population[i].value && rng.random::<f64>() < bat.loudness {
                population[i] = cand;
                bat.on_accept(params, t);
            }
        }
        tracker.end_iteration();
        if tracker.finished(&problem) {
            break;
        }
    }
    Ok(tracker.finish(&problem, seed))
}

/// Bat algorithm: frequency-tuned velocity moves plus a loudness-scaled
/// random walk around the best bat, gated by pulse rate.
pub fn ba_run(instance: &DsmInstance, params: &AlgoParams, seed: u64) -> Result<RunResult<Schedule>> {
    bat_loop(instance, params, seed, |step, rng| {
        Ok(step
            .best
            .iter()
            .map(|b| b + rng.random_range(-1.0..=1.0) * step.mean_loudness)
            .collect())
    })
}
