//! iDFPA over appliance schedules.
//!
//! A node is an (appliance, start slot) pair. An agent walks the schedulable
//! appliances in instance order and picks one start per appliance from that
//! appliance's desirability row, with the same local and global moves as tour
//! construction. The surrogate tour length is the schedule's objective value.

use std::collections::VecDeque;
use std::time::Instant;

use rand::Rng;

use super::{
    annealing_temperature, global_position, local_position, rejection_accept, BtuScope,
    IdfpaParams, ACCEPTED_CAPACITY, C_MIN,
};
use crate::classic::{Individual, ScheduleProblem};
use crate::dsm::{DsmInstance, Objective, Schedule};
use crate::error::{Error, Result};
use crate::heuristic::{Progress, RngStream, RunResult, Termination};

/// Lower bound on the surrogate length so reciprocals stay finite.
const MIN_LENGTH: f64 = 1e-12;

struct Assignment {
    starts: Vec<usize>,
    ind: Individual,
}

impl Assignment {
    fn length(&self) -> f64 {
        self.ind.value.max(MIN_LENGTH)
    }
}

/// Per-appliance desirability rows, indexed by start offset from the window start.
struct Desirability {
    rows: Vec<Vec<f64>>,
    lower: Vec<usize>,
}

impl Desirability {
    fn new(problem: &ScheduleProblem<'_>) -> Self {
        let inst = problem.instance;
        let d = &problem.decoder;
        let mut rows = Vec::with_capacity(d.dim());
        let mut lower = Vec::with_capacity(d.dim());
        for k in 0..d.dim() {
            let a = &inst.appliances[d.appliances()[k]];
            let (lo, hi) = (d.lower()[k] as usize, d.upper()[k] as usize);
            rows.push(
                (lo..=hi)
                    .map(|s| {
                        let cost: f64 = d
                            .layout(k, s)
                            .iter()
                            .map(|&t| inst.tariff.prices[t] * a.power * inst.tariff.slot_hours)
                            .sum();
                        1.0 / cost.max(MIN_LENGTH)
                    })
                    .collect(),
            );
            lower.push(lo);
        }
        Self { rows, lower }
    }

    fn add(&mut self, starts: &[usize], v: f64) {
        for (k, &s) in starts.iter().enumerate() {
            self.rows[k][s - self.lower[k]] += v;
        }
    }

    fn evaporate(&mut self, alpha: f64) {
        let keep = 1.0 - alpha;
        for c in self.rows.iter_mut().flatten() {
            *c = (*c * keep).max(C_MIN);
        }
    }
}

fn build(
    rows: &Desirability,
    params: &IdfpaParams,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    let mut starts = Vec::with_capacity(rows.rows.len());
    let mut prev: Option<usize> = None;
    let mut probs = Vec::new();
    for (k, row) in rows.rows.iter().enumerate() {
        let lo = rows.lower[k];
        let a: f64 = row.iter().sum();
        probs.clear();
        probs.extend(row.iter().map(|c| c / a));
        let pos = if rng.random::<f64>() > params.rho {
            global_position(&probs, &params.levy, rng)?
        } else {
            let near: Vec<usize> = match (prev, params.r_dist) {
                (Some(p), Some(r)) => (0..row.len())
                    .filter(|&j| ((lo + j) as f64 - p as f64).abs() <= r)
                    .collect(),
                _ => (0..row.len()).collect(),
            };
            local_position(&probs, &near, &params.levy, rng)?
        };
        let s = lo + pos;
        starts.push(s);
        prev = Some(s);
    }
    Ok(starts)
}

/// iDFPA on the scheduling problem; the best schedule by weighted objective.
pub fn idfpa_schedule_run(
    instance: &DsmInstance,
    params: &IdfpaParams,
    seed: u64,
) -> Result<RunResult<Schedule>> {
    params.validate()?;
    let objective = Objective::new(instance, params.weights, params.penalty)?;
    let mut problem = ScheduleProblem::new(instance, objective);
    if problem.decoder.dim() == 0 {
        return Err(Error::instance("no schedulable appliance"));
    }
    let started = Instant::now();
    let mut rows = Desirability::new(&problem);
    let mut agents: Vec<RngStream> = (0..params.m as u64).map(|k| RngStream::new(seed, k + 1)).collect();
    let mut master = RngStream::new(seed, 0);
    let mut progress = Progress::new(Termination::iterations(params.iterations));
    let mut accepted: VecDeque<(Vec<usize>, f64)> = VecDeque::new();
    let mut d_prev = vec![f64::NAN; params.m];
    let mut best: Option<Assignment> = None;

    while !progress.finished(problem.evaluations()) {
        let t = progress.iterations() + 1;
        let mut batch = Vec::with_capacity(params.m);
        for rng in agents.iter_mut() {
            let starts = build(&rows, params, rng)?;
            let ind = problem.evaluate(starts.iter().map(|&s| s as f64).collect());
            batch.push(Assignment { starts, ind });
        }
        let before = best.as_ref().map_or(f64::INFINITY, |b| b.ind.value);
        let mut iter_best = 0;
        for k in 1..batch.len() {
            if batch[k].ind.value < batch[iter_best].ind.value {
                iter_best = k;
            }
        }
        if batch[iter_best].ind.value < before {
            best = Some(Assignment {
                starts: batch[iter_best].starts.clone(),
                ind: batch[iter_best].ind.clone(),
            });
        }

        if params.alpha > 0.0 {
            rows.evaporate(params.alpha);
        }
        if params.gamma > 0.0 {
            let s_star = match params.btu_scope {
                BtuScope::Global => best.as_ref().expect("best set above"),
                BtuScope::Iteration => &batch[iter_best],
            };
            rows.add(&s_star.starts, params.gamma / s_star.length());
        }

        if t == 1 {
            let first = batch.iter().map(Assignment::length).fold(f64::INFINITY, f64::min);
            d_prev.fill(first);
        }
        let temperature = annealing_temperature(t, params.iterations, params.omega, params.q);
        for (k, a) in batch.iter().enumerate() {
            let d = a.length();
            if a.ind.value < before || rejection_accept(d, d_prev[k], temperature, &mut master) {
                d_prev[k] = d;
                if accepted.len() == ACCEPTED_CAPACITY {
                    accepted.pop_front();
                }
                accepted.push_back((a.starts.clone(), d));
            }
        }
        if params.beta > 0.0 {
            for (starts, d) in &accepted {
                rows.add(starts, params.beta / d);
            }
        }
        progress.record(best.as_ref().expect("best set above").ind.value);
    }

    let best = best.expect("at least one iteration");
    Ok(RunResult {
        best_solution: problem.decoder.decode(&best.ind.genes),
        best_value: best.ind.value,
        trajectory: progress.into_trajectory(),
        evaluations: problem.evaluations(),
        wall_seconds: started.elapsed().as_secs_f64(),
        seed,
    })
}
