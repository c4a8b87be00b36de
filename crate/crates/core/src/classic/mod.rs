//! GA, bat, flower pollination and TLBO solvers over appliance schedules.
//!
//! All four share one real-valued genotype: a start slot per non-fixed
//! appliance. Decoding rounds each gene and lays out a category-feasible
//! activation row, so no solver ever emits a schedule that breaks an
//! appliance's category rules. Capacity is left to the objective's penalty.

pub mod ba;
pub mod fpa;
pub mod ga;
pub mod tlbo;

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsm::{
    baseline_schedule, metrics, Category, DsmInstance, Objective, Schedule, Weights,
};
use crate::error::{Error, Result};
use crate::heuristic::{levy::LevyParams, Candidate, Progress, RngStream, RunResult, Termination};

pub use ba::{ba_run, Bat};
pub use fpa::{fpa_run, pollinate, Move};
pub use ga::ga_run;
pub use tlbo::{learner_update, teacher_update, tlbo_run};

/// Parameters for every schedule solver. Hybrids read the union of their
/// parents' fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgoParams {
    pub population: usize,
    pub termination: Termination,
    pub weights: Weights,
    /// Objective penalty per over-capacity slot.
    pub penalty: f64,
    // GA
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_k: usize,
    pub elitism_count: usize,
    // BA
    pub f_min: f64,
    pub f_max: f64,
    pub loudness_a0: f64,
    pub loudness_decay: f64,
    pub pulse_r0: f64,
    pub pulse_gamma: f64,
    // FPA
    /// Probability of a local pollination move.
    pub switch_p: f64,
    pub levy_lambda: f64,
}

impl Default for AlgoParams {
    fn default() -> Self {
        Self {
            population: 30,
            termination: Termination::iterations(500),
            weights: Weights::default(),
            penalty: 10.0,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            tournament_k: 3,
            elitism_count: 2,
            f_min: 0.0,
            f_max: 2.0,
            loudness_a0: 1.0,
            loudness_decay: 0.9,
            pulse_r0: 0.5,
            pulse_gamma: 0.9,
            switch_p: 0.8,
            levy_lambda: LevyParams::default().lambda,
        }
    }
}

fn unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be in [0, 1], got {v}")))
    }
}

impl AlgoParams {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::param(format!(
                "population must be >= 2, got {}",
                self.population
            )));
        }
        self.termination.validate()?;
        self.weights.validate()?;
        if !(self.penalty >= 0.0 && self.penalty.is_finite()) {
            return Err(Error::param("penalty must be >= 0"));
        }
        unit("crossover_rate", self.crossover_rate)?;
        unit("mutation_rate", self.mutation_rate)?;
        unit("pulse_r0", self.pulse_r0)?;
        unit("switch_p", self.switch_p)?;
        if self.tournament_k < 1 {
            return Err(Error::param("tournament_k must be >= 1"));
        }
        if self.elitism_count >= self.population {
            return Err(Error::param("elitism_count must be < population"));
        }
        if !(self.f_min <= self.f_max) {
            return Err(Error::param("f_min must be <= f_max"));
        }
        if !(self.loudness_a0 > 0.0) {
            return Err(Error::param("loudness_a0 must be > 0"));
        }
        if !(self.loudness_decay > 0.0 && self.loudness_decay <= 1.0) {
            return Err(Error::param("loudness_decay must be in (0, 1]"));
        }
        if !(self.pulse_gamma >= 0.0) {
            return Err(Error::param("pulse_gamma must be >= 0"));
        }
        LevyParams {
            lambda: self.levy_lambda,
            ..LevyParams::default()
        }
        .validate()
    }

    pub fn objective(&self, instance: &DsmInstance) -> Result<Objective> {
        Objective::new(instance, self.weights, self.penalty)
    }
}

/// Start-slot genes, one per non-fixed appliance in instance order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genotype {
    pub genes: Vec<f64>,
}

/// Precomputed bounds and shiftable layouts for one instance.
#[derive(Debug, Clone)]
pub struct Decoder {
    appliances: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// For each gene, the active slots for every feasible start (offset from the lower bound).
    layouts: Vec<Vec<Vec<usize>>>,
    base: Schedule,
}

impl Decoder {
    pub fn new(instance: &DsmInstance) -> Self {
        let appliances = instance.schedulable();
        let mut lower = Vec::with_capacity(appliances.len());
        let mut upper = Vec::with_capacity(appliances.len());
        let mut layouts = Vec::with_capacity(appliances.len());
        let mut base = baseline_schedule(instance);
        for &i in &appliances {
            let a = &instance.appliances[i];
            lower.push(a.window.0 as f64);
            upper.push(a.last_start() as f64);
            layouts.push(
                (a.window.0..=a.last_start())
                    .map(|start| match a.category {
                        Category::Shiftable => shiftable_layout(instance, i, start),
                        _ => (start..start + a.duration).collect(),
                    })
                    .collect(),
            );
            for t in 0..instance.horizon {
                base.set(i, t, false);
            }
        }
        Self {
            appliances,
            lower,
            upper,
            layouts,
            base,
        }
    }

    pub fn dim(&self) -> usize {
        self.appliances.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Appliance index behind each gene.
    pub fn appliances(&self) -> &[usize] {
        &self.appliances
    }

    pub fn clamp(&self, genes: &mut [f64]) {
        for ((g, lo), hi) in genes.iter_mut().zip(&self.lower).zip(&self.upper) {
            *g = if g.is_nan() { *lo } else { g.clamp(*lo, *hi) };
        }
    }

    /// Integer start slot for gene `k`.
    pub fn start(&self, k: usize, gene: f64) -> usize {
        gene.clamp(self.lower[k], self.upper[k]).round() as usize
    }

    /// Active slots of gene `k` when started at `start`.
    pub fn layout(&self, k: usize, start: usize) -> &[usize] {
        &self.layouts[k][start - self.lower[k] as usize]
    }

    pub fn decode(&self, genes: &[f64]) -> Schedule {
        let mut s = self.base.clone();
        for (k, &g) in genes.iter().enumerate().take(self.dim()) {
            let start = self.start(k, g);
            for &t in self.layout(k, start) {
                s.set(self.appliances[k], t, true);
            }
        }
        s
    }

    pub fn random_genes(&self, rng: &mut RngStream) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| if hi > lo { rng.random_range(lo..=hi) } else { lo })
            .collect()
    }

    pub fn random_gene(&self, k: usize, rng: &mut RngStream) -> f64 {
        let (lo, hi) = (self.lower[k], self.upper[k]);
        if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        }
    }
}

/// The first slot is `start`; the other `duration - 1` slots are the cheapest
/// later slots in the window, ties going to the slot nearest the start.
fn shiftable_layout(instance: &DsmInstance, idx: usize, start: usize) -> Vec<usize> {
    let a = &instance.appliances[idx];
    let prices = &instance.tariff.prices;
    let mut rest: Vec<usize> = (start + 1..=a.window.1).collect();
    rest.sort_by(|&x, &y| prices[x].total_cmp(&prices[y]).then(x.cmp(&y)));
    let mut slots = vec![start];
    slots.extend(rest.into_iter().take(a.duration - 1));
    slots.sort_unstable();
    slots
}

/// Decodes a genotype into a category-feasible schedule.
pub fn decode(genotype: &Genotype, instance: &DsmInstance) -> Schedule {
    Decoder::new(instance).decode(&genotype.genes)
}

/// A population member with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genes: Vec<f64>,
    pub value: f64,
    pub violations: u32,
}

impl Individual {
    pub fn candidate(&self) -> Candidate {
        Candidate::new(self.value, self.violations)
    }
}

/// Instance, objective and decoder with an evaluation counter.
#[derive(Debug, Clone)]
pub struct ScheduleProblem<'a> {
    pub instance: &'a DsmInstance,
    pub objective: Objective,
    pub decoder: Decoder,
    evaluations: u64,
}

impl<'a> ScheduleProblem<'a> {
    pub fn new(instance: &'a DsmInstance, objective: Objective) -> Self {
        Self {
            instance,
            objective,
            decoder: Decoder::new(instance),
            evaluations: 0,
        }
    }

    pub fn evaluate(&mut self, mut genes: Vec<f64>) -> Individual {
        self.decoder.clamp(&mut genes);
        let schedule = self.decoder.decode(&genes);
        let report = metrics(&schedule, self.instance).expect("decoded schedule matches instance");
        self.evaluations += 1;
        Individual {
            value: self.objective.score(&report),
            violations: report.violations(),
            genes,
        }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn random_individual(&mut self, rng: &mut RngStream) -> Individual {
        let genes = self.decoder.random_genes(rng);
        self.evaluate(genes)
    }
}

/// Best-so-far bookkeeping shared by the schedule solvers.
pub(crate) struct Tracker {
    pub best: Individual,
    pub progress: Progress,
    started: Instant,
}

impl Tracker {
    pub fn new(termination: Termination, population: &[Individual]) -> Self {
        let best = population
            .iter()
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("non-empty population")
            .clone();
        Self {
            best,
            progress: Progress::new(termination),
            started: Instant::now(),
        }
    }

    pub fn offer(&mut self, ind: &Individual) {
        if ind.value < self.best.value {
            self.best = ind.clone();
        }
    }

    pub fn end_iteration(&mut self) {
        self.progress.record(self.best.value);
    }

    pub fn finished(&self, problem: &ScheduleProblem<'_>) -> bool {
        self.progress.finished(problem.evaluations())
    }

    pub fn finish(self, problem: &ScheduleProblem<'_>, seed: u64) -> RunResult<Schedule> {
        RunResult {
            best_solution: problem.decoder.decode(&self.best.genes),
            best_value: self.best.value,
            trajectory: self.progress.into_trajectory(),
            evaluations: problem.evaluations(),
            wall_seconds: self.started.elapsed().as_secs_f64(),
            seed,
        }
    }
}

pub(crate) fn setup<'a>(
    instance: &'a DsmInstance,
    params: &AlgoParams,
) -> Result<ScheduleProblem<'a>> {
    params.validate()?;
    Ok(ScheduleProblem::new(instance, params.objective(instance)?))
}

pub(crate) fn init_population(
    problem: &mut ScheduleProblem<'_>,
    size: usize,
    rng: &mut RngStream,
) -> Vec<Individual> {
    (0..size).map(|_| problem.random_individual(rng)).collect()
}

/// Index of the best member under Deb's rules; first wins ties.
pub(crate) fn best_index(population: &[Individual]) -> usize {
    let mut best = 0;
    for i in 1..population.len() {
        if crate::heuristic::deb_order(&population[i].candidate(), &population[best].candidate())
            .is_lt()
        {
            best = i;
        }
    }
    best
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::dsm::check_feasibility;

    #[test]
    fn rounding_decode() {
        let inst = instance(
            vec![1.0; 6],
            vec![appliance("u", Category::Uninterruptible, 2, 0, (0, 5))],
        );
        let s = decode(&Genotype { genes: vec![2.4] }, &inst);
        assert_eq!(s.active_slots(0), vec![2, 3]);
        let s = decode(&Genotype { genes: vec![-7.0] }, &inst);
        assert_eq!(s.active_slots(0), vec![0, 1]);
    }

    #[test]
    fn all_fixed_decodes_to_baseline() {
        let inst = instance(
            vec![1.0; 4],
            vec![appliance("f", Category::Fixed, 2, 1, (1, 2))],
        );
        assert_eq!(
            decode(&Genotype { genes: vec![] }, &inst),
            baseline_schedule(&inst)
        );
    }

    #[test]
    fn shiftable_takes_cheapest_later_slots() {
        let inst = instance(
            vec![5.0, 3.0, 9.0, 1.0, 2.0, 9.0],
            vec![appliance("s", Category::Shiftable, 3, 0, (0, 5))],
        );
        let s = decode(&Genotype { genes: vec![1.0] }, &inst);
        assert_eq!(s.active_slots(0), vec![1, 3, 4]);
        // flat prices fall back to a contiguous run
        let flat = instance(
            vec![1.0; 6],
            vec![appliance("s", Category::Shiftable, 3, 0, (0, 5))],
        );
        assert_eq!(
            decode(&Genotype { genes: vec![2.0] }, &flat).active_slots(0),
            vec![2, 3, 4]
        );
    }

    #[test]
    fn random_genotypes_decode_feasibly() {
        let inst = crate::dsm::generate_dsm_instance(10, 24, crate::dsm::TariffShape::TwoTier, 3)
            .unwrap();
        let dec = Decoder::new(&inst);
        let mut rng = RngStream::new(1, 0);
        for _ in 0..200 {
            let s = dec.decode(&dec.random_genes(&mut rng));
            let v = check_feasibility(&s, &inst).unwrap();
            assert!(v.iter().all(|v| v.is_capacity()), "{v:?}");
        }
    }

    #[test]
    fn params_validation() {
        assert!(AlgoParams::default().validate().is_ok());
        let p = AlgoParams {
            population: 1,
            ..AlgoParams::default()
        };
        assert!(p.validate().is_err());
        let p = AlgoParams {
            f_min: 3.0,
            ..AlgoParams::default()
        };
        assert!(p.validate().is_err());
        let p = AlgoParams {
            mutation_rate: 1.5,
            ..AlgoParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn params_json_defaults() {
        let p: AlgoParams = serde_json::from_str(r#"{"population": 12}"#).unwrap();
        assert_eq!(p.population, 12);
        assert_eq!(p.switch_p, 0.8);
        assert!(serde_json::from_str::<AlgoParams>(r#"{"popsize": 12}"#).is_err());
    }
}
