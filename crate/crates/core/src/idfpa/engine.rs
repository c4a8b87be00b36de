use std::time::Instant;

use super::{
    annealing_temperature, best_tour_update, construct_tour, decay, rejection_accept,
    rejection_update, AcceptedTours, BtuScope, CostMatrixState, IdfpaParams,
};
use crate::error::{Error, Result};
use crate::heuristic::{Progress, RngStream, RunResult, Termination};
use crate::tsp::{Tour, TspInstance};

/// One iDFPA (or DFPA) run, advanced an iteration at a time.
///
/// Agent `k` draws from stream `(seed, k + 1)`; rejection draws come from
/// stream `(seed, 0)`. Tours of one iteration are built against a frozen
/// matrix and all updates happen in [`TspSearch::absorb`], so the agents can
/// be built in any order or on any thread.
#[derive(Debug, Clone)]
pub struct TspSearch<'a> {
    instance: &'a TspInstance,
    params: IdfpaParams,
    memory: bool,
    state: CostMatrixState,
    agents: Vec<RngStream>,
    master: RngStream,
    accepted: AcceptedTours,
    d_prev: Vec<f64>,
    best: Option<Tour>,
    progress: Progress,
    evaluations: u64,
    seed: u64,
    started: Instant,
}

impl<'a> TspSearch<'a> {
    /// iDFPA: matrix memory on.
    pub fn new(instance: &'a TspInstance, params: &IdfpaParams, seed: u64) -> Result<Self> {
        Self::build(instance, params, seed, true)
    }

    /// DFPA: the matrix stays at its initial inverse distances.
    pub fn memoryless(instance: &'a TspInstance, params: &IdfpaParams, seed: u64) -> Result<Self> {
        Self::build(instance, params, seed, false)
    }

    fn build(instance: &'a TspInstance, params: &IdfpaParams, seed: u64, memory: bool) -> Result<Self> {
        params.validate()?;
        if instance.n() < 3 {
            return Err(Error::instance("tour search needs at least 3 nodes"));
        }
        Ok(Self {
            instance,
            params: params.clone(),
            memory,
            state: CostMatrixState::new(instance),
            agents: (0..params.m as u64).map(|k| RngStream::new(seed, k + 1)).collect(),
            master: RngStream::new(seed, 0),
            accepted: AcceptedTours::new(),
            d_prev: vec![f64::NAN; params.m],
            best: None,
            progress: Progress::new(Termination::iterations(params.iterations)),
            evaluations: 0,
            seed,
            started: Instant::now(),
        })
    }

    pub fn instance(&self) -> &'a TspInstance {
        self.instance
    }

    pub fn params(&self) -> &IdfpaParams {
        &self.params
    }

    pub fn matrix(&self) -> &CostMatrixState {
        &self.state
    }

    /// Swaps in another colony's matrix, keeping this run's iteration count.
    pub fn replace_matrix(&mut self, mut state: CostMatrixState) -> Result<()> {
        if state.n() != self.state.n() {
            return Err(Error::Shape(format!(
                "matrix for {} nodes, run has {}",
                state.n(),
                self.state.n()
            )));
        }
        state.iteration = self.state.iteration;
        self.state = state;
        Ok(())
    }

    pub fn best(&self) -> Option<&Tour> {
        self.best.as_ref()
    }

    pub fn best_length(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |t| t.length)
    }

    pub fn iterations(&self) -> usize {
        self.progress.iterations()
    }

    pub fn finished(&self) -> bool {
        self.progress.finished(self.evaluations)
    }

    /// One best tour update with this run's gamma, using an outside tour.
    pub fn reinforce(&mut self, tour: &Tour) {
        best_tour_update(&mut self.state, tour, self.instance, self.params.gamma);
    }

    /// Shared matrix plus the agents' streams, for building tours elsewhere.
    pub fn split(&mut self) -> (&CostMatrixState, &IdfpaParams, &mut [RngStream]) {
        (&self.state, &self.params, &mut self.agents)
    }

    /// Builds every agent's tour in agent order.
    pub fn construct(&mut self) -> Result<Vec<Tour>> {
        let instance = self.instance;
        let (state, params, agents) = self.split();
        agents
            .iter_mut()
            .map(|rng| construct_tour(state, instance, params, rng))
            .collect()
    }

    /// Ends an iteration with the agents' tours, in agent order.
    pub fn absorb(&mut self, tours: Vec<Tour>) -> Result<()> {
        if tours.len() != self.params.m {
            return Err(Error::param(format!(
                "expected {} tours, got {}",
                self.params.m,
                tours.len()
            )));
        }
        let t = self.progress.iterations() + 1;
        self.evaluations += tours.len() as u64;
        let before = self.best_length();

        let mut iter_best = 0;
        for (k, tour) in tours.iter().enumerate() {
            if tour.length < tours[iter_best].length {
                iter_best = k;
            }
        }
        if tours[iter_best].length < before {
            self.best = Some(tours[iter_best].clone());
        }

        if self.memory {
            if self.params.alpha > 0.0 {
                decay(&mut self.state, self.params.alpha);
            }
            let s_star = match self.params.btu_scope {
                BtuScope::Global => self.best.as_ref().expect("best set above"),
                BtuScope::Iteration => &tours[iter_best],
            };
            best_tour_update(&mut self.state, s_star, self.instance, self.params.gamma);
            self.rejection_flow(t, before, &tours);
            rejection_update(&mut self.state, &self.accepted, self.params.beta);
        }
        self.state.iteration = t;
        self.progress.record(self.best_length());
        Ok(())
    }

    fn rejection_flow(&mut self, t: usize, before: f64, tours: &[Tour]) {
        if t == 1 {
            let first = tours.iter().map(|s| s.length).fold(f64::INFINITY, f64::min);
            self.d_prev.fill(first);
        }
        let temperature =
            annealing_temperature(t, self.params.iterations, self.params.omega, self.params.q);
        for (k, tour) in tours.iter().enumerate() {
            let accept = tour.length < before
                || rejection_accept(tour.length, self.d_prev[k], temperature, &mut self.master);
            if accept {
                self.d_prev[k] = tour.length;
                self.accepted.push(tour.clone());
            }
        }
    }

    pub fn step(&mut self) -> Result<()> {
        let tours = self.construct()?;
        self.absorb(tours)
    }

    pub fn run(mut self) -> Result<RunResult<Tour>> {
        while !self.finished() {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> RunResult<Tour> {
        RunResult {
            best_value: self.best_length(),
            best_solution: self.best.expect("at least one iteration"),
            trajectory: self.progress.into_trajectory(),
            evaluations: self.evaluations,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            seed: self.seed,
        }
    }
}

/// Iterative DFPA: tour construction plus evaporation, best tour update and
/// rejection update between iterations.
pub fn idfpa_run(instance: &TspInstance, params: &IdfpaParams, seed: u64) -> Result<RunResult<Tour>> {
    TspSearch::new(instance, params, seed)?.run()
}

/// DFPA: the same construction on a fixed inverse-distance matrix.
pub fn dfpa_run(instance: &TspInstance, params: &IdfpaParams, seed: u64) -> Result<RunResult<Tour>> {
    TspSearch::memoryless(instance, params, seed)?.run()
}
