//! Discrete flower pollination for tours, with and without cost-matrix memory.
//!
//! Agents build tours node by node from the current node's row of the cost
//! matrix. A local move samples among nodes inside a radius of the current
//! node; a global move reshapes the probability ordering through the
//! discrete Lévy law. The iterative variant adds evaporation, a best tour
//! update and an annealed rejection update to the matrix between iterations.

mod engine;
mod schedule;

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dsm::Weights;
use crate::error::{Error, Result};
use crate::heuristic::{discrete_levy_probs, discrete_levy_select, LevyParams, RngStream};
use crate::tsp::{build_cost_matrix, CostMatrix, Tour, TspInstance, DEFAULT_EPSILON};

pub use engine::{dfpa_run, idfpa_run, TspSearch};
pub use schedule::idfpa_schedule_run;

/// Entries never evaporate below this, so every row keeps positive mass.
pub const C_MIN: f64 = 1e-12;

/// Stored tours kept for the rejection update.
pub const ACCEPTED_CAPACITY: usize = 64;

/// Which minimum tour the best tour update reinforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BtuScope {
    /// Best tour found so far in the run.
    #[default]
    Global,
    /// Shortest tour of the current iteration.
    Iteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdfpaParams {
    /// Agents per iteration.
    pub m: usize,
    /// Probability of a local move at each construction step.
    pub rho: f64,
    /// Local search radius in distance units (slots for schedules); `None` is
    /// unbounded. The default suits coordinates on a 100 x 100 square.
    pub r_dist: Option<f64>,
    /// Evaporation rate. Zero disables evaporation.
    pub alpha: f64,
    /// Best tour update magnitude.
    pub gamma: f64,
    /// Rejection update magnitude.
    pub beta: f64,
    /// Annealing region.
    pub omega: f64,
    /// Annealing shape.
    pub q: f64,
    /// Iteration budget.
    #[serde(alias = "N")]
    pub iterations: usize,
    pub levy: LevyParams,
    pub btu_scope: BtuScope,
    /// Objective weights, schedule runs only.
    pub weights: Weights,
    /// Penalty per over-capacity slot, schedule runs only.
    pub penalty: f64,
}

impl Default for IdfpaParams {
    fn default() -> Self {
        Self {
            m: 10,
            rho: 0.8,
            r_dist: Some(20.0),
            alpha: 0.05,
            gamma: 0.1,
            beta: 0.01,
            omega: 1.0,
            q: 1.0,
            iterations: 500,
            levy: LevyParams::default(),
            btu_scope: BtuScope::Global,
            weights: Weights::default(),
            penalty: 10.0,
        }
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be >= 0, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("{name} must be > 0, got {v}")))
    }
}

impl IdfpaParams {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::param("m must be >= 1"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::param(format!("rho must be in (0, 1), got {}", self.rho)));
        }
        if let Some(r) = self.r_dist {
            nonneg("r_dist", r)?;
        }
        if !(self.alpha >= 0.0 && self.alpha < 1.0) {
            return Err(Error::param(format!(
                "alpha must be in [0, 1), got {}",
                self.alpha
            )));
        }
        nonneg("gamma", self.gamma)?;
        nonneg("beta", self.beta)?;
        positive("omega", self.omega)?;
        positive("q", self.q)?;
        if self.iterations < 1 {
            return Err(Error::param("iterations must be >= 1"));
        }
        self.levy.validate()?;
        self.weights.validate()?;
        nonneg("penalty", self.penalty)
    }

    /// Same parameters with every memory term switched off.
    pub fn memoryless(&self) -> Self {
        Self {
            alpha: 0.0,
            gamma: 0.0,
            beta: 0.0,
            ..self.clone()
        }
    }
}

/// The cost matrix `C^t` and the iteration it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrixState {
    pub entries: CostMatrix,
    pub iteration: usize,
}

impl CostMatrixState {
    pub fn new(instance: &TspInstance) -> Self {
        Self::from_matrix(build_cost_matrix(instance, DEFAULT_EPSILON))
    }

    pub fn from_matrix(entries: CostMatrix) -> Self {
        Self {
            entries,
            iteration: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(i, j)
    }

    fn add_symmetric(&mut self, i: usize, j: usize, v: f64) {
        let e = &mut self.entries;
        e.set(i, j, e.get(i, j) + v);
        e.set(j, i, e.get(j, i) + v);
    }
}

/// Ring buffer of accepted tours feeding the rejection update.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AcceptedTours {
    tours: VecDeque<Tour>,
}

impl AcceptedTours {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a tour, dropping the oldest once the buffer is full.
    pub fn push(&mut self, tour: Tour) {
        if self.tours.len() == ACCEPTED_CAPACITY {
            self.tours.pop_front();
        }
        self.tours.push_back(tour);
    }

    pub fn len(&self) -> usize {
        self.tours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tours.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tour> {
        self.tours.iter()
    }
}

/// Multiplies every off-diagonal entry by `1 - alpha`, floored at [`C_MIN`].
pub fn evaporate(state: &mut CostMatrixState, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha must be in (0, 1), got {alpha}")));
    }
    decay(state, alpha);
    Ok(())
}

fn decay(state: &mut CostMatrixState, alpha: f64) {
    let n = state.n();
    let keep = 1.0 - alpha;
    for (k, c) in state.entries.entries_mut().iter_mut().enumerate() {
        if k / n != k % n {
            *c = (*c * keep).max(C_MIN);
        }
    }
}

/// Adds `gamma * d_ij / d(s*)` to both orientations of every arc of `s_star`.
pub fn best_tour_update(state: &mut CostMatrixState, s_star: &Tour, instance: &TspInstance, gamma: f64) {
    if gamma == 0.0 {
        return;
    }
    for (i, j) in s_star.arcs() {
        let inc = gamma * instance.dist(i, j) / s_star.length;
        state.add_symmetric(i, j, inc);
    }
}

/// Adds `beta / d'_k` to both orientations of every arc of every stored tour.
pub fn rejection_update(state: &mut CostMatrixState, accepted: &AcceptedTours, beta: f64) {
    if beta == 0.0 {
        return;
    }
    for tour in accepted.iter() {
        let inc = beta / tour.length;
        for (i, j) in tour.arcs() {
            state.add_symmetric(i, j, inc);
        }
    }
}

/// `exp(-omega * n_curr / (q * n))`.
pub fn annealing_temperature(n_curr: usize, n: usize, omega: f64, q: f64) -> f64 {
    (-omega * n_curr as f64 / (q * n as f64)).exp()
}

/// Probability of accepting a tour of length `d_new` against `d_prev`.
pub fn acceptance_probability(d_new: f64, d_prev: f64, temperature: f64) -> f64 {
    let delta = d_new - d_prev;
    if delta <= 0.0 {
        1.0
    } else {
        (-delta / (temperature * d_prev)).exp()
    }
}

/// Non-worsening tours pass without a draw; others pass when the acceptance
/// probability beats a fresh uniform.
pub fn rejection_accept(d_new: f64, d_prev: f64, temperature: f64, rng: &mut RngStream) -> bool {
    if d_new - d_prev <= 0.0 {
        return true;
    }
    acceptance_probability(d_new, d_prev, temperature) > rng.random::<f64>()
}

/// Positions of `probs` by descending probability; ties keep input order.
fn descending(probs: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    order
}

/// Picks a position of `probs` through the discrete Lévy law.
pub(crate) fn global_position(probs: &[f64], levy: &LevyParams, rng: &mut RngStream) -> Result<usize> {
    if probs.len() == 1 {
        return Ok(0);
    }
    let order = descending(probs);
    let ordered: Vec<f64> = order.iter().map(|&k| probs[k]).collect();
    let masses = discrete_levy_probs(&ordered, levy)?;
    Ok(order[discrete_levy_select(&masses, rng)?])
}

/// Categorical draw restricted to `near`; falls back to the global move when
/// `near` is empty.
pub(crate) fn local_position(
    probs: &[f64],
    near: &[usize],
    levy: &LevyParams,
    rng: &mut RngStream,
) -> Result<usize> {
    match near {
        [] => global_position(probs, levy, rng),
        [only] => Ok(*only),
        _ => {
            let mass: f64 = near.iter().map(|&k| probs[k]).sum();
            let r = rng.open_uniform() * mass;
            let mut cum = 0.0;
            for &k in near {
                cum += probs[k];
                if cum >= r {
                    return Ok(k);
                }
            }
            Ok(*near.last().expect("non-empty"))
        }
    }
}

/// Global move: orders `remaining` by descending probability and draws through
/// the discrete Lévy law.
pub fn global_select(
    remaining: &[usize],
    probs: &[f64],
    levy: &LevyParams,
    rng: &mut RngStream,
) -> Result<usize> {
    check_aligned(remaining, probs)?;
    Ok(remaining[global_position(probs, levy, rng)?])
}

/// Local move: samples among remaining nodes within `r_dist` of `v_prev`,
/// renormalizing their probabilities.
pub fn local_select(
    v_prev: usize,
    remaining: &[usize],
    instance: &TspInstance,
    r_dist: Option<f64>,
    probs: &[f64],
    levy: &LevyParams,
    rng: &mut RngStream,
) -> Result<usize> {
    check_aligned(remaining, probs)?;
    let near = radial(v_prev, remaining, instance, r_dist);
    Ok(remaining[local_position(probs, &near, levy, rng)?])
}

fn check_aligned(remaining: &[usize], probs: &[f64]) -> Result<()> {
    if remaining.is_empty() || remaining.len() != probs.len() {
        return Err(Error::param(format!(
            "{} candidates with {} probabilities",
            remaining.len(),
            probs.len()
        )));
    }
    Ok(())
}

fn radial(v_prev: usize, remaining: &[usize], instance: &TspInstance, r_dist: Option<f64>) -> Vec<usize> {
    match r_dist {
        None => (0..remaining.len()).collect(),
        Some(r) => (0..remaining.len())
            .filter(|&k| instance.dist(v_prev, remaining[k]) <= r)
            .collect(),
    }
}

/// Builds one tour on the current matrix.
pub fn construct_tour(
    state: &CostMatrixState,
    instance: &TspInstance,
    params: &IdfpaParams,
    rng: &mut RngStream,
) -> Result<Tour> {
    construct_tour_observed(state, instance, params, rng, &mut |_| {})
}

/// [`construct_tour`] that hands every step's probability vector to `observe`.
pub fn construct_tour_observed(
    state: &CostMatrixState,
    instance: &TspInstance,
    params: &IdfpaParams,
    rng: &mut RngStream,
    observe: &mut dyn FnMut(&[f64]),
) -> Result<Tour> {
    Ok(Tour::unchecked(construct_order(state, instance, params, rng, observe)?, instance))
}

/// Node order of one constructed tour, length not yet evaluated.
pub(crate) fn construct_order(
    state: &CostMatrixState,
    instance: &TspInstance,
    params: &IdfpaParams,
    rng: &mut RngStream,
    observe: &mut dyn FnMut(&[f64]),
) -> Result<Vec<usize>> {
    let n = instance.n();
    if state.n() != n {
        return Err(Error::Shape(format!(
            "cost matrix is {0}x{0}, instance has {n} nodes",
            state.n()
        )));
    }
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    let mut prev = remaining.remove(rng.random_range(0..n));
    order.push(prev);
    let mut probs = Vec::with_capacity(n);
    while !remaining.is_empty() {
        let row = state.entries.row(prev);
        probs.clear();
        probs.extend(remaining.iter().map(|&v| row[v]));
        let a: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= a);
        observe(&probs);

        let pos = if rng.random::<f64>() > params.rho {
            global_position(&probs, &params.levy, rng)?
        } else {
            let near = radial(prev, &remaining, instance, params.r_dist);
            local_position(&probs, &near, &params.levy, rng)?
        };
        prev = remaining.remove(pos);
        order.push(prev);
    }
    Ok(order)
}
