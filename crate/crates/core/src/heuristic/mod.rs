//! Machinery shared by every solver: seeded streams, Lévy samplers, Deb's
//! comparator, termination and run bookkeeping.

pub mod deb;
pub mod levy;
pub mod rng;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use deb::{deb_compare, deb_order, Candidate, Winner};
pub use levy::{
    discrete_levy_probs, discrete_levy_select, levy_cdf, levy_step, select_with_draw, LevyParams,
};
pub use rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Termination {
    pub max_iterations: usize,
    /// Stop after this many iterations without improvement of the best value.
    #[serde(default)]
    pub stagnation_window: Option<usize>,
    /// Objective-evaluation budget, checked at iteration boundaries.
    #[serde(default)]
    pub max_evaluations: Option<u64>,
}

impl Termination {
    pub fn iterations(n: usize) -> Self {
        Self {
            max_iterations: n,
            stagnation_window: None,
            max_evaluations: None,
        }
    }

    pub fn with_evaluations(mut self, budget: u64) -> Self {
        self.max_evaluations = Some(budget);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::param("max_iterations must be >= 1"));
        }
        if self.stagnation_window == Some(0) {
            return Err(Error::param("stagnation_window must be >= 1"));
        }
        if self.max_evaluations == Some(0) {
            return Err(Error::param("max_evaluations must be >= 1"));
        }
        Ok(())
    }
}

impl Default for Termination {
    fn default() -> Self {
        Self::iterations(500)
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult<S> {
    pub best_solution: S,
    pub best_value: f64,
    /// Best-so-far value after each iteration.
    pub trajectory: Vec<f64>,
    pub evaluations: u64,
    pub wall_seconds: f64,
    pub seed: u64,
}

impl<S: PartialEq> RunResult<S> {
    /// Equality on everything except wall-clock time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.best_solution == other.best_solution
            && self.best_value.to_bits() == other.best_value.to_bits()
            && self.trajectory.len() == other.trajectory.len()
            && self
                .trajectory
                .iter()
                .zip(&other.trajectory)
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && self.evaluations == other.evaluations
            && self.seed == other.seed
    }
}

/// Tracks the best-so-far trajectory and decides when a run stops.
#[derive(Debug, Clone)]
pub struct Progress {
    termination: Termination,
    trajectory: Vec<f64>,
    since_improvement: usize,
}

impl Progress {
    pub fn new(termination: Termination) -> Self {
        Self {
            termination,
            trajectory: Vec::with_capacity(termination.max_iterations),
            since_improvement: 0,
        }
    }

    /// Records the best-so-far value at the end of an iteration.
    pub fn record(&mut self, best_so_far: f64) {
        match self.trajectory.last() {
            Some(&prev) if best_so_far < prev => self.since_improvement = 0,
            Some(_) => self.since_improvement += 1,
            None => self.since_improvement = 0,
        }
        let value = match self.trajectory.last() {
            Some(&prev) => prev.min(best_so_far),
            None => best_so_far,
        };
        self.trajectory.push(value);
    }

    pub fn iterations(&self) -> usize {
        self.trajectory.len()
    }

    pub fn finished(&self, evaluations: u64) -> bool {
        if self.trajectory.len() >= self.termination.max_iterations {
            return true;
        }
        if let Some(budget) = self.termination.max_evaluations {
            if evaluations >= budget {
                return true;
            }
        }
        if let Some(window) = self.termination.stagnation_window {
            if self.since_improvement >= window {
                return true;
            }
        }
        false
    }

    pub fn into_trajectory(self) -> Vec<f64> {
        self.trajectory
    }
}
