use serde::{Deserialize, Serialize};

use super::{baseline_schedule, Category, DsmInstance, Schedule};
use crate::error::{Error, Result};

const CAPACITY_TOLERANCE: f64 = 1e-9;

/// Aggregate load in kW for every slot.
pub fn load_profile(schedule: &Schedule, instance: &DsmInstance) -> Result<Vec<f64>> {
    schedule.check_shape(instance)?;
    let mut load = vec![0.0; instance.horizon];
    for (i, a) in instance.appliances.iter().enumerate() {
        for (t, &on) in schedule.row(i).iter().enumerate() {
            if on {
                load[t] += a.power;
            }
        }
    }
    Ok(load)
}

fn cost_of_load(load: &[f64], instance: &DsmInstance) -> f64 {
    load.iter()
        .zip(&instance.tariff.prices)
        .map(|(l, p)| p * l * instance.tariff.slot_hours)
        .sum()
}

fn par_of_load(load: &[f64]) -> f64 {
    let total: f64 = load.iter().sum();
    if total <= 0.0 {
        return 1.0;
    }
    let mean = total / load.len() as f64;
    let peak = load.iter().copied().fold(f64::MIN, f64::max);
    peak / mean
}

fn discomfort_of_starts(starts: &[Option<usize>], instance: &DsmInstance) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (a, start) in instance.appliances.iter().zip(starts) {
        if a.is_fixed() {
            continue;
        }
        count += 1;
        let max_shift = a.max_shift();
        if let (Some(s), true) = (start, max_shift > 0) {
            let shift = s.abs_diff(a.preferred_start) as f64;
            sum += (shift / max_shift as f64).min(1.0);
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Energy cost: `sum_t price[t] * load[t] * slot_hours`.
pub fn evaluate_cost(schedule: &Schedule, instance: &DsmInstance) -> Result<f64> {
    Ok(cost_of_load(&load_profile(schedule, instance)?, instance))
}

/// Peak-to-average ratio of the load; 1 for an all-zero load.
pub fn evaluate_par(schedule: &Schedule, instance: &DsmInstance) -> Result<f64> {
    Ok(par_of_load(&load_profile(schedule, instance)?))
}

/// Mean normalized start shift over non-fixed appliances, in `[0, 1]`.
pub fn evaluate_discomfort(schedule: &Schedule, instance: &DsmInstance) -> Result<f64> {
    schedule.check_shape(instance)?;
    let starts: Vec<Option<usize>> = (0..schedule.appliances())
        .map(|a| schedule.start_of(a))
        .collect();
    Ok(discomfort_of_starts(&starts, instance))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DurationMismatch {
        appliance: usize,
        expected: usize,
        actual: usize,
    },
    FixedDeviation {
        appliance: usize,
    },
    NonContiguous {
        appliance: usize,
    },
    WindowEscape {
        appliance: usize,
    },
    CapacityExceeded {
        slot: usize,
        load: f64,
        capacity: f64,
    },
}

impl Violation {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Violation::CapacityExceeded { .. })
    }
}

fn category_violations(schedule: &Schedule, instance: &DsmInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, a) in instance.appliances.iter().enumerate() {
        let active = schedule.active_slots(i);
        if active.len() != a.duration {
            out.push(Violation::DurationMismatch {
                appliance: i,
                expected: a.duration,
                actual: active.len(),
            });
        }
        if active.iter().any(|&t| t < a.window.0 || t > a.window.1) {
            out.push(Violation::WindowEscape { appliance: i });
        }
        match a.category {
            Category::Fixed => {
                let expected: Vec<usize> = (a.preferred_start..a.preferred_start + a.duration).collect();
                if active != expected {
                    out.push(Violation::FixedDeviation { appliance: i });
                }
            }
            Category::Uninterruptible => {
                if active.windows(2).any(|w| w[1] != w[0] + 1) {
                    out.push(Violation::NonContiguous { appliance: i });
                }
            }
            Category::Shiftable => {}
        }
    }
    out
}

fn capacity_violations(load: &[f64], instance: &DsmInstance) -> Vec<Violation> {
    load.iter()
        .zip(&instance.capacity)
        .enumerate()
        .filter(|(_, (l, c))| **l > **c + CAPACITY_TOLERANCE)
        .map(|(t, (l, c))| Violation::CapacityExceeded {
            slot: t,
            load: *l,
            capacity: *c,
        })
        .collect()
}

/// Lists every category and capacity violation; empty means feasible.
pub fn check_feasibility(schedule: &Schedule, instance: &DsmInstance) -> Result<Vec<Violation>> {
    let load = load_profile(schedule, instance)?;
    let mut v = category_violations(schedule, instance);
    v.extend(capacity_violations(&load, instance));
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub cost: f64,
    pub par: f64,
    pub discomfort: f64,
    pub peak_kw: f64,
    pub capacity_violations: u32,
    pub category_violations: u32,
    pub feasible: bool,
}

impl MetricsReport {
    pub fn violations(&self) -> u32 {
        self.capacity_violations + self.category_violations
    }
}

/// All metrics of a schedule in one pass.
pub fn metrics(schedule: &Schedule, instance: &DsmInstance) -> Result<MetricsReport> {
    let load = load_profile(schedule, instance)?;
    let starts: Vec<Option<usize>> = (0..schedule.appliances())
        .map(|a| schedule.start_of(a))
        .collect();
    let category = category_violations(schedule, instance).len() as u32;
    Ok(report_from_load(&load, &starts, category, instance))
}

/// Metrics from a precomputed load profile and start slots.
pub(crate) fn report_from_load(
    load: &[f64],
    starts: &[Option<usize>],
    category_violations: u32,
    instance: &DsmInstance,
) -> MetricsReport {
    let capacity = load
        .iter()
        .zip(&instance.capacity)
        .filter(|(l, c)| **l > **c + CAPACITY_TOLERANCE)
        .count() as u32;
    MetricsReport {
        cost: cost_of_load(load, instance),
        par: par_of_load(load),
        discomfort: discomfort_of_starts(starts, instance),
        peak_kw: load.iter().copied().fold(0.0, f64::max),
        capacity_violations: capacity,
        category_violations,
        feasible: capacity == 0 && category_violations == 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub cost: f64,
    pub par: f64,
    pub discomfort: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            cost: 1.0,
            par: 0.1,
            discomfort: 0.1,
        }
    }
}

impl Weights {
    pub fn cost_only() -> Self {
        Self {
            cost: 1.0,
            par: 0.0,
            discomfort: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("cost", self.cost), ("par", self.par), ("discomfort", self.discomfort)] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::param(format!("weight {name} must be >= 0, got {w}")));
            }
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        self.cost + self.par + self.discomfort
    }
}

/// Scalar fitness, lower is better:
/// `w_c * cost / baseline_cost + w_p * par + w_d * discomfort + penalty * capacity_violations`.
pub fn weighted_objective(
    report: &MetricsReport,
    weights: &Weights,
    penalty: f64,
    baseline_cost: f64,
) -> Result<f64> {
    weights.validate()?;
    if !(penalty >= 0.0 && penalty.is_finite()) {
        return Err(Error::param(format!("penalty must be >= 0, got {penalty}")));
    }
    let cost_norm = if baseline_cost > 0.0 {
        report.cost / baseline_cost
    } else {
        0.0
    };
    Ok(weights.cost * cost_norm
        + weights.par * report.par
        + weights.discomfort * report.discomfort
        + penalty * report.capacity_violations as f64)
}

/// Weights, penalty and the instance's baseline cost, bundled for repeated scoring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub weights: Weights,
    pub penalty: f64,
    pub baseline_cost: f64,
}

impl Objective {
    pub fn new(instance: &DsmInstance, weights: Weights, penalty: f64) -> Result<Self> {
        weights.validate()?;
        if !(penalty >= 0.0 && penalty.is_finite()) {
            return Err(Error::param(format!("penalty must be >= 0, got {penalty}")));
        }
        let baseline_cost = evaluate_cost(&baseline_schedule(instance), instance)?;
        Ok(Self {
            weights,
            penalty,
            baseline_cost,
        })
    }

    pub fn score(&self, report: &MetricsReport) -> f64 {
        weighted_objective(report, &self.weights, self.penalty, self.baseline_cost)
            .expect("objective validated at construction")
    }

    pub fn evaluate(&self, schedule: &Schedule, instance: &DsmInstance) -> Result<f64> {
        Ok(self.score(&metrics(schedule, instance)?))
    }
}
