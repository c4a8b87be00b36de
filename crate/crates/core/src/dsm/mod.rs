//! Household appliance scheduling posed as a multiple knapsack problem.
//!
//! Appliances are the items, their energy the weight and their running cost
//! the profit; each time slot is a knapsack bounded by the grid capacity for
//! that slot. A [`Schedule`] is the binary appliance-by-slot activation
//! matrix.

pub mod generate;
pub mod metrics;
pub mod oracle;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{generate_dsm_instance, TariffShape};
pub use metrics::{
    check_feasibility, evaluate_cost, evaluate_discomfort, evaluate_par, load_profile, metrics,
    weighted_objective, MetricsReport, Objective, Violation, Weights,
};
pub use oracle::{brute_force_schedule, placement_count};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    /// Runs exactly at the user's preferred placement.
    Fixed,
    /// Any `duration` slots inside the window, interruptions allowed.
    Shiftable,
    /// One contiguous run of `duration` slots inside the window.
    Uninterruptible,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::Fixed => "Fixed",
            Category::Shiftable => "Shiftable",
            Category::Uninterruptible => "Uninterruptible",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Appliance {
    pub id: String,
    pub category: Category,
    #[serde(rename = "power_kw")]
    pub power: f64,
    pub duration: usize,
    pub preferred_start: usize,
    /// Inclusive slot range `[earliest, latest]` holding every active slot.
    pub window: (usize, usize),
}

impl Appliance {
    /// Latest start slot that still fits the whole run in the window.
    pub fn last_start(&self) -> usize {
        self.window.1 + 1 - self.duration
    }

    /// Largest start shift the window permits relative to the preference.
    pub fn max_shift(&self) -> usize {
        let before = self.preferred_start - self.window.0;
        let after = self.last_start() - self.preferred_start;
        before.max(after)
    }

    pub fn is_fixed(&self) -> bool {
        self.category == Category::Fixed
    }

    fn validate(&self, horizon: usize) -> Result<()> {
        let (lo, hi) = self.window;
        let id = &self.id;
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::instance(format!("appliance {id}: power must be > 0")));
        }
        if self.duration < 1 {
            return Err(Error::instance(format!("appliance {id}: duration must be >= 1")));
        }
        if lo > hi || hi >= horizon {
            return Err(Error::instance(format!(
                "appliance {id}: window [{lo}, {hi}] outside [0, {horizon})"
            )));
        }
        if hi - lo + 1 < self.duration {
            return Err(Error::instance(format!(
                "appliance {id}: window shorter than duration {}",
                self.duration
            )));
        }
        if self.preferred_start < lo || self.preferred_start + self.duration - 1 > hi {
            return Err(Error::instance(format!(
                "appliance {id}: preferred placement escapes the window"
            )));
        }
        if self.is_fixed() && (lo != self.preferred_start || hi != self.preferred_start + self.duration - 1)
        {
            return Err(Error::instance(format!(
                "appliance {id}: fixed window must equal the preferred placement"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tariff {
    /// Price per kWh for each slot.
    pub prices: Vec<f64>,
    pub slot_hours: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct DsmInstance {
    pub horizon: usize,
    pub appliances: Vec<Appliance>,
    pub tariff: Tariff,
    /// Per-slot kW limit.
    pub capacity: Vec<f64>,
}

/// On-disk layout of an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    horizon: usize,
    slot_hours: f64,
    prices: Vec<f64>,
    capacity: Vec<f64>,
    appliances: Vec<Appliance>,
}

impl TryFrom<InstanceDoc> for DsmInstance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        DsmInstance::new(
            doc.horizon,
            doc.appliances,
            Tariff {
                prices: doc.prices,
                slot_hours: doc.slot_hours,
            },
            doc.capacity,
        )
    }
}

impl From<DsmInstance> for InstanceDoc {
    fn from(inst: DsmInstance) -> Self {
        InstanceDoc {
            horizon: inst.horizon,
            slot_hours: inst.tariff.slot_hours,
            prices: inst.tariff.prices,
            capacity: inst.capacity,
            appliances: inst.appliances,
        }
    }
}

impl DsmInstance {
    pub fn new(
        horizon: usize,
        appliances: Vec<Appliance>,
        tariff: Tariff,
        capacity: Vec<f64>,
    ) -> Result<Self> {
        let inst = Self {
            horizon,
            appliances,
            tariff,
            capacity,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::instance("horizon must be >= 1"));
        }
        if self.tariff.prices.len() != self.horizon {
            return Err(Error::instance(format!(
                "{} prices for horizon {}",
                self.tariff.prices.len(),
                self.horizon
            )));
        }
        if self.tariff.prices.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::instance("all prices must be > 0"));
        }
        if !(self.tariff.slot_hours > 0.0 && self.tariff.slot_hours.is_finite()) {
            return Err(Error::instance("slot_hours must be > 0"));
        }
        if self.capacity.len() != self.horizon {
            return Err(Error::instance(format!(
                "{} capacities for horizon {}",
                self.capacity.len(),
                self.horizon
            )));
        }
        if self.capacity.iter().any(|&c| !(c >= 0.0) || c.is_nan()) {
            return Err(Error::instance("capacities must be >= 0"));
        }
        let mut ids = std::collections::HashSet::new();
        for a in &self.appliances {
            a.validate(self.horizon)?;
            if !ids.insert(a.id.as_str()) {
                return Err(Error::instance(format!("duplicate appliance id {}", a.id)));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        // serde reports the validation failure through its own error type;
        // surface instance errors as such and keep line numbers for syntax errors.
        let doc: InstanceDoc = serde_json::from_str(text)?;
        DsmInstance::try_from(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    /// Indices of appliances whose placement is a decision variable.
    pub fn schedulable(&self) -> Vec<usize> {
        self.appliances
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_fixed())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Binary activation matrix indexed `[appliance][slot]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ScheduleDoc", into = "ScheduleDoc")]
pub struct Schedule {
    appliances: usize,
    horizon: usize,
    cells: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    activation: Vec<Vec<u8>>,
}

impl TryFrom<ScheduleDoc> for Schedule {
    type Error = Error;

    fn try_from(doc: ScheduleDoc) -> Result<Self> {
        let rows: Vec<Vec<bool>> = doc
            .activation
            .into_iter()
            .map(|r| r.into_iter().map(|c| c != 0).collect())
            .collect();
        Schedule::from_rows(&rows)
    }
}

impl From<Schedule> for ScheduleDoc {
    fn from(s: Schedule) -> Self {
        ScheduleDoc {
            activation: (0..s.appliances)
                .map(|a| s.row(a).iter().map(|&b| b as u8).collect())
                .collect(),
        }
    }
}

impl Schedule {
    pub fn empty(appliances: usize, horizon: usize) -> Self {
        Self {
            appliances,
            horizon,
            cells: vec![false; appliances * horizon],
        }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let horizon = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != horizon) {
            return Err(Error::Shape("ragged activation rows".into()));
        }
        Ok(Self {
            appliances: rows.len(),
            horizon,
            cells: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn appliances(&self) -> usize {
        self.appliances
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, appliance: usize, slot: usize) -> bool {
        self.cells[appliance * self.horizon + slot]
    }

    pub fn set(&mut self, appliance: usize, slot: usize, on: bool) {
        self.cells[appliance * self.horizon + slot] = on;
    }

    pub fn row(&self, appliance: usize) -> &[bool] {
        &self.cells[appliance * self.horizon..(appliance + 1) * self.horizon]
    }

    /// First active slot of a row.
    pub fn start_of(&self, appliance: usize) -> Option<usize> {
        self.row(appliance).iter().position(|&b| b)
    }

    pub fn active_slots(&self, appliance: usize) -> Vec<usize> {
        self.row(appliance)
            .iter()
            .enumerate()
            .filter_map(|(t, &b)| b.then_some(t))
            .collect()
    }

    pub(crate) fn check_shape(&self, instance: &DsmInstance) -> Result<()> {
        if self.appliances != instance.appliances.len() || self.horizon != instance.horizon {
            return Err(Error::Shape(format!(
                "schedule is {}x{}, instance is {}x{}",
                self.appliances,
                self.horizon,
                instance.appliances.len(),
                instance.horizon
            )));
        }
        Ok(())
    }
}

/// Every appliance runs contiguously from its preferred start.
///
/// The unoptimized reference; capacity may be exceeded and is only reported.
pub fn baseline_schedule(instance: &DsmInstance) -> Schedule {
    let mut s = Schedule::empty(instance.appliances.len(), instance.horizon);
    for (i, a) in instance.appliances.iter().enumerate() {
        for t in a.preferred_start..a.preferred_start + a.duration {
            s.set(i, t, true);
        }
    }
    s
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(Category::Fixed),
            "shiftable" => Ok(Category::Shiftable),
            "uninterruptible" => Ok(Category::Uninterruptible),
            other => Err(Error::param(format!("unknown category {other}"))),
        }
    }
}
