use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{baseline_schedule, load_profile, Appliance, Category, DsmInstance, Tariff};
use crate::error::{Error, Result};
use crate::heuristic::RngStream;

const OFF_PEAK_PRICE: f64 = 0.10;
const PEAK_MULTIPLIER: f64 = 3.0;
const CAPACITY_HEADROOM: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TariffShape {
    Flat,
    TwoTier,
    Random,
}

impl FromStr for TariffShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(TariffShape::Flat),
            "two_tier" | "two-tier" => Ok(TariffShape::TwoTier),
            "random" => Ok(TariffShape::Random),
            other => Err(Error::param(format!("unknown tariff shape {other}"))),
        }
    }
}

impl fmt::Display for TariffShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TariffShape::Flat => "flat",
            TariffShape::TwoTier => "two_tier",
            TariffShape::Random => "random",
        })
    }
}

/// Morning (07-11h) and evening (17-22h) peaks, judged at the slot midpoint.
pub fn is_peak_slot(slot: usize, horizon: usize) -> bool {
    let hour = (slot as f64 + 0.5) * 24.0 / horizon as f64;
    (7.0..11.0).contains(&hour) || (17.0..22.0).contains(&hour)
}

fn round_to(x: f64, step: f64) -> f64 {
    (x / step).round() * step
}

/// Builds a synthetic household deterministically from `seed`.
///
/// Category mix is 20% fixed, 50% shiftable, the rest uninterruptible.
/// Preferred starts favour peak slots. Capacity is 1.5x the baseline peak so
/// the unoptimized schedule always fits.
pub fn generate_dsm_instance(
    n_appliances: usize,
    horizon: usize,
    shape: TariffShape,
    seed: u64,
) -> Result<DsmInstance> {
    if horizon < 2 {
        return Err(Error::param("horizon must be >= 2"));
    }
    let mut rng = RngStream::new(seed, 0);
    let slot_hours = 24.0 / horizon as f64;

    let prices: Vec<f64> = (0..horizon)
        .map(|t| match shape {
            TariffShape::Flat => OFF_PEAK_PRICE,
            TariffShape::TwoTier if is_peak_slot(t, horizon) => OFF_PEAK_PRICE * PEAK_MULTIPLIER,
            TariffShape::TwoTier => OFF_PEAK_PRICE,
            TariffShape::Random => round_to(rng.random_range(0.05..0.35), 1e-4),
        })
        .collect();

    let n_fixed = (0.2 * n_appliances as f64).round() as usize;
    let n_shift = ((0.5 * n_appliances as f64).round() as usize).min(n_appliances - n_fixed);
    let mut categories: Vec<Category> = std::iter::repeat_n(Category::Fixed, n_fixed)
        .chain(std::iter::repeat_n(Category::Shiftable, n_shift))
        .chain(std::iter::repeat_n(
            Category::Uninterruptible,
            n_appliances - n_fixed - n_shift,
        ))
        .collect();
    categories.shuffle(&mut rng);

    let max_duration = (horizon / 6).max(2).min(horizon);
    let extension = (horizon / 3).max(1);
    let appliances = categories
        .into_iter()
        .enumerate()
        .map(|(i, category)| {
            let power = round_to(rng.random_range(0.5..3.0), 0.1);
            let duration = rng.random_range(1..=max_duration);
            let starts: Vec<usize> = (0..=horizon - duration).collect();
            let peak: Vec<usize> = starts
                .iter()
                .copied()
                .filter(|&s| is_peak_slot(s, horizon))
                .collect();
            let pool = if peak.is_empty() { &starts } else { &peak };
            let preferred_start = pool[rng.random_range(0..pool.len())];
            let end = preferred_start + duration - 1;
            let window = match category {
                Category::Fixed => (preferred_start, end),
                _ => {
                    let lo = preferred_start.saturating_sub(rng.random_range(0..=extension));
                    let hi = (end + rng.random_range(0..=extension)).min(horizon - 1);
                    (lo, hi)
                }
            };
            let prefix = match category {
                Category::Fixed => "fixed",
                Category::Shiftable => "shift",
                Category::Uninterruptible => "unint",
            };
            Appliance {
                id: format!("{prefix}{i}"),
                category,
                power,
                duration,
                preferred_start,
                window,
            }
        })
        .collect();

    let mut inst = DsmInstance::new(
        horizon,
        appliances,
        Tariff { prices, slot_hours },
        vec![f64::MAX; horizon],
    )?;
    let peak = load_profile(&baseline_schedule(&inst), &inst)?
        .into_iter()
        .fold(0.0, f64::max);
    inst.capacity = vec![round_to(CAPACITY_HEADROOM * peak, 1e-6); horizon];
    Ok(inst)
}
