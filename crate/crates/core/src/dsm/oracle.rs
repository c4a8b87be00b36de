//! Exhaustive scheduler used as the reference optimum in tests.

use super::metrics::report_from_load;
use super::{Category, DsmInstance, Objective, Schedule};
use crate::error::{Error, Result};

/// Upper bound on the size of the joint search space.
pub const MAX_SEARCH_SPACE: u128 = 1_000_000;
/// Upper bound on shiftable slot subsets per appliance.
pub const MAX_SHIFTABLE_SUBSETS: u128 = 10_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of category-feasible placements of each appliance.
pub fn placement_count(instance: &DsmInstance) -> Vec<u128> {
    instance
        .appliances
        .iter()
        .map(|a| match a.category {
            Category::Fixed => 1,
            Category::Uninterruptible => (a.last_start() - a.window.0 + 1) as u128,
            Category::Shiftable => binomial(a.window.1 - a.window.0 + 1, a.duration),
        })
        .collect()
}

/// All placements of one appliance as sorted slot lists, in lexicographic order.
fn placements(instance: &DsmInstance, idx: usize) -> Vec<Vec<usize>> {
    let a = &instance.appliances[idx];
    match a.category {
        Category::Fixed => vec![(a.preferred_start..a.preferred_start + a.duration).collect()],
        Category::Uninterruptible => (a.window.0..=a.last_start())
            .map(|s| (s..s + a.duration).collect())
            .collect(),
        Category::Shiftable => {
            let slots: Vec<usize> = (a.window.0..=a.window.1).collect();
            let mut out = Vec::new();
            let mut pick = Vec::with_capacity(a.duration);
            subsets(&slots, a.duration, 0, &mut pick, &mut out);
            out
        }
    }
}

fn subsets(
    slots: &[usize],
    k: usize,
    from: usize,
    pick: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if pick.len() == k {
        out.push(pick.clone());
        return;
    }
    let need = k - pick.len();
    for i in from..=slots.len() - need {
        pick.push(slots[i]);
        subsets(slots, k, i + 1, pick, out);
        pick.pop();
    }
}

struct Search<'a> {
    instance: &'a DsmInstance,
    objective: &'a Objective,
    options: Vec<Vec<Vec<usize>>>,
    load: Vec<f64>,
    choice: Vec<usize>,
    starts: Vec<Option<usize>>,
    best: Option<(f64, Vec<usize>)>,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize) {
        if depth == self.options.len() {
            let report = report_from_load(&self.load, &self.starts, 0, self.instance);
            let value = self.objective.score(&report);
            // Enumeration is lexicographic, so only a strict improvement may
            // replace the incumbent. The relative margin absorbs rounding noise.
            let better = match &self.best {
                None => true,
                Some((b, _)) => value < b - 1e-12 * b.abs().max(1.0),
            };
            if better {
                self.best = Some((value, self.choice.clone()));
            }
            return;
        }
        let power = self.instance.appliances[depth].power;
        for k in 0..self.options[depth].len() {
            let slots = std::mem::take(&mut self.options[depth][k]);
            for &t in &slots {
                self.load[t] += power;
            }
            self.choice[depth] = k;
            self.starts[depth] = slots.first().copied();
            self.descend(depth + 1);
            for &t in &slots {
                self.load[t] -= power;
            }
            self.options[depth][k] = slots;
        }
    }
}

/// Exhaustive minimizer of the weighted objective over all category-feasible
/// schedules. Ties go to the lexicographically smallest placement vector.
pub fn brute_force_schedule(instance: &DsmInstance, objective: &Objective) -> Result<Schedule> {
    let counts = placement_count(instance);
    for (a, &c) in instance.appliances.iter().zip(&counts) {
        if a.category == Category::Shiftable && c > MAX_SHIFTABLE_SUBSETS {
            return Err(Error::InstanceTooLarge(format!(
                "appliance {} has {c} slot subsets (cap {MAX_SHIFTABLE_SUBSETS})",
                a.id
            )));
        }
    }
    let total = counts
        .iter()
        .try_fold(1u128, |acc, &c| acc.checked_mul(c))
        .unwrap_or(u128::MAX);
    if total > MAX_SEARCH_SPACE {
        return Err(Error::InstanceTooLarge(format!(
            "{total} joint placements (cap {MAX_SEARCH_SPACE})"
        )));
    }

    let n = instance.appliances.len();
    let mut search = Search {
        instance,
        objective,
        options: (0..n).map(|i| placements(instance, i)).collect(),
        load: vec![0.0; instance.horizon],
        choice: vec![0; n],
        starts: vec![None; n],
        best: None,
    };
    search.descend(0);

    let mut schedule = Schedule::empty(n, instance.horizon);
    if let Some((_, choice)) = search.best {
        for (i, &k) in choice.iter().enumerate() {
            for &t in &search.options[i][k] {
                schedule.set(i, t, true);
            }
        }
    }
    Ok(schedule)
}
