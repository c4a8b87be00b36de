use super::{cycle_length, Tour, TspInstance};
use crate::error::{Error, Result};

pub const MAX_BRUTE_FORCE_NODES: usize = 10;

/// In-place lexicographic successor; false when `v` was the last permutation.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).expect("pivot exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Exact optimum by enumerating every order that starts at node 0.
///
/// Ties (including a cycle and its reversal) go to the lexicographically
/// smallest order.
pub fn brute_force_tsp(instance: &TspInstance) -> Result<Tour> {
    let n = instance.n();
    if n > MAX_BRUTE_FORCE_NODES {
        return Err(Error::InstanceTooLarge(format!(
            "{n} nodes (cap {MAX_BRUTE_FORCE_NODES})"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut best_order = order.clone();
    let mut best = cycle_length(&order, instance);
    while next_permutation(&mut order[1..]) {
        let len = cycle_length(&order, instance);
        if len < best - 1e-12 * best.max(1.0) {
            best = len;
            best_order.copy_from_slice(&order);
        }
    }
    Ok(Tour::unchecked(best_order, instance))
}
