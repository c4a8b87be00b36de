use std::cmp::Ordering;

/// Fitness and constraint-violation count of one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub fitness: f64,
    pub violations: u32,
}

impl Candidate {
    pub fn new(fitness: f64, violations: u32) -> Self {
        Self {
            fitness,
            violations,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    First,
    Second,
}

/// Deb's constraint-handling order. `Less` means `a` is preferred.
///
/// Feasible beats infeasible; two feasible candidates compare by fitness
/// (lower is better); two infeasible ones by violation count.
pub fn deb_order(a: &Candidate, b: &Candidate) -> Ordering {
    match (a.is_feasible(), b.is_feasible()) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (true, true) => a.fitness.total_cmp(&b.fitness),
        (false, false) => a.violations.cmp(&b.violations),
    }
}

/// Picks the preferred candidate; exact ties keep the first argument.
pub fn deb_compare(a: &Candidate, b: &Candidate) -> Winner {
    match deb_order(a, b) {
        Ordering::Greater => Winner::Second,
        _ => Winner::First,
    }
}
