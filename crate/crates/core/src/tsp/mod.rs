//! Symmetric TSP instances, tours and the inverse-distance cost matrix.

pub mod oracle;
pub mod tsplib;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heuristic::RngStream;

pub use oracle::brute_force_tsp;
pub use tsplib::{parse_tsplib, write_tsplib};

/// Default guard for coincident nodes in [`build_cost_matrix`].
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    n: usize,
    coords: Option<Vec<(f64, f64)>>,
    distances: Vec<f64>,
}

impl TspInstance {
    /// Builds an instance from a full distance matrix.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 3 {
            return Err(Error::instance(format!("need at least 3 nodes, got {n}")));
        }
        let mut distances = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!("row {i} has {} entries", row.len())));
            }
            distances.extend_from_slice(row);
        }
        for i in 0..n {
            if distances[i * n + i] != 0.0 {
                return Err(Error::instance(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let d = distances[i * n + j];
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(Error::instance(format!("bad distance d[{i}][{j}] = {d}")));
                }
                if d != distances[j * n + i] {
                    return Err(Error::instance(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            n,
            coords: None,
            distances,
        })
    }

    /// Uniform random points in the square `[0, 100)^2`.
    pub fn random_euclidean(n: usize, seed: u64) -> Result<Self> {
        let mut rng = RngStream::new(seed, 0);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
            .collect();
        build_distance_matrix(&pts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.distances[i * self.n..(i + 1) * self.n]
    }
}

/// Exact Euclidean distance matrix over the given points.
pub fn build_distance_matrix(coords: &[(f64, f64)]) -> Result<TspInstance> {
    let n = coords.len();
    if n < 3 {
        return Err(Error::instance(format!("need at least 3 points, got {n}")));
    }
    if coords.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::instance("non-finite coordinate"));
    }
    let mut distances = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let (dx, dy) = (coords[i].0 - coords[j].0, coords[i].1 - coords[j].1);
            let d = dx.hypot(dy);
            distances[i * n + j] = d;
            distances[j * n + i] = d;
        }
    }
    Ok(TspInstance {
        n,
        coords: Some(coords.to_vec()),
        distances,
    })
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::Tour(format!("tour has {} nodes, expected {n}", order.len())));
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::Tour(format!("node {v} out of range or repeated")));
        }
    }
    Ok(())
}

/// Length of the closed cycle through `order`, including the return arc.
pub fn tour_length(order: &[usize], instance: &TspInstance) -> Result<f64> {
    check_permutation(order, instance.n)?;
    Ok(cycle_length(order, instance))
}

pub(crate) fn cycle_length(order: &[usize], instance: &TspInstance) -> f64 {
    let n = order.len();
    (0..n)
        .map(|k| instance.dist(order[k], order[(k + 1) % n]))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    pub order: Vec<usize>,
    pub length: f64,
}

impl Tour {
    pub fn new(order: Vec<usize>, instance: &TspInstance) -> Result<Self> {
        let length = tour_length(&order, instance)?;
        Ok(Self { order, length })
    }

    pub(crate) fn unchecked(order: Vec<usize>, instance: &TspInstance) -> Self {
        debug_assert!(check_permutation(&order, instance.n).is_ok());
        let length = cycle_length(&order, instance);
        Self { order, length }
    }

    /// Undirected arcs of the cycle.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.order.len();
        (0..n).map(move |k| (self.order[k], self.order[(k + 1) % n]))
    }

    pub fn is_permutation_of(&self, n: usize) -> bool {
        check_permutation(&self.order, n).is_ok()
    }
}

/// Inverse-distance matrix `c_ij = 1 / max(d_ij, epsilon)`, zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CostMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}

pub fn build_cost_matrix(instance: &TspInstance, epsilon: f64) -> CostMatrix {
    let n = instance.n;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                entries[i * n + j] = 1.0 / instance.dist(i, j).max(epsilon);
            }
        }
    }
    CostMatrix { n, entries }
}
