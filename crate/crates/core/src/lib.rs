//! Metaheuristics for household appliance scheduling and the symmetric TSP.
//!
//! Scheduling is posed as a multiple knapsack problem ([`dsm`]) and solved by
//! four classic population methods ([`classic`]) and their hybrids
//! ([`hybrid`]). The iterative discrete flower pollination algorithm
//! ([`idfpa`]) works natively on tours ([`tsp`]) and has an adaptation for
//! schedules. [`parallel`] runs the tour solvers under several worker-pool
//! strategies.

// `!(x >= 0.0)` rejects NaN along with negatives; kept on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithm;
pub mod bench;
pub mod classic;
pub mod dsm;
pub mod error;
pub mod heuristic;
pub mod hybrid;
pub mod idfpa;
pub mod parallel;
pub mod tsp;

pub use error::{Error, Result};
