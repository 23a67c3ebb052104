//! Exact best-subset selection under cardinality and hierarchy constraints.
//!
//! [`solve`] is a best-first branch-and-bound over the selection indicators.
//! Excluded variables are dropped from every fit, so a deselected variable
//! has a zero coefficient by construction. The bound at a node is the RSS of
//! the fit on all variables that are not fixed out: relaxing the cardinality
//! constraint can only lower the RSS, so the bound is admissible.
//!
//! [`enumerate_exact`] evaluates every feasible support and serves as the
//! oracle for the branch-and-bound.

mod bnb;
mod enumerate;
mod state;

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use bnb::{greedy_incumbent, lower_bound, solve};
pub use enumerate::{enumerate_all, enumerate_exact, Enumeration, ENUMERATION_MAX_P};
pub use state::{is_feasible, propagate, Infeasible, SelectionState, Status};

use crate::datakit::{Dataset, Mode};
use crate::linalg::FitResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Maximum number of selected variables (the intercept is not counted).
    pub s: usize,
    pub mode: Mode,
    /// Wall-clock budget; the incumbent is returned when it runs out.
    pub time_limit: Option<Duration>,
    /// Node budget, for deterministic truncation.
    pub node_limit: Option<u64>,
    /// Relative RSS gap accepted as proof of optimality. Pruning never uses it.
    pub tolerance: f64,
    /// Recorded for reproducibility. Ties are broken deterministically by
    /// (RSS, lexicographic support), so the seed does not alter results.
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(s: usize, mode: Mode) -> Self {
        Self {
            s,
            mode,
            time_limit: None,
            node_limit: None,
            tolerance: 0.0,
            seed: 0,
        }
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_node_limit(mut self, limit: u64) -> Self {
        self.node_limit = Some(limit);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutcome {
    pub mode: Mode,
    pub s: usize,
    pub best: FitResult,
    pub proven_optimal: bool,
    pub nodes_explored: u64,
    /// Seconds.
    pub wall_time: f64,
    /// Global lower bound on the optimal RSS at termination.
    pub best_bound: f64,
}

/// Machine-readable selection result shared by the solver and the baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub method: String,
    pub mode: Option<Mode>,
    pub s: usize,
    pub rss: f64,
    pub proven_optimal: bool,
    pub best_bound: Option<f64>,
    pub wall_time_s: f64,
    pub nodes: Option<u64>,
    pub intercept: f64,
    pub coefficients: BTreeMap<String, f64>,
    pub selected: Vec<String>,
}

impl SelectionRecord {
    /// Record for any fit; solver-specific fields are left empty.
    pub fn from_fit(method: &str, s: usize, fit: &FitResult, ds: &Dataset, wall_time_s: f64) -> Self {
        let selected_idx = fit.selected();
        Self {
            method: method.to_string(),
            mode: None,
            s,
            rss: fit.rss,
            proven_optimal: false,
            best_bound: None,
            wall_time_s,
            nodes: None,
            intercept: fit.intercept,
            coefficients: selected_idx
                .iter()
                .map(|&j| (ds.name(j).to_string(), fit.coefficients[j]))
                .collect(),
            selected: selected_idx.iter().map(|&j| ds.name(j).to_string()).collect(),
        }
    }
}

impl SolveOutcome {
    pub fn to_record(&self, ds: &Dataset) -> SelectionRecord {
        SelectionRecord {
            mode: Some(self.mode),
            proven_optimal: self.proven_optimal,
            best_bound: Some(self.best_bound),
            nodes: Some(self.nodes_explored),
            ..SelectionRecord::from_fit(self.mode.as_str(), self.s, &self.best, ds, self.wall_time)
        }
    }
}
