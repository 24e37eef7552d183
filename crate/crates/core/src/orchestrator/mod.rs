//! Joint placement and resource allocation.
//!
//! The integer part (which node hosts each function) is solved by exhaustive
//! enumeration of tier-feasible placements. For each placement the continuous
//! part (resource amounts and achievable performance) is a linear program,
//! because placement is fixed and every coupling model is affine. The best
//! plan over all placements wins, ties going to the earliest placement.

mod allocation;
mod audit;
mod placement;
mod savings;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fabric::ResourceType;
use crate::validate::Violation;

pub use allocation::{
    build_allocation_lp, objective_value, predicted_performance, solve_joint, solve_placement,
    static_allocate, AllocationLayout, Prediction,
};
pub use audit::{audit_plan, FEASIBILITY_TOL};
pub use placement::enumerate_placements;
pub use savings::{compare, ResourceSaving, SavingsReport};

/// Default objective balance: a small weight on resource usage so the
/// optimizer mostly chases performance.
pub const DEFAULT_ETA: f64 = 0.05;

/// Per-function resource amounts keyed by `(function id, resource)`.
pub type Allocations = BTreeMap<(String, ResourceType), f64>;

/// Which node hosts each function.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Placement {
    pub assignment: BTreeMap<String, String>,
}

impl Placement {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self {
            assignment: pairs
                .into_iter()
                .map(|(f, n)| (f.to_string(), n.to_string()))
                .collect(),
        }
    }

    pub fn node_of(&self, function: &str) -> Option<&str> {
        self.assignment.get(function).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Weight on total resource usage versus performance, in `[0, 1]`.
    pub eta: f64,
    pub p_max: f64,
    /// Minimum amount per `(function, resource)`.
    pub allocation_floor: Allocations,
    /// Extra per-function ceiling on top of node capacity, e.g. a bandwidth
    /// budget granted to one stream.
    pub allocation_cap: Allocations,
}

impl SolverConfig {
    pub fn new(eta: f64, p_max: f64) -> Self {
        Self {
            eta,
            p_max,
            allocation_floor: Allocations::new(),
            allocation_cap: Allocations::new(),
        }
    }

    pub fn with_floor(mut self, function: &str, resource: ResourceType, amount: f64) -> Self {
        self.allocation_floor
            .insert((function.to_string(), resource), amount);
        self
    }

    pub fn with_cap(mut self, function: &str, resource: ResourceType, amount: f64) -> Self {
        self.allocation_cap
            .insert((function.to_string(), resource), amount);
        self
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(0.0..=1.0).contains(&self.eta) {
            out.push(Violation::new("solver", "eta out of range"));
        }
        if !(self.p_max > 0.0) || !self.p_max.is_finite() {
            out.push(Violation::new("solver", "p_max must be positive"));
        }
        for (label, map) in [("floor", &self.allocation_floor), ("cap", &self.allocation_cap)] {
            for ((f, r), v) in map {
                if !(*v >= 0.0) || !v.is_finite() {
                    out.push(Violation::new(
                        "solver",
                        format!("{label} for {f}/{r} must be a nonnegative number"),
                    ));
                }
            }
        }
        out
    }
}

/// A complete placement plus resource allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    pub placement: Placement,
    /// Amount of each resource given to each function on its hosting node.
    pub allocations: Allocations,
    pub performance: f64,
    pub objective_value: f64,
    pub delay_ms: f64,
    pub throughput: f64,
    /// False when the allocations cannot satisfy the coupling models at any
    /// performance level (only possible for externally fixed allocations).
    pub couplings_satisfied: bool,
}

impl AllocationPlan {
    /// Sum over functions of the amount of `resource`.
    pub fn total(&self, resource: &ResourceType) -> f64 {
        self.allocations
            .iter()
            .filter(|((_, r), _)| r == resource)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn amount(&self, function: &str, resource: ResourceType) -> f64 {
        self.allocations
            .get(&(function.to_string(), resource))
            .copied()
            .unwrap_or(0.0)
    }
}
