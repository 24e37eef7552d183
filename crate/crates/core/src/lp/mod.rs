//! Linear programs and an exact dense two-phase simplex solver.
//!
//! Programs are minimizations over bounded variables with `<=`, `=` and `>=`
//! rows. The solver uses Bland's rule throughout, so for a fixed program the
//! pivot sequence, and therefore the returned vertex, is fully determined.

mod simplex;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use text::{dump, parse};

/// Pivot and reduced-cost threshold.
pub const PIVOT_TOL: f64 = 1e-9;
/// Row satisfaction tolerance for optimal points.
pub const CONSTRAINT_TOL: f64 = 1e-7;
/// Bound satisfaction tolerance for optimal points.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }

    /// Whether `lhs rel rhs` holds within `tol`.
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
            Relation::Ge => lhs >= rhs - tol,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    /// Sparse `(variable index, coefficient)` pairs. Repeated indices add up.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, point: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * point[j]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const NONNEGATIVE: Bounds = Bounds {
        lower: 0.0,
        upper: f64::INFINITY,
    };
    pub const FREE: Bounds = Bounds {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }
}

/// `min objective . x` subject to `constraints` and per-variable `bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bounds>,
}

impl LinearProgram {
    /// A program over `num_vars` nonnegative variables with a zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            bounds: vec![Bounds::NONNEGATIVE; num_vars],
        }
    }

    pub fn minimize(mut self, objective: &[f64]) -> Self {
        self.objective = objective.to_vec();
        self
    }

    pub fn constrain(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn with(mut self, coeffs: &[(usize, f64)], relation: Relation, rhs: f64) -> Self {
        self.constrain(coeffs.to_vec(), relation, rhs);
        self
    }

    pub fn bound(mut self, var: usize, lower: f64, upper: f64) -> Self {
        self.bounds[var] = Bounds::new(lower, upper);
        self
    }

    pub fn objective_at(&self, point: &[f64]) -> f64 {
        self.objective.iter().zip(point).map(|(c, x)| c * x).sum()
    }

    /// Structural checks run before solving.
    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedLp(msg));
        if self.objective.len() != self.num_vars {
            return bad(format!(
                "objective has {} coefficients for {} variables",
                self.objective.len(),
                self.num_vars
            ));
        }
        if self.bounds.len() != self.num_vars {
            return bad(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                self.num_vars
            ));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return bad(format!("objective coefficient of x{j} is not finite"));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if b.lower.is_nan() || b.upper.is_nan() || b.lower > b.upper {
                return bad(format!("invalid bounds on x{j}"));
            }
            if b.lower == f64::INFINITY || b.upper == f64::NEG_INFINITY {
                return bad(format!("empty bounds on x{j}"));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return bad(format!("row {i}: rhs is not finite"));
            }
            for &(j, a) in &c.coeffs {
                if j >= self.num_vars {
                    return bad(format!("row {i}: variable x{j} out of range"));
                }
                if !a.is_finite() {
                    return bad(format!("row {i}: coefficient of x{j} is not finite"));
                }
            }
        }
        Ok(())
    }

    /// Whether `point` satisfies every row within [`CONSTRAINT_TOL`] and every
    /// bound within [`BOUND_TOL`].
    pub fn is_feasible(&self, point: &[f64]) -> bool {
        point.len() == self.num_vars
            && self
                .bounds
                .iter()
                .zip(point)
                .all(|(b, &x)| x >= b.lower - BOUND_TOL && x <= b.upper + BOUND_TOL)
            && self
                .constraints
                .iter()
                .all(|c| c.relation.holds(c.lhs(point), c.rhs, CONSTRAINT_TOL))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub point: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        Self {
            status,
            point: None,
            objective_value: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Solves `lp` to a vertex optimum, or reports infeasibility/unboundedness.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.check()?;
    simplex::solve(lp)
}
