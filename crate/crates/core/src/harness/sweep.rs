//! Resource sweeps: re-solve the joint problem while one function's resource
//! is held at a series of levels, and compare each result against the static
//! baseline under the same condition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{Cell, Report, Table};
use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::fabric::ResourceType;
use crate::orchestrator::{
    compare, enumerate_placements, solve_joint, static_allocate, AllocationPlan, Placement,
    SavingsReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// The level is the most the function may receive.
    #[default]
    Capacity,
    /// The level is the least the function must receive.
    Floor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub function: String,
    pub resource: ResourceType,
    pub mode: SweepMode,
    pub levels: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub level: f64,
    pub optimized: Option<AllocationPlan>,
    /// `None` when the fixed allocation does not fit the condition or cannot
    /// satisfy the couplings.
    pub baseline: Option<AllocationPlan>,
    pub savings: Option<SavingsReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_COLUMNS: [&str; 14] = [
    "level",
    "opt_status",
    "opt_compute",
    "opt_network",
    "opt_performance",
    "opt_objective",
    "static_status",
    "static_compute",
    "static_network",
    "static_performance",
    "static_objective",
    "compute_saving_pct",
    "network_saving_pct",
    "performance_delta",
];

/// Runs the sweep declared in the scenario.
pub fn run_sweep(scenario: &Scenario) -> Result<SweepResult> {
    let spec = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("scenario declares no sweep".into()))?;
    run_sweep_with(scenario, spec)
}

/// Runs `spec` against the scenario.
///
/// In capacity mode the optimizer may give the swept function at most the
/// level. The baseline consumes the whole level when its fixed allocation does
/// not mention the swept resource, and is marked infeasible when its fixed
/// amount exceeds the level. In floor mode the optimizer must give at least
/// the level and the baseline is unchanged unless it leaves the resource
/// unspecified, in which case it takes the level.
pub fn run_sweep_with(scenario: &Scenario, spec: &SweepSpec) -> Result<SweepResult> {
    let baseline = scenario
        .baseline
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("sweep needs a static baseline".into()))?;
    let base_placement = match &baseline.placement {
        Some(p) => p.clone(),
        None => enumerate_placements(&scenario.application, &scenario.infrastructure)?
            .into_iter()
            .next()
            .ok_or(Error::NoFeasiblePlacement)?,
    };
    let key = (spec.function.clone(), spec.resource.clone());

    let rows = spec
        .levels
        .par_iter()
        .map(|&level| -> Result<SweepRow> {
            let mut cfg = scenario.solver.clone();
            match spec.mode {
                SweepMode::Capacity => cfg.allocation_cap.insert(key.clone(), level),
                SweepMode::Floor => cfg.allocation_floor.insert(key.clone(), level),
            };
            let optimized = match solve_joint(
                &scenario.application,
                &scenario.infrastructure,
                &scenario.couplings,
                &cfg,
            ) {
                Ok(p) => Some(p),
                Err(Error::NoFeasiblePlacement | Error::AllPlacementsInfeasible) => None,
                Err(e) => return Err(e),
            };

            let mut fixed = baseline.allocations.clone();
            let over_level = match (fixed.get(&key).copied(), spec.mode) {
                (None, _) => {
                    fixed.insert(key.clone(), level);
                    false
                }
                (Some(v), SweepMode::Capacity) => v > level,
                (Some(_), SweepMode::Floor) => false,
            };
            let static_plan = if over_level {
                None
            } else {
                baseline_plan(scenario, &fixed, &base_placement)?
            };

            let savings = match (&optimized, &static_plan) {
                (Some(o), Some(s)) => Some(compare(o, s)?),
                _ => None,
            };
            Ok(SweepRow {
                level,
                optimized,
                baseline: static_plan,
                savings,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
    })
}

fn baseline_plan(
    scenario: &Scenario,
    fixed: &crate::orchestrator::Allocations,
    placement: &Placement,
) -> Result<Option<AllocationPlan>> {
    match static_allocate(
        &scenario.application,
        &scenario.infrastructure,
        &scenario.couplings,
        scenario.solver.eta,
        fixed,
        placement,
    ) {
        Ok(p) if p.couplings_satisfied => Ok(Some(p)),
        Ok(_) | Err(Error::CapacityExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn status(plan: &Option<AllocationPlan>) -> Cell {
    if plan.is_some() { "ok" } else { "infeasible" }.into()
}

impl Report for SweepResult {
    fn to_table(&self) -> Table {
        let mut t = Table::new(&SWEEP_COLUMNS);
        for row in &self.rows {
            let opt = row.optimized.as_ref();
            let base = row.baseline.as_ref();
            let sav = row.savings.as_ref();
            t.push(vec![
                row.level.into(),
                status(&row.optimized),
                opt.map(|p| p.total(&ResourceType::Compute)).into(),
                opt.map(|p| p.total(&ResourceType::Network)).into(),
                opt.map(|p| p.performance).into(),
                opt.map(|p| p.objective_value).into(),
                status(&row.baseline),
                base.map(|p| p.total(&ResourceType::Compute)).into(),
                base.map(|p| p.total(&ResourceType::Network)).into(),
                base.map(|p| p.performance).into(),
                base.map(|p| p.objective_value).into(),
                sav.map(|s| s.compute_saving_pct).into(),
                sav.map(|s| s.network_saving_pct).into(),
                sav.map(|s| s.performance_delta).into(),
            ]);
        }
        t
    }
}
