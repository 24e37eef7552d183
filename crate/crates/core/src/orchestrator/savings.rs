use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::AllocationPlan;
use crate::error::{Error, Result};
use crate::fabric::ResourceType;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceSaving {
    pub resource: ResourceType,
    pub optimized_total: f64,
    pub baseline_total: f64,
    pub saving_pct: f64,
}

/// Optimized plan versus a baseline plan, per resource type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsReport {
    pub compute_saving_pct: f64,
    pub network_saving_pct: f64,
    /// Optimized performance minus baseline performance.
    pub performance_delta: f64,
    pub per_resource: Vec<ResourceSaving>,
}

fn saving_pct(optimized: f64, baseline: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        100.0 * (baseline - optimized) / baseline
    }
}

pub fn compare(optimized: &AllocationPlan, baseline: &AllocationPlan) -> Result<SavingsReport> {
    let functions = |p: &AllocationPlan| -> BTreeSet<String> {
        p.placement.assignment.keys().cloned().collect()
    };
    if functions(optimized) != functions(baseline) {
        return Err(Error::Mismatch(
            "plans cover different function sets".into(),
        ));
    }
    let resources: BTreeSet<ResourceType> = optimized
        .allocations
        .keys()
        .chain(baseline.allocations.keys())
        .map(|(_, r)| r.clone())
        .chain(ResourceType::builtins())
        .collect();

    let per_resource: Vec<ResourceSaving> = resources
        .into_iter()
        .map(|r| {
            let (o, b) = (optimized.total(&r), baseline.total(&r));
            ResourceSaving {
                saving_pct: saving_pct(o, b),
                resource: r,
                optimized_total: o,
                baseline_total: b,
            }
        })
        .collect();
    let pct = |r: ResourceType| {
        per_resource
            .iter()
            .find(|s| s.resource == r)
            .map_or(0.0, |s| s.saving_pct)
    };
    Ok(SavingsReport {
        compute_saving_pct: pct(ResourceType::Compute),
        network_saving_pct: pct(ResourceType::Network),
        performance_delta: optimized.performance - baseline.performance,
        per_resource,
    })
}
