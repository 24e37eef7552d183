//! Microservice application model: functions, dependency edges, the declared
//! critical path and end-to-end delay/throughput rules.
//!
//! Per-function delay and throughput depend only on the tier a function is
//! placed on. They are inputs, not functions of allocated resources, so the
//! end-to-end requirements act as a filter on placements rather than as rows
//! of the allocation LP.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fabric::{Infrastructure, Tier};
use crate::orchestrator::Placement;
use crate::validate::Violation;

/// Delay contribution (ms) and throughput (units/s) of a function on one tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierProfile {
    pub delay_ms: f64,
    pub throughput: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub id: String,
    pub tier_constraint: Option<Tier>,
    pub perf_profile: BTreeMap<Tier, TierProfile>,
}

impl FunctionSpec {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            tier_constraint: None,
            perf_profile: BTreeMap::new(),
        }
    }

    pub fn on_tier(mut self, tier: &str, delay_ms: f64, throughput: f64) -> Self {
        self.perf_profile.insert(
            Tier::new(tier),
            TierProfile {
                delay_ms,
                throughput,
            },
        );
        self
    }

    pub fn pinned_to(mut self, tier: &str) -> Self {
        self.tier_constraint = Some(Tier::new(tier));
        self
    }

    /// Whether this function may run on `tier` at all.
    pub fn runs_on(&self, tier: &Tier) -> bool {
        self.perf_profile.contains_key(tier)
            && self.tier_constraint.as_ref().is_none_or(|t| t == tier)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Requirements {
    pub max_delay_ms: f64,
    pub min_throughput: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppGraph {
    pub functions: Vec<FunctionSpec>,
    pub edges: Vec<(String, String)>,
    pub critical_path: Vec<String>,
    pub requirements: Requirements,
}

impl AppGraph {
    pub fn function(&self, id: &str) -> Option<&FunctionSpec> {
        self.functions.iter().find(|f| f.id == id)
    }

    pub fn function_index(&self, id: &str) -> Option<usize> {
        self.functions.iter().position(|f| f.id == id)
    }
}

/// Outcome of checking the end-to-end requirements for one placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequirementCheck {
    pub feasible: bool,
    pub delay_ms: f64,
    pub throughput: f64,
}

fn critical_profiles<'a>(
    app: &'a AppGraph,
    infra: &'a Infrastructure,
    placement: &'a Placement,
) -> impl Iterator<Item = Result<TierProfile>> + 'a {
    app.critical_path.iter().map(move |fid| {
        let node_id = placement
            .node_of(fid)
            .ok_or_else(|| Error::MissingPlacement {
                function: fid.clone(),
            })?;
        let node = infra
            .node(node_id)
            .ok_or_else(|| Error::unknown("node", node_id))?;
        let spec = app
            .function(fid)
            .ok_or_else(|| Error::unknown("function", fid.as_str()))?;
        spec.perf_profile
            .get(&node.tier)
            .copied()
            .ok_or_else(|| Error::MissingProfile {
                function: fid.clone(),
                tier: node.tier.to_string(),
            })
    })
}

/// End-to-end delay: sum of per-function delays along the critical path.
pub fn h_delay(app: &AppGraph, infra: &Infrastructure, placement: &Placement) -> Result<f64> {
    critical_profiles(app, infra, placement).try_fold(0.0, |acc, p| Ok(acc + p?.delay_ms))
}

/// End-to-end throughput: the bottleneck along the critical path.
pub fn h_throughput(app: &AppGraph, infra: &Infrastructure, placement: &Placement) -> Result<f64> {
    critical_profiles(app, infra, placement)
        .try_fold(f64::INFINITY, |acc, p| Ok(acc.min(p?.throughput)))
}

pub fn check_requirements(
    app: &AppGraph,
    infra: &Infrastructure,
    placement: &Placement,
) -> Result<RequirementCheck> {
    let delay_ms = h_delay(app, infra, placement)?;
    let throughput = h_throughput(app, infra, placement)?;
    Ok(RequirementCheck {
        feasible: delay_ms <= app.requirements.max_delay_ms
            && throughput >= app.requirements.min_throughput,
        delay_ms,
        throughput,
    })
}

pub fn validate_graph(app: &AppGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();

    for f in &app.functions {
        let subject = format!("function {}", f.id);
        if !ids.insert(f.id.as_str()) {
            out.push(Violation::new(&subject, format!("duplicate function id {}", f.id)));
        }
        if f.perf_profile.is_empty() {
            out.push(Violation::new(&subject, "empty performance profile"));
        }
        for (tier, prof) in &f.perf_profile {
            if !(prof.delay_ms >= 0.0) || !prof.delay_ms.is_finite() {
                out.push(Violation::new(&subject, format!("invalid delay on tier {tier}")));
            }
            if !(prof.throughput > 0.0) {
                out.push(Violation::new(
                    &subject,
                    format!("non-positive throughput on tier {tier}"),
                ));
            }
        }
        if let Some(t) = &f.tier_constraint {
            if !f.perf_profile.contains_key(t) {
                out.push(Violation::new(
                    &subject,
                    format!("tier constraint {t} has no profile entry"),
                ));
            }
        }
    }

    for (src, dst) in &app.edges {
        for end in [src, dst] {
            if !ids.contains(end.as_str()) {
                out.push(Violation::new(
                    format!("edge {src}->{dst}"),
                    format!("unknown function {end}"),
                ));
            }
        }
    }
    if has_cycle(app) {
        out.push(Violation::new("graph", "cycle detected"));
    }

    if app.critical_path.is_empty() {
        out.push(Violation::new("critical path", "empty"));
    }
    for fid in &app.critical_path {
        if !ids.contains(fid.as_str()) {
            out.push(Violation::new(
                "critical path",
                format!("unknown function {fid}"),
            ));
        }
    }

    let r = &app.requirements;
    if !(r.max_delay_ms > 0.0) {
        out.push(Violation::new("requirements", "max delay must be positive"));
    }
    if !(r.min_throughput > 0.0) {
        out.push(Violation::new("requirements", "min throughput must be positive"));
    }
    out
}

/// Kahn's algorithm; edges to unknown functions are ignored here and reported
/// separately.
fn has_cycle(app: &AppGraph) -> bool {
    let index: BTreeMap<&str, usize> = app
        .functions
        .iter()
        .enumerate()
        .map(|(i, f)| (f.id.as_str(), i))
        .collect();
    let n = app.functions.len();
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for (s, d) in &app.edges {
        if let (Some(&s), Some(&d)) = (index.get(s.as_str()), index.get(d.as_str())) {
            succ[s].push(d);
            indeg[d] += 1;
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut visited = 0;
    while let Some(i) = ready.pop() {
        visited += 1;
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(j);
            }
        }
    }
    visited < n
}
