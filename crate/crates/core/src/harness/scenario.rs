//! Scenario files: one TOML document describing the infrastructure, the
//! application, the coupling models (inline or fitted from grid files), solver
//! settings, a static baseline and an optional sweep.
//!
//! Grid paths are resolved relative to the scenario file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::load_grid;
use super::sweep::{SweepMode, SweepSpec};
use crate::appgraph::{validate_graph, AppGraph, FunctionSpec, Requirements, TierProfile};
use crate::coupling::{
    derive_min_resource_samples, fit_linear, regression_metrics, CouplingKey, CouplingSet,
    LinearCoupling, PerfUnit, RegressionMetrics,
};
use crate::error::{Error, Result};
use crate::fabric::{validate_infrastructure, ComputeNode, Infrastructure, ResourceType, Tier};
use crate::orchestrator::{Allocations, Placement, SolverConfig, DEFAULT_ETA};
use crate::validate::Violation;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: u32,
    name: Option<String>,
    infrastructure: RawInfra,
    application: RawApp,
    #[serde(default)]
    couplings: RawCouplings,
    #[serde(default)]
    solver: RawSolver,
    static_baseline: Option<RawStatic>,
    sweep: Option<RawSweep>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInfra {
    tiers: Vec<String>,
    resource_types: Option<Vec<ResourceType>>,
    nodes: Vec<RawNode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: String,
    tier: String,
    capacity: BTreeMap<ResourceType, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawApp {
    functions: Vec<RawFunction>,
    #[serde(default)]
    edges: Vec<(String, String)>,
    critical_path: Vec<String>,
    requirements: Requirements,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    id: String,
    tier_constraint: Option<String>,
    profile: BTreeMap<String, TierProfile>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawCouplings {
    p_max: Option<f64>,
    #[serde(default)]
    inline: Vec<RawInline>,
    #[serde(default)]
    grid: Vec<RawGrid>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInline {
    key: String,
    alpha: f64,
    beta: f64,
    gamma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    key: String,
    path: PathBuf,
    p_targets: Option<Vec<f64>>,
    #[serde(default)]
    unit: PerfUnit,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    eta: Option<f64>,
    #[serde(default)]
    floors: Vec<RawAmount>,
    #[serde(default)]
    caps: Vec<RawAmount>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAmount {
    function: String,
    resource: ResourceType,
    amount: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStatic {
    allocations: Vec<RawAmount>,
    placement: Option<BTreeMap<String, String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    function: String,
    resource: ResourceType,
    #[serde(default)]
    mode: SweepMode,
    levels: Vec<f64>,
}

/// Fixed allocations the comparison baseline runs with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticBaseline {
    pub allocations: Allocations,
    /// Defaults to the first placement that meets the requirements.
    pub placement: Option<Placement>,
}

/// Provenance of a coupling model fitted from a grid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub key: CouplingKey,
    pub path: PathBuf,
    pub samples: usize,
    pub model: LinearCoupling,
    pub metrics: RegressionMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub infrastructure: Infrastructure,
    pub application: AppGraph,
    pub couplings: CouplingSet,
    pub solver: SolverConfig,
    pub baseline: Option<StaticBaseline>,
    pub sweep: Option<SweepSpec>,
    pub fits: Vec<FitSummary>,
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_scenario(&text, base).map_err(|e| match e {
        Error::InvalidInput(m) => Error::parse(path, m),
        other => other,
    })
}

/// Parses scenario text; grid paths are resolved against `base_dir`.
///
/// Syntax errors come back as `InvalidInput`; semantic problems are collected
/// into a single `Validation` error.
pub fn parse_scenario(text: &str, base_dir: &Path) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut v = Vec::new();
    if raw.schema_version != SCHEMA_VERSION {
        v.push(Violation::new(
            "schema_version",
            format!("unsupported version {} (expected {SCHEMA_VERSION})", raw.schema_version),
        ));
    }

    let tiers: Vec<&str> = raw.infrastructure.tiers.iter().map(String::as_str).collect();
    let mut infra = Infrastructure::new(&tiers);
    if let Some(rt) = raw.infrastructure.resource_types {
        infra.resource_types = rt;
    }
    for n in raw.infrastructure.nodes {
        infra.nodes.push(ComputeNode {
            id: n.id,
            tier: Tier::new(n.tier),
            capacity: n.capacity,
        });
    }
    v.extend(validate_infrastructure(&infra));

    let app = AppGraph {
        functions: raw
            .application
            .functions
            .into_iter()
            .map(|f| FunctionSpec {
                id: f.id,
                tier_constraint: f.tier_constraint.map(Tier::new),
                perf_profile: f.profile.into_iter().map(|(t, p)| (Tier::new(t), p)).collect(),
            })
            .collect(),
        edges: raw.application.edges,
        critical_path: raw.application.critical_path,
        requirements: raw.application.requirements,
    };
    v.extend(validate_graph(&app));
    for f in &app.functions {
        for t in f.perf_profile.keys().chain(f.tier_constraint.iter()) {
            if !infra.tiers.contains(t) {
                v.push(Violation::new(
                    format!("function {}", f.id),
                    format!("tier {t} not declared"),
                ));
            }
        }
    }

    let check_ref = |v: &mut Vec<Violation>, subject: &str, f: &str, r: &ResourceType| {
        if app.function(f).is_none() {
            v.push(Violation::new(subject, format!("unknown function {f}")));
        }
        if !infra.resource_types.contains(r) {
            v.push(Violation::new(subject, format!("unknown resource type {r}")));
        }
    };

    let mut models = BTreeMap::new();
    let mut fits = Vec::new();
    let mut grid_max: Option<f64> = None;
    for c in raw.couplings.inline {
        let subject = format!("coupling {}", c.key);
        match c.key.parse::<CouplingKey>() {
            Ok(key) => {
                check_ref(&mut v, &subject, &key.src_fn, &key.src_res);
                check_ref(&mut v, &subject, &key.dst_fn, &key.dst_res);
                if models
                    .insert(key, LinearCoupling::new(c.alpha, c.beta, c.gamma))
                    .is_some()
                {
                    v.push(Violation::new(subject, "declared twice"));
                }
            }
            Err(e) => v.push(Violation::new(subject, e.to_string())),
        }
    }
    for g in raw.couplings.grid {
        let subject = format!("coupling {}", g.key);
        let key = match g.key.parse::<CouplingKey>() {
            Ok(k) => k,
            Err(e) => {
                v.push(Violation::new(subject, e.to_string()));
                continue;
            }
        };
        check_ref(&mut v, &subject, &key.src_fn, &key.src_res);
        check_ref(&mut v, &subject, &key.dst_fn, &key.dst_res);
        let path = base_dir.join(&g.path);
        let grid = load_grid(&path, g.unit)?;
        let targets = g.p_targets.unwrap_or_else(|| grid.default_p_targets());
        let samples = derive_min_resource_samples(&grid, &targets)?;
        let model = fit_linear(&samples)?;
        let metrics = regression_metrics(&model, &samples)?;
        grid_max = Some(grid_max.map_or(grid.max_perf(), |m| m.max(grid.max_perf())));
        if models.insert(key.clone(), model).is_some() {
            v.push(Violation::new(subject, "declared twice"));
        }
        fits.push(FitSummary {
            key,
            path,
            samples: samples.len(),
            model,
            metrics,
        });
    }

    let p_max = match (raw.couplings.p_max, grid_max) {
        (Some(p), _) => p,
        (None, Some(p)) => p,
        (None, None) => {
            v.push(Violation::new(
                "couplings",
                "p_max is required when no grid file is given",
            ));
            f64::NAN
        }
    };
    let couplings = CouplingSet {
        couplings: models,
        p_max,
    };
    if p_max.is_nan() {
        v.extend(
            couplings
                .validate()
                .into_iter()
                .filter(|x| !x.message.contains("p_max")),
        );
    } else {
        v.extend(couplings.validate());
    }

    let mut solver = SolverConfig::new(raw.solver.eta.unwrap_or(DEFAULT_ETA), p_max);
    for a in raw.solver.floors {
        check_ref(&mut v, "solver floor", &a.function, &a.resource);
        solver.allocation_floor.insert((a.function, a.resource), a.amount);
    }
    for a in raw.solver.caps {
        check_ref(&mut v, "solver cap", &a.function, &a.resource);
        solver.allocation_cap.insert((a.function, a.resource), a.amount);
    }
    v.extend(
        solver
            .validate()
            .into_iter()
            .filter(|x| !x.message.contains("p_max")),
    );

    let baseline = raw.static_baseline.map(|s| {
        let mut allocations = Allocations::new();
        for a in s.allocations {
            check_ref(&mut v, "static baseline", &a.function, &a.resource);
            if !(a.amount >= 0.0) || !a.amount.is_finite() {
                v.push(Violation::new(
                    "static baseline",
                    format!("{}/{} must be a nonnegative number", a.function, a.resource),
                ));
            }
            allocations.insert((a.function, a.resource), a.amount);
        }
        let placement = s.placement.map(|assignment| {
            for (f, n) in &assignment {
                if app.function(f).is_none() {
                    v.push(Violation::new("static baseline", format!("unknown function {f}")));
                }
                if infra.node(n).is_none() {
                    v.push(Violation::new("static baseline", format!("unknown node {n}")));
                }
            }
            for f in &app.functions {
                if !assignment.contains_key(&f.id) {
                    v.push(Violation::new(
                        "static baseline",
                        format!("placement misses function {}", f.id),
                    ));
                }
            }
            Placement { assignment }
        });
        StaticBaseline {
            allocations,
            placement,
        }
    });

    let sweep = raw.sweep.map(|s| {
        check_ref(&mut v, "sweep", &s.function, &s.resource);
        if s.levels.is_empty() {
            v.push(Violation::new("sweep", "no levels"));
        }
        if s.levels.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            v.push(Violation::new("sweep", "levels must be positive"));
        }
        let up = s.levels.windows(2).all(|w| w[0] < w[1]);
        let down = s.levels.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            v.push(Violation::new("sweep", "levels must be strictly monotone"));
        }
        SweepSpec {
            function: s.function,
            resource: s.resource,
            mode: s.mode,
            levels: s.levels,
        }
    });

    if !v.is_empty() {
        return Err(Error::Validation(v));
    }
    Ok(Scenario {
        name: raw.name.unwrap_or_else(|| "scenario".to_string()),
        infrastructure: infra,
        application: app,
        couplings,
        solver,
        baseline,
        sweep,
        fits,
    })
}
