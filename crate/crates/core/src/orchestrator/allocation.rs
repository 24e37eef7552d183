use rayon::prelude::*;

use super::{enumerate_placements, Allocations, AllocationPlan, Placement, SolverConfig};
use crate::appgraph::{check_requirements, AppGraph};
use crate::coupling::CouplingSet;
use crate::error::{Error, Result};
use crate::fabric::{Infrastructure, ResourceType};
use crate::lp::{self, Bounds, LinearProgram, LpStatus, Relation};

/// Variable layout of the per-placement LP: one `y` per (function, resource)
/// in application x infrastructure order, then `p`.
#[derive(Debug, Clone)]
pub struct AllocationLayout {
    pub functions: Vec<String>,
    pub resources: Vec<ResourceType>,
}

impl AllocationLayout {
    pub fn new(app: &AppGraph, infra: &Infrastructure) -> Self {
        Self {
            functions: app.functions.iter().map(|f| f.id.clone()).collect(),
            resources: infra.resource_types.clone(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.functions.len() * self.resources.len() + 1
    }

    pub fn y(&self, function: usize, resource: usize) -> usize {
        function * self.resources.len() + resource
    }

    pub fn p(&self) -> usize {
        self.num_vars() - 1
    }

    fn index_of(&self, function: &str, resource: &ResourceType) -> Result<usize> {
        let f = self
            .functions
            .iter()
            .position(|f| f == function)
            .ok_or_else(|| Error::unknown("function", function))?;
        let r = self
            .resources
            .iter()
            .position(|r| r == resource)
            .ok_or_else(|| Error::unknown("resource type", resource.as_str()))?;
        Ok(self.y(f, r))
    }

    pub fn variable_name(&self, var: usize) -> String {
        if var == self.p() {
            "p".to_string()
        } else {
            let r = self.resources.len();
            format!("y[{},{}]", self.functions[var / r], self.resources[var % r])
        }
    }
}

/// `eta * sum(y) - (1 - eta) * p`
pub fn objective_value(eta: f64, allocations: &Allocations, performance: f64) -> f64 {
    eta * allocations.values().sum::<f64>() - (1.0 - eta) * performance
}

fn hosting_nodes(
    app: &AppGraph,
    infra: &Infrastructure,
    placement: &Placement,
) -> Result<Vec<usize>> {
    app.functions
        .iter()
        .map(|f| {
            let node = placement
                .node_of(&f.id)
                .ok_or_else(|| Error::MissingPlacement {
                    function: f.id.clone(),
                })?;
            infra
                .node_index(node)
                .ok_or_else(|| Error::unknown("node", node))
        })
        .collect()
}

/// Resource-allocation LP for a fixed placement.
///
/// Rows, in order: one per coupling (`alpha*y_src + beta*p + gamma <= y_dst`),
/// one per `y` capping it at its host's capacity (and any per-function cap),
/// and one per (hosting node, resource) bounding the sum over co-located
/// functions. Floors are lower bounds on `y`; `p` lies in `[0, p_max]`.
pub fn build_allocation_lp(
    app: &AppGraph,
    infra: &Infrastructure,
    placement: &Placement,
    couplings: &CouplingSet,
    cfg: &SolverConfig,
) -> Result<LinearProgram> {
    let layout = AllocationLayout::new(app, infra);
    let hosts = hosting_nodes(app, infra, placement)?;
    let n = layout.num_vars();
    let p = layout.p();

    let mut objective = vec![cfg.eta; n];
    objective[p] = -(1.0 - cfg.eta);
    let mut lp = LinearProgram::new(n).minimize(&objective);
    lp.bounds[p] = Bounds::new(0.0, cfg.p_max);
    for ((f, r), &floor) in &cfg.allocation_floor {
        let j = layout.index_of(f, r)?;
        lp.bounds[j].lower = floor;
    }

    for (key, c) in couplings.iter() {
        let src = layout.index_of(&key.src_fn, &key.src_res)?;
        let dst = layout.index_of(&key.dst_fn, &key.dst_res)?;
        lp.constrain(
            vec![(src, c.alpha), (dst, -1.0), (p, c.beta)],
            Relation::Le,
            -c.gamma,
        );
    }

    for (fi, f) in layout.functions.iter().enumerate() {
        let node = &infra.nodes[hosts[fi]];
        for (ri, r) in layout.resources.iter().enumerate() {
            let mut cap = node.capacity_of(r);
            if let Some(&extra) = cfg.allocation_cap.get(&(f.clone(), r.clone())) {
                cap = cap.min(extra);
            }
            lp.constrain(vec![(layout.y(fi, ri), 1.0)], Relation::Le, cap);
        }
    }

    for (mi, node) in infra.nodes.iter().enumerate() {
        let hosted: Vec<usize> = (0..layout.functions.len())
            .filter(|&fi| hosts[fi] == mi)
            .collect();
        if hosted.is_empty() {
            continue;
        }
        for (ri, r) in layout.resources.iter().enumerate() {
            let coeffs = hosted.iter().map(|&fi| (layout.y(fi, ri), 1.0)).collect();
            lp.constrain(coeffs, Relation::Le, node.capacity_of(r));
        }
    }
    Ok(lp)
}

fn snap(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        0.0
    } else {
        v
    }
}

/// Optimal allocation for one placement, or `None` if its LP is infeasible.
pub fn solve_placement(
    app: &AppGraph,
    infra: &Infrastructure,
    placement: &Placement,
    couplings: &CouplingSet,
    cfg: &SolverConfig,
) -> Result<Option<AllocationPlan>> {
    let lp = build_allocation_lp(app, infra, placement, couplings, cfg)?;
    let sol = lp::solve(&lp)?;
    let point = match sol.status {
        LpStatus::Optimal => sol.point.expect("optimal solution carries a point"),
        LpStatus::Infeasible => return Ok(None),
        LpStatus::Unbounded => {
            return Err(Error::InvalidInput(
                "allocation LP is unbounded; check capacities".into(),
            ))
        }
    };
    let layout = AllocationLayout::new(app, infra);
    let mut allocations = Allocations::new();
    for (fi, f) in layout.functions.iter().enumerate() {
        for (ri, r) in layout.resources.iter().enumerate() {
            allocations.insert((f.clone(), r.clone()), snap(point[layout.y(fi, ri)]));
        }
    }
    let req = check_requirements(app, infra, placement)?;
    Ok(Some(AllocationPlan {
        placement: placement.clone(),
        allocations,
        performance: snap(point[layout.p()]),
        objective_value: sol.objective_value.expect("optimal solution carries a value"),
        delay_ms: req.delay_ms,
        throughput: req.throughput,
        couplings_satisfied: true,
    }))
}

/// Best plan over every feasible placement.
///
/// Placements are solved in parallel; results keep their enumeration index so
/// the reduction is independent of completion order.
pub fn solve_joint(
    app: &AppGraph,
    infra: &Infrastructure,
    couplings: &CouplingSet,
    cfg: &SolverConfig,
) -> Result<AllocationPlan> {
    let placements = enumerate_placements(app, infra)?;
    if placements.is_empty() {
        return Err(Error::NoFeasiblePlacement);
    }
    let solved: Vec<(usize, Option<AllocationPlan>)> = placements
        .par_iter()
        .enumerate()
        .map(|(i, p)| solve_placement(app, infra, p, couplings, cfg).map(|plan| (i, plan)))
        .collect::<Result<_>>()?;

    let mut best: Option<(usize, AllocationPlan)> = None;
    for (i, plan) in solved {
        let Some(plan) = plan else { continue };
        let replace = match &best {
            None => true,
            Some((bi, b)) => {
                plan.objective_value < b.objective_value - 1e-12
                    || (plan.objective_value <= b.objective_value + 1e-12 && i < *bi)
            }
        };
        if replace {
            best = Some((i, plan));
        }
    }
    best.map(|(_, p)| p).ok_or(Error::AllPlacementsInfeasible)
}

/// Largest performance the given allocations support under the coupling
/// models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub performance: f64,
    /// False when no `p` in `[0, p_max]` satisfies every coupling.
    pub feasible: bool,
}

/// Largest `p` in `[0, p_max]` with `alpha*y_src + beta*p + gamma <= y_dst`
/// for every coupling. Missing allocations count as zero.
///
/// Couplings with `beta > 0` cap `p`; `beta < 0` ones put a floor under it;
/// `beta == 0` ones either hold or make every `p` infeasible.
pub fn predicted_performance(couplings: &CouplingSet, allocations: &Allocations) -> Prediction {
    const TOL: f64 = 1e-9;
    let amount = |f: &str, r: &ResourceType| {
        allocations
            .get(&(f.to_string(), r.clone()))
            .copied()
            .unwrap_or(0.0)
    };
    let mut upper = couplings.p_max;
    let mut lower = 0.0f64;
    let mut ok = true;
    for (key, c) in couplings.iter() {
        let slack =
            amount(&key.dst_fn, &key.dst_res) - c.alpha * amount(&key.src_fn, &key.src_res) - c.gamma;
        if c.beta > 0.0 {
            upper = upper.min(slack / c.beta);
        } else if c.beta < 0.0 {
            lower = lower.max(slack / c.beta);
        } else if slack < -TOL {
            ok = false;
        }
    }
    if !ok || upper < lower - TOL {
        return Prediction {
            performance: 0.0,
            feasible: false,
        };
    }
    Prediction {
        performance: upper.clamp(0.0, couplings.p_max),
        feasible: true,
    }
}

/// Baseline plan that allocates exactly `fixed` (zero elsewhere) on
/// `placement` and reads its performance off the coupling models.
pub fn static_allocate(
    app: &AppGraph,
    infra: &Infrastructure,
    couplings: &CouplingSet,
    eta: f64,
    fixed: &Allocations,
    placement: &Placement,
) -> Result<AllocationPlan> {
    let layout = AllocationLayout::new(app, infra);
    let hosts = hosting_nodes(app, infra, placement)?;
    for ((f, r), &v) in fixed {
        layout.index_of(f, r)?;
        if !(v >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "fixed allocation of {r} to {f} is negative"
            )));
        }
    }

    let mut allocations = Allocations::new();
    for f in &layout.functions {
        for r in &layout.resources {
            let key = (f.clone(), r.clone());
            let v = fixed.get(&key).copied().unwrap_or(0.0);
            allocations.insert(key, v);
        }
    }

    for (mi, node) in infra.nodes.iter().enumerate() {
        for r in &layout.resources {
            let used: f64 = layout
                .functions
                .iter()
                .enumerate()
                .filter(|(fi, _)| hosts[*fi] == mi)
                .map(|(_, f)| allocations[&(f.clone(), r.clone())])
                .sum();
            let capacity = node.capacity_of(r);
            if used > capacity + super::FEASIBILITY_TOL {
                return Err(Error::CapacityExceeded {
                    node: node.id.clone(),
                    resource: r.to_string(),
                    used,
                    capacity,
                });
            }
        }
    }

    let pred = predicted_performance(couplings, &allocations);
    let req = check_requirements(app, infra, placement)?;
    Ok(AllocationPlan {
        placement: placement.clone(),
        objective_value: objective_value(eta, &allocations, pred.performance),
        allocations,
        performance: pred.performance,
        delay_ms: req.delay_ms,
        throughput: req.throughput,
        couplings_satisfied: pred.feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::appgraph::{FunctionSpec, Requirements};
    use crate::coupling::{CouplingKey, LinearCoupling};
    use crate::fabric::ComputeNode;
    use crate::orchestrator::audit_plan;
    use ResourceType::{Compute as Com, Network as Net};

    fn infra(caps: &[(&str, f64, f64)]) -> Infrastructure {
        caps.iter().fold(Infrastructure::new(&["edge"]), |i, (id, c, n)| {
            i.with_node(
                ComputeNode::new(*id, "edge")
                    .with_capacity(Com, *c)
                    .with_capacity(Net, *n),
            )
        })
    }

    fn app(ids: &[&str]) -> AppGraph {
        AppGraph {
            functions: ids
                .iter()
                .map(|id| FunctionSpec::new(*id).on_tier("edge", 1.0, 10.0))
                .collect(),
            edges: vec![],
            critical_path: ids.iter().map(|s| s.to_string()).collect(),
            requirements: Requirements {
                max_delay_ms: 100.0,
                min_throughput: 1.0,
            },
        }
    }

    fn key(a: &str, ra: ResourceType, b: &str, rb: ResourceType) -> CouplingKey {
        CouplingKey::new(a, ra, b, rb)
    }

    fn alloc(entries: &[(&str, ResourceType, f64)]) -> Allocations {
        entries
            .iter()
            .map(|(f, r, v)| ((f.to_string(), r.clone()), *v))
            .collect()
    }

    #[test]
    fn nothing_forces_usage_at_full_cost_weight() {
        let (a, i) = (app(&["F1"]), infra(&[("n1", 2.0, 10.0)]));
        let cs = CouplingSet::new(100.0);
        let plan = solve_joint(&a, &i, &cs, &SolverConfig::new(1.0, 100.0)).unwrap();
        assert!(plan.allocations.values().all(|&v| v == 0.0));
        assert_eq!(plan.objective_value, 0.0);
    }

    #[test]
    fn performance_limited_by_coupling_and_capacity() {
        // 0.1 p <= y_com <= 2  =>  p = 20, y_com = 2 when p_max = 100.
        let (a, i) = (app(&["F1"]), infra(&[("n1", 2.0, 10.0)]));
        let cs = CouplingSet::new(100.0)
            .with(key("F1", Net, "F1", Com), LinearCoupling::new(0.0, 0.1, 0.0));
        let cfg = SolverConfig::new(0.0, 100.0);
        let plan = solve_joint(&a, &i, &cs, &cfg).unwrap();
        assert!((plan.performance - 20.0).abs() < 1e-9);
        assert!((plan.amount("F1", Com) - 2.0).abs() < 1e-9);

        // With p_max = 10 the ceiling binds first; y_com only needs to cover 1.
        let cs = CouplingSet { p_max: 10.0, ..cs };
        let plan = solve_joint(&a, &i, &cs, &SolverConfig::new(0.0, 10.0)).unwrap();
        assert!((plan.performance - 10.0).abs() < 1e-9);
        assert!(plan.amount("F1", Com) >= 1.0 - 1e-9);
    }

    #[test]
    fn floors_are_respected() {
        let (a, i) = (app(&["F1"]), infra(&[("n1", 2.0, 10.0)]));
        let cfg = SolverConfig::new(1.0, 100.0).with_floor("F1", Net, 4.0);
        let plan = solve_joint(&a, &i, &CouplingSet::new(100.0), &cfg).unwrap();
        assert!(plan.amount("F1", Net) >= 4.0 - 1e-9);
    }

    #[test]
    fn floor_above_capacity_is_infeasible() {
        let (a, i) = (app(&["F1"]), infra(&[("n1", 2.0, 10.0)]));
        let cfg = SolverConfig::new(0.5, 100.0).with_floor("F1", Com, 3.0);
        let err = solve_joint(&a, &i, &CouplingSet::new(100.0), &cfg).unwrap_err();
        assert!(matches!(err, Error::AllPlacementsInfeasible));
    }

    #[test]
    fn coupling_on_unknown_function_is_an_error() {
        let (a, i) = (app(&["F1"]), infra(&[("n1", 2.0, 10.0)]));
        let cs = CouplingSet::new(100.0)
            .with(key("F9", Net, "F1", Com), LinearCoupling::new(0.0, 0.1, 0.0));
        let p = Placement::from_pairs([("F1", "n1")]);
        let err = build_allocation_lp(&a, &i, &p, &cs, &SolverConfig::new(0.5, 100.0)).unwrap_err();
        assert!(err.to_string().contains("F9"));
    }

    #[test]
    fn picks_the_roomier_node() {
        // One function, two nodes; compute needed is 0.1 p.
        // Small node: p <= 10 (cap 1). Big node: p <= 20 (cap 2).
        // eta = 0.01: objective = 0.01 * 0.1 p - 0.99 p, decreasing in p.
        // Hand optimum: small -0.989 * 10 = -9.89, big -0.989 * 20 = -19.78.
        let a = app(&["F1"]);
        let i = infra(&[("small", 1.0, 10.0), ("big", 2.0, 10.0)]);
        let cs = CouplingSet::new(100.0)
            .with(key("F1", Net, "F1", Com), LinearCoupling::new(0.0, 0.1, 0.0));
        let cfg = SolverConfig::new(0.01, 100.0);
        let plan = solve_joint(&a, &i, &cs, &cfg).unwrap();
        assert_eq!(plan.placement.node_of("F1"), Some("big"));
        assert!((plan.objective_value + 19.78).abs() < 1e-9);
        let small = solve_placement(&a, &i, &Placement::from_pairs([("F1", "small")]), &cs, &cfg)
            .unwrap()
            .unwrap();
        assert!((small.objective_value + 9.89).abs() < 1e-9);
        assert!(audit_plan(&a, &i, &cs, &plan).is_empty());
    }

    #[test]
    fn ties_go_to_first_placement() {
        let a = app(&["F1"]);
        let i = infra(&[("n1", 2.0, 10.0), ("n2", 2.0, 10.0)]);
        let plan = solve_joint(&a, &i, &CouplingSet::new(100.0), &SolverConfig::new(0.5, 100.0))
            .unwrap();
        assert_eq!(plan.placement.node_of("F1"), Some("n1"));
    }

    #[test]
    fn colocated_functions_share_capacity() {
        let a = app(&["F1", "F2"]);
        let i = infra(&[("n1", 2.0, 10.0)]);
        // Each function needs 0.02 p cores; together 0.04 p <= 2 => p <= 50.
        let cs = CouplingSet::new(100.0)
            .with(key("F1", Net, "F1", Com), LinearCoupling::new(0.0, 0.02, 0.0))
            .with(key("F2", Net, "F2", Com), LinearCoupling::new(0.0, 0.02, 0.0));
        let plan = solve_joint(&a, &i, &cs, &SolverConfig::new(0.0, 100.0)).unwrap();
        assert!((plan.performance - 50.0).abs() < 1e-9);
        assert!(plan.total(&Com) <= 2.0 + 1e-9);
    }

    #[test]
    fn prediction_examples() {
        let none = CouplingSet::new(100.0);
        let p = predicted_performance(&none, &Allocations::new());
        assert_eq!((p.performance, p.feasible), (100.0, true));

        let one = CouplingSet::new(100.0)
            .with(key("F1", Net, "F2", Com), LinearCoupling::new(0.0, 0.1, 0.0));
        let y = alloc(&[("F2", Com, 4.0)]);
        assert!((predicted_performance(&one, &y).performance - 40.0).abs() < 1e-12);
        let capped = CouplingSet { p_max: 30.0, ..one.clone() };
        assert_eq!(predicted_performance(&capped, &y).performance, 30.0);

        // Second bound: (2.5 - 0) / 0.1 = 25.
        let two = one.with(key("F2", Com, "F1", Net), LinearCoupling::new(0.0, 0.1, 0.0));
        let y = alloc(&[("F2", Com, 4.0), ("F1", Net, 2.5)]);
        assert!((predicted_performance(&two, &y).performance - 25.0).abs() < 1e-12);
    }

    #[test]
    fn prediction_with_nonpositive_beta() {
        // beta == 0: gamma 1 > y_dst 0 can never hold.
        let cs = CouplingSet::new(100.0)
            .with(key("F1", Net, "F1", Com), LinearCoupling::new(0.0, 0.0, 1.0));
        let p = predicted_performance(&cs, &Allocations::new());
        assert_eq!((p.performance, p.feasible), (0.0, false));

        // beta < 0: -0.1 p + 5 <= 2 needs p >= 30, fine up to p_max.
        let cs = CouplingSet::new(100.0)
            .with(key("F1", Net, "F1", Com), LinearCoupling::new(0.0, -0.1, 5.0));
        let y = alloc(&[("F1", Com, 2.0)]);
        let p = predicted_performance(&cs, &y);
        assert_eq!((p.performance, p.feasible), (100.0, true));
        let tight = CouplingSet { p_max: 20.0, ..cs };
        assert!(!predicted_performance(&tight, &y).feasible);
    }

    #[test]
    fn static_echoes_fixed_allocations() {
        let a = app(&["F1"]);
        let i = infra(&[("n1", 4.0, 20.0)]);
        let placement = Placement::from_pairs([("F1", "n1")]);
        let fixed = alloc(&[("F1", Com, 2.0), ("F1", Net, 10.0)]);
        let plan =
            static_allocate(&a, &i, &CouplingSet::new(100.0), 0.05, &fixed, &placement).unwrap();
        assert_eq!(plan.allocations, fixed);
        assert_eq!(plan.performance, 100.0);
        assert!((plan.objective_value - (0.05 * 12.0 - 0.95 * 100.0)).abs() < 1e-12);
    }

    #[test]
    fn static_over_capacity_is_rejected() {
        let a = app(&["F1"]);
        let i = infra(&[("n1", 1.0, 20.0)]);
        let placement = Placement::from_pairs([("F1", "n1")]);
        let fixed = alloc(&[("F1", Com, 2.0)]);
        let err = static_allocate(&a, &i, &CouplingSet::new(100.0), 0.05, &fixed, &placement)
            .unwrap_err();
        assert!(matches!(err, Error::CapacityExceeded { .. }));
    }

    #[test]
    fn static_performance_matches_scan() {
        let a = app(&["F1", "F2"]);
        let i = infra(&[("n1", 4.0, 20.0)]);
        let placement = Placement::from_pairs([("F1", "n1"), ("F2", "n1")]);
        let cs = CouplingSet::new(100.0)
            .with(key("F2", Com, "F1", Net), LinearCoupling::new(-0.8, 0.12, 0.5))
            .with(key("F1", Net, "F2", Com), LinearCoupling::new(-0.05, 0.015, 0.1));
        let fixed = alloc(&[("F2", Com, 1.0), ("F1", Net, 6.0)]);
        let plan = static_allocate(&a, &i, &cs, 0.05, &fixed, &placement).unwrap();

        // Scan p in steps of 0.01 for the largest value meeting every coupling.
        let mut best = None;
        for k in 0..=10_000 {
            let p = k as f64 * 0.01;
            let ok = cs.iter().all(|(key, c)| {
                let ys = fixed.get(&(key.src_fn.clone(), key.src_res.clone())).copied().unwrap_or(0.0);
                let yd = fixed.get(&(key.dst_fn.clone(), key.dst_res.clone())).copied().unwrap_or(0.0);
                c.alpha * ys + c.beta * p + c.gamma <= yd + 1e-12
            });
            if ok {
                best = Some(p);
            }
        }
        let best = best.unwrap();
        assert!(plan.performance >= best && plan.performance < best + 0.01);
    }
}
