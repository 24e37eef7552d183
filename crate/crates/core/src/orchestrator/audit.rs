use super::AllocationPlan;
use crate::appgraph::{check_requirements, AppGraph};
use crate::coupling::CouplingSet;
use crate::fabric::Infrastructure;
use crate::validate::Violation;

/// Tolerance for capacity and coupling checks on finished plans.
pub const FEASIBILITY_TOL: f64 = 1e-7;

/// Re-checks a finished plan against the model directly, independent of how
/// it was produced: couplings, per-function and per-node capacity, one host
/// per function within its tier, end-to-end requirements, and variable
/// domains.
pub fn audit_plan(
    app: &AppGraph,
    infra: &Infrastructure,
    couplings: &CouplingSet,
    plan: &AllocationPlan,
) -> Vec<Violation> {
    let tol = FEASIBILITY_TOL;
    let mut out = Vec::new();
    let amount = |f: &str, r| {
        plan.allocations
            .get(&(f.to_string(), r))
            .copied()
            .unwrap_or(0.0)
    };

    // Single host per function, on an allowed tier.
    for f in &app.functions {
        let subject = format!("function {}", f.id);
        match plan.placement.node_of(&f.id).map(|n| (n, infra.node(n))) {
            None => out.push(Violation::new(&subject, "not placed")),
            Some((n, None)) => out.push(Violation::new(&subject, format!("unknown node {n}"))),
            Some((n, Some(node))) => {
                if let Some(t) = &f.tier_constraint {
                    if &node.tier != t {
                        out.push(Violation::new(
                            &subject,
                            format!("placed on {n} in tier {} but constrained to {t}", node.tier),
                        ));
                    }
                }
                for r in &infra.resource_types {
                    let y = amount(&f.id, r.clone());
                    if y < -tol {
                        out.push(Violation::new(&subject, format!("negative {r} allocation")));
                    }
                    if y > node.capacity_of(r) + tol {
                        out.push(Violation::new(
                            &subject,
                            format!("{r} allocation {y} exceeds host {n} capacity"),
                        ));
                    }
                }
            }
        }
    }
    for placed in plan.placement.assignment.keys() {
        if app.function(placed).is_none() {
            out.push(Violation::new(
                format!("function {placed}"),
                "placed but not part of the application",
            ));
        }
    }

    // Shared node capacity.
    for node in &infra.nodes {
        for r in &infra.resource_types {
            let used: f64 = app
                .functions
                .iter()
                .filter(|f| plan.placement.node_of(&f.id) == Some(node.id.as_str()))
                .map(|f| amount(&f.id, r.clone()))
                .sum();
            if used > node.capacity_of(r) + tol {
                out.push(Violation::new(
                    format!("node {}", node.id),
                    format!("{r} usage {used} exceeds capacity {}", node.capacity_of(r)),
                ));
            }
        }
    }

    // Couplings at the plan's performance.
    for (key, c) in couplings.iter() {
        let need = c.raw(amount(&key.src_fn, key.src_res.clone()), plan.performance);
        let have = amount(&key.dst_fn, key.dst_res.clone());
        if need > have + tol {
            out.push(Violation::new(
                format!("coupling {key}"),
                format!("requires {need} but {have} allocated"),
            ));
        }
    }

    match check_requirements(app, infra, &plan.placement) {
        Ok(r) if !r.feasible => out.push(Violation::new(
            "requirements",
            format!(
                "delay {} / throughput {} misses the end-to-end target",
                r.delay_ms, r.throughput
            ),
        )),
        Ok(_) => {}
        Err(e) => out.push(Violation::new("requirements", e.to_string())),
    }

    if plan.performance < -tol || plan.performance > couplings.p_max + tol {
        out.push(Violation::new(
            "performance",
            format!("{} outside [0, {}]", plan.performance, couplings.p_max),
        ));
    }
    out
}
