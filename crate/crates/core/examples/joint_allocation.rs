//! Solve placement and allocation together, compare with a fixed baseline,
//! and audit the result against the model.

use std::path::Path;

use coupled_alloc::fabric::ResourceType;
use coupled_alloc::harness::load_scenario;
use coupled_alloc::orchestrator::{audit_plan, compare, solve_joint, static_allocate};

fn main() -> coupled_alloc::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/substitutes.toml");
    let s = load_scenario(&path)?;
    let plan = solve_joint(&s.application, &s.infrastructure, &s.couplings, &s.solver)?;

    println!("placement {:?}", plan.placement.assignment);
    for ((f, r), v) in &plan.allocations {
        if *v > 0.0 {
            println!("  {f:>3} {r}  {v:.4}");
        }
    }
    println!("performance {:.2}, objective {:.4}", plan.performance, plan.objective_value);

    // Two detector cores, and the stream gets the full 20 Mbps.
    let mut fixed = s.baseline.clone().unwrap().allocations;
    fixed.insert(("F1".into(), ResourceType::Network), 20.0);
    let base = static_allocate(
        &s.application,
        &s.infrastructure,
        &s.couplings,
        s.solver.eta,
        &fixed,
        &plan.placement,
    )?;
    let cmp = compare(&plan, &base)?;
    println!(
        "vs baseline: compute -{:.1}%, network -{:.1}%, performance {:+.2}",
        cmp.compute_saving_pct, cmp.network_saving_pct, cmp.performance_delta
    );

    let violations = audit_plan(&s.application, &s.infrastructure, &s.couplings, &plan);
    println!("audit: {} violations", violations.len());
    Ok(())
}
