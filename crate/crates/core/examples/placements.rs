//! Which placements survive the tier constraints and end-to-end budget.

use std::path::Path;

use coupled_alloc::appgraph::check_requirements;
use coupled_alloc::harness::load_scenario;
use coupled_alloc::orchestrator::enumerate_placements;

fn main() -> coupled_alloc::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/watchlist.toml");
    let s = load_scenario(&path)?;
    let req = s.application.requirements;
    println!(
        "budget: delay <= {} ms, throughput >= {}",
        req.max_delay_ms, req.min_throughput
    );

    for p in enumerate_placements(&s.application, &s.infrastructure)? {
        let r = check_requirements(&s.application, &s.infrastructure, &p)?;
        let hosts: Vec<String> = p
            .assignment
            .iter()
            .map(|(f, n)| format!("{f}@{n}"))
            .collect();
        println!("  {:<40} {:>5.1} ms  {:>5.1}/s", hosts.join(" "), r.delay_ms, r.throughput);
    }
    Ok(())
}
