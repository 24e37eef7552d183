//! Drop the stream bandwidth step by step and watch the optimizer shift work
//! onto compute while the static baseline loses accuracy.
//!
//! Pass `--json` to print the report as JSON instead of CSV.

use std::path::Path;

use coupled_alloc::fabric::ResourceType;
use coupled_alloc::harness::{load_scenario, run_sweep, Format, Report};

fn main() -> coupled_alloc::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/substitutes.toml");
    let s = load_scenario(&path)?;
    let result = run_sweep(&s)?;

    for row in &result.rows {
        let (Some(o), Some(b)) = (&row.optimized, &row.baseline) else {
            println!("{:>5} Mbps  infeasible", row.level);
            continue;
        };
        println!(
            "{:>5} Mbps  optimized {:.2} cores @ {:>5.1}   static {:.2} cores @ {:>5.1}",
            row.level,
            o.total(&ResourceType::Compute),
            o.performance,
            b.total(&ResourceType::Compute),
            b.performance
        );
    }

    let format = if std::env::args().any(|a| a == "--json") {
        Format::Json
    } else {
        Format::Csv
    };
    print!("\n{}", result.to_table().render(format));
    Ok(())
}
