//! Fit a compute/bandwidth coupling from the bundled detector grid.
//!
//! Each grid cell is the detection score measured at one (detector cores,
//! stream Mbps) pair. For every core count and target score we take the
//! least bandwidth that reaches the target, then regress it on cores and
//! score.

use std::path::Path;

use coupled_alloc::coupling::{
    derive_min_resource_samples, eval_coupling, fit_linear, regression_metrics, PerfUnit,
};
use coupled_alloc::harness::load_grid;

fn main() -> coupled_alloc::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/detector_grid.csv");
    let grid = load_grid(&path, PerfUnit::Percent)?;
    let targets = grid.default_p_targets();
    println!("{} x {} grid, targets {:.1?}", grid.x_axis.len(), grid.y_axis.len(), targets);

    let samples = derive_min_resource_samples(&grid, &targets)?;
    let model = fit_linear(&samples)?;
    let m = regression_metrics(&model, &samples)?;
    println!(
        "Mbps ~ {:.3} * cores {:+.3} * score {:+.3}   (mae {:.3}, rmse {:.3}, n = {})",
        model.alpha, model.beta, model.gamma, m.mae, m.rmse, samples.len()
    );

    for cores in [0.5, 1.0, 2.0] {
        println!(
            "  {cores} cores, score 80 -> {:.2} Mbps",
            eval_coupling(&model, cores, 80.0)
        );
    }
    Ok(())
}
