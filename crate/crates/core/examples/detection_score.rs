//! Score a detection log with the default (count) weights, at a looser IoU
//! threshold, and with every frame weighted equally.

use std::path::Path;

use coupled_alloc::harness::{detection_score, load_detection_log, match_detections};

fn main() -> coupled_alloc::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/detections.csv");
    let mut log = load_detection_log(&path)?;

    for f in &log.frames {
        let tp = match_detections(&f.ground_truth, &f.predictions, 0.5);
        println!(
            "{}: {} objects, {} predictions, {} matched",
            f.id,
            f.ground_truth.len(),
            f.predictions.len(),
            tp
        );
    }
    println!("score (count weights)   {:.4}", detection_score(&log, 0.5)?);
    println!("score at IoU 0.3        {:.4}", detection_score(&log, 0.3)?);

    log.weights = Some(log.frames.iter().map(|f| (f.id.clone(), 1.0)).collect());
    println!("score (uniform weights) {:.4}", detection_score(&log, 0.5)?);
    Ok(())
}
