//! File formats and experiment drivers: scenario loading, grid and detection
//! logs, sweeps and report emission.

pub mod detection;
pub mod grid;
pub mod report;
pub mod scenario;
pub mod sweep;

pub use detection::{
    detection_score, iou, load_detection_log, load_frame_weights, match_detections, BBox,
    DetectionLog, Frame, DEFAULT_IOU_THRESHOLD,
};
pub use grid::load_grid;
pub use report::{emit_report, load_table_json, Cell, Format, Report, Table};
pub use scenario::{load_scenario, parse_scenario, FitSummary, Scenario, StaticBaseline};
pub use sweep::{run_sweep, run_sweep_with, SweepMode, SweepResult, SweepRow, SweepSpec};
