//! Performance-grid CSV files: `x_level,y_level,performance`, one row per
//! measured cell, in any order.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::coupling::{PerfUnit, PerformanceGrid};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct Row {
    x_level: f64,
    y_level: f64,
    performance: f64,
}

fn key(v: f64) -> u64 {
    // Bit patterns order positive floats correctly; axes are validated > 0.
    v.to_bits()
}

pub fn load_grid(path: &Path, unit: PerfUnit) -> Result<PerformanceGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut cells: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse(path, format!("line {line}: {e}")))?;
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(row.x_level) || !positive(row.y_level) {
            return Err(Error::parse(path, format!("line {line}: levels must be positive")));
        }
        if cells
            .insert((key(row.x_level), key(row.y_level)), row.performance)
            .is_some()
        {
            return Err(Error::parse(
                path,
                format!("line {line}: duplicate cell ({}, {})", row.x_level, row.y_level),
            ));
        }
    }
    if cells.is_empty() {
        return Err(Error::parse(path, "grid has no rows"));
    }

    let mut xs: Vec<u64> = cells.keys().map(|k| k.0).collect();
    let mut ys: Vec<u64> = cells.keys().map(|k| k.1).collect();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();

    let mut perf = Vec::with_capacity(xs.len());
    for &x in &xs {
        let mut row = Vec::with_capacity(ys.len());
        for &y in &ys {
            match cells.get(&(x, y)) {
                Some(&v) => row.push(v),
                None => {
                    return Err(Error::parse(
                        path,
                        format!(
                            "grid not fully populated: missing ({}, {})",
                            f64::from_bits(x),
                            f64::from_bits(y)
                        ),
                    ))
                }
            }
        }
        perf.push(row);
    }
    let grid = PerformanceGrid {
        x_axis: xs.into_iter().map(f64::from_bits).collect(),
        y_axis: ys.into_iter().map(f64::from_bits).collect(),
        perf,
        unit,
    };
    let violations = grid.validate();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    Ok(grid)
}
