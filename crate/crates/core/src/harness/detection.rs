//! Object-detection scoring: IoU, true-positive matching and the per-frame
//! weighted recall score.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default IoU threshold for counting a prediction as a true positive.
pub const DEFAULT_IOU_THRESHOLD: f64 = 0.5;

/// Axis-aligned box in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.x_min < self.x_max && self.y_min < self.y_max
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let w = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let h = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = w * h;
    if inter == 0.0 {
        return 0.0;
    }
    inter / (a.area() + b.area() - inter)
}

/// Number of true positives: a one-to-one matching between ground truth and
/// predictions using only pairs with IoU at or above `threshold`.
///
/// Pairs are first accepted greedily by descending IoU (ties by ground-truth
/// index, then prediction index). Augmenting paths are then applied so that
/// no prediction is left unused when reassigning could pair it, which makes
/// the count a maximum matching.
pub fn match_detections(gt: &[BBox], pred: &[BBox], threshold: f64) -> usize {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (g, gb) in gt.iter().enumerate() {
        for (p, pb) in pred.iter().enumerate() {
            let v = iou(gb, pb);
            if v >= threshold {
                pairs.push((v, g, p));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut gt_match: Vec<Option<usize>> = vec![None; gt.len()];
    let mut pred_match: Vec<Option<usize>> = vec![None; pred.len()];
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); gt.len()];
    for &(_, g, p) in &pairs {
        adjacency[g].push(p);
        if gt_match[g].is_none() && pred_match[p].is_none() {
            gt_match[g] = Some(p);
            pred_match[p] = Some(g);
        }
    }

    fn augment(
        g: usize,
        adjacency: &[Vec<usize>],
        seen: &mut [bool],
        gt_match: &mut [Option<usize>],
        pred_match: &mut [Option<usize>],
    ) -> bool {
        for &p in &adjacency[g] {
            if seen[p] {
                continue;
            }
            seen[p] = true;
            let free = match pred_match[p] {
                None => true,
                Some(other) => augment(other, adjacency, seen, gt_match, pred_match),
            };
            if free {
                gt_match[g] = Some(p);
                pred_match[p] = Some(g);
                return true;
            }
        }
        false
    }

    for g in 0..gt.len() {
        if gt_match[g].is_none() {
            let mut seen = vec![false; pred.len()];
            augment(g, &adjacency, &mut seen, &mut gt_match, &mut pred_match);
        }
    }
    gt_match.iter().filter(|m| m.is_some()).count()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Frame {
    pub id: String,
    pub ground_truth: Vec<BBox>,
    pub predictions: Vec<BBox>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionLog {
    pub frames: Vec<Frame>,
    /// Optional per-frame weights; normalized over scorable frames.
    pub weights: Option<BTreeMap<String, f64>>,
}

/// `sum_f w_f * TP_f / GT_f` over frames with at least one ground-truth box.
///
/// Default weights are `GT_f / sum GT`, which makes the score the overall
/// recall. Explicit weights are rescaled to sum to one.
pub fn detection_score(log: &DetectionLog, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "IoU threshold {threshold} outside (0, 1]"
        )));
    }
    let scorable: Vec<&Frame> = log
        .frames
        .iter()
        .filter(|f| !f.ground_truth.is_empty())
        .collect();
    if scorable.is_empty() {
        return Err(Error::NoScorableFrames);
    }

    let raw_weights: Vec<f64> = match &log.weights {
        None => scorable.iter().map(|f| f.ground_truth.len() as f64).collect(),
        Some(w) => scorable
            .iter()
            .map(|f| match w.get(&f.id) {
                Some(&v) if v >= 0.0 && v.is_finite() => Ok(v),
                Some(_) => Err(Error::InvalidInput(format!(
                    "weight of frame {} must be nonnegative",
                    f.id
                ))),
                None => Err(Error::InvalidInput(format!("frame {} has no weight", f.id))),
            })
            .collect::<Result<_>>()?,
    };
    let total: f64 = raw_weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("frame weights sum to zero".into()));
    }

    Ok(scorable
        .iter()
        .zip(&raw_weights)
        .map(|(f, w)| {
            let tp = match_detections(&f.ground_truth, &f.predictions, threshold);
            w / total * tp as f64 / f.ground_truth.len() as f64
        })
        .sum())
}

#[derive(Debug, Deserialize)]
struct DetectionRow {
    frame_id: String,
    kind: String,
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

/// Reads `frame_id,kind,x_min,y_min,x_max,y_max` rows, `kind` being `gt` or
/// `pred`. Frames keep their order of first appearance.
pub fn load_detection_log(path: &Path) -> Result<DetectionLog> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    let mut frames: Vec<Frame> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    for (i, row) in reader.deserialize::<DetectionRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::parse(path, format!("line {line}: {e}")))?;
        let b = BBox::new(row.x_min, row.y_min, row.x_max, row.y_max);
        if !b.is_valid() {
            return Err(Error::parse(path, format!("line {line}: degenerate box")));
        }
        let slot = *index.entry(row.frame_id.clone()).or_insert_with(|| {
            frames.push(Frame {
                id: row.frame_id.clone(),
                ..Frame::default()
            });
            frames.len() - 1
        });
        match row.kind.as_str() {
            "gt" => frames[slot].ground_truth.push(b),
            "pred" => frames[slot].predictions.push(b),
            other => {
                return Err(Error::parse(
                    path,
                    format!("line {line}: kind must be gt or pred, got `{other}`"),
                ))
            }
        }
    }
    Ok(DetectionLog {
        frames,
        weights: None,
    })
}

/// Reads `frame_id,weight` rows.
pub fn load_frame_weights(path: &Path) -> Result<BTreeMap<String, f64>> {
    #[derive(Deserialize)]
    struct Row {
        frame_id: String,
        weight: f64,
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e.to_string()))?;
    reader
        .deserialize::<Row>()
        .enumerate()
        .map(|(i, r)| {
            r.map(|r| (r.frame_id, r.weight))
                .map_err(|e| Error::parse(path, format!("line {}: {e}", i + 2)))
        })
        .collect()
}
