//! Resource-coupling models.
//!
//! A coupling `f(x, p)` gives the minimum amount of a destination resource on
//! one function needed to reach application performance `p` when a source
//! resource on (possibly another) function is held at `x`. Models are affine:
//! `f(x, p) = alpha * x + beta * p + gamma`, fitted by least squares from
//! minimum-resource samples extracted from a measured performance grid.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fabric::ResourceType;
use crate::validate::Violation;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CouplingKey {
    pub src_fn: String,
    pub src_res: ResourceType,
    pub dst_fn: String,
    pub dst_res: ResourceType,
}

impl CouplingKey {
    pub fn new(
        src_fn: impl Into<String>,
        src_res: ResourceType,
        dst_fn: impl Into<String>,
        dst_res: ResourceType,
    ) -> Self {
        Self {
            src_fn: src_fn.into(),
            src_res,
            dst_fn: dst_fn.into(),
            dst_res,
        }
    }

    pub fn is_self_pair(&self) -> bool {
        self.src_fn == self.dst_fn && self.src_res == self.dst_res
    }
}

impl fmt::Display for CouplingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.src_fn, self.src_res, self.dst_fn, self.dst_res
        )
    }
}

impl std::str::FromStr for CouplingKey {
    type Err = Error;

    /// Parses `src_fn,src_res,dst_fn,dst_res`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 || parts.iter().any(|p| p.is_empty()) {
            return Err(Error::InvalidInput(format!(
                "coupling key `{s}` must look like v,t,v',t'"
            )));
        }
        let key = CouplingKey::new(parts[0], parts[1].parse()?, parts[2], parts[3].parse()?);
        if key.is_self_pair() {
            return Err(Error::InvalidInput(format!(
                "coupling key `{s}` couples a resource with itself"
            )));
        }
        Ok(key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearCoupling {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LinearCoupling {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self { alpha, beta, gamma }
    }

    /// Unclamped affine prediction.
    pub fn raw(&self, x: f64, p: f64) -> f64 {
        self.alpha * x + self.beta * p + self.gamma
    }

    pub fn is_finite(&self) -> bool {
        self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite()
    }
}

/// Destination resource required at source level `x` and performance `p`,
/// clamped at zero.
pub fn eval_coupling(c: &LinearCoupling, x: f64, p: f64) -> f64 {
    c.raw(x, p).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerfUnit {
    /// Values in [0, 100].
    #[default]
    Percent,
    /// Values in [0, 1].
    Score,
}

impl PerfUnit {
    pub fn upper(self) -> f64 {
        match self {
            PerfUnit::Percent => 100.0,
            PerfUnit::Score => 1.0,
        }
    }
}

/// Measured application performance over a grid of (source, destination)
/// resource levels. `perf[i][j]` is the performance at `x_axis[i]`,
/// `y_axis[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceGrid {
    pub x_axis: Vec<f64>,
    pub y_axis: Vec<f64>,
    pub perf: Vec<Vec<f64>>,
    pub unit: PerfUnit,
}

impl PerformanceGrid {
    pub fn is_empty(&self) -> bool {
        self.x_axis.is_empty() || self.y_axis.is_empty()
    }

    pub fn max_perf(&self) -> f64 {
        self.values().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_perf(&self) -> f64 {
        self.values().fold(f64::INFINITY, f64::min)
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.perf.iter().flatten().copied()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, axis) in [("x axis", &self.x_axis), ("y axis", &self.y_axis)] {
            if axis.is_empty() {
                out.push(Violation::new("grid", format!("{name} is empty")));
            }
            if axis.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                out.push(Violation::new("grid", format!("{name} has non-positive level")));
            }
            if axis.windows(2).any(|w| !(w[0] < w[1])) {
                out.push(Violation::new(
                    "grid",
                    format!("{name} is not strictly increasing"),
                ));
            }
        }
        let complete = self.perf.len() == self.x_axis.len()
            && self.perf.iter().all(|row| row.len() == self.y_axis.len());
        if !complete {
            out.push(Violation::new("grid", "performance matrix not fully populated"));
        }
        let hi = self.unit.upper();
        if self.values().any(|v| !(0.0..=hi).contains(&v)) {
            out.push(Violation::new(
                "grid",
                format!("performance outside [0, {hi}]"),
            ));
        }
        out
    }

    /// Deciles (10%..90%) of the observed performance values, deduplicated.
    pub fn default_p_targets(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.values().collect();
        if v.is_empty() {
            return v;
        }
        v.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = (1..10)
            .map(|k| {
                let pos = k as f64 / 10.0 * (v.len() - 1) as f64;
                let lo = pos.floor() as usize;
                let hi = pos.ceil() as usize;
                v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
            })
            .collect();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSample {
    pub x: f64,
    pub p: f64,
    pub y_min: f64,
}

/// Extracts `(x, p, y_min)` triples: for every source level and target
/// performance, the smallest destination level whose measured performance
/// reaches the target. Unreachable pairs are skipped.
pub fn derive_min_resource_samples(
    grid: &PerformanceGrid,
    p_targets: &[f64],
) -> Result<Vec<CouplingSample>> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("performance grid"));
    }
    if p_targets.is_empty() {
        return Err(Error::EmptyInput("performance targets"));
    }
    let violations = grid.validate();
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let (lo, hi) = (grid.min_perf(), grid.max_perf());
    if let Some(p) = p_targets.iter().find(|p| !(lo..=hi).contains(*p)) {
        return Err(Error::InvalidInput(format!(
            "performance target {p} outside observed range [{lo}, {hi}]"
        )));
    }

    let mut out = Vec::new();
    for (i, &x) in grid.x_axis.iter().enumerate() {
        let column = &grid.perf[i];
        for &p in p_targets {
            if let Some(j) = column.iter().position(|&v| v >= p) {
                out.push(CouplingSample {
                    x,
                    p,
                    y_min: grid.y_axis[j],
                });
            }
        }
    }
    Ok(out)
}

/// Ordinary least squares fit of `y_min ~ alpha * x + beta * p + gamma`.
///
/// The regressors are centered and scaled to unit norm before forming the
/// 3x3 normal equations, which are then solved by Gaussian elimination with
/// partial pivoting. The result is mapped back to the original coordinates.
pub fn fit_linear(samples: &[CouplingSample]) -> Result<LinearCoupling> {
    if samples.len() < 3 {
        return Err(Error::DegenerateFit);
    }
    let n = samples.len() as f64;
    let mean = |f: fn(&CouplingSample) -> f64| samples.iter().map(f).sum::<f64>() / n;
    let (mx, mp) = (mean(|s| s.x), mean(|s| s.p));
    let norm = |f: &dyn Fn(&CouplingSample) -> f64| {
        samples.iter().map(|s| f(s).powi(2)).sum::<f64>().sqrt()
    };
    let sx = norm(&|s| s.x - mx);
    let sp = norm(&|s| s.p - mp);
    let s1 = n.sqrt();
    if !(sx > 0.0) || !(sp > 0.0) {
        return Err(Error::DegenerateFit);
    }

    let row = |s: &CouplingSample| [(s.x - mx) / sx, (s.p - mp) / sp, 1.0 / s1];
    let mut normal = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for s in samples {
        let r = row(s);
        for a in 0..3 {
            for b in 0..3 {
                normal[a][b] += r[a] * r[b];
            }
            rhs[a] += r[a] * s.y_min;
        }
    }
    let c = solve3(normal, rhs).ok_or(Error::DegenerateFit)?;
    let alpha = c[0] / sx;
    let beta = c[1] / sp;
    let gamma = c[2] / s1 - alpha * mx - beta * mp;
    let fit = LinearCoupling::new(alpha, beta, gamma);
    if !fit.is_finite() {
        return Err(Error::DegenerateFit);
    }
    Ok(fit)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for k in col..3 {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let tail: f64 = (r + 1..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
}

/// Error metrics of the raw (unclamped) model on `samples`.
pub fn regression_metrics(c: &LinearCoupling, samples: &[CouplingSample]) -> Result<RegressionMetrics> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    let n = samples.len() as f64;
    let (abs, sq) = samples.iter().fold((0.0, 0.0), |(a, q), s| {
        let r = s.y_min - c.raw(s.x, s.p);
        (a + r.abs(), q + r * r)
    });
    let mse = sq / n;
    Ok(RegressionMetrics {
        mae: abs / n,
        mse,
        rmse: mse.sqrt(),
    })
}

/// All fitted couplings of one application, plus the performance ceiling.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CouplingSet {
    pub couplings: BTreeMap<CouplingKey, LinearCoupling>,
    pub p_max: f64,
}

impl CouplingSet {
    pub fn new(p_max: f64) -> Self {
        Self {
            couplings: BTreeMap::new(),
            p_max,
        }
    }

    pub fn with(mut self, key: CouplingKey, model: LinearCoupling) -> Self {
        self.couplings.insert(key, model);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CouplingKey, &LinearCoupling)> {
        self.couplings.iter()
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !(self.p_max > 0.0) || !self.p_max.is_finite() {
            out.push(Violation::new("couplings", "p_max must be positive"));
        }
        for (k, c) in &self.couplings {
            if k.is_self_pair() {
                out.push(Violation::new(
                    format!("coupling {k}"),
                    "source and destination are the same resource",
                ));
            }
            if !c.is_finite() {
                out.push(Violation::new(format!("coupling {k}"), "non-finite coefficient"));
            }
        }
        out
    }
}
