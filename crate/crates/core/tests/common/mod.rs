//! Brute-force oracles and random instance generators shared by the
//! integration and acceptance tests. None of them call into the solver code
//! they are used to check.

#![allow(dead_code)]

use std::path::PathBuf;

use coupled_alloc::appgraph::{AppGraph, FunctionSpec, Requirements};
use coupled_alloc::coupling::{CouplingKey, CouplingSet, LinearCoupling};
use coupled_alloc::fabric::{ComputeNode, Infrastructure, ResourceType};
use coupled_alloc::harness::{iou, BBox};
use coupled_alloc::lp::{LinearProgram, Relation};
use coupled_alloc::orchestrator::SolverConfig;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

// ---------------------------------------------------------------------------
// Linear programs

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleLp {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// Solves an `n x n` system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, visit);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), &mut visit);
}

/// Best objective over the vertices of the LP intersected with `x <= m`.
/// Only nonnegative variables are supported.
fn boxed_vertex_min(lp: &LinearProgram, m: f64) -> Option<f64> {
    let n = lp.num_vars;
    // Rows as (coefficients, relation, rhs); bounds become rows too.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = lp
        .constraints
        .iter()
        .map(|c| {
            let mut a = vec![0.0; n];
            for &(j, v) in &c.coeffs {
                a[j] += v;
            }
            (a, c.relation, c.rhs)
        })
        .collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e.clone(), Relation::Ge, 0.0));
        rows.push((e, Relation::Le, m));
    }
    let feasible = |x: &[f64]| {
        rows.iter().all(|(a, rel, b)| {
            let lhs: f64 = a.iter().zip(x).map(|(ai, xi)| ai * xi).sum();
            let tol = 1e-7 * (1.0 + b.abs());
            match rel {
                Relation::Le => lhs <= b + tol,
                Relation::Ge => lhs >= b - tol,
                Relation::Eq => (lhs - b).abs() <= tol,
            }
        })
    };
    let mut best: Option<f64> = None;
    combinations(rows.len(), n, |pick| {
        let a = pick.iter().map(|&i| rows[i].0.clone()).collect();
        let b = pick.iter().map(|&i| rows[i].2).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                let v: f64 = lp.objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    });
    best
}

/// Vertex-enumeration oracle. Unboundedness is detected by doubling an
/// artificial box: a bounded optimum does not move, an unbounded one does.
pub fn lp_oracle(lp: &LinearProgram) -> OracleLp {
    assert!(
        lp.bounds.iter().all(|b| b.lower == 0.0 && b.upper.is_infinite()),
        "oracle handles nonnegative variables only"
    );
    const M: f64 = 1e6;
    match (boxed_vertex_min(lp, M), boxed_vertex_min(lp, 2.0 * M)) {
        (None, _) | (_, None) => OracleLp::Infeasible,
        (Some(a), Some(b)) if b < a - 1e-6 * M => OracleLp::Unbounded,
        (Some(a), _) => OracleLp::Optimal(a),
    }
}

/// Random LP with `<= 6` nonnegative variables and `<= 6` rows, integer data
/// in `[-5, 5]`.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=6);
    let objective: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    let mut lp = LinearProgram::new(n).minimize(&objective);
    for _ in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..n)
            .map(|j| (j, rng.gen_range(-5..=5) as f64))
            .filter(|&(_, a)| a != 0.0)
            .collect();
        let relation = match rng.gen_range(0..20) {
            0..=11 => Relation::Le,
            12..=16 => Relation::Ge,
            _ => Relation::Eq,
        };
        let rhs = rng.gen_range(-5..=5) as f64;
        lp.constrain(coeffs, relation, rhs);
    }
    lp
}

// ---------------------------------------------------------------------------
// Joint placement and allocation

/// Every placement allowed by tier constraints and profiles that meets the
/// end-to-end requirements, as node indices per function.
pub fn oracle_placements(app: &AppGraph, infra: &Infrastructure) -> Vec<Vec<usize>> {
    let candidates: Vec<Vec<usize>> = app
        .functions
        .iter()
        .map(|f| {
            (0..infra.nodes.len())
                .filter(|&m| {
                    let t = &infra.nodes[m].tier;
                    f.perf_profile.contains_key(t)
                        && f.tier_constraint.as_ref().is_none_or(|c| c == t)
                })
                .collect()
        })
        .collect();
    let mut out = vec![vec![]];
    for c in &candidates {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                c.iter().map(move |&m| {
                    let mut p = prefix.clone();
                    p.push(m);
                    p
                })
            })
            .collect();
    }
    out.retain(|hosts| {
        let mut delay = 0.0;
        let mut thr = f64::INFINITY;
        for id in &app.critical_path {
            let fi = app.functions.iter().position(|f| &f.id == id).unwrap();
            let prof = app.functions[fi].perf_profile[&infra.nodes[hosts[fi]].tier];
            delay += prof.delay_ms;
            thr = thr.min(prof.throughput);
        }
        delay <= app.requirements.max_delay_ms && thr >= app.requirements.min_throughput
    });
    out
}

/// Exhaustive grid search of the joint problem: every `y` on multiples of
/// `y_step` within capacity, every `p` on multiples of `p_step` in
/// `[0, p_max]`, over every feasible placement. Returns the best objective on
/// the grid, or `None` if no grid point is feasible.
pub fn brute_force_joint(
    app: &AppGraph,
    infra: &Infrastructure,
    couplings: &CouplingSet,
    cfg: &SolverConfig,
    y_step: f64,
    p_step: f64,
) -> Option<f64> {
    let resources = &infra.resource_types;
    let nf = app.functions.len();
    let nr = resources.len();
    let var = |fi: usize, ri: usize| fi * nr + ri;
    let p_levels: Vec<f64> = (0..)
        .map(|k| k as f64 * p_step)
        .take_while(|p| *p <= cfg.p_max + 1e-12)
        .collect();
    let couplings: Vec<(usize, usize, LinearCoupling)> = couplings
        .iter()
        .map(|(k, c)| {
            let fi = |id: &str| app.functions.iter().position(|f| f.id == id).unwrap();
            let ri = |r: &ResourceType| resources.iter().position(|x| x == r).unwrap();
            (var(fi(&k.src_fn), ri(&k.src_res)), var(fi(&k.dst_fn), ri(&k.dst_res)), *c)
        })
        .collect();

    let mut best: Option<f64> = None;
    for hosts in oracle_placements(app, infra) {
        let levels: Vec<Vec<f64>> = (0..nf * nr)
            .map(|v| {
                let (fi, ri) = (v / nr, v % nr);
                let key = (app.functions[fi].id.clone(), resources[ri].clone());
                let mut cap = infra.nodes[hosts[fi]].capacity[&resources[ri]];
                if let Some(c) = cfg.allocation_cap.get(&key) {
                    cap = cap.min(*c);
                }
                let floor = cfg.allocation_floor.get(&key).copied().unwrap_or(0.0);
                (0..)
                    .map(|k| k as f64 * y_step)
                    .take_while(|y| *y <= cap + 1e-12)
                    .filter(|y| *y >= floor - 1e-12)
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; nf * nr];
        if levels.iter().any(|l| l.is_empty()) {
            continue;
        }
        'odometer: loop {
            let y: Vec<f64> = idx.iter().enumerate().map(|(v, &i)| levels[v][i]).collect();
            let node_ok = (0..infra.nodes.len()).all(|m| {
                (0..nr).all(|ri| {
                    let used: f64 = (0..nf).filter(|&fi| hosts[fi] == m).map(|fi| y[var(fi, ri)]).sum();
                    used <= infra.nodes[m].capacity[&resources[ri]] + 1e-12
                })
            });
            if node_ok {
                let total: f64 = y.iter().sum();
                for &p in &p_levels {
                    let ok = couplings
                        .iter()
                        .all(|(s, d, c)| c.alpha * y[*s] + c.beta * p + c.gamma <= y[*d] + 1e-12);
                    if ok {
                        let v = cfg.eta * total - (1.0 - cfg.eta) * p;
                        best = Some(best.map_or(v, |b: f64| b.min(v)));
                    }
                }
            }
            for v in (0..idx.len()).rev() {
                idx[v] += 1;
                if idx[v] < levels[v].len() {
                    continue 'odometer;
                }
                idx[v] = 0;
            }
            break;
        }
    }
    best
}

/// Two functions, two nodes on different tiers, compute and network, one
/// coupling. Capacities sit on the 0.25 grid.
pub fn random_joint_instance(rng: &mut ChaCha8Rng) -> (AppGraph, Infrastructure, CouplingSet, SolverConfig) {
    let cap = |rng: &mut ChaCha8Rng| rng.gen_range(2..=12) as f64 * 0.25;
    let infra = Infrastructure::new(&["edge", "cloud"])
        .with_node(
            ComputeNode::new("n1", "edge")
                .with_capacity(ResourceType::Compute, cap(rng))
                .with_capacity(ResourceType::Network, cap(rng)),
        )
        .with_node(
            ComputeNode::new("n2", "cloud")
                .with_capacity(ResourceType::Compute, cap(rng))
                .with_capacity(ResourceType::Network, cap(rng)),
        );
    let mut f = |id: &str| {
        FunctionSpec::new(id)
            .on_tier("edge", rng.gen_range(5..30) as f64, rng.gen_range(5..30) as f64)
            .on_tier("cloud", rng.gen_range(5..30) as f64, rng.gen_range(5..30) as f64)
    };
    let app = AppGraph {
        functions: vec![f("F1"), f("F2")],
        edges: vec![("F1".into(), "F2".into())],
        critical_path: vec!["F1".into(), "F2".into()],
        requirements: Requirements {
            max_delay_ms: rng.gen_range(25..60) as f64,
            min_throughput: rng.gen_range(1..10) as f64,
        },
    };
    let keys = [
        ("F1", ResourceType::Network, "F2", ResourceType::Compute),
        ("F2", ResourceType::Compute, "F1", ResourceType::Network),
        ("F1", ResourceType::Compute, "F1", ResourceType::Network),
        ("F2", ResourceType::Network, "F1", ResourceType::Compute),
    ];
    let (a, ra, b, rb) = keys[rng.gen_range(0..keys.len())].clone();
    let p_max = [5.0, 10.0][rng.gen_range(0..2)];
    let couplings = CouplingSet::new(p_max).with(
        CouplingKey::new(a, ra, b, rb),
        LinearCoupling::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.02..0.3),
            rng.gen_range(0.0..1.0),
        ),
    );
    let cfg = SolverConfig::new(rng.gen_range(0.02..0.6), p_max);
    (app, infra, couplings, cfg)
}

// ---------------------------------------------------------------------------
// Bundled substitutes scenario

/// Hand solution of the substitutes scenario at bandwidth cap `l`.
///
/// Couplings: `net >= -0.8 com + 0.1 p + 1` and `com >= -0.05 net + 0.02 p + 0.3`,
/// detector cores at most 4. With eta = 0.05 performance is always pushed to
/// its limit. At p = 100 the two rows meet at com = 1.75 / 0.96,
/// net = 11 - 0.8 com. Below that bandwidth the first row binds at net = l,
/// so com = (11 - l) / 0.8 until it reaches 4, after which p = 10 (l + 2.2).
pub fn substitutes_hand_solve(l: f64) -> (f64, f64, f64) {
    let com_star = 1.75 / 0.96;
    let net_star = 11.0 - 0.8 * com_star;
    if l >= net_star {
        (com_star, net_star, 100.0)
    } else if (11.0 - l) / 0.8 <= 4.0 {
        ((11.0 - l) / 0.8, l, 100.0)
    } else {
        (4.0, l, 10.0 * (l + 2.2))
    }
}

/// Performance the 2-core baseline reaches with the stream at `l`.
pub fn substitutes_static_performance(l: f64) -> f64 {
    (10.0 * l + 6.0).min(85.0 + 2.5 * l).min(100.0)
}

// ---------------------------------------------------------------------------
// Detection matching

/// Maximum one-to-one matching using only pairs with IoU >= `threshold`,
/// by exhaustive search.
pub fn max_matching_oracle(gt: &[BBox], pred: &[BBox], threshold: f64) -> usize {
    fn rec(i: usize, gt: &[BBox], pred: &[BBox], used: &mut Vec<bool>, thr: f64) -> usize {
        if i == gt.len() {
            return 0;
        }
        let mut best = rec(i + 1, gt, pred, used, thr);
        for j in 0..pred.len() {
            if !used[j] && iou(&gt[i], &pred[j]) >= thr {
                used[j] = true;
                best = best.max(1 + rec(i + 1, gt, pred, used, thr));
                used[j] = false;
            }
        }
        best
    }
    rec(0, gt, pred, &mut vec![false; pred.len()], threshold)
}

/// Greedy-by-IoU matching alone: pairs sorted by IoU descending, ties by
/// ground-truth then prediction index, accepted while both ends are free.
pub fn greedy_matching(gt: &[BBox], pred: &[BBox], threshold: f64) -> usize {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, g) in gt.iter().enumerate() {
        for (j, p) in pred.iter().enumerate() {
            let v = iou(g, p);
            if v >= threshold {
                pairs.push((v, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let (mut gu, mut pu) = (vec![false; gt.len()], vec![false; pred.len()]);
    let mut count = 0;
    for (_, i, j) in pairs {
        if !gu[i] && !pu[j] {
            gu[i] = true;
            pu[j] = true;
            count += 1;
        }
    }
    count
}

/// Boxes jittered around a few anchors so that many pairs overlap.
pub fn random_boxes(rng: &mut ChaCha8Rng, count: usize) -> Vec<BBox> {
    const ANCHORS: [(f64, f64); 3] = [(0.0, 0.0), (6.0, 0.0), (0.0, 6.0)];
    (0..count)
        .map(|_| {
            let (ax, ay) = ANCHORS[rng.gen_range(0..ANCHORS.len())];
            let x = ax + rng.gen_range(-3.0..3.0);
            let y = ay + rng.gen_range(-3.0..3.0);
            BBox::new(x, y, x + rng.gen_range(6.0..12.0), y + rng.gen_range(6.0..12.0))
        })
        .collect()
}

/// True when all IoUs at or above `threshold` are pairwise distinct.
pub fn distinct_ious(gt: &[BBox], pred: &[BBox], threshold: f64) -> bool {
    let mut v: Vec<f64> = gt
        .iter()
        .flat_map(|g| pred.iter().map(move |p| iou(g, p)))
        .filter(|x| *x >= threshold)
        .collect();
    v.sort_by(f64::total_cmp);
    v.windows(2).all(|w| w[1] - w[0] > 1e-12)
}
