use super::{LinearProgram, LpSolution, LpStatus, Relation, PIVOT_TOL};
use crate::error::{Error, Result};

const MAX_PIVOTS: usize = 100_000;

/// How an original variable maps onto nonnegative standard-form columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lower + s`
    Shifted { col: usize, lower: f64 },
    /// `x = upper - s`
    Mirrored { col: usize, upper: f64 },
    /// `x = s_pos - s_neg`
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    /// Rows of `A s (rel) b` with `b >= 0` after sign normalization.
    rows: Vec<(Vec<f64>, Relation, f64)>,
    cost: Vec<f64>,
    maps: Vec<VarMap>,
}

fn standardize(lp: &LinearProgram) -> StandardForm {
    let mut maps = Vec::with_capacity(lp.num_vars);
    let mut ncols = 0;
    for b in &lp.bounds {
        let m = if b.lower.is_finite() {
            VarMap::Shifted {
                col: ncols,
                lower: b.lower,
            }
        } else if b.upper.is_finite() {
            VarMap::Mirrored {
                col: ncols,
                upper: b.upper,
            }
        } else {
            ncols += 1;
            VarMap::Split {
                pos: ncols - 1,
                neg: ncols,
            }
        };
        ncols += 1;
        maps.push(m);
    }

    let mut cost = vec![0.0; ncols];
    for (j, &c) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shifted { col, .. } => cost[col] += c,
            VarMap::Mirrored { col, .. } => cost[col] -= c,
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    let mut rows = Vec::new();
    for con in &lp.constraints {
        let mut a = vec![0.0; ncols];
        let mut rhs = con.rhs;
        for &(j, coef) in &con.coeffs {
            match maps[j] {
                VarMap::Shifted { col, lower } => {
                    a[col] += coef;
                    rhs -= coef * lower;
                }
                VarMap::Mirrored { col, upper } => {
                    a[col] -= coef;
                    rhs -= coef * upper;
                }
                VarMap::Split { pos, neg } => {
                    a[pos] += coef;
                    a[neg] -= coef;
                }
            }
        }
        rows.push((a, con.relation, rhs));
    }
    // Finite upper bounds on shifted variables become explicit rows.
    for (j, b) in lp.bounds.iter().enumerate() {
        if let VarMap::Shifted { col, lower } = maps[j] {
            if b.upper.is_finite() {
                let mut a = vec![0.0; ncols];
                a[col] = 1.0;
                rows.push((a, Relation::Le, b.upper - lower));
            }
        }
    }
    for (a, rel, rhs) in &mut rows {
        if *rhs < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
            *rhs = -*rhs;
            *rel = match *rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    StandardForm { rows, cost, maps }
}

/// Dense simplex tableau. Columns: structural, then slack/surplus, then
/// artificial; the last entry of each row is the right-hand side.
struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
    /// Columns at or beyond this index are artificial.
    first_artificial: usize,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.ncols]
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<()> {
        self.pivots += 1;
        if self.pivots > MAX_PIVOTS {
            return Err(Error::IterationLimit);
        }
        let p = self.t[row][col];
        self.t[row].iter_mut().for_each(|v| *v /= p);
        self.t[row][col] = 1.0;
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
        Ok(())
    }

    fn reduced_costs(&self, cost: &[f64], limit: usize) -> Vec<f64> {
        let mut z: Vec<f64> = cost[..limit].to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (zj, a) in z.iter_mut().zip(&self.t[i]) {
                    *zj -= cb * a;
                }
            }
        }
        z
    }

    /// Runs Bland's rule over columns `< limit` until optimal or unbounded.
    /// Returns `false` on unboundedness.
    fn optimize(&mut self, cost: &[f64], limit: usize) -> Result<bool> {
        loop {
            let z = self.reduced_costs(cost, limit);
            let Some(enter) = (0..limit).find(|&j| z[j] < -PIVOT_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][enter];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let better = ratio < br - 1e-12
                            || ((ratio - br).abs() <= 1e-12 && self.basis[i] < self.basis[bi]);
                        Some(if better { (i, ratio) } else { (bi, br) })
                    }
                };
            }
            match leave {
                None => return Ok(false),
                Some((row, _)) => self.pivot(row, enter)?,
            }
        }
    }
}

pub(super) fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    let sf = standardize(lp);
    let m = sf.rows.len();
    let nstruct = sf.cost.len();
    let nslack = sf
        .rows
        .iter()
        .filter(|(_, rel, _)| *rel != Relation::Eq)
        .count();
    let nart = sf
        .rows
        .iter()
        .filter(|(_, rel, _)| *rel != Relation::Le)
        .count();
    let first_artificial = nstruct + nslack;
    let ncols = first_artificial + nart;

    let mut t = vec![vec![0.0; ncols + 1]; m];
    let mut basis = vec![0; m];
    let (mut next_slack, mut next_art) = (nstruct, first_artificial);
    for (i, (a, rel, rhs)) in sf.rows.iter().enumerate() {
        t[i][..nstruct].copy_from_slice(a);
        t[i][ncols] = *rhs;
        match rel {
            Relation::Le => {
                t[i][next_slack] = 1.0;
                basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                t[i][next_slack] = -1.0;
                next_slack += 1;
                t[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                t[i][next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }
    let mut tab = Tableau {
        t,
        basis,
        ncols,
        first_artificial,
        pivots: 0,
    };

    if nart > 0 {
        let mut phase1 = vec![0.0; ncols];
        phase1[first_artificial..].iter_mut().for_each(|c| *c = 1.0);
        tab.optimize(&phase1, ncols)?;
        let infeasibility: f64 = (0..m)
            .filter(|&i| tab.basis[i] >= first_artificial)
            .map(|i| tab.rhs(i))
            .sum();
        let scale = sf.rows.iter().fold(1.0f64, |s, r| s.max(r.2));
        if infeasibility > PIVOT_TOL * scale {
            return Ok(LpSolution::without_point(LpStatus::Infeasible));
        }
        drive_out_artificials(&mut tab)?;
    }

    let mut cost = sf.cost.clone();
    cost.resize(ncols, 0.0);
    if !tab.optimize(&cost, tab.first_artificial)? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded));
    }

    let mut s = vec![0.0; ncols];
    for (i, &b) in tab.basis.iter().enumerate() {
        s[b] = tab.rhs(i);
    }
    let point: Vec<f64> = sf
        .maps
        .iter()
        .map(|m| match *m {
            VarMap::Shifted { col, lower } => lower + s[col],
            VarMap::Mirrored { col, upper } => upper - s[col],
            VarMap::Split { pos, neg } => s[pos] - s[neg],
        })
        .collect();
    let objective_value = lp.objective_at(&point);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        point: Some(point),
        objective_value: Some(objective_value),
    })
}

/// Pivots zero-level artificials out of the basis after phase one; rows where
/// that is impossible are linearly dependent and get dropped.
fn drive_out_artificials(tab: &mut Tableau) -> Result<()> {
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] < tab.first_artificial {
            i += 1;
            continue;
        }
        match (0..tab.first_artificial).find(|&j| tab.t[i][j].abs() > PIVOT_TOL) {
            Some(j) => {
                tab.pivot(i, j)?;
                i += 1;
            }
            None => {
                tab.t.remove(i);
                tab.basis.remove(i);
            }
        }
    }
    Ok(())
}
