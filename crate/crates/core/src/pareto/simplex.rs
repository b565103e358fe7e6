//! Dense two-phase simplex for `max c·x  s.t.  A x = b, x ≥ 0` with Bland's
//! pivoting rule.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

const EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Columns allowed to enter the basis.
    active: usize,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.obj.len() - 1
    }

    fn set_objective(&mut self, c: &[f64]) {
        let rhs = self.rhs();
        self.obj = vec![0.0; rhs + 1];
        for (j, &cj) in c.iter().enumerate() {
            self.obj[j] = -cj;
        }
        for i in 0..self.rows.len() {
            let f = self.obj[self.basis[i]];
            if f != 0.0 {
                for j in 0..=rhs {
                    self.obj[j] -= f * self.rows[i][j];
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[col];
                if f != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
                }
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            self.obj.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    /// Runs to optimality under Bland's rule.
    fn optimize(&mut self) -> LpStatus {
        let rhs = self.rhs();
        loop {
            if self.pivots >= MAX_PIVOTS {
                return LpStatus::IterationLimit;
            }
            let Some(col) = (0..self.active).find(|&j| self.obj[j] < -EPS) else {
                return LpStatus::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > EPS {
                    let ratio = row[rhs] / row[col];
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - EPS
                                || (ratio <= best + EPS && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                None => return LpStatus::Unbounded,
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }
}

/// Maximizes `c·x` subject to `a x = b`, `x ≥ 0`. Rows with negative `b` are
/// negated internally.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpSolution {
    let n = c.len();
    let m = a.len();
    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    for (i, (ai, &bi)) in a.iter().zip(b).enumerate() {
        let sign = if bi < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width];
        for (j, &v) in ai.iter().enumerate() {
            row[j] = sign * v;
        }
        row[n + i] = 1.0;
        row[width - 1] = sign * bi;
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        obj: vec![0.0; width],
        basis: (n..n + m).collect(),
        active: n + m,
        pivots: 0,
    };

    // phase one: drive the artificials to zero
    let mut phase_one = vec![0.0; n + m];
    phase_one[n..].iter_mut().for_each(|v| *v = -1.0);
    t.set_objective(&phase_one);
    let status = t.optimize();
    if status != LpStatus::Optimal {
        return failed(status, n, t.pivots);
    }
    let infeasibility = -t.obj[width - 1];
    let scale = 1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if infeasibility.abs() > 1e-7 * scale {
        return failed(LpStatus::Infeasible, n, t.pivots);
    }
    // pivot basic artificials out, dropping rows that turn out redundant
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| t.rows[i][j].abs() > EPS) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    t.active = n;
    t.set_objective(c);
    let status = t.optimize();
    if status != LpStatus::Optimal {
        return failed(status, n, t.pivots);
    }
    let mut x = vec![0.0; n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rows[i][width - 1];
        }
    }
    let objective = c.iter().zip(&x).map(|(c, x)| c * x).sum();
    LpSolution { status, x, objective, pivots: t.pivots }
}

fn failed(status: LpStatus, n: usize, pivots: usize) -> LpSolution {
    LpSolution { status, x: vec![0.0; n], objective: f64::NAN, pivots }
}
