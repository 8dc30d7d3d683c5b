//! Dense two-phase tableau simplex for `min cᵀx, Ax = b, x ≥ 0`.
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots it switches to
//! Bland's rule, which cannot cycle. The final basic solution is re-solved
//! against the original data by QR so that its accuracy does not depend on
//! the accumulated pivoting error.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, PartialSolve, Result};
use crate::linalg::{LeastSquares, Matrix};
use crate::solvers::{Method, SolveDiagnostics};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Basic variable indices (one per non-redundant row).
    pub basis: Vec<usize>,
}

struct Tableau {
    rows: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.width - 1]
    }

    /// Objective row is row `rows`.
    fn cost_row(&self) -> &[f64] {
        &self.t[self.rows * self.width..]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.t[r * w + c];
        {
            let row = &mut self.t[r * w..(r + 1) * w];
            row.iter_mut().for_each(|v| *v /= p);
            row[c] = 1.0;
        }
        let pivot_row = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..=self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for (v, pr) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations over columns `0..allowed`.
    fn optimize(&mut self, allowed: usize, max_iter: usize, iters: &mut usize) -> Result<(), LpStop> {
        let mut degenerate = 0usize;
        loop {
            if *iters >= max_iter {
                return Err(LpStop::IterationLimit);
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let cost = self.cost_row();
            let mut enter = None;
            let mut best = -COST_TOL;
            for (j, &d) in cost.iter().enumerate().take(allowed) {
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = enter else { return Ok(()) };
            let mut leave: Option<usize> = None;
            let mut ratio = f64::INFINITY;
            for i in 0..self.rows {
                let a = self.at(i, c);
                if a > PIVOT_TOL {
                    let q = self.rhs(i).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some(l) => q < ratio || (q == ratio && self.basis[i] < self.basis[l]),
                    };
                    if better {
                        ratio = q;
                        leave = Some(i);
                    }
                }
            }
            let Some(r) = leave else { return Err(LpStop::Unbounded) };
            if ratio == 0.0 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
            *iters += 1;
        }
    }

    fn set_costs(&mut self, c: &[f64]) {
        let w = self.width;
        let base = self.rows * w;
        for j in 0..w {
            self.t[base + j] = 0.0;
        }
        self.t[base..base + c.len()].copy_from_slice(c);
        for i in 0..self.rows {
            let cb = c.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb == 0.0 {
                continue;
            }
            for j in 0..w {
                let v = self.t[i * w + j];
                self.t[base + j] -= cb * v;
            }
        }
    }
}

enum LpStop {
    Unbounded,
    IterationLimit,
}

/// Solve `min cᵀx` subject to `Ax = b`, `x ≥ 0`.
pub fn minimize(c: &[f64], a: &Matrix, b: &[f64], max_iter: usize) -> Result<LpSolution> {
    let (m, n) = a.shape();
    crate::error::check_dim(n, c.len())?;
    crate::error::check_dim(m, b.len())?;
    let scale_b = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));

    // phase 1: artificials n..n+m
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut t[i * width..(i + 1) * width];
        for (dst, &src) in row[..n].iter_mut().zip(a.row(i)) {
            *dst = s * src;
        }
        row[n + i] = 1.0;
        row[width - 1] = s * b[i];
    }
    let mut tab = Tableau { rows: m, width, t, basis: (n..n + m).collect() };
    let mut phase1_cost = vec![0.0; n + m];
    phase1_cost[n..].iter_mut().for_each(|v| *v = 1.0);
    tab.set_costs(&phase1_cost);
    let mut iters = 0usize;
    match tab.optimize(n + m, max_iter, &mut iters) {
        // phase 1 is bounded below, so a missing ratio-test row only means
        // round-off left no admissible pivot; the infeasibility test decides
        Ok(()) | Err(LpStop::Unbounded) => {}
        Err(LpStop::IterationLimit) => return Err(limit_error(iters, n)),
    }
    let infeas = -tab.t[m * width + width - 1];
    if infeas > 1e-9 * scale_b * (m as f64).max(1.0) {
        return Err(Error::Infeasible);
    }

    // drive artificials out; rows where that is impossible are redundant
    let mut keep = vec![true; m];
    for (i, kept) in keep.iter_mut().enumerate() {
        if tab.basis[i] >= n {
            let col = (0..n).find(|&j| tab.at(i, j).abs() > PIVOT_TOL);
            match col {
                Some(j) => tab.pivot(i, j),
                None => *kept = false,
            }
        }
    }

    // compact: drop artificial columns and redundant rows
    let rows: Vec<usize> = (0..m).filter(|&i| keep[i]).collect();
    let new_width = n + 1;
    let mut t2 = vec![0.0; (rows.len() + 1) * new_width];
    for (k, &i) in rows.iter().enumerate() {
        t2[k * new_width..k * new_width + n].copy_from_slice(&tab.t[i * width..i * width + n]);
        t2[k * new_width + n] = tab.rhs(i);
    }
    let basis: Vec<usize> = rows.iter().map(|&i| tab.basis[i]).collect();
    let mut tab = Tableau { rows: rows.len(), width: new_width, t: t2, basis };
    tab.set_costs(c);
    match tab.optimize(n, max_iter, &mut iters) {
        Ok(()) => {}
        Err(LpStop::Unbounded) => return Err(Error::Unbounded),
        Err(LpStop::IterationLimit) => return Err(limit_error(iters, n)),
    }

    let mut x = vec![0.0; n];
    for i in 0..tab.rows {
        x[tab.basis[i]] = tab.rhs(i).max(0.0);
    }
    polish(a, b, &rows, &tab.basis, &mut x);
    let objective = crate::vector::dot(c, &x);
    Ok(LpSolution { x, objective, iterations: iters, basis: tab.basis })
}

/// Re-solve the basic variables from the original rows.
fn polish(a: &Matrix, b: &[f64], rows: &[usize], basis: &[usize], x: &mut [f64]) {
    let k = rows.len();
    if k == 0 {
        return;
    }
    let ab = Matrix::from_fn(k, k, |r, c| a[(rows[r], basis[c])]);
    let rhs: Vec<f64> = rows.iter().map(|&i| b[i]).collect();
    let xb = LeastSquares::new(&ab).solve(&rhs);
    let scale = xb.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if xb.iter().any(|v| !v.is_finite() || *v < -1e-9 * scale) {
        return;
    }
    // accept only if it reproduces b at least as well as the tableau values
    let resid = |x: &[f64]| -> f64 {
        let ax = a.mul_vec(x);
        ax.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
    };
    let before = resid(x);
    let mut cand = x.to_vec();
    for (c, &j) in basis.iter().enumerate() {
        cand[j] = xb[c].max(0.0);
    }
    if resid(&cand) <= before {
        x.copy_from_slice(&cand);
    }
}

fn limit_error(iters: usize, n: usize) -> Error {
    Error::NotConverged(Box::new(PartialSolve {
        estimate: vec![0.0; n],
        diagnostics: SolveDiagnostics {
            iterations: iters,
            primal_residual: f64::INFINITY,
            feasibility_gap: f64::INFINITY,
            objective: f64::NAN,
            converged: false,
            method: Method::Lp,
        },
    }))
}
