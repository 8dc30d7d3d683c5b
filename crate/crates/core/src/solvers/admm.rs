//! ADMM splitting for `min ‖x‖₁` under the `ℓ1` tube.
//!
//! Splits `x = w` and `Ax − y = z`:
//!
//! ```text
//! x ← (I + AᵀA)⁻¹ [(w − u₁) + Aᵀ(y + z − u₂)]
//! w ← soft(x + u₁, 1/ρ)
//! z ← P_{mε B₁}(Ax − y + u₂)
//! ```
//!
//! The `x`-system does not depend on `ρ`, so `ρ` is rebalanced early on
//! without refactoring. Rows are rescaled to unit mean square norm first;
//! the final iterate is repaired into the tube.
//!
//! Every [`POLISH_EVERY`] iterations the large entries of `w` and the small
//! residuals are read as a candidate vertex. The vertex is solved exactly and
//! accepted only when a dual certificate proves it optimal.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{PartialSolve, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::solvers::ipm::polish;
use crate::solvers::tube::Tube;
use crate::solvers::{Method, SolveDiagnostics};
use crate::vector::{axpy, norm1, norm2, project_l1_ball, soft_threshold, sub};

/// `ρ` is frozen afterwards so the iteration settles.
const ADAPT_UNTIL: usize = 2000;
pub const POLISH_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SplittingOptions {
    fn default() -> Self {
        SplittingOptions { max_iter: 20_000, tol: 1e-10 }
    }
}

pub fn l1_splitting(a: &Matrix, y: &[f64], eps: f64, opts: &SplittingOptions) -> Result<(Vec<f64>, SolveDiagnostics)> {
    let (m, n) = a.shape();
    let sigma = (a.frobenius_norm() / libm::sqrt(n as f64)).max(f64::MIN_POSITIVE);
    let mut b = a.clone();
    b.scale(1.0 / sigma);
    let yb: Vec<f64> = y.iter().map(|v| v / sigma).collect();
    let budget = m as f64 * eps / sigma;

    // (I + BᵀB)⁻¹ through whichever Gram matrix is smaller
    let wide = m <= n;
    let chol = if wide {
        let mut g = b.gram_rows();
        (0..m).for_each(|i| g[(i, i)] += 1.0);
        Cholesky::new(&g)?
    } else {
        let mut g = b.gram_cols();
        (0..n).for_each(|i| g[(i, i)] += 1.0);
        Cholesky::new(&g)?
    };
    let solve = |rhs: &[f64]| -> Vec<f64> {
        if wide {
            let w = chol.solve(&b.mul_vec(rhs));
            sub(rhs, &b.tr_mul_vec(&w))
        } else {
            chol.solve(rhs)
        }
    };

    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = project_l1_ball(&sub(&b.mul_vec(&x), &yb), budget);
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; m];
    let mut rho = 1.0 / (1.0 + norm2(&b.tr_mul_vec(&yb)) / libm::sqrt(n as f64));
    let scale = norm2(&yb).max(1.0);
    let mut iters = 0;
    let mut converged = false;
    let mut primal = f64::INFINITY;
    while iters < opts.max_iter {
        iters += 1;
        let mut v = yb.clone();
        v.iter_mut().zip(z.iter().zip(&u2)).for_each(|(vi, (zi, ui))| *vi += zi - ui);
        let mut rhs = b.tr_mul_vec(&v);
        rhs.iter_mut().zip(w.iter().zip(&u1)).for_each(|(ri, (wi, ui))| *ri += wi - ui);
        x = solve(&rhs);

        let mut xw = x.clone();
        axpy(1.0, &u1, &mut xw);
        let w_new = soft_threshold(&xw, 1.0 / rho);
        let r = sub(&b.mul_vec(&x), &yb);
        let mut rz = r.clone();
        axpy(1.0, &u2, &mut rz);
        let z_new = project_l1_ball(&rz, budget);

        let p1 = sub(&x, &w_new);
        let p2 = sub(&r, &z_new);
        primal = libm::hypot(norm2(&p1), norm2(&p2));
        let dw = sub(&w_new, &w);
        let dz = sub(&z_new, &z);
        let mut dual_vec = dw.clone();
        axpy(-1.0, &b.tr_mul_vec(&dz), &mut dual_vec);
        let dual = rho * norm2(&dual_vec);
        axpy(1.0, &p1, &mut u1);
        axpy(1.0, &p2, &mut u2);
        w = w_new;
        z = z_new;

        if iters % POLISH_EVERY == 0 {
            if let Some(xp) = polish(a, y, eps, &w, &u2) {
                let tube = Tube::new(a, y, eps)?;
                let xh = tube.repair(&xp);
                let diag = SolveDiagnostics {
                    iterations: iters,
                    primal_residual: 0.0,
                    feasibility_gap: tube.gap(&xh),
                    objective: norm1(&xh),
                    converged: true,
                    method: Method::Splitting,
                };
                return Ok((xh, diag));
            }
        }

        let tol = opts.tol * scale.max(norm2(&x));
        if primal <= tol && dual <= tol {
            converged = true;
            break;
        }
        if iters % 10 == 0 && iters <= ADAPT_UNTIL {
            let factor = if primal > 10.0 * dual {
                2.0
            } else if dual > 10.0 * primal {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                u1.iter_mut().for_each(|v| *v /= factor);
                u2.iter_mut().for_each(|v| *v /= factor);
            }
        }
    }

    let tube = Tube::new(a, y, eps)?;
    let xh = tube.repair(&w);
    let gap = tube.gap(&xh);
    let diag = SolveDiagnostics {
        iterations: iters,
        primal_residual: primal,
        feasibility_gap: gap,
        objective: norm1(&xh),
        converged,
        method: Method::Splitting,
    };
    if !converged && (gap > 1e-6 || primal > 1e-6 * scale) {
        return Err(crate::Error::NotConverged(Box::new(PartialSolve { estimate: xh, diagnostics: diag })));
    }
    Ok((xh, diag))
}
