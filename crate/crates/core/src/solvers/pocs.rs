//! Alternating projections between a convex set and the `ℓ1` tube.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, PartialSolve, Result};
use crate::linalg::Matrix;
use crate::sets::FeasibleSet;
use crate::solvers::tube::Tube;
use crate::solvers::{Method, SolveDiagnostics};
use crate::vector::dist2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PocsOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Residuals are compared across windows of this many iterations.
    pub window: usize,
    /// Relative decrease per window below which the residual has stalled.
    pub plateau: f64,
    /// ADMM iterations per tube projection when `ε > 0`.
    pub tube_iters: usize,
}

impl Default for PocsOptions {
    fn default() -> Self {
        PocsOptions { max_iter: 5000, tol: 1e-8, window: 50, plateau: 1e-6, tube_iters: 500 }
    }
}

/// A point of `K ∩ {x : (1/m)‖Ax − y‖₁ ≤ ε}` up to `tol`.
pub fn pocs_intersect(
    set: &FeasibleSet,
    a: &Matrix,
    y: &[f64],
    eps: f64,
    opts: &PocsOptions,
) -> Result<(Vec<f64>, SolveDiagnostics)> {
    check_dim(set.dim(), a.cols())?;
    let tube = Tube::new(a, y, eps)?;
    let start = tube.anchor().to_vec();
    pocs_from(set, &tube, &start, opts)
}

/// POCS started from `start`. The returned point lies in the tube and within
/// `tol` of `K`.
pub fn pocs_from(
    set: &FeasibleSet,
    tube: &Tube,
    start: &[f64],
    opts: &PocsOptions,
) -> Result<(Vec<f64>, SolveDiagnostics)> {
    let mut x = tube.project(start, opts.tube_iters);
    let mut checkpoint = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for k in 0..opts.max_iter {
        let p = set.project(&x)?;
        residual = dist2(&x, &p);
        if residual <= opts.tol {
            let diag = diagnostics(set, tube, &x, k, residual, true);
            return Ok((x, diag));
        }
        if k % opts.window == 0 {
            if k > 0 && checkpoint - residual < opts.plateau * checkpoint {
                return Err(Error::EmptyIntersection { residual });
            }
            checkpoint = residual;
        }
        x = tube.project(&p, opts.tube_iters);
    }
    let diagnostics = diagnostics(set, tube, &x, opts.max_iter, residual, false);
    Err(Error::NotConverged(Box::new(PartialSolve { estimate: x, diagnostics })))
}

fn diagnostics(
    set: &FeasibleSet,
    tube: &Tube,
    x: &[f64],
    iters: usize,
    residual: f64,
    converged: bool,
) -> SolveDiagnostics {
    SolveDiagnostics {
        iterations: iters,
        primal_residual: residual,
        feasibility_gap: tube.gap(x),
        objective: set.gauge(x).unwrap_or(f64::NAN),
        converged,
        method: Method::Pocs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vec, rng_from};
    use crate::sets::{make_set, SetDescriptor, SetKind};
    use crate::vector::{norm2, scaled};

    fn ball(n: usize, radius: f64) -> FeasibleSet {
        make_set(SetDescriptor::new(SetKind::EuclideanBall { radius }, n)).unwrap()
    }

    #[test]
    fn square_system_recovers_the_point() {
        let mut rng = rng_from(4);
        let a = Matrix::gaussian(&mut rng, 6, 6);
        let x = scaled(&gaussian_vec(&mut rng, 6), 0.1);
        let y = a.mul_vec(&x);
        let (xh, d) = pocs_intersect(&ball(6, 1.0), &a, &y, 0.0, &PocsOptions::default()).unwrap();
        assert!(d.converged);
        assert!(dist2(&xh, &x) < 1e-6);
    }

    #[test]
    fn underdetermined_intersection_is_found() {
        let mut rng = rng_from(5);
        let a = Matrix::gaussian(&mut rng, 4, 10);
        let x = gaussian_vec(&mut rng, 10);
        let x = scaled(&x, 0.5 / norm2(&x));
        let y = a.mul_vec(&x);
        let (xh, d) = pocs_intersect(&ball(10, 1.0), &a, &y, 0.0, &PocsOptions::default()).unwrap();
        assert!(d.feasibility_gap <= 1e-8);
        assert!(norm2(&xh) <= 1.0 + 1e-8);
    }

    #[test]
    fn disjoint_sets_are_reported() {
        let mut rng = rng_from(6);
        let a = Matrix::gaussian(&mut rng, 5, 5);
        let x = gaussian_vec(&mut rng, 5);
        let x = scaled(&x, 1.0 / norm2(&x));
        let y = a.mul_vec(&x);
        let r = pocs_intersect(&ball(5, 0.1), &a, &y, 0.0, &PocsOptions::default());
        assert!(matches!(r, Err(Error::EmptyIntersection { .. })), "{r:?}");
    }
}
