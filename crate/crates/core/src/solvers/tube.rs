//! Euclidean projection onto the `ℓ1` tube `T = {x : ‖Ax − y‖₁ ≤ mε}`.
//!
//! For `ε = 0` the tube is the affine set `{Ax = y}` and the projection is a
//! minimum-norm correction. For `ε > 0` an ADMM split on `z = Ax − y` with an
//! exact `ℓ1`-ball prox is followed by a repair step that lands exactly in `T`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, PartialSolve, Result};
use crate::linalg::{Cholesky, LeastSquares, Matrix};
use crate::solvers::{Method, SolveDiagnostics};
use crate::vector::{axpy, dist2, norm1, norm2, project_l1_ball, sub};

/// Precomputed factorizations for repeated projections onto one tube.
#[derive(Debug, Clone)]
pub struct Tube {
    a: Matrix,
    y: Vec<f64>,
    eps: f64,
    budget: f64,
    ls: LeastSquares,
    anchor: Vec<f64>,
    rho: f64,
    factor: XFactor,
}

#[derive(Debug, Clone)]
enum XFactor {
    /// Cholesky of `I_m + ρAAᵀ`, used through Woodbury.
    Wide(Cholesky),
    /// Cholesky of `I_n + ρAᵀA`.
    Tall(Cholesky),
}

impl Tube {
    pub fn new(a: &Matrix, y: &[f64], eps: f64) -> Result<Tube> {
        check_dim(a.rows(), y.len())?;
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::invalid("noise level must be finite and non-negative"));
        }
        let (m, n) = a.shape();
        let ls = LeastSquares::new(a);
        let anchor = ls.solve(y);
        let fro2 = a.data().iter().map(|v| v * v).sum::<f64>();
        let rho = if fro2 > 0.0 { n as f64 / fro2 } else { 1.0 };
        let factor = if m <= n {
            let mut g = a.gram_rows();
            g.scale(rho);
            (0..m).for_each(|i| g[(i, i)] += 1.0);
            XFactor::Wide(Cholesky::new(&g)?)
        } else {
            let mut g = a.gram_cols();
            g.scale(rho);
            (0..n).for_each(|i| g[(i, i)] += 1.0);
            XFactor::Tall(Cholesky::new(&g)?)
        };
        Ok(Tube { a: a.clone(), y: y.to_vec(), eps, budget: m as f64 * eps, ls, anchor, rho, factor })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn observations(&self) -> &[f64] {
        &self.y
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        sub(&self.a.mul_vec(x), &self.y)
    }

    /// `max(0, (1/m)‖Ax − y‖₁ − ε)`
    pub fn gap(&self, x: &[f64]) -> f64 {
        let m = self.a.rows().max(1) as f64;
        (norm1(&self.residual(x)) / m - self.eps).max(0.0)
    }

    /// `A⁺y`. Lies in the tube whenever `Ax = y` is solvable.
    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn project(&self, x0: &[f64], iters: usize) -> Vec<f64> {
        if self.eps == 0.0 {
            let r = self.residual(x0);
            let mut x = x0.to_vec();
            axpy(-1.0, &self.ls.solve(&r), &mut x);
            return x;
        }
        if norm1(&self.residual(x0)) <= self.budget {
            return x0.to_vec();
        }
        let x = self.admm(x0, iters);
        self.repair(&x)
    }

    fn solve_x(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.factor {
            XFactor::Tall(ch) => ch.solve(rhs),
            XFactor::Wide(ch) => {
                let w = ch.solve(&self.a.mul_vec(rhs));
                let mut out = rhs.to_vec();
                axpy(-self.rho, &self.a.tr_mul_vec(&w), &mut out);
                out
            }
        }
    }

    fn admm(&self, x0: &[f64], iters: usize) -> Vec<f64> {
        let m = self.a.rows();
        let mut z = project_l1_ball(&self.residual(x0), self.budget);
        let mut u = vec![0.0; m];
        let mut x = x0.to_vec();
        let scale = norm2(x0).max(norm2(&self.y)).max(1.0);
        for _ in 0..iters {
            let mut v = self.y.clone();
            v.iter_mut().zip(z.iter().zip(&u)).for_each(|(vi, (zi, ui))| *vi += zi - ui);
            let mut rhs = self.a.tr_mul_vec(&v);
            rhs.iter_mut().for_each(|r| *r *= self.rho);
            axpy(1.0, x0, &mut rhs);
            x = self.solve_x(&rhs);
            let r = self.residual(&x);
            let mut target = r.clone();
            axpy(1.0, &u, &mut target);
            let z_new = project_l1_ball(&target, self.budget);
            let primal = dist2(&r, &z_new);
            let dual = self.rho * dist2(&z_new, &z);
            u.iter_mut().zip(r.iter().zip(&z_new)).for_each(|(ui, (ri, zi))| *ui += ri - zi);
            z = z_new;
            if primal <= 1e-12 * scale && dual <= 1e-12 * scale {
                break;
            }
        }
        x
    }

    /// Move `x` into the tube: exactly by a minimum-norm correction of the
    /// residual when `A` has full row rank, otherwise by bisection toward the
    /// least-squares anchor.
    pub fn repair(&self, x: &[f64]) -> Vec<f64> {
        let r = self.residual(x);
        if norm1(&r) <= self.budget {
            return x.to_vec();
        }
        if self.ls.full_row_rank() {
            let target = project_l1_ball(&r, self.budget);
            let mut out = x.to_vec();
            axpy(1.0, &self.ls.solve(&sub(&target, &r)), &mut out);
            return out;
        }
        if norm1(&self.residual(&self.anchor)) > self.budget {
            return x.to_vec();
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let d = sub(&self.anchor, x);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let mut p = x.to_vec();
            axpy(mid, &d, &mut p);
            if norm1(&self.residual(&p)) <= self.budget {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let mut p = x.to_vec();
        axpy(hi, &d, &mut p);
        p
    }
}

/// Project `x0` onto `{x : (1/m)‖Ax − y‖₁ ≤ ε}`.
pub fn project_l1_tube(a: &Matrix, y: &[f64], eps: f64, x0: &[f64], iters: usize) -> Result<Vec<f64>> {
    check_dim(a.cols(), x0.len())?;
    let tube = Tube::new(a, y, eps)?;
    let x = tube.project(x0, iters);
    let gap = tube.gap(&x);
    if gap <= 1e-8 {
        Ok(x)
    } else {
        Err(Error::NotConverged(Box::new(PartialSolve {
            diagnostics: SolveDiagnostics {
                iterations: iters,
                primal_residual: gap,
                feasibility_gap: gap,
                objective: dist2(&x, x0),
                converged: false,
                method: Method::Tube,
            },
            estimate: x,
        })))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vec, rng_from};

    #[test]
    fn feasible_start_is_unchanged() {
        let mut rng = rng_from(1);
        let a = Matrix::gaussian(&mut rng, 5, 8);
        let x0 = gaussian_vec(&mut rng, 8);
        let y = a.mul_vec(&x0);
        assert_eq!(project_l1_tube(&a, &y, 0.1, &x0, 100).unwrap(), x0);
    }

    #[test]
    fn square_noiseless_is_inverse() {
        let a = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let y = [3.0, 5.0];
        let x = project_l1_tube(&a, &y, 0.0, &[10.0, -4.0], 10).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
    }

    #[test]
    fn noisy_projection_is_feasible_and_close_to_optimal() {
        let mut rng = rng_from(2);
        for &(m, n) in &[(6, 10), (12, 5)] {
            let a = Matrix::gaussian(&mut rng, m, n);
            let xt = gaussian_vec(&mut rng, n);
            let y: Vec<f64> = a.mul_vec(&xt).iter().map(|v| v + 0.2 * crate::rng::gaussian(&mut rng)).collect();
            let x0 = gaussian_vec(&mut rng, n);
            let eps = 0.2;
            let x = project_l1_tube(&a, &y, eps, &x0, 5000).unwrap();
            let l1: f64 = sub(&a.mul_vec(&x), &y).iter().map(|v| v.abs()).sum();
            assert!(l1 / m as f64 <= eps + 1e-12);
            // no tube point on random segments through x is closer to x0
            let d = dist2(&x, &x0);
            for _ in 0..200 {
                let dir = gaussian_vec(&mut rng, n);
                for &t in &[1e-3, 1e-2, 1e-1] {
                    let mut p = x.clone();
                    axpy(t, &dir, &mut p);
                    let l1: f64 = sub(&a.mul_vec(&p), &y).iter().map(|v| v.abs()).sum();
                    if l1 / m as f64 <= eps {
                        assert!(dist2(&p, &x0) >= d - 1e-6, "{m}x{n}");
                    }
                }
            }
        }
    }
}
