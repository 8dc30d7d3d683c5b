//! `min ‖x‖₁` subject to `(1/m)‖Ax − y‖₁ ≤ ε`.
//!
//! Small instances are solved exactly as linear programs. With `x = x⁺ − x⁻`
//! and, for `ε > 0`, residual parts `r⁺, r⁻` plus one slack:
//!
//! ```text
//! min Σx⁺ + Σx⁻   s.t.  A(x⁺ − x⁻) − r⁺ + r⁻ = y,   Σr⁺ + Σr⁻ + slack = mε
//! ```
//!
//! A basic optimal solution has at most `m` nonzero entries in `x`.
//!
//! Under [`L1Path::Auto`], noisy problems go to the interior point method
//! with exact crossover; noiseless ones go to the simplex when small and to
//! splitting otherwise. An uncertified interior point result falls back the
//! same way.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Result};
use crate::linalg::Matrix;
use crate::solvers::admm::{l1_splitting, SplittingOptions};
use crate::solvers::ipm::l1_interior;
use crate::solvers::lp;
use crate::solvers::{feasibility_gap, Method, SolveDiagnostics};
use crate::vector::norm1;

/// Noiseless problems with `n + m` above this use the splitting path under `Auto`.
pub const LP_LIMIT: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum L1Path {
    #[default]
    Auto,
    Lp,
    Splitting,
}

pub fn l1_min(a: &Matrix, y: &[f64], eps: f64, path: L1Path) -> Result<(Vec<f64>, SolveDiagnostics)> {
    check_dim(a.rows(), y.len())?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(crate::Error::invalid("noise level must be finite and non-negative"));
    }
    let (m, n) = a.shape();
    if path == L1Path::Auto && eps > 0.0 {
        let (x, diag) = l1_interior(a, y, eps)?;
        if diag.converged {
            return Ok((x, diag));
        }
    }
    let use_lp = match path {
        L1Path::Lp => true,
        L1Path::Splitting => false,
        L1Path::Auto => n + m <= LP_LIMIT,
    };
    if use_lp {
        l1_lp(a, y, eps)
    } else {
        l1_splitting(a, y, eps, &SplittingOptions::default())
    }
}

fn l1_lp(a: &Matrix, y: &[f64], eps: f64) -> Result<(Vec<f64>, SolveDiagnostics)> {
    let (m, n) = a.shape();
    let (big, cost) = if eps == 0.0 {
        let big = Matrix::from_fn(m, 2 * n, |i, j| if j < n { a[(i, j)] } else { -a[(i, j - n)] });
        (big, vec![1.0; 2 * n])
    } else {
        let cols = 2 * n + 2 * m + 1;
        let mut big = Matrix::zeros(m + 1, cols);
        for i in 0..m {
            for j in 0..n {
                big[(i, j)] = a[(i, j)];
                big[(i, n + j)] = -a[(i, j)];
            }
            big[(i, 2 * n + i)] = -1.0;
            big[(i, 2 * n + m + i)] = 1.0;
        }
        for j in 2 * n..cols {
            big[(m, j)] = 1.0;
        }
        let mut cost = vec![0.0; cols];
        cost[..2 * n].iter_mut().for_each(|c| *c = 1.0);
        (big, cost)
    };
    let mut rhs = y.to_vec();
    if eps > 0.0 {
        rhs.push(m as f64 * eps);
    }
    let sol = lp::minimize(&cost, &big, &rhs, 100 * (big.rows() + big.cols()))?;
    let x: Vec<f64> = (0..n).map(|j| sol.x[j] - sol.x[n + j]).collect();
    let gap = feasibility_gap(a, y, eps, &x);
    let diag = SolveDiagnostics {
        iterations: sol.iterations,
        primal_residual: gap,
        feasibility_gap: gap,
        objective: norm1(&x),
        converged: true,
        method: Method::Lp,
    };
    Ok((x, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vec, rng_from};

    #[test]
    fn zero_observations() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0], &[5.0, 7.0]]).transpose();
        let (x, _) = l1_min(&a, &[0.0, 0.0], 0.0, L1Path::Lp).unwrap();
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn identity_returns_observations() {
        let a = Matrix::identity(8);
        let y = [1.0, -2.0, 0.0, 3.5, 0.25, -0.5, 7.0, 1.0];
        let (x, _) = l1_min(&a, &y, 0.0, L1Path::Lp).unwrap();
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-12));
    }

    /// Exhaustive vertex enumeration: every basic solution of `A_S z = y`
    /// with `|S| = m` columns of `[A, −A]`, nonnegative `z`.
    fn brute_force_l1(a: &Matrix, y: &[f64]) -> f64 {
        let m = a.rows();
        let mut best = f64::INFINITY;
        let mut subset = vec![0usize; m];
        fn rec(start: usize, depth: usize, subset: &mut Vec<usize>, a: &Matrix, y: &[f64], best: &mut f64) {
            let (m, n) = a.shape();
            if depth == m {
                let b = Matrix::from_fn(m, m, |i, k| a[(i, subset[k])]);
                let svd = crate::linalg::Svd::new(&b);
                if svd.s[m - 1] < 1e-10 {
                    return;
                }
                let z = crate::linalg::LeastSquares::new(&b).solve(y);
                *best = best.min(norm1(&z));
                return;
            }
            for j in start..n {
                subset[depth] = j;
                rec(j + 1, depth + 1, subset, a, y, best);
            }
        }
        rec(0, 0, &mut subset, a, y, &mut best);
        best
    }

    #[test]
    fn sparse_recovery_matches_enumeration() {
        let mut rng = rng_from(10);
        let (m, n) = (8, 12);
        let a = Matrix::gaussian(&mut rng, m, n);
        let mut x = vec![0.0; n];
        x[5] = 1.3;
        let y = a.mul_vec(&x);
        let (xh, d) = l1_min(&a, &y, 0.0, L1Path::Lp).unwrap();
        assert!(xh.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-6));
        assert!((d.objective - brute_force_l1(&a, &y)).abs() < 1e-9);
    }

    #[test]
    fn noisy_solution_is_feasible_and_m_sparse() {
        let mut rng = rng_from(11);
        let (m, n) = (10, 30);
        let a = Matrix::gaussian(&mut rng, m, n);
        let y = gaussian_vec(&mut rng, m);
        let (x, d) = l1_min(&a, &y, 0.3, L1Path::Lp).unwrap();
        assert!(d.feasibility_gap <= 1e-9);
        let thr = 1e-6 * crate::vector::norm_inf(&x);
        assert!(x.iter().filter(|v| v.abs() > thr).count() <= m);
    }

    #[test]
    fn interior_point_matches_lp() {
        for seed in 0..6 {
            let mut rng = rng_from(100 + seed);
            let (m, n) = if seed % 2 == 0 { (24, 48) } else { (60, 20) };
            let a = Matrix::gaussian(&mut rng, m, n);
            let x0 = gaussian_vec(&mut rng, n);
            let mut y = a.mul_vec(&x0);
            y.iter_mut().for_each(|v| *v += 0.2 * crate::rng::gaussian(&mut rng));
            let (xl, dl) = l1_min(&a, &y, 0.2, L1Path::Lp).unwrap();
            let (xi, di) = crate::solvers::ipm::l1_interior(&a, &y, 0.2).unwrap();
            assert!(di.converged);
            assert!(di.feasibility_gap <= 1e-12);
            assert!((dl.objective - di.objective).abs() < 1e-9, "{} vs {}", dl.objective, di.objective);
            assert!(crate::vector::dist2(&xl, &xi) < 1e-8);
        }
    }

    #[test]
    fn interior_point_returns_zero_inside_the_tube() {
        let a = Matrix::identity(3);
        let (x, d) = l1_min(&a, &[0.1, -0.1, 0.05], 0.1, L1Path::Auto).unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(d.method, Method::InteriorPoint);
    }

    #[test]
    fn splitting_agrees_with_lp() {
        let mut rng = rng_from(12);
        let (m, n) = (20, 40);
        let a = Matrix::gaussian(&mut rng, m, n);
        let mut x = vec![0.0; n];
        x[3] = 1.0;
        x[17] = -0.5;
        let y = a.mul_vec(&x);
        for &eps in &[0.0, 0.05] {
            let (xl, dl) = l1_min(&a, &y, eps, L1Path::Lp).unwrap();
            let (xs, ds) = l1_min(&a, &y, eps, L1Path::Splitting).unwrap();
            assert!(ds.feasibility_gap <= 1e-8);
            assert!((dl.objective - ds.objective).abs() < 1e-5, "{} vs {}", dl.objective, ds.objective);
            assert!(crate::vector::dist2(&xl, &xs) < 1e-4);
        }
    }
}
