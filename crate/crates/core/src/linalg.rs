//! Dense linear algebra at desk scale.
//!
//! Matrices are row-major. Matrix-valued unknowns elsewhere in the crate are
//! flattened in the same row-major order, so `⟨X, Y⟩ = tr(XᵀY)` is the plain
//! dot product of the flattened storage.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::vector::{dot, norm2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Build from column-major storage.
    pub fn from_col_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self::from_fn(rows, cols, |i, j| data[j * rows + i]))
    }

    pub fn to_col_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: rng::gaussian_vec(rng, rows * cols) }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Aᵀ y`
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                crate::vector::axpy(yi, self.row(i), &mut out);
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a != 0.0 {
                    crate::vector::axpy(a, other.row(k), out.row_mut(i));
                }
            }
        }
        out
    }

    /// `A Aᵀ`
    pub fn gram_rows(&self) -> Matrix {
        let mut g = Matrix::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in 0..=i {
                let v = dot(self.row(i), self.row(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// `Aᵀ A`
    pub fn gram_cols(&self) -> Matrix {
        let mut g = Matrix::zeros(self.cols, self.cols);
        for i in 0..self.rows {
            let r = self.row(i);
            for a in 0..self.cols {
                let ra = r[a];
                if ra == 0.0 {
                    continue;
                }
                let grow = g.row_mut(a);
                for b in 0..=a {
                    grow[b] += ra * r[b];
                }
            }
        }
        for a in 0..self.cols {
            for b in 0..a {
                g[(b, a)] = g[(a, b)];
            }
        }
        g
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        crate::vector::norm_inf(&self.data)
    }

    pub fn scale(&mut self, t: f64) {
        self.data.iter_mut().for_each(|v| *v *= t);
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Householder QR of a tall matrix (`rows ≥ cols`).
#[derive(Debug, Clone)]
pub struct Qr {
    rows: usize,
    cols: usize,
    /// Householder vectors, `v_k` has support `k..rows`, stored in full length.
    reflectors: Vec<Vec<f64>>,
    /// Upper triangular factor, `cols × cols`, row-major.
    r: Matrix,
}

impl Qr {
    pub fn new(a: &Matrix) -> Result<Qr> {
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::invalid("QR needs rows >= cols"));
        }
        // work column-major for cache-friendly reflector application
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut reflectors = Vec::with_capacity(n);
        for k in 0..n {
            let x = &cols[k][k..];
            let alpha = norm2(x);
            let mut v = vec![0.0; m];
            v[k..].copy_from_slice(x);
            let sgn = if v[k] < 0.0 { -1.0 } else { 1.0 };
            v[k] += sgn * alpha;
            let vnorm = norm2(&v[k..]);
            if vnorm > 0.0 {
                v[k..].iter_mut().for_each(|t| *t /= vnorm);
                for col in cols.iter_mut().skip(k) {
                    let proj = dot(&v[k..], &col[k..]);
                    for (ci, vi) in col[k..].iter_mut().zip(&v[k..]) {
                        *ci -= 2.0 * proj * vi;
                    }
                }
            }
            reflectors.push(v);
        }
        let r = Matrix::from_fn(n, n, |i, j| if j >= i { cols[j][i] } else { 0.0 });
        Ok(Qr { rows: m, cols: n, reflectors, r })
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    /// `Qᵀ b` (full length `rows`).
    pub fn apply_qt(&self, b: &mut [f64]) {
        for (k, v) in self.reflectors.iter().enumerate() {
            let proj = dot(&v[k..], &b[k..]);
            for (bi, vi) in b[k..].iter_mut().zip(&v[k..]) {
                *bi -= 2.0 * proj * vi;
            }
        }
    }

    /// `Q b` (full length `rows`).
    pub fn apply_q(&self, b: &mut [f64]) {
        for (k, v) in self.reflectors.iter().enumerate().rev() {
            let proj = dot(&v[k..], &b[k..]);
            for (bi, vi) in b[k..].iter_mut().zip(&v[k..]) {
                *bi -= 2.0 * proj * vi;
            }
        }
    }

    /// Smallest |R_ii| relative to the largest.
    pub fn relative_min_pivot(&self) -> f64 {
        let d: Vec<f64> = (0..self.cols).map(|i| self.r[(i, i)].abs()).collect();
        let max = d.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            0.0
        } else {
            d.iter().cloned().fold(f64::INFINITY, f64::min) / max
        }
    }

    /// Solve `R x = b`.
    pub fn solve_r(&self, b: &[f64]) -> Vec<f64> {
        let n = self.cols;
        let mut x = b[..n].to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                s -= self.r[(i, j)] * xj;
            }
            x[i] = s / self.r[(i, i)];
        }
        x
    }

    /// Solve `Rᵀ x = b`.
    pub fn solve_rt(&self, b: &[f64]) -> Vec<f64> {
        let n = self.cols;
        let mut x = b[..n].to_vec();
        for i in 0..n {
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(i) {
                s -= self.r[(j, i)] * xj;
            }
            x[i] = s / self.r[(i, i)];
        }
        x
    }

    /// Orthonormal basis of the orthogonal complement of the column space,
    /// as `rows - cols` vectors.
    pub fn complement_basis(&self) -> Vec<Vec<f64>> {
        (self.cols..self.rows)
            .map(|j| {
                let mut e = vec![0.0; self.rows];
                e[j] = 1.0;
                self.apply_q(&mut e);
                e
            })
            .collect()
    }
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    pub fn new(a: &Matrix) -> Result<Cholesky> {
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if d <= 0.0 {
                return Err(Error::invalid("matrix is not positive definite"));
            }
            let d = libm::sqrt(d);
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        let mut z = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let s = z[i] - dot(&row[..i], &z[..i]);
            z[i] = s / row[i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for (k, zk) in z.iter().enumerate().skip(i + 1) {
                s -= self.l[(k, i)] * zk;
            }
            z[i] = s / self.l[(i, i)];
        }
        z
    }
}

/// Minimum-norm least-squares solves against a fixed matrix `A`.
///
/// For `m ≤ n` (full row rank) `solve(b)` returns the minimum-norm solution of
/// `Ax = b`; for `m > n` it returns the least-squares solution. Rank-deficient
/// matrices fall back to an SVD pseudo-inverse.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    m: usize,
    n: usize,
    kind: LsKind,
}

#[derive(Debug, Clone)]
enum LsKind {
    /// QR of Aᵀ (wide A).
    Wide(Qr),
    /// QR of A (tall A).
    Tall(Qr),
    Pinv(Svd),
}

impl LeastSquares {
    pub fn new(a: &Matrix) -> LeastSquares {
        let (m, n) = a.shape();
        let rank_tol = 1e-12;
        let kind = if m <= n {
            match Qr::new(&a.transpose()) {
                Ok(qr) if qr.relative_min_pivot() > rank_tol => LsKind::Wide(qr),
                _ => LsKind::Pinv(Svd::new(a)),
            }
        } else {
            match Qr::new(a) {
                Ok(qr) if qr.relative_min_pivot() > rank_tol => LsKind::Tall(qr),
                _ => LsKind::Pinv(Svd::new(a)),
            }
        };
        LeastSquares { m, n, kind }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.m);
        match &self.kind {
            LsKind::Wide(qr) => {
                let z = qr.solve_rt(b);
                let mut x = vec![0.0; self.n];
                x[..self.m].copy_from_slice(&z);
                qr.apply_q(&mut x);
                x
            }
            LsKind::Tall(qr) => {
                let mut c = b.to_vec();
                qr.apply_qt(&mut c);
                qr.solve_r(&c[..self.n])
            }
            LsKind::Pinv(svd) => svd.pinv_apply(b, 1e-12),
        }
    }

    /// True when `Ax = b` is solvable for every `b`.
    pub fn full_row_rank(&self) -> bool {
        matches!(self.kind, LsKind::Wide(_))
    }
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ` with `s` non-increasing.
///
/// Columns of `U`/`V` are stored as vectors. Columns paired with a zero
/// singular value are left as zero vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Vec<Vec<f64>>,
    pub s: Vec<f64>,
    pub v: Vec<Vec<f64>>,
    rows: usize,
    cols: usize,
}

impl Svd {
    /// One-sided Jacobi (Hestenes) SVD.
    pub fn new(a: &Matrix) -> Svd {
        let (m, n) = a.shape();
        if m < n {
            let t = Svd::new(&a.transpose());
            return Svd { u: t.v, s: t.s, v: t.u, rows: m, cols: n };
        }
        // columns of W = A V, rotated until mutually orthogonal
        let mut w: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut v: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect();
        let eps = 1e-15;
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let alpha = dot(&w[p], &w[p]);
                    let beta = dot(&w[q], &w[q]);
                    let gamma = dot(&w[p], &w[q]);
                    if gamma == 0.0 || gamma.abs() <= eps * libm::sqrt(alpha * beta) {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = crate::vector::sign(zeta) / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                    let c = 1.0 / libm::sqrt(1.0 + t * t);
                    let s = c * t;
                    rotate(&mut w, p, q, c, s);
                    rotate(&mut v, p, q, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
        let norms: Vec<f64> = w.iter().map(|c| norm2(c)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
        let s: Vec<f64> = order.iter().map(|&i| norms[i]).collect();
        let u = order
            .iter()
            .map(|&i| if norms[i] > 0.0 { w[i].iter().map(|x| x / norms[i]).collect() } else { vec![0.0; m] })
            .collect();
        let v = order.iter().map(|&i| v[i].clone()).collect();
        Svd { u, s, v, rows: m, cols: n }
    }

    /// `Σ_{i<k} s_i u_i v_iᵀ`
    pub fn reconstruct(&self, k: usize) -> Matrix {
        self.reconstruct_with(&self.s[..k.min(self.s.len())])
    }

    /// `Σ_i sigma_i u_i v_iᵀ` with replacement singular values.
    pub fn reconstruct_with(&self, sigma: &[f64]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, self.cols);
        for (i, &sv) in sigma.iter().enumerate() {
            if sv == 0.0 {
                continue;
            }
            for r in 0..self.rows {
                let a = sv * self.u[i][r];
                if a != 0.0 {
                    crate::vector::axpy(a, &self.v[i], out.row_mut(r));
                }
            }
        }
        out
    }

    /// Number of singular values above `rel_tol · s_1`.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let top = self.s.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        self.s.iter().filter(|&&x| x > rel_tol * top).count()
    }

    fn pinv_apply(&self, b: &[f64], rel_tol: f64) -> Vec<f64> {
        let top = self.s.first().copied().unwrap_or(0.0);
        let mut x = vec![0.0; self.cols];
        for i in 0..self.s.len() {
            if self.s[i] > rel_tol * top && self.s[i] > 0.0 {
                let c = dot(&self.u[i], b) / self.s[i];
                crate::vector::axpy(c, &self.v[i], &mut x);
            }
        }
        x
    }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let a = *x;
        let b = *y;
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Singular values of a row-major `d1 × d2` matrix stored flat.
pub fn singular_values(flat: &[f64], d1: usize, d2: usize) -> Vec<f64> {
    let m = Matrix::from_vec(d1, d2, flat.to_vec()).expect("shape checked by caller");
    Svd::new(&m).s
}

/// Orthonormal basis of `ker(A)` for a full-row-rank `A` with `m < n`.
pub fn kernel_basis(a: &Matrix) -> Result<Vec<Vec<f64>>> {
    let qr = Qr::new(&a.transpose())?;
    Ok(qr.complement_basis())
}

/// Operator norm by power iteration on `AᵀA` with random restarts; returns
/// the largest estimate over the restarts.
pub fn operator_norm_power<R: Rng + ?Sized>(a: &Matrix, steps: usize, tol: f64, restarts: usize, rng: &mut R) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..restarts.max(1) {
        let mut x = rng::gaussian_vec(rng, a.cols());
        let nx = norm2(&x);
        if nx == 0.0 {
            continue;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let mut est = 0.0;
        for _ in 0..steps {
            let ax = a.mul_vec(&x);
            let mut z = a.tr_mul_vec(&ax);
            let nz = norm2(&z);
            if nz == 0.0 {
                est = 0.0;
                break;
            }
            let new_est = libm::sqrt(nz);
            z.iter_mut().for_each(|v| *v /= nz);
            x = z;
            let done = (new_est - est).abs() <= tol * new_est;
            est = new_est;
            if done {
                break;
            }
        }
        best = best.max(est);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn svd_reconstructs_and_orders() {
        let mut rng = rng_from(11);
        for &(m, n) in &[(7, 4), (4, 7), (6, 6)] {
            let a = Matrix::gaussian(&mut rng, m, n);
            let svd = Svd::new(&a);
            assert!(svd.s.windows(2).all(|w| w[0] >= w[1]));
            let back = svd.reconstruct(m.min(n));
            assert!(close(back.data(), a.data(), 1e-12));
            for i in 0..svd.s.len() {
                for j in 0..svd.s.len() {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((dot(&svd.u[i], &svd.u[j]) - e).abs() < 1e-12);
                    assert!((dot(&svd.v[i], &svd.v[j]) - e).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn svd_of_diagonal() {
        let svd = Svd::new(&Matrix::diag(&[1.0, 3.0, 2.0]));
        assert!(close(&svd.s, &[3.0, 2.0, 1.0], 1e-15));
        assert_eq!(svd.numerical_rank(1e-9), 3);
        let svd = Svd::new(&Matrix::diag(&[1.0, 0.0]));
        assert_eq!(svd.numerical_rank(1e-9), 1);
    }

    #[test]
    fn least_squares_wide_is_min_norm() {
        let mut rng = rng_from(5);
        let a = Matrix::gaussian(&mut rng, 3, 6);
        let b = [1.0, -2.0, 0.5];
        let ls = LeastSquares::new(&a);
        let x = ls.solve(&b);
        assert!(close(&a.mul_vec(&x), &b, 1e-12));
        // min-norm solution lies in the row space: orthogonal to the kernel
        for k in kernel_basis(&a).unwrap() {
            assert!(dot(&k, &x).abs() < 1e-12);
            assert!(close(&a.mul_vec(&k), &[0.0; 3], 1e-12));
        }
    }

    #[test]
    fn least_squares_tall_matches_normal_equations() {
        let mut rng = rng_from(6);
        let a = Matrix::gaussian(&mut rng, 9, 4);
        let b = rng::gaussian_vec(&mut rng, 9);
        let x = LeastSquares::new(&a).solve(&b);
        let ch = Cholesky::new(&a.gram_cols()).unwrap();
        let x2 = ch.solve(&a.tr_mul_vec(&b));
        assert!(close(&x, &x2, 1e-10));
    }

    #[test]
    fn rank_deficient_falls_back_to_pinv() {
        let a = Matrix::from_rows(&[&[1.0, 1.0], &[2.0, 2.0]]);
        let x = LeastSquares::new(&a).solve(&[1.0, 2.0]);
        assert!(close(&x, &[0.5, 0.5], 1e-12));
    }

    #[test]
    fn power_iteration_matches_svd() {
        let mut rng = rng_from(9);
        let a = Matrix::gaussian(&mut rng, 30, 20);
        let top = Svd::new(&a).s[0];
        let est = operator_norm_power(&a, 2000, 1e-14, 3, &mut rng);
        assert!((est - top).abs() < 1e-6 * top, "{est} vs {top}");
    }
}
