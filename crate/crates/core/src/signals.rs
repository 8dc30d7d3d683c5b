//! Ground-truth generators for experiments and tests.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{gaussian, gaussian_vec, rademacher, sample_indices};
use crate::vector::{norm1, norm2, norm_inf, scaled};

/// Uniformly random `s`-sparse unit vector: random support, Gaussian values.
pub fn sparse_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, s: usize) -> Result<Vec<f64>> {
    if s == 0 || s > n {
        return Err(Error::invalid(alloc::format!("sparsity {s} outside 1..={n}")));
    }
    let support = sample_indices(rng, n, s);
    let mut x = vec![0.0; n];
    loop {
        for &i in &support {
            x[i] = gaussian(rng);
        }
        let nrm = norm2(&x);
        if nrm > 0.0 {
            return Ok(scaled(&x, 1.0 / nrm));
        }
    }
}

fn power_law_sparsity(n: usize, p: f64) -> f64 {
    let (mut l1, mut l2) = (0.0, 0.0);
    for k in 1..=n {
        let v = libm::pow(k as f64, -p);
        l1 += v;
        l2 += v * v;
    }
    l1 * l1 / l2
}

/// Unit vector with magnitudes decaying like `k^{−p}`, `p` chosen so that
/// `(‖x‖₁/‖x‖₂)² = target`; random signs and a random permutation of the
/// coordinates.
pub fn compressible_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, target: f64) -> Result<Vec<f64>> {
    if !(target >= 1.0 && target <= n as f64) {
        return Err(Error::invalid(alloc::format!("effective sparsity {target} outside [1, {n}]")));
    }
    // effective sparsity is decreasing in p, from n at p = 0 towards 1
    let (mut lo, mut hi) = (0.0, 1.0);
    while power_law_sparsity(n, hi) > target && hi < 1e3 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if power_law_sparsity(n, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let order = sample_indices(rng, n, n);
    let mut x = vec![0.0; n];
    for (k, &i) in order.iter().enumerate() {
        x[i] = rademacher(rng) * libm::pow((k + 1) as f64, -p);
    }
    let nrm = norm2(&x);
    Ok(scaled(&x, 1.0 / nrm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixScale {
    Frobenius,
    MaxEntry,
}

/// `U Vᵀ` with Gaussian `d₁×r` and `d₂×r` factors, scaled to unit
/// Frobenius norm or unit largest entry.
pub fn low_rank_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    d1: usize,
    d2: usize,
    r: usize,
    scale: MatrixScale,
) -> Result<Matrix> {
    if r == 0 || r > d1.min(d2) {
        return Err(Error::invalid(alloc::format!("rank {r} outside 1..={}", d1.min(d2))));
    }
    let u = Matrix::from_vec(d1, r, gaussian_vec(rng, d1 * r))?;
    let v = Matrix::from_vec(r, d2, gaussian_vec(rng, r * d2))?;
    let mut x = u.matmul(&v);
    let norm = match scale {
        MatrixScale::Frobenius => x.frobenius_norm(),
        MatrixScale::MaxEntry => norm_inf(x.data()),
    };
    x.scale(1.0 / norm);
    Ok(x)
}

/// Effective sparsity of a vector, `(‖x‖₁/‖x‖₂)²`.
pub fn effective_sparsity_of(x: &[f64]) -> f64 {
    let l2 = norm2(x);
    let l1 = norm1(x);
    l1 * l1 / (l2 * l2)
}
