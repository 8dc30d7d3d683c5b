//! Gaussian expectations `E f(g)`, `g ~ N(0,1)`, by composite
//! Gauss–Legendre quadrature on `[−12, 12]`.
//!
//! Panels never straddle a caller-supplied breakpoint, so piecewise-smooth
//! integrands (sign, tabulated links) are integrated to rounding accuracy.
//! The mass outside `[−12, 12]` is below `1e−32`.

use alloc::vec::Vec;

const NODES: usize = 16;
const HALF_RANGE: f64 = 12.0;
const MAX_PANEL: f64 = 0.5;

/// Nodes and weights of the `k`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    let kf = k as f64;
    for i in 0..k {
        let mut z = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (kf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = kf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes.push(z);
        weights.push(2.0 / ((1.0 - z * z) * dp * dp));
    }
    (nodes, weights)
}

#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * core::f64::consts::PI)
}

/// `E f(g)` for a standard Gaussian `g`.
pub fn gaussian_expectation(f: impl Fn(f64) -> f64, breakpoints: &[f64]) -> f64 {
    let (nodes, weights) = gauss_legendre(NODES);
    let mut edges: Vec<f64> = breakpoints.iter().copied().filter(|b| b.is_finite() && b.abs() < HALF_RANGE).collect();
    edges.push(-HALF_RANGE);
    edges.push(HALF_RANGE);
    edges.sort_by(|a, b| a.total_cmp(b));
    edges.dedup();
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces = libm::ceil((b - a) / MAX_PANEL).max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for p in 0..pieces {
            let lo = a + p as f64 * h;
            let mid = lo + 0.5 * h;
            let mut acc = 0.0;
            for (x, wt) in nodes.iter().zip(&weights) {
                let z = mid + 0.5 * h * x;
                acc += wt * f(z) * std_normal_pdf(z);
            }
            total += 0.5 * h * acc;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(NODES);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 30 is within the 2k−1 = 31 exactness range
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * libm::pow(*x, 30.0)).sum();
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_moments() {
        assert!((gaussian_expectation(|_| 1.0, &[]) - 1.0).abs() < 1e-14);
        assert!((gaussian_expectation(|z| z * z, &[]) - 1.0).abs() < 1e-13);
        assert!((gaussian_expectation(|z| z.powi(4), &[]) - 3.0).abs() < 1e-12);
        let abs = gaussian_expectation(|z| z.abs(), &[0.0]);
        assert!((abs - libm::sqrt(2.0 / core::f64::consts::PI)).abs() < 1e-15);
    }
}
