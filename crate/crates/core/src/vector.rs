//! Dense vector helpers on plain slices.

use alloc::vec::Vec;
use core::cmp::Ordering;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| if x.abs() > m { x.abs() } else { m })
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(a: &[f64], t: f64) -> Vec<f64> {
    a.iter().map(|x| x * t).collect()
}

/// `y += t * x`
pub fn axpy(t: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += t * xi;
    }
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Sign with the convention `sign(0) = +1`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn soft_threshold(x: &[f64], tau: f64) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let a = v.abs() - tau;
            if a > 0.0 {
                a * sign(v)
            } else {
                0.0
            }
        })
        .collect()
}

/// Indices ordered by decreasing magnitude; ties keep the lower index first.
pub fn order_by_magnitude(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&i, &j| match x[j].abs().total_cmp(&x[i].abs()) {
        Ordering::Equal => i.cmp(&j),
        o => o,
    });
    idx
}

/// Keep the `s` largest-magnitude entries, zero the rest.
pub fn hard_threshold(x: &[f64], s: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0; x.len()];
    for &i in order_by_magnitude(x).iter().take(s) {
        out[i] = x[i];
    }
    out
}

/// Euclidean projection onto the `ℓ1` ball of the given radius (sort-based).
pub fn project_l1_ball(x: &[f64], radius: f64) -> Vec<f64> {
    if norm1(x) <= radius {
        return x.to_vec();
    }
    if radius <= 0.0 {
        return alloc::vec![0.0; x.len()];
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &mu) in mags.iter().enumerate() {
        cumsum += mu;
        let t = (cumsum - radius) / (j as f64 + 1.0);
        if mu - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    soft_threshold(x, theta)
}

/// Mean and standard error (sample standard deviation over `sqrt(len)`).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, libm::sqrt(var / n as f64))
}

/// Linear-interpolation quantile (R type 7) of unsorted data.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    quantile_sorted(&v, q)
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n as f64 - 1.0) * q;
            let lo = libm::floor(h) as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn l1_projection_matches_grid_search() {
        // brute-force grid over the boundary segment of the unit l1 ball in R^2
        let x = [1.0, 1.0];
        let p = project_l1_ball(&x, 1.0);
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        let steps = 20_000;
        for k in 0..=steps {
            let a = -1.0 + 2.0 * k as f64 / steps as f64;
            for b in [1.0 - a.abs(), -(1.0 - a.abs())] {
                let d = (x[0] - a).powi(2) + (x[1] - b).powi(2);
                if d < best.0 {
                    best = (d, [a, b]);
                }
            }
        }
        assert!((p[0] - best.1[0]).abs() < 1e-4 && (p[1] - best.1[1]).abs() < 1e-4);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hard_threshold_breaks_ties_by_index() {
        assert_eq!(hard_threshold(&[1.0, -2.0, 2.0, 0.5], 2), vec![0.0, -2.0, 2.0, 0.0]);
        assert_eq!(hard_threshold(&[1.0, 1.0, 1.0], 1), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn quantiles() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert!((quantile(&v, 0.9) - 3.7).abs() < 1e-12);
        let (m, se) = mean_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - 1.0).abs() < 1e-12);
    }
}
