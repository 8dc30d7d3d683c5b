//! Gaussian mean width and its relatives.
//!
//! Per-draw widths are evaluated exactly from the set oracles, e.g.
//! `w(K, g) = h_K(g) + h_K(−g)`; only the outer expectation is Monte Carlo.
//! Trial `i` draws from its own generator seeded by `(seed, i)`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::linalg::{Matrix, Svd};
use crate::rng::{gaussian_vec, trial_rng};
use crate::sets::{FeasibleSet, SetKind};
use crate::vector::{mean_stderr, norm1, norm2, scaled};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WidthKind {
    Global,
    Local { r: f64 },
    Cone,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub stderr: f64,
    pub trials: usize,
    pub kind: WidthKind,
}

impl WidthEstimate {
    fn from_draws(draws: &[f64], kind: WidthKind) -> Self {
        let (mean, stderr) = mean_stderr(draws);
        WidthEstimate { mean, stderr, trials: draws.len(), kind }
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        Err(Error::invalid("at least two trials are needed for a standard error"))
    } else {
        Ok(())
    }
}

/// `E‖g‖₂ = √2 Γ((n+1)/2) / Γ(n/2)`.
pub fn expected_gaussian_norm(n: usize) -> f64 {
    let nf = n as f64;
    libm::sqrt(2.0) * libm::exp(libm::lgamma(0.5 * (nf + 1.0)) - libm::lgamma(0.5 * nf))
}

/// `sup_{u∈K−K} ⟨g, u⟩ = h_K(g) + h_K(−g)`.
pub fn width_draw(set: &FeasibleSet, g: &[f64]) -> Result<f64> {
    let plus = set.support(g)?.value;
    let minus = set.support(&scaled(g, -1.0))?.value;
    Ok(plus + minus)
}

pub fn mean_width_mc(set: &FeasibleSet, trials: usize, seed: u64) -> Result<WidthEstimate> {
    mean_width_mc_with(&Sequential, set, trials, seed)
}

pub fn mean_width_mc_with<E: Executor>(exec: &E, set: &FeasibleSet, trials: usize, seed: u64) -> Result<WidthEstimate> {
    check_trials(trials)?;
    if set.is_cone() {
        return Err(Error::Unbounded);
    }
    let n = set.dim();
    let draws = exec.map_indexed(trials, |i| {
        let g = gaussian_vec(&mut trial_rng(seed, &[i as u64]), n);
        width_draw(set, &g)
    });
    let draws: Vec<f64> = draws.into_iter().collect::<Result<_>>()?;
    Ok(WidthEstimate::from_draws(&draws, WidthKind::Global))
}

/// `sup_{u∈(K−K)∩rB₂ⁿ} ⟨g, u⟩`, capped by `r‖g‖₂` and, for bounded sets,
/// by the global per-draw width.
pub fn local_width_draw(set: &FeasibleSet, g: &[f64], r: f64) -> Result<f64> {
    let mut v = set.local_difference_support(g, r)?.min(r * norm2(g));
    if !set.is_cone() {
        v = v.min(width_draw(set, g)?);
    }
    Ok(v.max(0.0))
}

pub fn local_mean_width_mc(set: &FeasibleSet, r: f64, trials: usize, seed: u64) -> Result<WidthEstimate> {
    local_mean_width_mc_with(&Sequential, set, r, trials, seed)
}

pub fn local_mean_width_mc_with<E: Executor>(
    exec: &E,
    set: &FeasibleSet,
    r: f64,
    trials: usize,
    seed: u64,
) -> Result<WidthEstimate> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid("local radius must be positive"));
    }
    check_trials(trials)?;
    let n = set.dim();
    let draws = exec.map_indexed(trials, |i| {
        let g = gaussian_vec(&mut trial_rng(seed, &[i as u64]), n);
        local_width_draw(set, &g, r)
    });
    let draws: Vec<f64> = draws.into_iter().collect::<Result<_>>()?;
    Ok(WidthEstimate::from_draws(&draws, WidthKind::Local { r }))
}

/// `(s log(2n/s))^{1/2}`, the common scale of sparse-set widths.
pub fn sparse_width_scale(s: usize, n: usize) -> f64 {
    let (s, n) = (s as f64, n as f64);
    libm::sqrt(s * libm::log(2.0 * n / s))
}

/// Explicit-constant bounds `[lower, upper]` on `w(K)`.
///
/// The sparse bands (factor 3 either way) and the ball's lower constant
/// `1/√2` are calibration choices; the underlying inequalities only carry
/// unspecified absolute constants.
pub fn analytic_width_bounds(set: &FeasibleSet) -> Result<(f64, f64)> {
    let n = set.dim();
    let nf = n as f64;
    let b = match set.kind() {
        SetKind::EuclideanBall { radius } => {
            let upper = 2.0 * radius * libm::sqrt(nf);
            (upper / libm::sqrt(2.0), upper)
        }
        SetKind::FiniteSet { points } => {
            let max_norm = points.iter().map(|p| norm2(p)).fold(0.0, f64::max);
            (0.0, 2.0 * libm::sqrt(2.0 * libm::log(points.len() as f64)) * max_norm)
        }
        SetKind::SparseUnitSet { s } => {
            let w = sparse_width_scale(*s, n);
            (w / 3.0, 3.0 * w)
        }
        SetKind::ConvexSparse { s, radius } | SetKind::SparseHull { s, radius } => {
            let w = radius * sparse_width_scale(*s, n);
            (w / 3.0, 3.0 * w)
        }
        SetKind::NuclearBall { radius, d1, d2 } => {
            (0.0, 2.0 * radius * (libm::sqrt(*d1 as f64) + libm::sqrt(*d2 as f64)))
        }
        SetKind::LowRankCone { rank, d1, d2 } => (0.0, 2.0 * libm::sqrt(2.0 * (*rank * (d1 + d2)) as f64)),
        SetKind::L1Ball { radius } => (0.0, 2.0 * radius * libm::sqrt(2.0 * libm::log(2.0 * nf))),
        SetKind::DictionaryHull { dictionary, .. } => {
            let big_n = dictionary.cols() as f64;
            (0.0, 2.0 * set.outer_radius() * libm::sqrt(2.0 * libm::log(2.0 * big_n)))
        }
        SetKind::Hypercube { halfwidth } => {
            let w = 2.0 * halfwidth * nf * libm::sqrt(2.0 / core::f64::consts::PI);
            (w, w)
        }
        SetKind::SparseCone { .. } => return Err(Error::NoClosedForm("width of an unbounded cone")),
    };
    Ok(b)
}

/// `(‖α‖₁/‖α‖₂)²`
pub fn effective_sparsity(alpha: &[f64]) -> Result<f64> {
    let n2 = norm2(alpha);
    if n2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let r = norm1(alpha) / n2;
    Ok(r * r)
}

/// `(‖X‖_*/‖X‖_F)²`
pub fn effective_rank(x: &Matrix) -> Result<f64> {
    let f = x.frobenius_norm();
    if f == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let nuc: f64 = Svd::new(x).s.iter().sum();
    let r = nuc / f;
    Ok(r * r)
}

/// `dist(g, D°)` for the descent cone of `‖·‖₁` at `x`, where
/// `D° = {t·z : t ≥ 0, z ∈ ∂‖x‖₁}`. The squared distance is convex in `t`
/// and minimized on `[0, ‖g‖_∞]`.
pub fn descent_cone_draw(x: &[f64], g: &[f64]) -> f64 {
    let f = |t: f64| -> f64 {
        let mut acc = 0.0;
        for (&xi, &gi) in x.iter().zip(g) {
            let d = if xi != 0.0 { gi - t * crate::vector::sign(xi) } else { (gi.abs() - t).max(0.0) };
            acc += d * d;
        }
        acc
    };
    let (mut lo, mut hi) = (0.0, crate::vector::norm_inf(g));
    while hi - lo > 1e-10 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    libm::sqrt(f(0.5 * (lo + hi)))
}

pub fn descent_cone_width_l1(x: &[f64], trials: usize, seed: u64) -> Result<WidthEstimate> {
    descent_cone_width_l1_with(&Sequential, x, trials, seed)
}

pub fn descent_cone_width_l1_with<E: Executor>(exec: &E, x: &[f64], trials: usize, seed: u64) -> Result<WidthEstimate> {
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    check_trials(trials)?;
    let n = x.len();
    let draws = exec.map_indexed(trials, |i| {
        let g = gaussian_vec(&mut trial_rng(seed, &[i as u64]), n);
        descent_cone_draw(x, &g)
    });
    Ok(WidthEstimate::from_draws(&draws, WidthKind::Cone))
}

/// `1 − 2.5 exp(−(m/√(m+1) − w)²/18)`, or 0 when `w ≥ √m`.
pub fn escape_probability_bound(m: usize, cone_width: f64) -> f64 {
    let mf = m as f64;
    if cone_width >= libm::sqrt(mf) {
        return 0.0;
    }
    let gap = mf / libm::sqrt(mf + 1.0) - cone_width;
    (1.0 - 2.5 * libm::exp(-gap * gap / 18.0)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{make_set, SetDescriptor};

    fn set(kind: SetKind, n: usize) -> FeasibleSet {
        make_set(SetDescriptor::new(kind, n)).unwrap()
    }

    #[test]
    fn chi_mean() {
        assert!((expected_gaussian_norm(2) - libm::sqrt(core::f64::consts::PI / 2.0)).abs() < 1e-14);
        assert!((expected_gaussian_norm(1) - libm::sqrt(2.0 / core::f64::consts::PI)).abs() < 1e-14);
    }

    #[test]
    fn singleton_has_zero_width() {
        let k = set(SetKind::FiniteSet { points: alloc::vec![alloc::vec![0.3, -1.0]] }, 2);
        let w = mean_width_mc(&k, 50, 1).unwrap();
        assert_eq!(w.mean, 0.0);
        assert_eq!(analytic_width_bounds(&k).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn cones_need_local_width() {
        let k = set(SetKind::SparseCone { s: 2 }, 5);
        assert_eq!(mean_width_mc(&k, 10, 1), Err(Error::Unbounded));
        assert!(local_mean_width_mc(&k, 1.0, 10, 1).is_ok());
        assert!(local_mean_width_mc(&k, 0.0, 10, 1).is_err());
    }

    #[test]
    fn bounds_examples() {
        let nuc = set(SetKind::NuclearBall { radius: 1.0, d1: 50, d2: 50 }, 2500);
        let (_, up) = analytic_width_bounds(&nuc).unwrap();
        assert!((up - 4.0 * libm::sqrt(50.0)).abs() < 1e-12);
        let ball = set(SetKind::EuclideanBall { radius: 1.0 }, 100);
        let (lo, up) = analytic_width_bounds(&ball).unwrap();
        assert!((up - 20.0).abs() < 1e-12 && (lo - 200f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn effective_measures() {
        assert_eq!(effective_sparsity(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!((effective_sparsity(&[1.0; 4]).unwrap() - 4.0).abs() < 1e-15);
        assert!((effective_sparsity(&[1.0, 0.1, 0.1]).unwrap() - 1.44 / 1.02).abs() < 1e-14);
        assert_eq!(effective_sparsity(&[0.0, 0.0]), Err(Error::ZeroVector));
        assert!((effective_rank(&Matrix::diag(&[1.0, 0.0])).unwrap() - 1.0).abs() < 1e-15);
        assert!((effective_rank(&Matrix::identity(3)).unwrap() - 3.0).abs() < 1e-14);
        assert!((effective_rank(&Matrix::diag(&[2.0, 1.0])).unwrap() - 1.8).abs() < 1e-14);
        assert_eq!(effective_rank(&Matrix::zeros(2, 2)), Err(Error::ZeroMatrix));
    }

    #[test]
    fn escape_bound_values() {
        let w = 5.0;
        let expected = 1.0 - 2.5 * libm::exp(-libm::pow(100.0 / libm::sqrt(101.0) - w, 2.0) / 18.0);
        assert!((escape_probability_bound(100, w) - expected).abs() < 1e-15);
        assert!((expected - 0.359).abs() < 1e-3);
        assert_eq!(escape_probability_bound(100, 10.0), 0.0);
        let mut prev = 0.0;
        for m in [200, 400, 800, 1600, 3200] {
            let b = escape_probability_bound(m, w);
            assert!(b >= prev);
            prev = b;
        }
        assert!(prev > 1.0 - 1e-12);
    }

    #[test]
    fn descent_cone_matches_mesh_in_2d() {
        // descent cone of ‖·‖₁ at e₁ is {u : u₁ + |u₂| ≤ 0}; mesh its unit arc
        let x = [1.0, 0.0];
        let mut rng = crate::rng::rng_from(5);
        let mut err: f64 = 0.0;
        for _ in 0..200 {
            let g = gaussian_vec(&mut rng, 2);
            let mut best: f64 = 0.0;
            for k in 0..100_000 {
                let th = 2.0 * core::f64::consts::PI * k as f64 / 100_000.0;
                let u = [libm::cos(th), libm::sin(th)];
                if u[0] + u[1].abs() <= 1e-12 {
                    best = best.max(g[0] * u[0] + g[1] * u[1]);
                }
            }
            err = err.max((descent_cone_draw(&x, &g) - best).abs());
        }
        assert!(err < 1e-2, "{err}");
    }
}
