//! Sensing ensembles and observation models.
//!
//! Matrix sensing `yᵢ = ⟨Aᵢ, X⟩` needs no separate path: each `Aᵢ` is a row
//! of length `d1·d2` acting on the row-major flattening of `X`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;
use crate::quadrature::gaussian_expectation;
use crate::rng::{self, rng_from};
use crate::vector::{dot, norm1, norm2, sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowKind {
    Gaussian,
    Rademacher,
    /// Uniform on the sphere of radius `√n`.
    UniformSphereScaled,
}

/// Isotropic, mean-zero row distribution on `ℝⁿ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDistribution {
    pub kind: RowKind,
    pub n: usize,
}

impl RowDistribution {
    pub fn new(kind: RowKind, n: usize) -> Self {
        RowDistribution { kind, n }
    }

    pub fn gaussian(n: usize) -> Self {
        Self::new(RowKind::Gaussian, n)
    }

    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self.kind {
            RowKind::Gaussian => rng::gaussian_vec(rng, self.n),
            RowKind::Rademacher => (0..self.n).map(|_| rng::rademacher(rng)).collect(),
            RowKind::UniformSphereScaled => {
                let mut g = rng::gaussian_vec(rng, self.n);
                let s = libm::sqrt(self.n as f64) / norm2(&g);
                g.iter_mut().for_each(|v| *v *= s);
                g
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Matrix {
        let mut data = Vec::with_capacity(m * self.n);
        for _ in 0..m {
            data.extend(self.sample_row(rng));
        }
        Matrix::from_vec(m, self.n, data).expect("sizes agree")
    }
}

/// `m × n` matrix with i.i.d. rows, deterministic in `seed`.
pub fn sample_sensing_matrix(dist: &RowDistribution, m: usize, seed: u64) -> Matrix {
    dist.sample(m, &mut rng_from(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    None,
    /// Gaussian noise of scale `sigma`, rescaled so that `(1/m)‖ν‖₁ ≤ eps`.
    IidBounded {
        sigma: f64,
        eps: f64,
    },
    /// The whole budget `m·eps` on the row of largest norm, signed like `⟨a, x⟩`.
    Adversarial {
        eps: f64,
    },
    /// Uniform on `[−bound, bound]`, independently per entry.
    Uniform {
        bound: f64,
    },
}

impl NoiseSpec {
    /// The `ℓ1` level `ε` the estimators should be told about.
    pub fn level(&self) -> f64 {
        match *self {
            NoiseSpec::None => 0.0,
            NoiseSpec::IidBounded { eps, .. } | NoiseSpec::Adversarial { eps } => eps,
            NoiseSpec::Uniform { bound } => bound,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        let valid = match *self {
            NoiseSpec::None => true,
            NoiseSpec::IidBounded { sigma, eps } => ok(sigma) && ok(eps),
            NoiseSpec::Adversarial { eps } => ok(eps),
            NoiseSpec::Uniform { bound } => ok(bound),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::invalid("noise parameters must be finite and non-negative"))
        }
    }
}

/// Shrink `nu` until `(1/m)‖ν‖₁ ≤ eps` holds in floating point.
fn enforce_budget(nu: &mut [f64], eps: f64) {
    let m = nu.len() as f64;
    let l1 = norm1(nu);
    if l1 / m > eps {
        let s = eps * m / l1;
        nu.iter_mut().for_each(|v| *v *= s);
    }
    while norm1(nu) / m > eps {
        nu.iter_mut().for_each(|v| *v *= 1.0 - 4.0 * f64::EPSILON);
    }
}

/// `y = Ax + ν` and the noise `ν`.
pub fn observe_linear(a: &Matrix, x: &[f64], noise: &NoiseSpec, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(a.cols(), x.len())?;
    noise.validate()?;
    let m = a.rows();
    let mut rng = rng_from(seed);
    let clean = a.mul_vec(x);
    let nu = match *noise {
        NoiseSpec::None => vec![0.0; m],
        NoiseSpec::IidBounded { sigma, eps } => {
            let mut nu: Vec<f64> = (0..m).map(|_| sigma * rng::gaussian(&mut rng)).collect();
            enforce_budget(&mut nu, eps);
            nu
        }
        NoiseSpec::Adversarial { eps } => {
            let mut nu = vec![0.0; m];
            if m > 0 {
                let norms: Vec<f64> = (0..m).map(|i| norm2(a.row(i))).collect();
                let star = crate::vector::order_by_magnitude(&norms)[0];
                nu[star] = eps * m as f64 * sign(clean[star]);
                enforce_budget(&mut nu, eps);
            }
            nu
        }
        NoiseSpec::Uniform { bound } => (0..m).map(|_| bound * (2.0 * rng::uniform(&mut rng) - 1.0)).collect(),
    };
    let y = clean.iter().zip(&nu).map(|(c, v)| c + v).collect();
    Ok((y, nu))
}

/// `y = sign(Ax)` with `sign(0) = +1`.
pub fn observe_single_bit(a: &Matrix, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(a.cols(), x.len())?;
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    Ok(a.mul_vec(x).into_iter().map(sign).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LinkKind {
    Sign,
    /// `θ(z) = tanh(scale·z)`
    Tanh {
        scale: f64,
    },
    Linear,
    /// Odd extension of the piecewise-linear interpolant through
    /// `(knots[i], values[i])`, constant beyond the last knot.
    Custom {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkFunction {
    pub kind: LinkKind,
    /// Observations are `±1` with `E y = θ`.
    pub binary: bool,
    /// Additive Gaussian noise for non-binary links.
    #[serde(default)]
    pub noise_sigma: f64,
}

impl LinkFunction {
    pub fn sign() -> Self {
        LinkFunction { kind: LinkKind::Sign, binary: true, noise_sigma: 0.0 }
    }

    pub fn logistic() -> Self {
        LinkFunction { kind: LinkKind::Tanh { scale: 0.5 }, binary: true, noise_sigma: 0.0 }
    }

    pub fn linear() -> Self {
        LinkFunction { kind: LinkKind::Linear, binary: false, noise_sigma: 0.0 }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match &self.kind {
            LinkKind::Sign => sign(z),
            LinkKind::Tanh { scale } => libm::tanh(scale * z),
            LinkKind::Linear => z,
            LinkKind::Custom { knots, values } => sign(z) * interpolate(knots, values, z.abs()),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            LinkKind::Sign => vec![0.0],
            LinkKind::Custom { knots, .. } => {
                let mut b = vec![0.0];
                for &k in knots {
                    b.push(k);
                    b.push(-k);
                }
                b
            }
            _ => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidLink(String::from("noise_sigma must be non-negative")));
        }
        match &self.kind {
            LinkKind::Tanh { scale } if !scale.is_finite() => {
                return Err(Error::InvalidLink(String::from("tanh scale must be finite")))
            }
            LinkKind::Custom { knots, values } => {
                if knots.is_empty() || knots.len() != values.len() {
                    return Err(Error::InvalidLink(String::from("custom link needs matching knots and values")));
                }
                if knots[0] < 0.0 || knots.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidLink(String::from(
                        "custom link knots must be non-negative and increasing",
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidLink(String::from("custom link values must be finite")));
                }
            }
            _ => {}
        }
        if self.binary {
            let bounded = match &self.kind {
                LinkKind::Sign | LinkKind::Tanh { .. } => true,
                LinkKind::Linear => false,
                LinkKind::Custom { values, .. } => values.iter().all(|v| v.abs() <= 1.0),
            };
            if !bounded {
                return Err(Error::InvalidLink(String::from("binary links need |θ| ≤ 1")));
            }
        }
        Ok(())
    }
}

fn interpolate(knots: &[f64], values: &[f64], t: f64) -> f64 {
    if t <= knots[0] {
        // linear from the origin up to the first knot when it is positive
        return if knots[0] > 0.0 { values[0] * t / knots[0] } else { values[0] };
    }
    for i in 1..knots.len() {
        if t <= knots[i] {
            let w = (t - knots[i - 1]) / (knots[i] - knots[i - 1]);
            return values[i - 1] + w * (values[i] - values[i - 1]);
        }
    }
    values[values.len() - 1]
}

/// Observations of a single-index model with link `θ`.
pub fn observe_link(a: &Matrix, x: &[f64], link: &LinkFunction, seed: u64) -> Result<Vec<f64>> {
    check_dim(a.cols(), x.len())?;
    link.validate()?;
    let mut rng = rng_from(seed);
    let z = a.mul_vec(x);
    let y = if link.binary {
        z.iter()
            .map(|&zi| {
                let p = 0.5 * (1.0 + link.eval(zi));
                if rng::uniform(&mut rng) < p {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect()
    } else {
        z.iter().map(|&zi| link.eval(zi) + link.noise_sigma * rng::gaussian(&mut rng)).collect()
    };
    Ok(y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntrySample {
    /// `δᵢⱼ (Xᵢⱼ + νᵢⱼ)`
    pub y: Matrix,
    pub mask: Vec<bool>,
    pub p: f64,
    /// `m` exceeded `d1·d2` and `p` was capped at 1.
    pub capped: bool,
    /// `m < d log d` for one of the dimensions.
    pub undersampled: bool,
}

/// Bernoulli(`p = m/(d1 d2)`) entry sampling with optional bounded noise.
pub fn sample_entries(x: &Matrix, m: usize, noise: &NoiseSpec, seed: u64) -> Result<EntrySample> {
    noise.validate()?;
    let (d1, d2) = x.shape();
    let total = (d1 * d2) as f64;
    let capped = m as f64 > total;
    let p = (m as f64 / total).min(1.0);
    let bound = match *noise {
        NoiseSpec::None => 0.0,
        NoiseSpec::Uniform { bound } => bound,
        _ => return Err(Error::invalid("entry noise must be None or Uniform")),
    };
    let logd = |d: usize| d as f64 * libm::log(d as f64);
    let undersampled = (m as f64) < logd(d1) || (m as f64) < logd(d2);
    let mut rng = rng_from(seed);
    let mut mask = Vec::with_capacity(d1 * d2);
    let mut y = Matrix::zeros(d1, d2);
    for i in 0..d1 {
        for j in 0..d2 {
            let keep = p >= 1.0 || rng::uniform(&mut rng) < p;
            let nu = if bound > 0.0 { bound * (2.0 * rng::uniform(&mut rng) - 1.0) } else { 0.0 };
            if keep {
                y[(i, j)] = x[(i, j)] + nu;
            }
            mask.push(keep);
        }
    }
    Ok(EntrySample { y, mask, p, capped, undersampled })
}

/// `λ = E θ(ρg)g` and `M = √(2π)·[E y² + Var(y·g)]^{1/2}` for a signal of
/// norm `ρ`, with `g = ⟨a, x/‖x‖⟩ ~ N(0,1)`.
pub fn link_constants(link: &LinkFunction, magnitude: f64) -> Result<(f64, f64)> {
    link.validate()?;
    if !(magnitude > 0.0 && magnitude.is_finite()) {
        return Err(Error::invalid("signal magnitude must be positive"));
    }
    let bps: Vec<f64> = link.breakpoints().iter().map(|b| b / magnitude).collect();
    let theta = |z: f64| link.eval(magnitude * z);
    let lambda = gaussian_expectation(|z| theta(z) * z, &bps);
    if lambda.abs() <= 1e-6 {
        return Err(Error::NonInformative(lambda));
    }
    let s2 = link.noise_sigma * link.noise_sigma;
    let (ey2, ey2g2) = if link.binary {
        (1.0, 1.0)
    } else {
        (
            gaussian_expectation(|z| theta(z) * theta(z), &bps) + s2,
            gaussian_expectation(|z| theta(z) * z * theta(z) * z, &bps) + s2,
        )
    };
    let var = (ey2g2 - lambda * lambda).max(0.0);
    let m = libm::sqrt(2.0 * core::f64::consts::PI) * libm::sqrt(ey2 + var);
    Ok((lambda, m))
}

/// Largest fitted sub-gaussian constant `max_p (E|⟨a,u⟩|^p)^{1/p}/√p`,
/// `p = 1..=8`, over random unit directions `u`. Reported as metadata.
pub fn psi_proxy<R: Rng + ?Sized>(a: &Matrix, directions: usize, rng: &mut R) -> f64 {
    let mut best: f64 = 0.0;
    let m = a.rows() as f64;
    for _ in 0..directions {
        let mut u = rng::gaussian_vec(rng, a.cols());
        let nu = norm2(&u);
        u.iter_mut().for_each(|v| *v /= nu);
        let proj: Vec<f64> = (0..a.rows()).map(|i| dot(a.row(i), &u).abs()).collect();
        for p in 1..=8 {
            let pf = p as f64;
            let moment = proj.iter().map(|v| libm::pow(*v, pf)).sum::<f64>() / m;
            best = best.max(libm::pow(moment, 1.0 / pf) / libm::sqrt(pf));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_shapes() {
        let a = sample_sensing_matrix(&RowDistribution::new(RowKind::Rademacher, 5), 7, 1);
        assert!(a.data().iter().all(|v| *v == 1.0 || *v == -1.0));
        let s = sample_sensing_matrix(&RowDistribution::new(RowKind::UniformSphereScaled, 9), 4, 1);
        for i in 0..4 {
            assert!((norm2(s.row(i)) - 3.0).abs() < 1e-14);
        }
        assert_eq!(
            sample_sensing_matrix(&RowDistribution::gaussian(3), 2, 9),
            sample_sensing_matrix(&RowDistribution::gaussian(3), 2, 9)
        );
    }

    #[test]
    fn noise_budget_is_exact() {
        let a = sample_sensing_matrix(&RowDistribution::gaussian(10), 100, 2);
        let x = vec![0.3; 10];
        for spec in [NoiseSpec::IidBounded { sigma: 1.0, eps: 0.1 }, NoiseSpec::Adversarial { eps: 0.1 }] {
            for seed in 0..20 {
                let (y, nu) = observe_linear(&a, &x, &spec, seed).unwrap();
                assert!(norm1(&nu) / 100.0 <= 0.1);
                let ax = a.mul_vec(&x);
                assert!(y.iter().zip(&ax).zip(&nu).all(|((y, c), v)| *y == c + v));
            }
        }
        let (y, nu) = observe_linear(&a, &x, &NoiseSpec::None, 0).unwrap();
        assert_eq!(y, a.mul_vec(&x));
        assert!(nu.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn single_bit_conventions() {
        let a = Matrix::identity(3);
        assert_eq!(observe_single_bit(&a, &[1.0, 2.0, 0.5]).unwrap(), vec![1.0; 3]);
        assert_eq!(observe_single_bit(&a, &[0.0; 3]), Err(Error::ZeroVector));
        assert_eq!(observe_single_bit(&a, &[0.0, -1.0, 0.0]).unwrap(), vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn sign_link_reduces_to_single_bit() {
        let a = sample_sensing_matrix(&RowDistribution::gaussian(6), 50, 3);
        let x = [1.0, -0.5, 0.2, 0.0, 0.3, 0.1];
        assert_eq!(observe_link(&a, &x, &LinkFunction::sign(), 99).unwrap(), observe_single_bit(&a, &x).unwrap());
    }

    #[test]
    fn binary_links_must_be_bounded() {
        let bad = LinkFunction { kind: LinkKind::Linear, binary: true, noise_sigma: 0.0 };
        let a = Matrix::identity(2);
        assert!(matches!(observe_link(&a, &[1.0, 1.0], &bad, 0), Err(Error::InvalidLink(_))));
    }

    #[test]
    fn link_constants_closed_forms() {
        let (l, m) = link_constants(&LinkFunction::sign(), 1.0).unwrap();
        let expected = libm::sqrt(2.0 / core::f64::consts::PI);
        assert!((l - expected).abs() < 1e-12);
        assert!((m - libm::sqrt(2.0 * core::f64::consts::PI * (2.0 - expected * expected))).abs() < 1e-12);
        let (l, _) = link_constants(&LinkFunction::linear(), 2.5).unwrap();
        assert!((l - 2.5).abs() < 1e-12);
        let constant = LinkFunction {
            kind: LinkKind::Custom { knots: vec![0.0], values: vec![0.0] },
            binary: false,
            noise_sigma: 0.0,
        };
        assert!(matches!(link_constants(&constant, 1.0), Err(Error::NonInformative(_))));
    }

    #[test]
    fn entry_sampling_edges() {
        let x = Matrix::from_fn(4, 5, |i, j| (i * 5 + j) as f64);
        let full = sample_entries(&x, 20, &NoiseSpec::None, 1).unwrap();
        assert_eq!(full.p, 1.0);
        assert_eq!(full.y, x);
        assert!(full.mask.iter().all(|&b| b));
        let none = sample_entries(&x, 0, &NoiseSpec::None, 1).unwrap();
        assert!(none.y.data().iter().all(|v| *v == 0.0));
        let over = sample_entries(&x, 50, &NoiseSpec::None, 1).unwrap();
        assert!(over.capped && over.p == 1.0);
    }
}
