//! One entry point per recovery program.
//!
//! Every estimator convexifies its feasible set first (see
//! [`FeasibleSet::convex_hull_descriptor`]), calls a solver, and wraps the
//! result in an [`EstimateReport`]. Ground truth, when supplied through
//! [`EstimateReport::with_truth`], only fills in the error fields.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;
use crate::rng::{gaussian_vec, trial_rng};
use crate::sets::{make_set, FeasibleSet, SetDescriptor, SetKind};
use crate::solvers::{
    feasibility_gap, gauge_min, l1_min, pocs_intersect, truncated_svd, GaugeOptions, L1Path, Method, PocsOptions,
    SolveDiagnostics,
};
use crate::vector::{dist2, dot, norm2, scaled, sign};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    /// Row-major when `shape` is present.
    pub estimate: Vec<f64>,
    pub shape: Option<(usize, usize)>,
    /// Dictionary coefficients `α̂`, or the linear stage `x̂_lin`.
    pub auxiliary: Option<Vec<f64>>,
    pub diagnostics: SolveDiagnostics,
    pub error_l2: Option<f64>,
    /// `λ·x̄` for single-index models.
    pub scaled_target: Option<Vec<f64>>,
    /// Fraction of observed signs reproduced by the estimate.
    pub agreement: Option<f64>,
    /// Theoretical error bound with unit constant.
    pub bound: Option<f64>,
}

impl EstimateReport {
    fn new(estimate: Vec<f64>, diagnostics: SolveDiagnostics) -> Self {
        EstimateReport {
            estimate,
            shape: None,
            auxiliary: None,
            diagnostics,
            error_l2: None,
            scaled_target: None,
            agreement: None,
            bound: None,
        }
    }

    /// Sets `error_l2 = ‖x̂ − x‖₂` (Frobenius for matrices).
    pub fn with_truth(mut self, truth: &[f64]) -> Result<Self> {
        check_dim(self.estimate.len(), truth.len())?;
        self.error_l2 = Some(dist2(&self.estimate, truth));
        Ok(self)
    }

    /// `‖X̂ − X‖_F/√(d₁d₂)` when ground truth was supplied.
    pub fn per_entry_error(&self) -> Option<f64> {
        let e = self.error_l2?;
        Some(e / libm::sqrt(self.estimate.len().max(1) as f64))
    }

    pub fn estimate_matrix(&self) -> Option<Matrix> {
        let (r, c) = self.shape?;
        Matrix::from_vec(r, c, self.estimate.clone()).ok()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("noise level must be finite and non-negative"))
    }
}

/// A point of `conv K` whose observations are `ε`-close to `y` in `(1/m)ℓ1`.
pub fn estimate_linear_feasibility(set: &FeasibleSet, a: &Matrix, y: &[f64], eps: f64) -> Result<EstimateReport> {
    estimate_linear_feasibility_with(set, a, y, eps, &PocsOptions::default())
}

pub fn estimate_linear_feasibility_with(
    set: &FeasibleSet,
    a: &Matrix,
    y: &[f64],
    eps: f64,
    opts: &PocsOptions,
) -> Result<EstimateReport> {
    check_eps(eps)?;
    let convex = set.convex_hull_descriptor()?;
    let (x, diag) = pocs_intersect(&convex, a, y, eps, opts)?;
    Ok(EstimateReport::new(x, diag))
}

/// `min ‖x‖_K` subject to `(1/m)‖Ax − y‖₁ ≤ ε`. Constrained regression is
/// the same program with `(X, β)` in place of `(A, x)`.
pub fn estimate_linear_gauge(set: &FeasibleSet, a: &Matrix, y: &[f64], eps: f64) -> Result<EstimateReport> {
    estimate_linear_gauge_with(set, a, y, eps, &GaugeOptions::default())
}

pub fn estimate_linear_gauge_with(
    set: &FeasibleSet,
    a: &Matrix,
    y: &[f64],
    eps: f64,
    opts: &GaugeOptions,
) -> Result<EstimateReport> {
    check_eps(eps)?;
    let convex = set.convex_hull_descriptor()?;
    let (x, diag) = gauge_min(&convex, a, y, eps, opts)?;
    Ok(EstimateReport::new(x, diag))
}

/// `min ‖α‖₁` subject to `(1/m)‖ADα − y‖₁ ≤ ε`; the estimate is `x̂ = Dα̂`.
pub fn estimate_sparse_dictionary(d: &Matrix, a: &Matrix, y: &[f64], eps: f64, path: L1Path) -> Result<EstimateReport> {
    check_eps(eps)?;
    check_dim(a.cols(), d.rows())?;
    for j in 0..d.cols() {
        if norm2(&d.column(j)) > 1.0 + 1e-12 {
            return Err(Error::invalid(alloc::format!("dictionary column {j} has norm above 1")));
        }
    }
    let ad = a.matmul(d);
    let (alpha, mut diag) = l1_min(&ad, y, eps, path)?;
    let x = d.mul_vec(&alpha);
    let gap = feasibility_gap(a, y, eps, &x);
    diag.feasibility_gap = gap;
    let mut report = EstimateReport::new(x, diag);
    report.auxiliary = Some(alpha);
    Ok(report)
}

/// Nuclear-norm minimization over `d₁×d₂` matrices observed through the
/// rows of `a` (each a flattened row-major measurement matrix).
pub fn estimate_lowrank(a: &Matrix, y: &[f64], d1: usize, d2: usize, eps: f64) -> Result<EstimateReport> {
    check_eps(eps)?;
    check_dim(d1 * d2, a.cols())?;
    let set = make_set(SetDescriptor::new(SetKind::NuclearBall { radius: 1.0, d1, d2 }, d1 * d2))?;
    let (x, diag) = gauge_min(&set, a, y, eps, &GaugeOptions::default())?;
    let mut report = EstimateReport::new(x, diag);
    report.shape = Some((d1, d2));
    Ok(report)
}

/// Best rank-`r` approximation of `p⁻¹Y`, with `Y` zero off the mask.
pub fn complete_matrix(y: &Matrix, mask: &[bool], p: f64, r: usize) -> Result<EstimateReport> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(alloc::format!("sampling rate {p} outside (0, 1]")));
    }
    let (d1, d2) = y.shape();
    check_dim(d1 * d2, mask.len())?;
    let scaled_obs = Matrix::from_fn(d1, d2, |i, j| if mask[i * d2 + j] { y[(i, j)] / p } else { 0.0 });
    let (x, s) = truncated_svd(&scaled_obs, r)?;
    let kept: f64 = s[..r].iter().sum();
    let mut report = EstimateReport::new(x.into_vec(), SolveDiagnostics::exact(Method::Svd, kept));
    report.shape = Some((d1, d2));
    Ok(report)
}

/// Fraction of `i` with `sign⟨aᵢ, x⟩ = yᵢ`.
pub fn sign_agreement(a: &Matrix, y: &[f64], x: &[f64]) -> Result<f64> {
    check_dim(a.rows(), y.len())?;
    check_dim(a.cols(), x.len())?;
    if y.is_empty() {
        return Ok(1.0);
    }
    let hits = a.mul_vec(x).iter().zip(y).filter(|(z, t)| sign(**z) == **t).count();
    Ok(hits as f64 / y.len() as f64)
}

fn check_signs(y: &[f64]) -> Result<()> {
    if y.iter().all(|&v| v == 1.0 || v == -1.0) {
        Ok(())
    } else {
        Err(Error::invalid("single-bit observations must be ±1"))
    }
}

/// `argmax_{u ∈ conv K} ⟨Aᵀy, u⟩`. The set must lie in the unit ball.
pub fn estimate_onebit(set: &FeasibleSet, a: &Matrix, y: &[f64]) -> Result<EstimateReport> {
    check_dim(a.rows(), y.len())?;
    check_dim(set.dim(), a.cols())?;
    check_signs(y)?;
    let convex = set.convex_hull_descriptor()?;
    if convex.outer_radius() > 1.0 + 1e-9 {
        return Err(Error::invalid("single-bit estimation needs a set inside the unit ball"));
    }
    let eta = a.tr_mul_vec(y);
    let sup = convex.support(&eta)?;
    let mut report = EstimateReport::new(sup.argmax, SolveDiagnostics::exact(Method::Support, sup.value));
    report.agreement = Some(sign_agreement(a, y, &report.estimate)?);
    Ok(report)
}

const FEASIBLE_STEPS: usize = 300;

/// Nearest point of `K ∩ S^{n−1}` in the sense available for each kind.
fn sphere_point(set: &FeasibleSet, v: &[f64]) -> Result<Vec<f64>> {
    let p = match set.kind() {
        SetKind::SparseUnitSet { .. } | SetKind::FiniteSet { .. } => set.project(v)?,
        SetKind::SparseCone { .. } | SetKind::LowRankCone { .. } => set.project(v)?,
        _ => set.convex_hull_descriptor()?.project(v)?,
    };
    let nrm = norm2(&p);
    if nrm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(scaled(&p, 1.0 / nrm))
}

/// Best-effort search for `x ∈ K ∩ S^{n−1}` with `sign(Ax) = y`.
///
/// Starts from [`estimate_onebit`] and runs projected perceptron steps on the
/// violated constraints, restarting from perturbed starts. The program is not
/// convex, so full agreement is not guaranteed; failure returns
/// [`Error::NotFeasible`] carrying the best report found.
pub fn estimate_onebit_feasible(set: &FeasibleSet, a: &Matrix, y: &[f64], restarts: usize) -> Result<EstimateReport> {
    let base = estimate_onebit(set, a, y)?;
    let n = set.dim();
    let mut best_x = match sphere_point(set, &base.estimate) {
        Ok(x) => x,
        Err(Error::ZeroVector) => {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            e
        }
        Err(e) => return Err(e),
    };
    let mut best_agree = sign_agreement(a, y, &best_x)?;
    let mut iterations = 0;
    for restart in 0..=restarts {
        if best_agree >= 1.0 {
            break;
        }
        let mut x = if restart == 0 {
            best_x.clone()
        } else {
            let noise = gaussian_vec(&mut trial_rng(0x0b17, &[restart as u64]), n);
            let jitter = 0.5 / libm::sqrt(n as f64);
            let start: Vec<f64> = best_x.iter().zip(&noise).map(|(b, z)| b + jitter * z).collect();
            sphere_point(set, &start)?
        };
        for k in 0..FEASIBLE_STEPS {
            iterations += 1;
            let z = a.mul_vec(&x);
            let mut dir = vec![0.0; n];
            let mut wrong = 0;
            for (i, (zi, yi)) in z.iter().zip(y).enumerate() {
                if sign(*zi) != *yi {
                    wrong += 1;
                    crate::vector::axpy(*yi, a.row(i), &mut dir);
                }
            }
            let agree = 1.0 - wrong as f64 / y.len().max(1) as f64;
            if agree > best_agree {
                best_agree = agree;
                best_x = x.clone();
            }
            if wrong == 0 {
                break;
            }
            let dn = norm2(&dir);
            let step = 0.5 / (1.0 + k as f64 / 20.0);
            let v: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di / dn).collect();
            x = sphere_point(set, &v)?;
        }
    }
    let objective = dot(&a.tr_mul_vec(y), &best_x);
    let diag = SolveDiagnostics {
        iterations,
        primal_residual: 1.0 - best_agree,
        feasibility_gap: 1.0 - best_agree,
        objective,
        converged: best_agree >= 1.0,
        method: Method::Projection,
    };
    let mut report = EstimateReport::new(best_x, diag);
    report.agreement = Some(best_agree);
    if best_agree >= 1.0 {
        Ok(report)
    } else {
        Err(Error::NotFeasible(Box::new(report)))
    }
}

/// Link-dependent constants of a single-index model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkInfo {
    pub lambda: f64,
    pub m_const: f64,
    /// `w₁(K)`; enables the `M·w₁(K)/√m` bound.
    pub local_width: Option<f64>,
}

/// `x̂ = P_K(x̂_lin)` with `x̂_lin = (1/m)Aᵀy`, for a cone `K`.
///
/// With ground truth and link constants the error is measured against `λx̄`;
/// with ground truth alone, against the truth itself.
pub fn estimate_single_index(
    cone: &FeasibleSet,
    a: &Matrix,
    y: &[f64],
    link: Option<&LinkInfo>,
    truth: Option<&[f64]>,
) -> Result<EstimateReport> {
    check_dim(a.rows(), y.len())?;
    check_dim(cone.dim(), a.cols())?;
    if !cone.is_cone() {
        return Err(Error::invalid("single-index estimation needs a cone"));
    }
    let m = a.rows().max(1) as f64;
    let xlin = scaled(&a.tr_mul_vec(y), 1.0 / m);
    let x = cone.project(&xlin)?;
    let objective = dist2(&x, &xlin);
    let mut report = EstimateReport::new(x, SolveDiagnostics::exact(Method::Projection, objective));
    report.auxiliary = Some(xlin);
    if let SetKind::LowRankCone { d1, d2, .. } = cone.kind() {
        report.shape = Some((*d1, *d2));
    }
    if let Some(info) = link {
        report.bound = info.local_width.map(|w| info.m_const * w / libm::sqrt(m));
    }
    if let Some(t) = truth {
        check_dim(cone.dim(), t.len())?;
        match link {
            Some(info) => {
                let nrm = norm2(t);
                if nrm == 0.0 {
                    return Err(Error::ZeroVector);
                }
                let target = scaled(t, info.lambda / nrm);
                report.error_l2 = Some(dist2(&report.estimate, &target));
                report.scaled_target = Some(target);
            }
            None => report.error_l2 = Some(dist2(&report.estimate, t)),
        }
    }
    Ok(report)
}
