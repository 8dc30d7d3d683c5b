//! Numerical engines behind the estimators.
//!
//! - [`lp`]: exact dense simplex,
//! - [`tube`]: projection onto `{x : (1/m)‖Ax − y‖₁ ≤ ε}`,
//! - [`pocs`]: alternating projections between a set and the tube,
//! - [`gauge`]: gauge minimization by bisection on scale,
//! - [`l1`]: `ℓ1` minimization under the tube, by LP, by [`ipm`] interior
//!   point or by [`admm`] splitting,
//! - [`svd`]: truncated SVD.

use serde::{Deserialize, Serialize};

pub mod admm;
pub mod gauge;
pub mod ipm;
pub mod l1;
pub mod lp;
pub mod pocs;
pub mod svd;
pub mod tube;

pub use gauge::{gauge_min, GaugeOptions};
pub use l1::{l1_min, L1Path};
pub use pocs::{pocs_intersect, PocsOptions};
pub use svd::truncated_svd;
pub use tube::{project_l1_tube, Tube};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lp,
    Splitting,
    InteriorPoint,
    Pocs,
    Bisection,
    Svd,
    Support,
    Projection,
    Tube,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    pub primal_residual: f64,
    /// `max(0, (1/m)‖Ax̂ − y‖₁ − ε)`
    pub feasibility_gap: f64,
    pub objective: f64,
    pub converged: bool,
    pub method: Method,
}

impl SolveDiagnostics {
    pub(crate) fn exact(method: Method, objective: f64) -> Self {
        SolveDiagnostics {
            iterations: 0,
            primal_residual: 0.0,
            feasibility_gap: 0.0,
            objective,
            converged: true,
            method,
        }
    }
}

/// `max(0, (1/m)‖Ax − y‖₁ − ε)`
pub fn feasibility_gap(a: &crate::Matrix, y: &[f64], eps: f64, x: &[f64]) -> f64 {
    let m = a.rows().max(1) as f64;
    let r = a.mul_vec(x);
    let l1: f64 = r.iter().zip(y).map(|(p, q)| (p - q).abs()).sum();
    (l1 / m - eps).max(0.0)
}
