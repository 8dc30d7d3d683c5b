//! Structured estimation from few random observations.
//!
//! The crate is organised around *feasible-set oracles*: every set `K` the
//! estimators work with exposes its support function, gauge (Minkowski
//! functional) and Euclidean projection in closed form. On top of those
//! oracles sit
//!
//! - [`geometry`]: Gaussian mean width and its local, cone and analytic
//!   relatives,
//! - [`observations`]: sensing ensembles, noisy/single-bit/link observations
//!   and entry sampling for matrices,
//! - [`solvers`]: alternating projections, the `ℓ1`-tube projection, gauge
//!   minimisation by bisection on scale, an exact dense simplex for `ℓ1`
//!   programs, ADMM splitting and truncated SVD,
//! - [`estimators`]: one entry point per recovery program,
//! - [`experiments`]: Monte Carlo checks of the geometric inequalities and
//!   error-rate sweeps.
//!
//! The crate is `no_std` and needs only `alloc`. Floating point special
//! functions come from `libm`, so results are bit-identical across targets.
//! Parallelism is injected through [`exec::Executor`]; the default
//! [`exec::Sequential`] executor keeps everything single-threaded.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod exec;
pub mod linalg;
pub mod rng;
pub mod vector;

pub mod estimators;
pub mod experiments;
pub mod geometry;
pub mod observations;
pub mod quadrature;
pub mod sets;
pub mod signals;
pub mod solvers;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use linalg::Matrix;
pub use sets::{FeasibleSet, SetDescriptor, SetKind, SupportResult};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
