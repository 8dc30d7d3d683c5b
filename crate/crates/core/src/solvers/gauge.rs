//! `min ‖x‖_K` subject to `(1/m)‖Ax − y‖₁ ≤ ε`, by bisection on the scale
//! `t` at which `tK` first meets the tube.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, PartialSolve, Result};
use crate::linalg::Matrix;
use crate::sets::FeasibleSet;
use crate::solvers::pocs::{pocs_from, PocsOptions};
use crate::solvers::tube::Tube;
use crate::solvers::{Method, SolveDiagnostics};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeOptions {
    pub bisect_steps: usize,
    pub pocs: PocsOptions,
}

impl Default for GaugeOptions {
    fn default() -> Self {
        GaugeOptions { bisect_steps: 40, pocs: PocsOptions::default() }
    }
}

/// The set must be convex; convexify first.
pub fn gauge_min(
    set: &FeasibleSet,
    a: &Matrix,
    y: &[f64],
    eps: f64,
    opts: &GaugeOptions,
) -> Result<(Vec<f64>, SolveDiagnostics)> {
    check_dim(set.dim(), a.cols())?;
    if !set.is_convex() {
        return Err(Error::invalid("gauge minimization needs a convex set"));
    }
    let tube = Tube::new(a, y, eps)?;
    let anchor = tube.project(&vec![0.0; set.dim()], opts.pocs.tube_iters);
    let gap = tube.gap(&anchor);
    if gap > 1e-8 {
        return Err(Error::EmptyIntersection { residual: gap });
    }
    let gauge_of = |x: &[f64]| set.gauge(x).ok().filter(|g| g.is_finite());
    let probe = |t: f64, start: &[f64]| -> Result<Probe> {
        let scaled = set.scaled(t)?;
        Ok(match pocs_from(&scaled, &tube, start, &opts.pocs) {
            Ok((x, _)) => Probe::Feasible(x),
            Err(Error::EmptyIntersection { .. }) => Probe::Empty,
            Err(Error::NotConverged(partial)) => Probe::Slow(partial.estimate),
            Err(e) => return Err(e),
        })
    };

    let (mut hi, mut best) = match gauge_of(&anchor) {
        Some(0.0) => {
            let diag = finish(set, &tube, &anchor, 0, true);
            return Ok((anchor, diag));
        }
        Some(g) => (g, anchor.clone()),
        None => {
            // the anchor is outside the span of K: grow the scale until POCS succeeds
            let mut t = 1.0;
            let mut found = None;
            for _ in 0..60 {
                if let Probe::Feasible(x) = probe(t, &anchor)? {
                    found = Some(x);
                    break;
                }
                t *= 2.0;
            }
            match found {
                Some(x) => (gauge_of(&x).unwrap_or(t).min(t), x),
                None => return Err(Error::EmptyIntersection { residual: f64::INFINITY }),
            }
        }
    };

    // Every tube point bounds the optimum from above; only a stalled residual
    // (a positive distance between tK and the tube) moves the lower end.
    let mut lo = 0.0;
    for _ in 0..opts.bisect_steps {
        let mid = 0.5 * (lo + hi);
        match probe(mid, &best)? {
            Probe::Feasible(x) | Probe::Slow(x) => {
                if let Some(g) = gauge_of(&x) {
                    if g < hi && tube.gap(&x) <= 1e-9 {
                        hi = g;
                        best = x;
                    }
                }
            }
            Probe::Empty => lo = mid,
        }
    }
    let diag = finish(set, &tube, &best, opts.bisect_steps, true);
    if diag.feasibility_gap > 1e-6 {
        let diagnostics = SolveDiagnostics { converged: false, ..diag };
        return Err(Error::NotConverged(Box::new(PartialSolve { estimate: best, diagnostics })));
    }
    Ok((best, diag))
}

enum Probe {
    Feasible(Vec<f64>),
    Slow(Vec<f64>),
    Empty,
}

fn finish(set: &FeasibleSet, tube: &Tube, x: &[f64], iters: usize, converged: bool) -> SolveDiagnostics {
    let gap = tube.gap(x);
    SolveDiagnostics {
        iterations: iters,
        primal_residual: gap,
        feasibility_gap: gap,
        objective: set.gauge(x).unwrap_or(f64::NAN),
        converged,
        method: Method::Bisection,
    }
}
