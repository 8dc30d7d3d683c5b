use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::experiments::SweepRecord;
use crate::geometry::{descent_cone_width_l1_with, escape_probability_bound};
use crate::linalg::Matrix;
use crate::rng::{derive_seed, trial_rng};
use crate::signals::sparse_unit_vector;
use crate::solvers::{l1_min, L1Path};
use crate::vector::dist2;

const CONE_TRIALS: usize = 2000;
/// Recovery counts as exact below this `ℓ2` error.
pub const SUCCESS_TOL: f64 = 1e-4;

/// Noiseless `ℓ1` recovery of random `s`-sparse unit vectors over a grid of
/// measurement counts.
///
/// Each record carries `success_rate`, the descent-cone width `cone_width`
/// and `escape_bound`; `bound_value` is the squared cone width.
pub fn exact_recovery_phase<E: Executor>(
    exec: &E,
    n: usize,
    s: usize,
    grid: &[usize],
    trials: usize,
    seed: u64,
    path: L1Path,
) -> Result<Vec<SweepRecord>> {
    if trials == 0 || grid.is_empty() {
        return Err(Error::invalid("phase experiments need trials and a grid"));
    }
    if grid.contains(&0) {
        return Err(Error::invalid("measurement counts must be positive"));
    }
    // the l1 descent cone at an s-sparse point is the same up to signed
    // permutations, so one representative suffices
    let mut x0 = vec![0.0; n];
    if s == 0 || s > n {
        return Err(Error::invalid(alloc::format!("sparsity {s} outside 1..={n}")));
    }
    x0[..s].iter_mut().for_each(|v| *v = 1.0);
    let cone = descent_cone_width_l1_with(exec, &x0, CONE_TRIALS, derive_seed(seed, &[u64::MAX]))?.mean;
    let mut out = Vec::with_capacity(grid.len());
    for (gi, &m) in grid.iter().enumerate() {
        let errs = exec.map_indexed(trials, |t| -> Result<f64> {
            let mut rng = trial_rng(seed, &[gi as u64, t as u64]);
            let x = sparse_unit_vector(&mut rng, n, s)?;
            let a = Matrix::gaussian(&mut rng, m, n);
            let y = a.mul_vec(&x);
            match l1_min(&a, &y, 0.0, path) {
                Ok((xh, _)) => Ok(dist2(&xh, &x)),
                Err(Error::NotConverged(partial)) => Ok(dist2(&partial.estimate, &x)),
                Err(e) => Err(e),
            }
        });
        let errs: Vec<f64> = errs.into_iter().collect::<Result<_>>()?;
        let rate = errs.iter().filter(|&&e| e <= SUCCESS_TOL).count() as f64 / trials as f64;
        let mut rec = SweepRecord::from_errors("phase", n, m, &errs, cone * cone, seed)?;
        rec.s = Some(s);
        rec.model = "linear".into();
        rec.set_kind = "L1Ball".into();
        out.push(
            rec.with_extra("success_rate", rate)
                .with_extra("cone_width", cone)
                .with_extra("escape_bound", escape_probability_bound(m, cone)),
        );
    }
    Ok(out)
}

/// The `m` where the success rate first reaches one half, interpolated
/// linearly between grid points.
pub fn phase_crossing(records: &[SweepRecord]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        records.iter().filter_map(|r| r.extra.get("success_rate").map(|p| (r.m as f64, *p))).collect();
    let first = pts.iter().position(|p| p.1 >= 0.5)?;
    if first == 0 {
        return Some(pts[0].0);
    }
    let (m0, p0) = pts[first - 1];
    let (m1, p1) = pts[first];
    Some(m0 + (0.5 - p0) / (p1 - p0) * (m1 - m0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    #[test]
    fn square_systems_always_succeed() {
        let recs = exact_recovery_phase(&Sequential, 16, 2, &[16], 10, 1, L1Path::Lp).unwrap();
        assert_eq!(recs[0].extra["success_rate"], 1.0);
    }

    #[test]
    fn too_few_measurements_fail() {
        let recs = exact_recovery_phase(&Sequential, 40, 4, &[2, 4], 20, 2, L1Path::Lp).unwrap();
        assert!(recs.iter().all(|r| r.extra["success_rate"] <= 0.1));
    }

    #[test]
    fn crossing_interpolates() {
        let mk = |m: usize, p: f64| {
            SweepRecord::from_errors("phase", 10, m, &[0.0], 1.0, 0).unwrap().with_extra("success_rate", p)
        };
        let recs = [mk(10, 0.0), mk(20, 0.25), mk(30, 0.75)];
        assert_eq!(phase_crossing(&recs), Some(25.0));
        assert_eq!(phase_crossing(&recs[..2]), None);
    }
}
