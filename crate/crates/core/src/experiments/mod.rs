//! Monte Carlo checks of the geometric inequalities, phase transitions and
//! error-rate sweeps.
//!
//! Every trial draws from `trial_rng(seed, [grid…, trial])`, so results do not
//! depend on the executor or on how trials are scheduled.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{mean_stderr, quantile};

mod geometric;
mod phase;
mod sweep;

pub use geometric::{
    deviation_experiment, matrix_norm_bound_check, section_diameter_experiment, symmetrization_contraction_check,
    tessellation_experiment, DeviationReport, MatrixNormReport, SymmetrizationReport,
};
pub use phase::{exact_recovery_phase, phase_crossing};
pub use sweep::{sweep, ExperimentKind, NoiseModel, SignalModel, SweepPlan};

/// One grid point of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub experiment: String,
    pub n: usize,
    pub m: usize,
    pub s: Option<usize>,
    pub r: Option<usize>,
    pub eps: f64,
    pub model: String,
    pub set_kind: String,
    pub seed: u64,
    pub trials: usize,
    pub err_mean: f64,
    pub err_median: f64,
    pub err_q90: f64,
    /// Right-hand side of the relevant bound with unit constant.
    pub bound_value: f64,
    /// Experiment-specific statistics (success rates, ratios, …).
    pub extra: BTreeMap<String, f64>,
}

impl SweepRecord {
    /// Summary statistics of `errors`; all must be finite.
    pub fn from_errors(
        experiment: &str,
        n: usize,
        m: usize,
        errors: &[f64],
        bound_value: f64,
        seed: u64,
    ) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::invalid("a record needs at least one trial"));
        }
        if errors.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("trial errors must be finite"));
        }
        let (mean, _) = mean_stderr(errors);
        Ok(SweepRecord {
            experiment: experiment.into(),
            n,
            m,
            s: None,
            r: None,
            eps: 0.0,
            model: String::new(),
            set_kind: String::new(),
            seed,
            trials: errors.len(),
            err_mean: mean,
            err_median: quantile(errors, 0.5),
            err_q90: quantile(errors, 0.9),
            bound_value,
            extra: BTreeMap::new(),
        })
    }

    pub(crate) fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.into(), value);
        self
    }
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub grid: Vec<f64>,
}

/// Fits `log y = intercept + slope·log x` over the points with `y > 0`.
/// Returns `None` with fewer than four usable points.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<ScalingFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (libm::log(*x), libm::log(*y)))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    let grid = xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite()).map(|(x, _)| *x).collect();
    Some(ScalingFit { slope, intercept, r2, grid })
}

/// Number of adjacent pairs where `values` increases by more than `slack`
/// (relative to the earlier value).
pub fn count_increases(values: &[f64], slack: f64) -> usize {
    values.windows(2).filter(|w| w[1] > w[0] * (1.0 + slack)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let xs = [64.0, 128.0, 256.0, 512.0, 1024.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * libm::pow(*x, -0.5)).collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - libm::log(3.0)).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_grids_have_no_fit() {
        assert!(fit_loglog(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).is_none());
        assert!(fit_loglog(&[1.0, 2.0, 3.0, 4.0], &[1.0, 0.0, 3.0, 4.0]).is_none());
    }

    #[test]
    fn record_statistics() {
        let r = SweepRecord::from_errors("x", 4, 2, &[1.0, 2.0, 3.0, 4.0, 5.0], 1.0, 0).unwrap();
        assert_eq!(r.err_mean, 3.0);
        assert_eq!(r.err_median, 3.0);
        assert!(SweepRecord::from_errors("x", 4, 2, &[f64::NAN], 1.0, 0).is_err());
        assert!(SweepRecord::from_errors("x", 4, 2, &[], 1.0, 0).is_err());
    }
}
