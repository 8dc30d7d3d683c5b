use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::experiments::SweepRecord;
use crate::geometry::mean_width_mc_with;
use crate::linalg::{kernel_basis, operator_norm_power, Matrix};
use crate::observations::{RowDistribution, RowKind};
use crate::rng::{derive_seed, gaussian_vec, rademacher, trial_rng, uniform};
use crate::sets::{FeasibleSet, SetKind};
use crate::signals::sparse_unit_vector;
use crate::vector::{dist2, dot, mean_stderr, norm2, scaled, sign};

const WIDTH_TRIALS: usize = 2000;
const WIDTH_STREAM: u64 = u64::MAX;
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(Error::invalid("at least one trial is required"))
    } else {
        Ok(())
    }
}

fn check_points(points: &[Vec<f64>]) -> Result<usize> {
    let n = points.first().map(Vec::len).ok_or_else(|| Error::invalid("the point set is empty"))?;
    if n == 0 || points.iter().any(|p| p.len() != n) {
        return Err(Error::invalid("points must share one positive dimension"));
    }
    Ok(n)
}

/// Largest `1/‖d‖_{K−K}` over unit directions `d` of the subspace spanned by
/// the orthonormal `basis`: random combinations plus the projected
/// coordinate axes. A lower bound on `diam(K ∩ E)`.
pub fn section_diameter_lower_bound<R: Rng + ?Sized>(
    set: &FeasibleSet,
    basis: &[Vec<f64>],
    directions: usize,
    rng: &mut R,
) -> Result<f64> {
    let n = set.dim();
    let mut best: f64 = 0.0;
    let mut consider = |d: &[f64]| -> Result<()> {
        let nrm = norm2(d);
        if nrm > 1e-12 {
            best = best.max(1.0 / set.difference_gauge(&scaled(d, 1.0 / nrm))?);
        }
        Ok(())
    };
    for _ in 0..directions {
        let c = gaussian_vec(rng, basis.len());
        let mut d = vec![0.0; n];
        for (cj, bj) in c.iter().zip(basis) {
            crate::vector::axpy(*cj, bj, &mut d);
        }
        consider(&d)?;
    }
    for i in 0..n {
        let mut d = vec![0.0; n];
        for bj in basis {
            crate::vector::axpy(bj[i], bj, &mut d);
        }
        consider(&d)?;
    }
    Ok(best)
}

/// Diameter of `K ∩ ker A` for Gaussian `m × n` matrices `A`, compared with
/// `w(K)/√m`. Extras: `ratio_mean`, `ratio_max`, `width`.
pub fn section_diameter_experiment<E: Executor>(
    exec: &E,
    set: &FeasibleSet,
    m: usize,
    directions: usize,
    trials: usize,
    seed: u64,
) -> Result<SweepRecord> {
    let n = set.dim();
    check_trials(trials)?;
    if m == 0 || m >= n {
        return Err(Error::invalid(alloc::format!("codimension {m} outside 1..{n}")));
    }
    if !set.is_symmetric_convex() {
        return Err(Error::invalid("section diameters need a symmetric convex set"));
    }
    let width = mean_width_mc_with(exec, set, WIDTH_TRIALS, derive_seed(seed, &[WIDTH_STREAM]))?.mean;
    let bound = width / libm::sqrt(m as f64);
    let diam = exec.map_indexed(trials, |t| -> Result<f64> {
        let mut rng = trial_rng(seed, &[t as u64]);
        let a = Matrix::gaussian(&mut rng, m, n);
        let basis = kernel_basis(&a)?;
        section_diameter_lower_bound(set, &basis, directions, &mut rng)
    });
    let diam: Vec<f64> = diam.into_iter().collect::<Result<_>>()?;
    let ratio_max = diam.iter().fold(0.0f64, |acc, d| acc.max(d / bound));
    let mut rec = SweepRecord::from_errors("section_diameter", n, m, &diam, bound, seed)?;
    rec.set_kind = set.kind().name().into();
    let ratio_mean = rec.err_mean / bound;
    Ok(rec.with_extra("ratio_mean", ratio_mean).with_extra("ratio_max", ratio_max).with_extra("width", width))
}

/// Both sides of
/// `E sup_{u∈T} |(1/m)Σ|⟨aᵢ,u⟩| − √(2/π)‖u‖₂| ≤ (4/√m) E sup_{u∈T} |⟨g,u⟩|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub record: SweepRecord,
    /// Per-trial left-hand side.
    pub lhs: Vec<f64>,
    pub rhs: f64,
    pub rhs_stderr: f64,
    /// Trials with `lhs ≤ rhs + 3·rhs_stderr`.
    pub passed: usize,
}

fn sup_abs_inner(points: &[Vec<f64>], g: &[f64]) -> f64 {
    points.iter().map(|u| dot(g, u).abs()).fold(0.0, f64::max)
}

pub fn deviation_experiment<E: Executor>(
    exec: &E,
    points: &[Vec<f64>],
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<DeviationReport> {
    let n = check_points(points)?;
    check_trials(trials)?;
    if m == 0 {
        return Err(Error::invalid("at least one measurement is required"));
    }
    if points.len() > 10_000 {
        return Err(Error::invalid("at most 10⁴ points are supported"));
    }
    let draws = exec.map_indexed(WIDTH_TRIALS, |i| {
        let g = gaussian_vec(&mut trial_rng(seed, &[WIDTH_STREAM, i as u64]), n);
        sup_abs_inner(points, &g)
    });
    let (w, w_se) = mean_stderr(&draws);
    let scale = 4.0 / libm::sqrt(m as f64);
    let (rhs, rhs_stderr) = (scale * w, scale * w_se);
    let norms: Vec<f64> = points.iter().map(|u| norm2(u)).collect();
    let lhs = exec.map_indexed(trials, |t| {
        let a = Matrix::gaussian(&mut trial_rng(seed, &[t as u64]), m, n);
        let mut sup: f64 = 0.0;
        for (u, nu) in points.iter().zip(&norms) {
            let mean_abs = a.mul_vec(u).iter().map(|v| v.abs()).sum::<f64>() / m as f64;
            sup = sup.max((mean_abs - SQRT_2_OVER_PI * nu).abs());
        }
        sup
    });
    let passed = lhs.iter().filter(|&&v| v <= rhs + 3.0 * rhs_stderr).count();
    let record = SweepRecord::from_errors("deviation", n, m, &lhs, rhs, seed)?
        .with_extra("rhs_stderr", rhs_stderr)
        .with_extra("pass_fraction", passed as f64 / trials as f64);
    Ok(DeviationReport { record, lhs, rhs, rhs_stderr, passed })
}

/// Monte Carlo comparison of the symmetrization and contraction
/// inequalities for `Zᵢ(t) = |⟨aᵢ, t⟩|`, Gaussian `aᵢ`.
///
/// Each trial estimates both sides from `inner` paired draws and passes when
/// the mean of `LHS − RHS` is at most three standard errors above zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationReport {
    pub trials: usize,
    pub symmetrization_passed: usize,
    pub contraction_passed: usize,
    /// `E sup |Σ (Zᵢ − E Zᵢ)|`
    pub symmetrization_lhs: f64,
    /// `2 E sup |Σ εᵢ Zᵢ|`
    pub symmetrization_rhs: f64,
    /// `E sup |Σ εᵢ |⟨aᵢ,t⟩||`
    pub contraction_lhs: f64,
    /// `2 E sup |Σ εᵢ ⟨aᵢ,t⟩|`
    pub contraction_rhs: f64,
}

struct SymDraw {
    centered: f64,
    rad_abs: f64,
    rad_lin: f64,
}

fn sym_draw<R: Rng + ?Sized>(points: &[Vec<f64>], norms: &[f64], m: usize, rng: &mut R) -> SymDraw {
    let n = points[0].len();
    let a = Matrix::gaussian(rng, m, n);
    let eps: Vec<f64> = (0..m).map(|_| rademacher(rng)).collect();
    let (mut centered, mut rad_abs, mut rad_lin) = (0.0f64, 0.0f64, 0.0f64);
    for (u, nu) in points.iter().zip(norms) {
        let p = a.mul_vec(u);
        let mean = SQRT_2_OVER_PI * nu;
        centered = centered.max(p.iter().map(|v| v.abs() - mean).sum::<f64>().abs());
        rad_abs = rad_abs.max(p.iter().zip(&eps).map(|(v, e)| e * v.abs()).sum::<f64>().abs());
        rad_lin = rad_lin.max(p.iter().zip(&eps).map(|(v, e)| e * v).sum::<f64>().abs());
    }
    SymDraw { centered, rad_abs, rad_lin }
}

fn passes(diffs: &[f64]) -> bool {
    let (mean, se) = mean_stderr(diffs);
    let slack = if se.is_finite() { 3.0 * se } else { 0.0 };
    mean <= slack + 1e-12
}

pub fn symmetrization_contraction_check<E: Executor>(
    exec: &E,
    points: &[Vec<f64>],
    processes: usize,
    trials: usize,
    inner: usize,
    seed: u64,
) -> Result<SymmetrizationReport> {
    check_points(points)?;
    check_trials(trials)?;
    if processes == 0 || inner == 0 {
        return Err(Error::invalid("processes and inner draws must be positive"));
    }
    let norms: Vec<f64> = points.iter().map(|u| norm2(u)).collect();
    let per_trial = exec.map_indexed(trials, |t| {
        let mut rng = trial_rng(seed, &[t as u64]);
        let draws: Vec<SymDraw> = (0..inner).map(|_| sym_draw(points, &norms, processes, &mut rng)).collect();
        let sym: Vec<f64> = draws.iter().map(|d| d.centered - 2.0 * d.rad_abs).collect();
        let con: Vec<f64> = draws.iter().map(|d| d.rad_abs - 2.0 * d.rad_lin).collect();
        let k = inner as f64;
        let sums = [
            draws.iter().map(|d| d.centered).sum::<f64>() / k,
            draws.iter().map(|d| d.rad_abs).sum::<f64>() / k,
            draws.iter().map(|d| d.rad_lin).sum::<f64>() / k,
        ];
        (passes(&sym), passes(&con), sums)
    });
    let tf = trials as f64;
    let avg = |i: usize| per_trial.iter().map(|r| r.2[i]).sum::<f64>() / tf;
    Ok(SymmetrizationReport {
        trials,
        symmetrization_passed: per_trial.iter().filter(|r| r.0).count(),
        contraction_passed: per_trial.iter().filter(|r| r.1).count(),
        symmetrization_lhs: avg(0),
        symmetrization_rhs: 2.0 * avg(1),
        contraction_lhs: avg(1),
        contraction_rhs: 2.0 * avg(2),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixNormReport {
    pub d1: usize,
    pub d2: usize,
    pub trials: usize,
    pub mean_norm: f64,
    pub stderr: f64,
    /// `√d₁ + √d₂`
    pub gordon_bound: f64,
    /// Mean operator norm within 2% of the bound.
    pub gordon_holds: bool,
    /// `E max_i ‖Gᵢ‖₂ + E max_j ‖Gʲ‖₂`
    pub seginer_term: f64,
    pub seginer_ratio: f64,
}

const POWER_STEPS: usize = 200;
const POWER_TOL: f64 = 1e-10;
const POWER_RESTARTS: usize = 3;

/// Operator norms of `d₁ × d₂` matrices with i.i.d. Gaussian or Rademacher
/// entries, against `√d₁ + √d₂` and the largest row and column norms.
pub fn matrix_norm_bound_check<E: Executor>(
    exec: &E,
    d1: usize,
    d2: usize,
    kind: RowKind,
    trials: usize,
    seed: u64,
) -> Result<MatrixNormReport> {
    check_trials(trials)?;
    if d1 == 0 || d2 == 0 {
        return Err(Error::invalid("matrix dimensions must be positive"));
    }
    if kind == RowKind::UniformSphereScaled {
        return Err(Error::invalid("entries must be i.i.d.; use Gaussian or Rademacher"));
    }
    let dist = RowDistribution::new(kind, d2);
    let per_trial = exec.map_indexed(trials, |t| {
        let mut rng = trial_rng(seed, &[t as u64]);
        let g = dist.sample(d1, &mut rng);
        let op = operator_norm_power(&g, POWER_STEPS, POWER_TOL, POWER_RESTARTS, &mut rng);
        let row = (0..d1).map(|i| norm2(g.row(i))).fold(0.0, f64::max);
        let col = (0..d2).map(|j| norm2(&g.column(j))).fold(0.0, f64::max);
        (op, row, col)
    });
    let norms: Vec<f64> = per_trial.iter().map(|r| r.0).collect();
    let (mean_norm, stderr) = mean_stderr(&norms);
    let tf = trials as f64;
    let seginer_term = per_trial.iter().map(|r| r.1 + r.2).sum::<f64>() / tf;
    let gordon_bound = libm::sqrt(d1 as f64) + libm::sqrt(d2 as f64);
    Ok(MatrixNormReport {
        d1,
        d2,
        trials,
        mean_norm,
        stderr,
        gordon_bound,
        gordon_holds: mean_norm <= gordon_bound * 1.02,
        seginer_term,
        seginer_ratio: mean_norm / seginer_term,
    })
}

/// Sampler for points of `K ∩ S^{n−1}` and nearby points of the same set.
enum SpherePoints<'a> {
    Sphere(usize),
    Sparse { n: usize, s: usize, set: &'a FeasibleSet },
    Finite(&'a [Vec<f64>]),
}

impl SpherePoints<'_> {
    fn new(set: &FeasibleSet) -> Result<SpherePoints<'_>> {
        let n = set.dim();
        match set.kind() {
            SetKind::EuclideanBall { radius } if (*radius - 1.0).abs() <= 1e-12 => Ok(SpherePoints::Sphere(n)),
            SetKind::SparseUnitSet { s } => Ok(SpherePoints::Sparse { n, s: *s, set }),
            SetKind::FiniteSet { points } => {
                if points.iter().any(|p| (norm2(p) - 1.0).abs() > 1e-9) {
                    return Err(Error::invalid("finite set points must lie on the unit sphere"));
                }
                Ok(SpherePoints::Finite(points))
            }
            _ => Err(Error::invalid("tessellation needs the unit sphere, unit sparse vectors or unit points")),
        }
    }

    fn symmetric(&self) -> bool {
        !matches!(self, SpherePoints::Finite(_))
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            SpherePoints::Sphere(n) => loop {
                let g = gaussian_vec(rng, *n);
                let nrm = norm2(&g);
                if nrm > 0.0 {
                    return Ok(scaled(&g, 1.0 / nrm));
                }
            },
            SpherePoints::Sparse { n, s, .. } => sparse_unit_vector(rng, *n, *s),
            SpherePoints::Finite(points) => Ok(points[rng.random_range(0..points.len())].clone()),
        }
    }

    /// A point of the set near `x` at a scale of roughly `delta`.
    fn near<R: Rng + ?Sized>(&self, x: &[f64], delta: f64, rng: &mut R) -> Result<Vec<f64>> {
        let n = x.len();
        let jitter = |rng: &mut R| -> Vec<f64> {
            let g = gaussian_vec(rng, n);
            let step = delta / libm::sqrt(n as f64);
            x.iter().zip(&g).map(|(a, b)| a + step * b).collect()
        };
        match self {
            SpherePoints::Sphere(_) => loop {
                let v = jitter(rng);
                let nrm = norm2(&v);
                if nrm > 0.0 {
                    return Ok(scaled(&v, 1.0 / nrm));
                }
            },
            SpherePoints::Sparse { set, .. } => set.project(&jitter(rng)),
            SpherePoints::Finite(_) => self.sample(rng),
        }
    }
}

fn same_cell(a: &Matrix, x: &[f64], z: &[f64]) -> bool {
    let (p, q) = (a.mul_vec(x), a.mul_vec(z));
    p.iter().zip(&q).all(|(u, v)| sign(*u) == sign(*v))
}

/// Largest distance between sampled pairs of `K ∩ S^{n−1}` that share a
/// cell of the tessellation by `m` Gaussian hyperplanes; a lower bound on
/// the largest cell diameter.
///
/// Pairs are either antipodal (symmetric sets) or a point and a perturbation
/// at a log-uniform scale in `[10⁻³, 4]`.
pub fn tessellation_experiment<E: Executor>(
    exec: &E,
    set: &FeasibleSet,
    m: usize,
    pairs: usize,
    trials: usize,
    seed: u64,
) -> Result<SweepRecord> {
    check_trials(trials)?;
    if pairs == 0 {
        return Err(Error::invalid("at least one pair is required"));
    }
    let sampler = SpherePoints::new(set)?;
    let n = set.dim();
    let width = mean_width_mc_with(exec, set, WIDTH_TRIALS, derive_seed(seed, &[WIDTH_STREAM]))?.mean;
    let diam = exec.map_indexed(trials, |t| -> Result<f64> {
        let mut rng = trial_rng(seed, &[t as u64]);
        let a = Matrix::gaussian(&mut rng, m, n);
        let mut best: Option<f64> = None;
        for p in 0..pairs {
            let x = sampler.sample(&mut rng)?;
            let z = if p % 10 == 0 && sampler.symmetric() {
                scaled(&x, -1.0)
            } else {
                let delta = libm::pow(10.0, -3.0 + 3.6 * uniform(&mut rng));
                sampler.near(&x, delta, &mut rng)?
            };
            if same_cell(&a, &x, &z) {
                let d = dist2(&x, &z);
                best = Some(best.map_or(d, |b| b.max(d)));
            }
        }
        best.ok_or(Error::InsufficientPairs)
    });
    let diam: Vec<f64> = diam.into_iter().collect::<Result<_>>()?;
    let bound = width / libm::sqrt(m.max(1) as f64);
    let mut rec = SweepRecord::from_errors("tessellation", n, m, &diam, bound, seed)?;
    rec.set_kind = set.kind().name().into();
    if let SetKind::SparseUnitSet { s } = set.kind() {
        rec.s = Some(*s);
    }
    Ok(rec.with_extra("width", width))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::quadrature::gaussian_expectation;
    use crate::sets::{make_set, SetDescriptor};

    fn set(kind: SetKind, n: usize) -> FeasibleSet {
        make_set(SetDescriptor::new(kind, n)).unwrap()
    }

    #[test]
    fn ball_sections_have_diameter_two() {
        let k = set(SetKind::EuclideanBall { radius: 1.0 }, 12);
        let rec = section_diameter_experiment(&Sequential, &k, 5, 10, 4, 3).unwrap();
        assert!((rec.err_mean - 2.0).abs() < 1e-12 && (rec.err_q90 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn line_section_of_the_cross_polytope() {
        let n = 9;
        let k = set(SetKind::L1Ball { radius: 1.0 }, n);
        let rec = section_diameter_experiment(&Sequential, &k, n - 1, 5, 1, 11).unwrap();
        // the kernel is a line through ±d; the section is [−d/‖d‖₁, d/‖d‖₁]
        let mut rng = trial_rng(11, &[0]);
        let a = Matrix::gaussian(&mut rng, n - 1, n);
        let d = kernel_basis(&a).unwrap().remove(0);
        let exact = 2.0 * norm2(&d) / crate::vector::norm1(&d);
        assert!((rec.err_mean - exact).abs() < 1e-12, "{} vs {exact}", rec.err_mean);
    }

    #[test]
    fn deviation_of_the_origin_is_zero() {
        let rep = deviation_experiment(&Sequential, &[vec![0.0; 4]], 10, 5, 1).unwrap();
        assert!(rep.lhs.iter().all(|v| *v == 0.0));
        assert_eq!(rep.rhs, 0.0);
        assert_eq!(rep.passed, 5);
    }

    #[test]
    fn deviation_single_unit_vector() {
        // LHS = E|mean of m folded normals − √(2/π)|, RHS = (4/√m)·√(2/π)
        let m = 16;
        let rep = deviation_experiment(&Sequential, &[vec![1.0, 0.0, 0.0]], m, 4000, 2).unwrap();
        let rhs = 4.0 / libm::sqrt(m as f64) * SQRT_2_OVER_PI;
        assert!((rep.rhs - rhs).abs() < 3.0 * rep.rhs_stderr + 1e-3);
        // folded normal variance 1 − 2/π, so E|Z̄ − μ| ≈ √(2/π)·√((1 − 2/π)/m)
        let approx = SQRT_2_OVER_PI * libm::sqrt((1.0 - 2.0 / core::f64::consts::PI) / m as f64);
        assert!((rep.record.err_mean - approx).abs() < 0.05 * approx, "{} vs {approx}", rep.record.err_mean);
        assert!(rep.record.err_mean < rhs);
    }

    #[test]
    fn symmetrization_with_a_single_process() {
        // T = {t}, m = 1: E||g| − √(2/π)|·|t| against 2|t|E|g|
        let t = 0.7;
        let rep = symmetrization_contraction_check(&Sequential, &[vec![t]], 1, 20, 2000, 5).unwrap();
        let c = SQRT_2_OVER_PI;
        let exact_lhs = t * gaussian_expectation(|z| (z.abs() - c).abs(), &[-c, 0.0, c]);
        assert!((rep.symmetrization_lhs - exact_lhs).abs() < 0.01, "{} vs {exact_lhs}", rep.symmetrization_lhs);
        assert!((rep.symmetrization_rhs - 2.0 * t * c).abs() < 0.02);
        // with one process both Rademacher sums have the same absolute value
        assert!((rep.contraction_rhs - 2.0 * rep.contraction_lhs).abs() < 1e-12);
        assert_eq!(rep.symmetrization_passed, 20);
        assert_eq!(rep.contraction_passed, 20);
    }

    #[test]
    fn zero_variance_process() {
        let rep = symmetrization_contraction_check(&Sequential, &[vec![0.0, 0.0]], 3, 4, 10, 1).unwrap();
        assert_eq!(rep.symmetrization_lhs, 0.0);
        assert_eq!(rep.symmetrization_passed, 4);
    }

    #[test]
    fn single_row_norm_is_chi_mean() {
        let rep = matrix_norm_bound_check(&Sequential, 1, 30, RowKind::Gaussian, 3000, 4).unwrap();
        let chi = crate::geometry::expected_gaussian_norm(30);
        assert!((rep.mean_norm - chi).abs() < 3.0 * rep.stderr + 1e-9);
        assert!(rep.mean_norm <= rep.gordon_bound);
    }

    #[test]
    fn rademacher_seginer_ratio_is_at_most_one() {
        let rep = matrix_norm_bound_check(&Sequential, 40, 40, RowKind::Rademacher, 10, 6).unwrap();
        assert!(rep.seginer_ratio <= 1.0);
    }

    #[test]
    fn no_hyperplanes_means_one_cell() {
        let k = set(SetKind::SparseUnitSet { s: 3 }, 16);
        let rec = tessellation_experiment(&Sequential, &k, 0, 50, 3, 9).unwrap();
        assert!((rec.err_mean - 2.0).abs() < 1e-12);
    }

    #[test]
    fn antipodal_points_are_separated() {
        let mut rng = trial_rng(3, &[0]);
        let a = Matrix::gaussian(&mut rng, 1, 5);
        let x = gaussian_vec(&mut rng, 5);
        assert!(!same_cell(&a, &x, &scaled(&x, -1.0)));
    }
}
