use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    complete_matrix, estimate_linear_gauge, estimate_lowrank, estimate_onebit, estimate_single_index,
    estimate_sparse_dictionary, EstimateReport, LinkInfo,
};
use crate::exec::Executor;
use crate::experiments::{exact_recovery_phase, fit_loglog, tessellation_experiment, ScalingFit, SweepRecord};
use crate::geometry::{local_mean_width_mc_with, mean_width_mc_with};
use crate::linalg::Matrix;
use crate::observations::{
    link_constants, observe_linear, observe_link, observe_single_bit, sample_entries, LinkFunction, LinkKind,
    NoiseSpec, RowDistribution, RowKind,
};
use crate::rng::{derive_seed, trial_rng, TrialRng};
use crate::sets::{make_set, FeasibleSet, SetDescriptor, SetKind};
use crate::signals::{compressible_vector, low_rank_matrix, sparse_unit_vector, MatrixScale};
use crate::solvers::{l1_min, L1Path};
use crate::vector::dist2;

const WIDTH_TRIALS: usize = 1000;
const GEOMETRY_STREAM: u64 = u64::MAX;
const DICTIONARY_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// `ℓ1` (or gauge) recovery from noisy linear observations.
    Recover,
    /// Gauge minimization with an explicit set.
    Regress,
    /// Coefficient recovery in the redundant dictionary `[I, G]`.
    DictRecover,
    /// Nuclear-norm recovery of a low-rank matrix.
    Lowrank,
    /// Matrix completion by truncated SVD.
    Complete,
    /// Single-bit estimation by one support-oracle call.
    Onebit,
    /// Single-index estimation by projecting `(1/m)Aᵀy` onto a cone.
    Project,
    /// Largest same-cell distance of a hyperplane tessellation.
    Tessellate,
    /// Exact noiseless `ℓ1` recovery rates.
    Phase,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Recover => "recover",
            ExperimentKind::Regress => "regress",
            ExperimentKind::DictRecover => "dict-recover",
            ExperimentKind::Lowrank => "lowrank",
            ExperimentKind::Complete => "complete",
            ExperimentKind::Onebit => "onebit",
            ExperimentKind::Project => "project",
            ExperimentKind::Tessellate => "tessellate",
            ExperimentKind::Phase => "phase",
        }
    }
}

/// Ground-truth vectors. Sparse signals use the plan's `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalModel {
    #[default]
    Sparse,
    Compressible {
        effective_sparsity: f64,
    },
}

/// Shape of the observation noise at level `ε` (`ε = 0` is noiseless).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Gaussian with mean absolute value `ε`, shrunk into the budget.
    #[default]
    Gaussian,
    Adversarial,
    /// Uniform on `[−ε, ε]`.
    Uniform,
}

impl NoiseModel {
    fn spec(self, eps: f64) -> NoiseSpec {
        if eps == 0.0 {
            return NoiseSpec::None;
        }
        match self {
            NoiseModel::Gaussian => {
                NoiseSpec::IidBounded { sigma: eps * libm::sqrt(core::f64::consts::FRAC_PI_2), eps }
            }
            NoiseModel::Adversarial => NoiseSpec::Adversarial { eps },
            NoiseModel::Uniform => NoiseSpec::Uniform { bound: eps },
        }
    }
}

/// A fully resolved sweep: every grid point `(ε, m)` runs `trials` trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub m_grid: Vec<usize>,
    pub s: Option<usize>,
    pub r: Option<usize>,
    pub eps_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub set: Option<SetDescriptor>,
    pub rows: RowKind,
    pub link: Option<LinkFunction>,
    pub noise: NoiseModel,
    pub signal: SignalModel,
    pub solver: L1Path,
    /// Point pairs per tessellation trial.
    pub pairs: usize,
    /// Matrix shape for matrix experiments; defaults to a square of side `√n`.
    pub shape: Option<(usize, usize)>,
}

impl SweepPlan {
    pub fn new(experiment: ExperimentKind, n: usize, m_grid: Vec<usize>) -> Self {
        SweepPlan {
            experiment,
            n,
            m_grid,
            s: None,
            r: None,
            eps_grid: alloc::vec![0.0],
            trials: 50,
            seed: 0,
            set: None,
            rows: RowKind::Gaussian,
            link: None,
            noise: NoiseModel::Gaussian,
            signal: SignalModel::Sparse,
            solver: L1Path::Auto,
            pairs: 2000,
            shape: None,
        }
    }

    fn sparsity(&self) -> Result<usize> {
        self.s.ok_or_else(|| Error::Config(alloc::format!("experiment {} needs s", self.experiment.name())))
    }

    fn rank(&self) -> Result<usize> {
        self.r.ok_or_else(|| Error::Config(alloc::format!("experiment {} needs r", self.experiment.name())))
    }

    fn matrix_shape(&self) -> Result<(usize, usize)> {
        if let Some((d1, d2)) = self.shape {
            if d1 * d2 != self.n {
                return Err(Error::Config(alloc::format!("shape {d1}×{d2} does not match n = {}", self.n)));
            }
            return Ok((d1, d2));
        }
        let d = libm::round(libm::sqrt(self.n as f64)) as usize;
        if d * d != self.n {
            return Err(Error::Config(alloc::format!("n = {} is not a square; give a shape", self.n)));
        }
        Ok((d, d))
    }

    fn nominal_l1(&self) -> Result<f64> {
        Ok(match self.signal {
            SignalModel::Sparse => libm::sqrt(self.sparsity()? as f64),
            SignalModel::Compressible { effective_sparsity } => libm::sqrt(effective_sparsity),
        })
    }

    fn set_or(&self, default: SetKind) -> Result<FeasibleSet> {
        let desc = self.set.clone().unwrap_or_else(|| SetDescriptor::new(default, self.n));
        if desc.n != self.n {
            return Err(Error::Config(alloc::format!("set dimension {} does not match n = {}", desc.n, self.n)));
        }
        make_set(desc)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if self.m_grid.is_empty() {
            return bad("the m grid is empty");
        }
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return bad("eps values must be finite and non-negative");
        }
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        if self.pairs == 0 {
            return bad("pairs must be positive");
        }
        Ok(())
    }

    fn model_name(&self) -> String {
        let link = match self.experiment {
            ExperimentKind::Onebit => self.link.clone().unwrap_or_else(LinkFunction::sign),
            ExperimentKind::Project => self.link.clone().unwrap_or_else(LinkFunction::sign),
            _ => LinkFunction::linear(),
        };
        match link.kind {
            LinkKind::Sign => "sign",
            LinkKind::Tanh { .. } => "tanh",
            LinkKind::Linear => "linear",
            LinkKind::Custom { .. } => "custom",
        }
        .into()
    }
}

/// Error of one trial and whether its solver converged.
struct Trial {
    error: f64,
    converged: bool,
}

impl Trial {
    fn from_report(report: Result<EstimateReport>, metric: impl Fn(&[f64]) -> f64) -> Result<Trial> {
        match report {
            Ok(r) => Ok(Trial { error: metric(&r.estimate), converged: r.diagnostics.converged }),
            Err(Error::NotConverged(p)) => Ok(Trial { error: metric(&p.estimate), converged: false }),
            Err(e) => Err(e),
        }
    }
}

/// Per-sweep constants shared by all trials.
struct Context {
    set: Option<FeasibleSet>,
    bound_scale: f64,
    link: Option<LinkFunction>,
    info: Option<LinkInfo>,
    dictionary: Option<Matrix>,
    shape: (usize, usize),
}

fn context<E: Executor>(exec: &E, plan: &SweepPlan) -> Result<Context> {
    let n = plan.n;
    let width_seed = derive_seed(plan.seed, &[GEOMETRY_STREAM]);
    let mut ctx = Context { set: None, bound_scale: 1.0, link: None, info: None, dictionary: None, shape: (n, 1) };
    match plan.experiment {
        ExperimentKind::Recover | ExperimentKind::Regress => {
            let set = plan.set_or(SetKind::L1Ball { radius: plan.nominal_l1()? })?;
            ctx.bound_scale = mean_width_mc_with(exec, &set, WIDTH_TRIALS, width_seed)?.mean;
            ctx.set = Some(set);
        }
        ExperimentKind::Onebit => {
            let set = plan.set_or(SetKind::ConvexSparse { s: plan.sparsity()?, radius: 1.0 })?;
            ctx.bound_scale = mean_width_mc_with(exec, &set, WIDTH_TRIALS, width_seed)?.mean;
            ctx.set = Some(set);
            let link = plan.link.clone().unwrap_or_else(LinkFunction::sign);
            if !link.binary {
                return Err(Error::Config("single-bit sweeps need a binary link".into()));
            }
            ctx.link = Some(link);
        }
        ExperimentKind::Project => {
            let set = plan.set_or(SetKind::SparseCone { s: plan.sparsity()? })?;
            let link = plan.link.clone().unwrap_or_else(LinkFunction::sign);
            let (lambda, m_const) = link_constants(&link, 1.0)?;
            let w1 = local_mean_width_mc_with(exec, &set, 1.0, WIDTH_TRIALS, width_seed)?.mean;
            ctx.info = Some(LinkInfo { lambda, m_const, local_width: Some(w1) });
            ctx.bound_scale = m_const * w1;
            ctx.set = Some(set);
            ctx.link = Some(link);
        }
        ExperimentKind::DictRecover => {
            let s = plan.sparsity()?;
            let mut rng = trial_rng(plan.seed, &[DICTIONARY_STREAM]);
            let g = Matrix::gaussian(&mut rng, n, n);
            let norms: Vec<f64> = (0..n).map(|j| crate::vector::norm2(&g.column(j))).collect();
            let d = Matrix::from_fn(n, 2 * n, |i, j| {
                if j < n {
                    if i == j {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    g[(i, j - n)] / norms[j - n]
                }
            });
            let big_n = (2 * n) as f64;
            ctx.bound_scale = libm::sqrt(s as f64 * libm::log(big_n));
            ctx.dictionary = Some(d);
        }
        ExperimentKind::Lowrank | ExperimentKind::Complete => {
            let (d1, d2) = plan.matrix_shape()?;
            let r = plan.rank()?;
            ctx.shape = (d1, d2);
            ctx.bound_scale = libm::sqrt((r * (d1 + d2)) as f64);
        }
        ExperimentKind::Tessellate | ExperimentKind::Phase => {}
    }
    Ok(ctx)
}

fn draw_signal(plan: &SweepPlan, rng: &mut TrialRng, len: usize) -> Result<Vec<f64>> {
    match plan.signal {
        SignalModel::Sparse => sparse_unit_vector(rng, len, plan.sparsity()?),
        SignalModel::Compressible { effective_sparsity } => compressible_vector(rng, len, effective_sparsity),
    }
}

fn run_trial(plan: &SweepPlan, ctx: &Context, eps: f64, m: usize, rng: &mut TrialRng) -> Result<Trial> {
    let n = plan.n;
    let noise = plan.noise.spec(eps);
    match plan.experiment {
        ExperimentKind::Recover | ExperimentKind::Regress => {
            let set = ctx.set.as_ref().expect("context holds the set");
            let x = draw_signal(plan, rng, n)?;
            let a = RowDistribution::new(plan.rows, n).sample(m, rng);
            let (y, _) = observe_linear(&a, &x, &noise, rng.random())?;
            let use_l1 = plan.experiment == ExperimentKind::Recover && matches!(set.kind(), SetKind::L1Ball { .. });
            let report = if use_l1 {
                l1_min(&a, &y, eps, plan.solver).map(|(xh, diag)| EstimateReport {
                    estimate: xh,
                    shape: None,
                    auxiliary: None,
                    diagnostics: diag,
                    error_l2: None,
                    scaled_target: None,
                    agreement: None,
                    bound: None,
                })
            } else {
                estimate_linear_gauge(set, &a, &y, eps)
            };
            Trial::from_report(report, |xh| dist2(xh, &x))
        }
        ExperimentKind::DictRecover => {
            let d = ctx.dictionary.as_ref().expect("context holds the dictionary");
            let alpha = draw_signal(plan, rng, d.cols())?;
            let x = d.mul_vec(&alpha);
            let a = RowDistribution::new(plan.rows, n).sample(m, rng);
            let (y, _) = observe_linear(&a, &x, &noise, rng.random())?;
            let report = estimate_sparse_dictionary(d, &a, &y, eps, plan.solver);
            Trial::from_report(report, |xh| dist2(xh, &x))
        }
        ExperimentKind::Lowrank => {
            let (d1, d2) = ctx.shape;
            let x = low_rank_matrix(rng, d1, d2, plan.rank()?, MatrixScale::Frobenius)?.into_vec();
            let a = RowDistribution::new(plan.rows, n).sample(m, rng);
            let (y, _) = observe_linear(&a, &x, &noise, rng.random())?;
            Trial::from_report(estimate_lowrank(&a, &y, d1, d2, eps), |xh| dist2(xh, &x))
        }
        ExperimentKind::Complete => {
            let (d1, d2) = ctx.shape;
            let r = plan.rank()?;
            let x = low_rank_matrix(rng, d1, d2, r, MatrixScale::MaxEntry)?;
            let noise = if eps == 0.0 { NoiseSpec::None } else { NoiseSpec::Uniform { bound: eps } };
            let sample = sample_entries(&x, m, &noise, rng.random())?;
            let report = complete_matrix(&sample.y, &sample.mask, sample.p, r);
            let scale = libm::sqrt((d1 * d2) as f64);
            Trial::from_report(report, |xh| dist2(xh, x.data()) / scale)
        }
        ExperimentKind::Onebit => {
            let set = ctx.set.as_ref().expect("context holds the set");
            let link = ctx.link.as_ref().expect("context holds the link");
            let x = draw_signal(plan, rng, n)?;
            let a = RowDistribution::new(plan.rows, n).sample(m, rng);
            let y = if link.kind == LinkKind::Sign && link.noise_sigma == 0.0 {
                observe_single_bit(&a, &x)?
            } else {
                observe_link(&a, &x, link, rng.random())?
            };
            Trial::from_report(estimate_onebit(set, &a, &y), |xh| {
                let d = dist2(xh, &x);
                d * d
            })
        }
        ExperimentKind::Project => {
            let set = ctx.set.as_ref().expect("context holds the cone");
            let link = ctx.link.as_ref().expect("context holds the link");
            let x = draw_signal(plan, rng, n)?;
            let a = RowDistribution::new(plan.rows, n).sample(m, rng);
            let y = observe_link(&a, &x, link, rng.random())?;
            let report = estimate_single_index(set, &a, &y, ctx.info.as_ref(), Some(&x))?;
            Ok(Trial { error: report.error_l2.unwrap_or(f64::NAN), converged: true })
        }
        ExperimentKind::Tessellate | ExperimentKind::Phase => unreachable!("handled by dedicated drivers"),
    }
}

fn bound_for(plan: &SweepPlan, ctx: &Context, eps: f64, m: usize) -> f64 {
    let root_m = libm::sqrt(m as f64);
    match plan.experiment {
        ExperimentKind::Complete => ctx.bound_scale / root_m * (1.0 + eps),
        ExperimentKind::Onebit | ExperimentKind::Project => ctx.bound_scale / root_m,
        _ => ctx.bound_scale / root_m + eps,
    }
}

/// Runs every grid point of `plan` and fits median error against `m` over
/// the `ε = 0` records (needs at least four grid points).
pub fn sweep<E: Executor>(exec: &E, plan: &SweepPlan) -> Result<(Vec<SweepRecord>, Option<ScalingFit>)> {
    plan.validate()?;
    let mut records = match plan.experiment {
        ExperimentKind::Phase => {
            exact_recovery_phase(exec, plan.n, plan.sparsity()?, &plan.m_grid, plan.trials, plan.seed, plan.solver)?
        }
        ExperimentKind::Tessellate => {
            let set = plan.set_or(SetKind::SparseUnitSet { s: plan.sparsity()? })?;
            let mut out = Vec::with_capacity(plan.m_grid.len());
            for (mi, &m) in plan.m_grid.iter().enumerate() {
                let seed = derive_seed(plan.seed, &[mi as u64]);
                let mut rec = tessellation_experiment(exec, &set, m, plan.pairs, plan.trials, seed)?;
                rec.seed = plan.seed;
                out.push(rec);
            }
            out
        }
        _ => grid_records(exec, plan)?,
    };
    for rec in &mut records {
        rec.experiment = plan.experiment.name().into();
        rec.s = plan.s;
        rec.r = plan.r;
        rec.model = plan.model_name();
        if let Some(desc) = &plan.set {
            rec.set_kind = desc.kind.name().into();
        }
    }
    let base: Vec<&SweepRecord> = records.iter().filter(|r| r.eps == 0.0).collect();
    let xs: Vec<f64> = base.iter().map(|r| r.m as f64).collect();
    let ys: Vec<f64> = base.iter().map(|r| r.err_median).collect();
    let fit = fit_loglog(&xs, &ys);
    Ok((records, fit))
}

fn grid_records<E: Executor>(exec: &E, plan: &SweepPlan) -> Result<Vec<SweepRecord>> {
    let ctx = context(exec, plan)?;
    let set_kind = ctx.set.as_ref().map(|s| s.kind().name()).unwrap_or(match plan.experiment {
        ExperimentKind::DictRecover => "DictionaryHull",
        ExperimentKind::Lowrank => "NuclearBall",
        _ => "",
    });
    let mut out = Vec::with_capacity(plan.eps_grid.len() * plan.m_grid.len());
    for (ei, &eps) in plan.eps_grid.iter().enumerate() {
        for (mi, &m) in plan.m_grid.iter().enumerate() {
            if m == 0 {
                return Err(Error::Config("measurement counts must be positive".into()));
            }
            let trials = exec.map_indexed(plan.trials, |t| {
                let mut rng = trial_rng(plan.seed, &[ei as u64, mi as u64, t as u64]);
                run_trial(plan, &ctx, eps, m, &mut rng)
            });
            let trials: Vec<Trial> = trials.into_iter().collect::<Result<_>>()?;
            let errors: Vec<f64> = trials.iter().map(|t| t.error).collect();
            let stalled = trials.iter().filter(|t| !t.converged).count();
            let mut rec = SweepRecord::from_errors(
                plan.experiment.name(),
                plan.n,
                m,
                &errors,
                bound_for(plan, &ctx, eps, m),
                plan.seed,
            )?;
            rec.eps = eps;
            rec.set_kind = set_kind.into();
            out.push(rec.with_extra("not_converged", stalled as f64));
        }
    }
    Ok(out)
}
