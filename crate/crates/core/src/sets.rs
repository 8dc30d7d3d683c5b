//! Feasible sets as oracle bundles.
//!
//! Every set is described by a [`SetDescriptor`] and exposes closed-form
//! support function, gauge, projection and membership oracles. Matrix-valued
//! sets act on row-major flattened `d1 × d2` matrices, so the trace inner
//! product is the ordinary dot product.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{Matrix, Svd};
use crate::solvers::lp;
use crate::vector::{
    axpy, dot, hard_threshold, norm1, norm2, norm_inf, order_by_magnitude, project_l1_ball, scaled, sign,
    soft_threshold,
};

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    EuclideanBall {
        radius: f64,
    },
    L1Ball {
        radius: f64,
    },
    Hypercube {
        halfwidth: f64,
    },
    SparseCone {
        s: usize,
    },
    /// Unit-norm `s`-sparse vectors.
    SparseUnitSet {
        s: usize,
    },
    /// `radius · (√s B₁ⁿ ∩ B₂ⁿ)`
    ConvexSparse {
        s: usize,
        radius: f64,
    },
    /// `radius · conv(SparseUnitSet(s))`, the unit ball of the `s`-support norm.
    SparseHull {
        s: usize,
        radius: f64,
    },
    /// `radius · conv{±dᵢ}` for the columns `dᵢ` of an `n × N` matrix.
    DictionaryHull {
        dictionary: Matrix,
        radius: f64,
    },
    FiniteSet {
        points: Vec<Vec<f64>>,
    },
    LowRankCone {
        rank: usize,
        d1: usize,
        d2: usize,
    },
    NuclearBall {
        radius: f64,
        d1: usize,
        d2: usize,
    },
}

impl SetKind {
    pub fn name(&self) -> &'static str {
        match self {
            SetKind::EuclideanBall { .. } => "EuclideanBall",
            SetKind::L1Ball { .. } => "L1Ball",
            SetKind::Hypercube { .. } => "Hypercube",
            SetKind::SparseCone { .. } => "SparseCone",
            SetKind::SparseUnitSet { .. } => "SparseUnitSet",
            SetKind::ConvexSparse { .. } => "ConvexSparse",
            SetKind::SparseHull { .. } => "SparseHull",
            SetKind::DictionaryHull { .. } => "DictionaryHull",
            SetKind::FiniteSet { .. } => "FiniteSet",
            SetKind::LowRankCone { .. } => "LowRankCone",
            SetKind::NuclearBall { .. } => "NuclearBall",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetDescriptor {
    pub kind: SetKind,
    pub n: usize,
}

impl SetDescriptor {
    pub fn new(kind: SetKind, n: usize) -> Self {
        SetDescriptor { kind, n }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportResult {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// Immutable oracle bundle for one set.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    desc: SetDescriptor,
    /// Operator norm of the dictionary (hull kind only).
    dict_norm: f64,
}

/// Validate a descriptor and build its oracles.
pub fn make_set(desc: SetDescriptor) -> Result<FeasibleSet> {
    let n = desc.n;
    if n == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let positive = |name: &str, v: f64| -> Result<()> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid(alloc::format!("{name} must be positive and finite, got {v}")))
        }
    };
    let sparsity = |s: usize| -> Result<()> {
        if (1..=n).contains(&s) {
            Ok(())
        } else {
            Err(Error::invalid(alloc::format!("sparsity {s} outside 1..={n}")))
        }
    };
    let shape = |d1: usize, d2: usize| -> Result<()> {
        if d1 * d2 == n && d1 > 0 {
            Ok(())
        } else {
            Err(Error::invalid(alloc::format!("{d1} x {d2} matrices do not flatten to n = {n}")))
        }
    };
    let mut dict_norm = 0.0;
    match &desc.kind {
        SetKind::EuclideanBall { radius } | SetKind::L1Ball { radius } => positive("radius", *radius)?,
        SetKind::Hypercube { halfwidth } => positive("halfwidth", *halfwidth)?,
        SetKind::SparseCone { s } | SetKind::SparseUnitSet { s } => sparsity(*s)?,
        SetKind::ConvexSparse { s, radius } | SetKind::SparseHull { s, radius } => {
            sparsity(*s)?;
            positive("radius", *radius)?;
        }
        SetKind::DictionaryHull { dictionary, radius } => {
            positive("radius", *radius)?;
            if dictionary.rows() != n || dictionary.cols() == 0 {
                return Err(Error::invalid(alloc::format!(
                    "dictionary must be {n} x N with N >= 1, got {} x {}",
                    dictionary.rows(),
                    dictionary.cols()
                )));
            }
            for j in 0..dictionary.cols() {
                let c = norm2(&dictionary.column(j));
                if !c.is_finite() || c > 1.0 + 1e-9 {
                    return Err(Error::invalid(alloc::format!("dictionary column {j} has norm {c} > 1")));
                }
            }
            dict_norm = Svd::new(dictionary).s[0];
        }
        SetKind::FiniteSet { points } => {
            if points.is_empty() {
                return Err(Error::invalid("finite set needs at least one point"));
            }
            for p in points {
                check_dim(n, p.len())?;
                if p.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("finite set point has non-finite entries"));
                }
            }
        }
        SetKind::LowRankCone { rank, d1, d2 } => {
            shape(*d1, *d2)?;
            if *rank < 1 || *rank > (*d1).min(*d2) {
                return Err(Error::invalid(alloc::format!("rank {rank} outside 1..={}", d1.min(d2))));
            }
        }
        SetKind::NuclearBall { radius, d1, d2 } => {
            shape(*d1, *d2)?;
            positive("radius", *radius)?;
        }
    }
    Ok(FeasibleSet { desc, dict_norm })
}

impl FeasibleSet {
    pub fn descriptor(&self) -> &SetDescriptor {
        &self.desc
    }

    pub fn kind(&self) -> &SetKind {
        &self.desc.kind
    }

    pub fn dim(&self) -> usize {
        self.desc.n
    }

    pub fn is_cone(&self) -> bool {
        matches!(self.desc.kind, SetKind::SparseCone { .. } | SetKind::LowRankCone { .. })
    }

    pub fn is_convex(&self) -> bool {
        match &self.desc.kind {
            SetKind::EuclideanBall { .. }
            | SetKind::L1Ball { .. }
            | SetKind::Hypercube { .. }
            | SetKind::ConvexSparse { .. }
            | SetKind::SparseHull { .. }
            | SetKind::DictionaryHull { .. }
            | SetKind::NuclearBall { .. } => true,
            SetKind::FiniteSet { points } => points.len() == 1,
            _ => false,
        }
    }

    /// Convex and symmetric about the origin, so `K − K = 2K`.
    pub fn is_symmetric_convex(&self) -> bool {
        self.is_convex() && !matches!(self.desc.kind, SetKind::FiniteSet { .. })
    }

    /// `sup_{u∈K} ‖u‖₂` (infinite for cones).
    pub fn outer_radius(&self) -> f64 {
        let n = self.desc.n as f64;
        match &self.desc.kind {
            SetKind::EuclideanBall { radius }
            | SetKind::L1Ball { radius }
            | SetKind::ConvexSparse { radius, .. }
            | SetKind::SparseHull { radius, .. }
            | SetKind::NuclearBall { radius, .. } => *radius,
            SetKind::Hypercube { halfwidth } => halfwidth * libm::sqrt(n),
            SetKind::SparseUnitSet { .. } => 1.0,
            SetKind::DictionaryHull { dictionary, radius } => {
                let m = (0..dictionary.cols()).map(|j| norm2(&dictionary.column(j))).fold(0.0, f64::max);
                radius * m
            }
            SetKind::FiniteSet { points } => points.iter().map(|p| norm2(p)).fold(0.0, f64::max),
            SetKind::SparseCone { .. } | SetKind::LowRankCone { .. } => f64::INFINITY,
        }
    }

    /// `tK` for `t > 0`. Cones are returned unchanged.
    pub fn scaled(&self, t: f64) -> Result<FeasibleSet> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid(alloc::format!("scale must be positive, got {t}")));
        }
        let kind = match &self.desc.kind {
            SetKind::EuclideanBall { radius } => SetKind::EuclideanBall { radius: radius * t },
            SetKind::L1Ball { radius } => SetKind::L1Ball { radius: radius * t },
            SetKind::Hypercube { halfwidth } => SetKind::Hypercube { halfwidth: halfwidth * t },
            SetKind::ConvexSparse { s, radius } => SetKind::ConvexSparse { s: *s, radius: radius * t },
            SetKind::SparseHull { s, radius } => SetKind::SparseHull { s: *s, radius: radius * t },
            SetKind::DictionaryHull { dictionary, radius } => {
                SetKind::DictionaryHull { dictionary: dictionary.clone(), radius: radius * t }
            }
            SetKind::NuclearBall { radius, d1, d2 } => SetKind::NuclearBall { radius: radius * t, d1: *d1, d2: *d2 },
            SetKind::FiniteSet { points } => {
                SetKind::FiniteSet { points: points.iter().map(|p| scaled(p, t)).collect() }
            }
            k @ (SetKind::SparseCone { .. } | SetKind::LowRankCone { .. }) => k.clone(),
            SetKind::SparseUnitSet { .. } => return Err(Error::NoClosedForm("scaling a set of unit vectors")),
        };
        Ok(FeasibleSet { desc: SetDescriptor { kind, n: self.desc.n }, dict_norm: self.dict_norm })
    }

    /// `h_K(η) = sup_{u∈K} ⟨η, u⟩` with a maximizer.
    pub fn support(&self, eta: &[f64]) -> Result<SupportResult> {
        let n = self.desc.n;
        check_dim(n, eta.len())?;
        let res = match &self.desc.kind {
            SetKind::EuclideanBall { radius } => {
                let nrm = norm2(eta);
                let argmax = if nrm > 0.0 { scaled(eta, radius / nrm) } else { vec![0.0; n] };
                SupportResult { value: radius * nrm, argmax }
            }
            SetKind::L1Ball { radius } => {
                let j = order_by_magnitude(eta)[0];
                let mut argmax = vec![0.0; n];
                argmax[j] = radius * sign(eta[j]);
                SupportResult { value: radius * eta[j].abs(), argmax }
            }
            SetKind::Hypercube { halfwidth } => SupportResult {
                value: halfwidth * norm1(eta),
                argmax: eta.iter().map(|&v| halfwidth * sign(v)).collect(),
            },
            SetKind::SparseCone { .. } | SetKind::LowRankCone { .. } => {
                if eta.iter().all(|&v| v == 0.0) {
                    SupportResult { value: 0.0, argmax: vec![0.0; n] }
                } else {
                    return Err(Error::Unbounded);
                }
            }
            SetKind::SparseUnitSet { s } => {
                let top = hard_threshold(eta, *s);
                let nrm = norm2(&top);
                let argmax = if nrm > 0.0 {
                    scaled(&top, 1.0 / nrm)
                } else {
                    let mut e = vec![0.0; n];
                    e[0] = 1.0;
                    e
                };
                SupportResult { value: nrm, argmax }
            }
            SetKind::ConvexSparse { s, radius } => {
                let u = l1l2_argmax(eta, libm::sqrt(*s as f64));
                let argmax = scaled(&u, *radius);
                SupportResult { value: dot(eta, &argmax), argmax }
            }
            SetKind::SparseHull { s, radius } => {
                let top = hard_threshold(eta, *s);
                let nrm = norm2(&top);
                let argmax = if nrm > 0.0 { scaled(&top, radius / nrm) } else { vec![0.0; n] };
                SupportResult { value: radius * nrm, argmax }
            }
            SetKind::DictionaryHull { dictionary, radius } => {
                let corr = dictionary.tr_mul_vec(eta);
                let j = order_by_magnitude(&corr)[0];
                let argmax = scaled(&dictionary.column(j), radius * sign(corr[j]));
                SupportResult { value: radius * corr[j].abs(), argmax }
            }
            SetKind::FiniteSet { points } => {
                let mut best = 0;
                let mut value = f64::NEG_INFINITY;
                for (i, p) in points.iter().enumerate() {
                    let v = dot(eta, p);
                    if v > value {
                        value = v;
                        best = i;
                    }
                }
                SupportResult { value, argmax: points[best].clone() }
            }
            SetKind::NuclearBall { radius, d1, d2 } => {
                let svd = Svd::new(&Matrix::from_vec(*d1, *d2, eta.to_vec())?);
                let argmax = if svd.s[0] > 0.0 { outer(&svd.u[0], &svd.v[0], *radius) } else { vec![0.0; n] };
                SupportResult { value: radius * svd.s[0], argmax }
            }
        };
        Ok(res)
    }

    /// Minkowski functional `‖x‖_K = inf{λ > 0 : x/λ ∈ K}`.
    ///
    /// Cones and other sets that are not absorbing return `f64::INFINITY`
    /// for points outside their span. Unit-vector sets are gauged through
    /// their star hull, the `s`-sparse part of the unit ball.
    pub fn gauge(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.desc.n, x.len())?;
        let g = match &self.desc.kind {
            SetKind::EuclideanBall { radius } => norm2(x) / radius,
            SetKind::L1Ball { radius } => norm1(x) / radius,
            SetKind::Hypercube { halfwidth } => norm_inf(x) / halfwidth,
            SetKind::SparseCone { .. } | SetKind::LowRankCone { .. } => {
                if self.contains(x, 0.0) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            SetKind::SparseUnitSet { s } => {
                if x.iter().filter(|&&v| v != 0.0).count() <= *s {
                    norm2(x)
                } else {
                    f64::INFINITY
                }
            }
            SetKind::ConvexSparse { s, radius } => norm2(x).max(norm1(x) / libm::sqrt(*s as f64)) / radius,
            SetKind::SparseHull { s, radius } => support_norm(x, *s) / radius,
            SetKind::DictionaryHull { dictionary, radius } => dictionary_l1(dictionary, x)? / radius,
            SetKind::FiniteSet { points } => finite_gauge(points, x),
            SetKind::NuclearBall { radius, d1, d2 } => {
                let sv = crate::linalg::singular_values(x, *d1, *d2);
                sv.iter().sum::<f64>() / radius
            }
        };
        Ok(g)
    }

    /// Euclidean projection onto `K`. Ties break toward the lowest index or
    /// the leading singular vectors.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.desc.n;
        check_dim(n, x.len())?;
        let p = match &self.desc.kind {
            SetKind::EuclideanBall { radius } => {
                let nrm = norm2(x);
                if nrm <= *radius {
                    x.to_vec()
                } else {
                    scaled(x, radius / nrm)
                }
            }
            SetKind::L1Ball { radius } => project_l1_ball(x, *radius),
            SetKind::Hypercube { halfwidth } => x.iter().map(|v| v.clamp(-halfwidth, *halfwidth)).collect(),
            SetKind::SparseCone { s } => hard_threshold(x, *s),
            SetKind::SparseUnitSet { .. } => self.support(x)?.argmax,
            SetKind::ConvexSparse { s, radius } => {
                let u = project_l1l2(&scaled(x, 1.0 / radius), libm::sqrt(*s as f64));
                scaled(&u, *radius)
            }
            SetKind::SparseHull { s, radius } => {
                if support_norm(x, *s) <= *radius {
                    x.to_vec()
                } else {
                    scaled(&project_support_ball(&scaled(x, 1.0 / radius), *s), *radius)
                }
            }
            SetKind::DictionaryHull { dictionary, radius } => {
                if self.contains(x, 0.0) {
                    x.to_vec()
                } else {
                    project_hull(dictionary, *radius, self.dict_norm, x)
                }
            }
            SetKind::FiniteSet { points } => {
                let mut best = 0;
                let mut dist = f64::INFINITY;
                for (i, p) in points.iter().enumerate() {
                    let d = crate::vector::dist2(x, p);
                    if d < dist {
                        dist = d;
                        best = i;
                    }
                }
                points[best].clone()
            }
            SetKind::LowRankCone { rank, d1, d2 } => {
                Svd::new(&Matrix::from_vec(*d1, *d2, x.to_vec())?).reconstruct(*rank).into_vec()
            }
            SetKind::NuclearBall { radius, d1, d2 } => {
                let svd = Svd::new(&Matrix::from_vec(*d1, *d2, x.to_vec())?);
                if svd.s.iter().sum::<f64>() <= *radius {
                    x.to_vec()
                } else {
                    let s = project_l1_ball(&svd.s, *radius);
                    svd.reconstruct_with(&s).into_vec()
                }
            }
        };
        Ok(p)
    }

    /// Membership up to `tol`. Bounded kinds test `gauge ≤ 1 + tol`; cones
    /// count entries (or singular values) above `tol` relative to the largest.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.desc.n {
            return false;
        }
        match &self.desc.kind {
            SetKind::SparseCone { s } => support_size(x, tol) <= *s,
            SetKind::LowRankCone { rank, d1, d2 } => {
                let sv = crate::linalg::singular_values(x, *d1, *d2);
                let top = sv[0];
                let thr = tol.max(1e-9) * top;
                sv.iter().filter(|&&v| v > thr).count() <= *rank
            }
            SetKind::SparseUnitSet { s } => (norm2(x) - 1.0).abs() <= tol && support_size(x, tol) <= *s,
            SetKind::FiniteSet { points } => points.iter().any(|p| crate::vector::dist2(x, p) <= tol),
            _ => match self.gauge(x) {
                Ok(g) => g <= 1.0 + tol,
                Err(_) => false,
            },
        }
    }

    /// The convex hull, which has the same mean width.
    pub fn convex_hull_descriptor(&self) -> Result<FeasibleSet> {
        let n = self.desc.n;
        match &self.desc.kind {
            SetKind::SparseUnitSet { s } => make_set(SetDescriptor::new(SetKind::SparseHull { s: *s, radius: 1.0 }, n)),
            SetKind::FiniteSet { points } => {
                let reps =
                    symmetric_representatives(points).ok_or(Error::NoClosedForm("hull of an asymmetric finite set"))?;
                let radius = reps.iter().map(|p| norm2(p)).fold(0.0, f64::max);
                if radius == 0.0 {
                    return Err(Error::NoClosedForm("hull of the origin"));
                }
                let dictionary = Matrix::from_fn(n, reps.len(), |i, j| reps[j][i] / radius);
                make_set(SetDescriptor::new(SetKind::DictionaryHull { dictionary, radius }, n))
            }
            SetKind::SparseCone { .. } => Err(Error::NoClosedForm("hull of the sparse cone")),
            SetKind::LowRankCone { .. } => Err(Error::NoClosedForm("hull of the low-rank cone")),
            _ => Ok(self.clone()),
        }
    }

    /// Gauge of `d` with respect to `K − K`.
    pub fn difference_gauge(&self, d: &[f64]) -> Result<f64> {
        check_dim(self.desc.n, d.len())?;
        if d.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroVector);
        }
        match &self.desc.kind {
            SetKind::SparseUnitSet { s } => {
                let s2 = (2 * s).min(self.desc.n);
                Ok(norm2(d).max(norm1(d) / libm::sqrt(s2 as f64)) / 2.0)
            }
            _ if self.is_symmetric_convex() => Ok(self.gauge(d)? / 2.0),
            _ => Err(Error::NoClosedForm("difference gauge of this set")),
        }
    }

    /// `sup_{u ∈ (K−K) ∩ rB₂ⁿ} ⟨g, u⟩`.
    ///
    /// Exact for balls, symmetric convex sets, finite sets and both cones.
    /// Unit sparse vectors use the superset of `2s`-sparse vectors in `2B₂ⁿ`.
    pub fn local_difference_support(&self, g: &[f64], r: f64) -> Result<f64> {
        check_dim(self.desc.n, g.len())?;
        if r.is_nan() || r <= 0.0 {
            return Err(Error::invalid("local radius must be positive"));
        }
        let n = self.desc.n;
        let v = match &self.desc.kind {
            SetKind::EuclideanBall { radius } => (2.0 * radius).min(r) * norm2(g),
            SetKind::SparseCone { s } => r * norm2(&hard_threshold(g, (2 * s).min(n))),
            SetKind::SparseUnitSet { s } => r.min(2.0) * norm2(&hard_threshold(g, (2 * s).min(n))),
            SetKind::LowRankCone { rank, d1, d2 } => {
                let sv = crate::linalg::singular_values(g, *d1, *d2);
                let k = (2 * rank).min(sv.len());
                r * libm::sqrt(sv[..k].iter().map(|v| v * v).sum())
            }
            SetKind::FiniteSet { points } => {
                let mut best: f64 = 0.0;
                for p in points {
                    for q in points {
                        let d = crate::vector::sub(p, q);
                        if norm2(&d) <= r {
                            best = best.max(dot(g, &d));
                        }
                    }
                }
                best
            }
            _ => self.local_support_by_scaling(g, r)?,
        };
        Ok(v)
    }

    /// For symmetric convex `K`: the maximizer over `2K ∩ rB` is `P_{2K}(tg)`
    /// at the scale `t` where its norm reaches `r`, or the global maximizer
    /// when that stays inside the ball.
    fn local_support_by_scaling(&self, g: &[f64], r: f64) -> Result<f64> {
        let doubled = self.scaled(2.0)?;
        let glob = doubled.support(g)?;
        if norm2(&glob.argmax) <= r {
            return Ok(glob.value);
        }
        let at = |t: f64| doubled.project(&scaled(g, t));
        let mut hi = r / norm2(g).max(f64::MIN_POSITIVE);
        let mut u_hi = at(hi)?;
        let mut grow = 0;
        while norm2(&u_hi) < r && grow < 200 {
            hi *= 2.0;
            u_hi = at(hi)?;
            grow += 1;
        }
        let mut lo = 0.0;
        let mut best = vec![0.0; self.desc.n];
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let u = at(mid)?;
            if norm2(&u) <= r {
                lo = mid;
                best = u;
            } else {
                hi = mid;
            }
        }
        Ok(dot(g, &best))
    }
}

fn support_size(x: &[f64], tol: f64) -> usize {
    let thr = tol * norm_inf(x);
    x.iter().filter(|&&v| v.abs() > thr).count()
}

fn outer(u: &[f64], v: &[f64], scale: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len() * v.len());
    for &ui in u {
        out.extend(v.iter().map(|&vj| scale * ui * vj));
    }
    out
}

/// Soft threshold `τ` at which `‖soft(x,τ)‖₁ / ‖soft(x,τ)‖₂ = ratio`,
/// assuming `‖x‖₁/‖x‖₂ > ratio ≥ 1`.
fn ratio_threshold(x: &[f64], ratio: f64) -> f64 {
    let mut a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    a.sort_by(|p, q| q.total_cmp(p));
    let n = a.len();
    let (mut a1, mut a2) = (0.0, 0.0);
    for k in 1..=n {
        a1 += a[k - 1];
        a2 += a[k - 1] * a[k - 1];
        let lower = if k < n { a[k] } else { 0.0 };
        let kf = k as f64;
        let s1 = a1 - kf * lower;
        let s2 = a2 - 2.0 * lower * a1 + kf * lower * lower;
        if s2 <= 0.0 || s1 < ratio * libm::sqrt(s2) {
            continue;
        }
        if kf <= ratio * ratio {
            return lower;
        }
        let dev = (a2 - a1 * a1 / kf).max(0.0);
        let shift = ratio * libm::sqrt(dev / (kf * (kf - ratio * ratio)));
        return (a1 / kf - shift).clamp(lower, a[k - 1]);
    }
    0.0
}

/// Maximizer of `⟨η, u⟩` over `{‖u‖₂ ≤ 1, ‖u‖₁ ≤ R}`.
fn l1l2_argmax(eta: &[f64], r: f64) -> Vec<f64> {
    let n2 = norm2(eta);
    if n2 == 0.0 {
        return vec![0.0; eta.len()];
    }
    if r <= 1.0 {
        let j = order_by_magnitude(eta)[0];
        let mut u = vec![0.0; eta.len()];
        u[j] = r * sign(eta[j]);
        return u;
    }
    if norm1(eta) <= r * n2 {
        return scaled(eta, 1.0 / n2);
    }
    let soft = soft_threshold(eta, ratio_threshold(eta, r));
    let ns = norm2(&soft);
    scaled(&soft, 1.0 / ns)
}

/// Euclidean projection onto `{‖u‖₂ ≤ 1, ‖u‖₁ ≤ R}`.
fn project_l1l2(x: &[f64], r: f64) -> Vec<f64> {
    if r <= 1.0 {
        return project_l1_ball(x, r);
    }
    let n2 = norm2(x);
    let n1 = norm1(x);
    if n2 <= 1.0 && n1 <= r {
        return x.to_vec();
    }
    if n2 > 1.0 && n1 <= r * n2 {
        return scaled(x, 1.0 / n2);
    }
    let p = project_l1_ball(x, r);
    if norm2(&p) <= 1.0 {
        return p;
    }
    l1l2_argmax(x, r)
}

/// Minimizer of `Σ aᵢ²/(θᵢ + c)` over `0 ≤ θ ≤ 1`, `Σθ ≤ k`, for magnitudes
/// `a` sorted in decreasing order: `θᵢ = clip(aᵢt − c, 0, 1)` with `t` chosen
/// so the weights sum to `k`.
fn support_weights(a: &[f64], k: usize, c: f64) -> Vec<f64> {
    let positive = a.iter().take_while(|&&v| v > 0.0).count();
    let mut theta = vec![0.0; a.len()];
    if positive <= k {
        theta[..positive].iter_mut().for_each(|t| *t = 1.0);
        return theta;
    }
    let a = &a[..positive];
    let total = |t: f64| a.iter().map(|&v| (v * t - c).clamp(0.0, 1.0)).sum::<f64>();
    // both breakpoint families are increasing in the index
    let mut breaks = Vec::with_capacity(2 * positive);
    let (mut i, mut j) = (0, 0);
    while i < positive || j < positive {
        let lo = if i < positive { c / a[i] } else { f64::INFINITY };
        let hi = if j < positive { (c + 1.0) / a[j] } else { f64::INFINITY };
        if lo <= hi {
            breaks.push(lo);
            i += 1;
        } else {
            breaks.push(hi);
            j += 1;
        }
    }
    let kf = k as f64;
    // first breakpoint where the total reaches k
    let (mut lo, mut hi) = (0usize, breaks.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if total(breaks[mid]) >= kf {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let t1 = breaks[lo];
    let f1 = total(t1);
    let t = if lo == 0 || f1 == kf {
        t1
    } else {
        let t0 = breaks[lo - 1];
        let f0 = total(t0);
        t0 + (kf - f0) * (t1 - t0) / (f1 - f0)
    };
    for (th, &v) in theta.iter_mut().zip(a) {
        *th = (v * t - c).clamp(0.0, 1.0);
    }
    theta
}

fn sorted_magnitudes(x: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let order = order_by_magnitude(x);
    let a = order.iter().map(|&i| x[i].abs()).collect();
    (order, a)
}

/// The `s`-support norm `‖x‖ = (min_θ Σ xᵢ²/θᵢ)^{1/2}`, `0 < θ ≤ 1`, `Σθ ≤ s`,
/// whose unit ball is the convex hull of the unit `s`-sparse vectors.
fn support_norm(x: &[f64], s: usize) -> f64 {
    let (_, a) = sorted_magnitudes(x);
    let theta = support_weights(&a, s, 0.0);
    let q: f64 = a.iter().zip(&theta).filter(|(_, &t)| t > 0.0).map(|(v, t)| v * v / t).sum();
    libm::sqrt(q)
}

/// Projection onto the unit `s`-support ball for `x` outside it.
///
/// For a multiplier `ν` the inner problem over `(w, θ)` is solved by
/// `θ = support_weights(|x|, s, 2ν)` and `wᵢ = xᵢθᵢ/(θᵢ + 2ν)`; `ν` is found
/// by bisection on `Σ wᵢ²/θᵢ = 1`, which decreases in `ν`.
fn project_support_ball(x: &[f64], s: usize) -> Vec<f64> {
    let (order, a) = sorted_magnitudes(x);
    let at = |nu: f64| -> (Vec<f64>, f64) {
        let theta = support_weights(&a, s, 2.0 * nu);
        let q = a
            .iter()
            .zip(&theta)
            .filter(|(_, &t)| t > 0.0)
            .map(|(v, t)| {
                let w = v * t / (t + 2.0 * nu);
                w * w / t
            })
            .sum();
        (theta, q)
    };
    let mut hi = 1.0;
    while at(hi).1 > 1.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid).1 > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (theta, _) = at(hi);
    let mut out = vec![0.0; x.len()];
    for (r, &i) in order.iter().enumerate() {
        let t = theta[r];
        if t > 0.0 {
            out[i] = x[i] * t / (t + 2.0 * hi);
        }
    }
    out
}

/// `min{‖α‖₁ : Dα = x}` by the split `α = α⁺ − α⁻`.
fn dictionary_l1(d: &Matrix, x: &[f64]) -> Result<f64> {
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    Ok(norm1(&dictionary_coefficients(d, x)?))
}

/// Minimum-`ℓ1` coefficients with `Dα = x`.
pub(crate) fn dictionary_coefficients(d: &Matrix, x: &[f64]) -> Result<Vec<f64>> {
    let (n, big_n) = d.shape();
    let a = Matrix::from_fn(n, 2 * big_n, |i, j| if j < big_n { d[(i, j)] } else { -d[(i, j - big_n)] });
    let c = vec![1.0; 2 * big_n];
    match lp::minimize(&c, &a, x, 50 * (n + 2 * big_n)) {
        Ok(sol) => Ok((0..big_n).map(|j| sol.x[j] - sol.x[j + big_n]).collect()),
        Err(Error::Infeasible) => Err(Error::NoRepresentation),
        Err(e) => Err(e),
    }
}

/// Star-hull gauge of a finite set: the smallest `c ≥ 0` with `x = c·p`.
fn finite_gauge(points: &[Vec<f64>], x: &[f64]) -> f64 {
    let nx = norm2(x);
    if nx == 0.0 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for p in points {
        let np = norm2(p);
        if np == 0.0 {
            continue;
        }
        let cos = dot(x, p) / (nx * np);
        if cos >= 1.0 - 1e-12 {
            best = best.min(nx / np);
        }
    }
    best
}

/// One point per `±` pair, or `None` when some point lacks its negative.
fn symmetric_representatives(points: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let scale = points.iter().map(|p| norm_inf(p)).fold(0.0, f64::max).max(1.0);
    let same = |a: &[f64], b: &[f64], flip: f64| a.iter().zip(b).all(|(u, v)| (u - flip * v).abs() <= 1e-12 * scale);
    let mut reps: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if !points.iter().any(|q| same(p, q, -1.0)) {
            return None;
        }
        if p.iter().all(|&v| v == 0.0) {
            continue;
        }
        if !reps.iter().any(|r| same(p, r, 1.0) || same(p, r, -1.0)) {
            reps.push(p.clone());
        }
    }
    Some(reps)
}

/// Projection onto `radius·conv{±dᵢ}` by accelerated projected gradient on
/// the coefficients, `min ½‖x − radius·Dα‖² s.t. ‖α‖₁ ≤ 1`.
fn project_hull(d: &Matrix, radius: f64, dict_norm: f64, x: &[f64]) -> Vec<f64> {
    let big_n = d.cols();
    let lip = (radius * dict_norm * radius * dict_norm).max(f64::MIN_POSITIVE);
    let mut alpha = vec![0.0; big_n];
    let mut z = alpha.clone();
    let mut t = 1.0f64;
    for _ in 0..20_000 {
        let mut resid = d.mul_vec(&z);
        resid.iter_mut().zip(x).for_each(|(r, &xi)| *r = radius * *r - xi);
        let grad = scaled(&d.tr_mul_vec(&resid), radius);
        let mut step = z.clone();
        axpy(-1.0 / lip, &grad, &mut step);
        let next = project_l1_ball(&step, 1.0);
        let t_next = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * t * t));
        let diff = crate::vector::dist2(&next, &alpha);
        z = next.iter().zip(&alpha).map(|(a, b)| a + (t - 1.0) / t_next * (a - b)).collect();
        alpha = next;
        t = t_next;
        if diff <= 1e-15 * norm2(&alpha).max(1.0) {
            break;
        }
    }
    scaled(&d.mul_vec(&alpha), radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vec, rng_from};

    fn set(kind: SetKind, n: usize) -> FeasibleSet {
        make_set(SetDescriptor::new(kind, n)).unwrap()
    }

    #[test]
    fn validation() {
        assert!(make_set(SetDescriptor::new(SetKind::L1Ball { radius: 1.0 }, 3)).is_ok());
        assert!(matches!(make_set(SetDescriptor::new(SetKind::SparseCone { s: 5 }, 3)), Err(Error::InvalidParam(_))));
        let d = Matrix::from_rows(&[&[1.5], &[0.0]]);
        assert!(matches!(
            make_set(SetDescriptor::new(SetKind::DictionaryHull { dictionary: d, radius: 1.0 }, 2)),
            Err(Error::InvalidParam(_))
        ));
        assert!(make_set(SetDescriptor::new(SetKind::LowRankCone { rank: 3, d1: 2, d2: 2 }, 4)).is_err());
        assert!(make_set(SetDescriptor::new(SetKind::EuclideanBall { radius: 0.0 }, 2)).is_err());
    }

    #[test]
    fn support_norm_interpolates_l1_and_l2() {
        let mut rng = rng_from(31);
        for _ in 0..20 {
            let x = gaussian_vec(&mut rng, 9);
            let one = set(SetKind::SparseHull { s: 1, radius: 1.0 }, 9).gauge(&x).unwrap();
            let all = set(SetKind::SparseHull { s: 9, radius: 1.0 }, 9).gauge(&x).unwrap();
            assert!((one - norm1(&x)).abs() < 1e-12 * norm1(&x));
            assert!((all - norm2(&x)).abs() < 1e-12 * norm2(&x));
        }
        // [3, 1, 1] with s = 2: θ = (1, ½, ½) gives 9 + 2 + 2
        let k = set(SetKind::SparseHull { s: 2, radius: 1.0 }, 3);
        assert!((k.gauge(&[3.0, -1.0, 1.0]).unwrap() - 13f64.sqrt()).abs() < 1e-12);
        assert!((k.gauge(&[0.6, 0.0, -0.8]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_hull_projection_lands_on_the_boundary() {
        let mut rng = rng_from(32);
        let k = set(SetKind::SparseHull { s: 3, radius: 2.0 }, 12);
        for _ in 0..20 {
            let x: Vec<f64> = gaussian_vec(&mut rng, 12).iter().map(|v| 3.0 * v).collect();
            let p = k.project(&x).unwrap();
            assert!((k.gauge(&p).unwrap() - 1.0).abs() < 1e-9);
            // x − p lies in the normal cone: ⟨x − p, p⟩ = h_K(x − p)
            let d = crate::vector::sub(&x, &p);
            let h = k.support(&d).unwrap().value;
            assert!((dot(&d, &p) - h).abs() < 1e-8 * (1.0 + h), "{} vs {h}", dot(&d, &p));
        }
    }

    #[test]
    fn support_examples() {
        let l1 = set(SetKind::L1Ball { radius: 1.0 }, 3);
        let r = l1.support(&[1.0, -2.0, 3.0]).unwrap();
        assert_eq!(r.value, 3.0);
        assert_eq!(r.argmax, vec![0.0, 0.0, 1.0]);

        let nuc = set(SetKind::NuclearBall { radius: 1.0, d1: 2, d2: 2 }, 4);
        assert!((nuc.support(&[1.0, 0.0, 0.0, 1.0]).unwrap().value - 1.0).abs() < 1e-15);

        let cone = set(SetKind::SparseCone { s: 2 }, 3);
        assert_eq!(cone.support(&[1.0, 0.0, 0.0]), Err(Error::Unbounded));
    }

    #[test]
    fn sparse_unit_support_matches_enumeration() {
        // brute force over the 6 supports of size 2; on a fixed support the
        // best unit vector is the normalized restriction of eta
        let eta = [3.0, -1.0, 2.0, 0.5];
        let mut brute: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                brute = brute.max(libm::sqrt(eta[i] * eta[i] + eta[j] * eta[j]));
            }
        }
        let k = set(SetKind::SparseUnitSet { s: 2 }, 4);
        let r = k.support(&eta).unwrap();
        assert!((r.value - brute).abs() < 1e-15);
        assert!((brute - libm::sqrt(13.0)).abs() < 1e-15);
    }

    #[test]
    fn gauge_examples() {
        let l1 = set(SetKind::L1Ball { radius: 1.0 }, 2);
        assert_eq!(l1.gauge(&[0.5, 0.5]).unwrap(), 1.0);
        let nuc = set(SetKind::NuclearBall { radius: 1.0, d1: 2, d2: 2 }, 4);
        assert!((nuc.gauge(&[1.0, 0.0, 0.0, 1.0]).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn dictionary_gauge_matches_vertex_enumeration() {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let d = Matrix::from_rows(&[&[1.0, 0.0, h], &[0.0, 1.0, h]]);
        let x = [h, h];
        // enumerate basic solutions: every pair of columns solved exactly, plus
        // single columns parallel to x
        let cols: Vec<Vec<f64>> = (0..3).map(|j| d.column(j)).collect();
        let mut brute = f64::INFINITY;
        for i in 0..3 {
            let c = &cols[i];
            let t = dot(c, &x) / dot(c, c);
            if crate::vector::dist2(&scaled(c, t), &x) < 1e-14 {
                brute = brute.min(t.abs());
            }
            for j in i + 1..3 {
                let det = cols[i][0] * cols[j][1] - cols[i][1] * cols[j][0];
                if det.abs() > 1e-12 {
                    let a = (x[0] * cols[j][1] - x[1] * cols[j][0]) / det;
                    let b = (cols[i][0] * x[1] - cols[i][1] * x[0]) / det;
                    brute = brute.min(a.abs() + b.abs());
                }
            }
        }
        let k = set(SetKind::DictionaryHull { dictionary: d, radius: 1.0 }, 2);
        let g = k.gauge(&x).unwrap();
        assert!((g - brute).abs() < 1e-12);
        assert!((g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dictionary_gauge_outside_span() {
        let d = Matrix::from_rows(&[&[1.0], &[0.0]]);
        let k = set(SetKind::DictionaryHull { dictionary: d, radius: 1.0 }, 2);
        assert_eq!(k.gauge(&[0.0, 1.0]), Err(Error::NoRepresentation));
    }

    #[test]
    fn projection_examples() {
        let c = set(SetKind::SparseCone { s: 2 }, 4);
        assert_eq!(c.project(&[3.0, -1.0, 2.0, 0.5]).unwrap(), vec![3.0, 0.0, 2.0, 0.0]);
        let b = set(SetKind::EuclideanBall { radius: 1.0 }, 2);
        let p = b.project(&[3.0, 4.0]).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        let l1 = set(SetKind::L1Ball { radius: 1.0 }, 2);
        assert_eq!(l1.project(&[1.0, 1.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn contains_examples() {
        let l1 = set(SetKind::L1Ball { radius: 1.0 }, 3);
        assert!(l1.contains(&[0.3, 0.3, 0.3], 0.0));
        let c = set(SetKind::SparseCone { s: 1 }, 2);
        assert!(c.contains(&[1.0, 1e-12], 1e-9));
        let lr = set(SetKind::LowRankCone { rank: 1, d1: 2, d2: 2 }, 4);
        assert!(!lr.contains(&[1.0, 0.0, 0.0, 0.5], 1e-9));
        assert!(lr.contains(&[1.0, 2.0, 2.0, 4.0], 1e-9));
    }

    #[test]
    fn hull_descriptors() {
        let l1 = set(SetKind::L1Ball { radius: 1.0 }, 3);
        assert_eq!(l1.convex_hull_descriptor().unwrap(), l1);
        let pts = vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]];
        let f = set(SetKind::FiniteSet { points: pts }, 2);
        let h = f.convex_hull_descriptor().unwrap();
        assert_eq!(h.kind(), &SetKind::DictionaryHull { dictionary: Matrix::identity(2), radius: 1.0 });
        let su = set(SetKind::SparseUnitSet { s: 4 }, 128);
        assert_eq!(su.convex_hull_descriptor().unwrap().kind(), &SetKind::SparseHull { s: 4, radius: 1.0 });
        let asym = set(SetKind::FiniteSet { points: vec![vec![1.0, 0.0]] }, 2);
        assert!(matches!(asym.convex_hull_descriptor(), Err(Error::NoClosedForm(_))));
    }

    #[test]
    fn difference_gauge_examples() {
        let l1 = set(SetKind::L1Ball { radius: 1.0 }, 2);
        assert_eq!(l1.difference_gauge(&[2.0, 0.0]).unwrap(), 1.0);
        let b = set(SetKind::EuclideanBall { radius: 1.0 }, 2);
        assert_eq!(b.difference_gauge(&[0.0, 4.0]).unwrap(), 2.0);
        let cs = set(SetKind::ConvexSparse { s: 2, radius: 1.0 }, 4);
        assert_eq!(cs.difference_gauge(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn convex_sparse_support_is_dual_to_gauge() {
        let mut rng = rng_from(3);
        let k = set(SetKind::ConvexSparse { s: 3, radius: 1.5 }, 12);
        for _ in 0..200 {
            let eta = gaussian_vec(&mut rng, 12);
            let r = k.support(&eta).unwrap();
            assert!((k.gauge(&r.argmax).unwrap() - 1.0).abs() < 1e-10);
            // random boundary points never beat the support value
            for _ in 0..20 {
                let x = gaussian_vec(&mut rng, 12);
                let x = scaled(&x, 1.0 / k.gauge(&x).unwrap());
                assert!(dot(&eta, &x) <= r.value + 1e-10);
            }
        }
    }

    #[test]
    fn local_support_by_scaling_matches_ball_closed_form() {
        // an L1 ball of radius 10 in 2-D contains the r-ball for small r,
        // where the answer is r‖g‖
        let k = set(SetKind::L1Ball { radius: 10.0 }, 2);
        let g = [0.3, -1.2];
        let v = k.local_difference_support(&g, 0.5).unwrap();
        assert!((v - 0.5 * norm2(&g)).abs() < 1e-10);
    }
}
