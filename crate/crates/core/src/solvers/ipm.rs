//! Primal-dual interior point for the noisy `ℓ1` program, with an exact
//! vertex crossover.
//!
//! Standard form over `v = (x⁺, x⁻, r⁺, r⁻, slack) ≥ 0`:
//!
//! ```text
//! min Σx⁺ + Σx⁻   s.t.  A(x⁺ − x⁻) − r⁺ + r⁻ = y,   Σr⁺ + Σr⁻ + slack = mε
//! ```
//!
//! Mehrotra predictor-corrector steps. The normal matrix has the bordered form
//! `[[A Dₓ Aᵀ + Dᵣ, e], [eᵀ, γ]]`, so each step costs one factorization of
//! the smaller of `A Dₓ Aᵀ + Dᵣ` and `Dₓ⁻¹ + Aᵀ Dᵣ⁻¹ A`.
//!
//! The interior iterate names a candidate basis. The vertex it names is
//! solved exactly and kept only when a dual certificate proves it optimal.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Result;
use crate::linalg::{Cholesky, LeastSquares, Matrix};
use crate::solvers::tube::Tube;
use crate::solvers::{Method, SolveDiagnostics};
use crate::vector::{axpy, dot, norm1, norm2, sign, sub};

const MAX_ITER: usize = 200;
const TOL: f64 = 1e-10;
const CERT_TOL: f64 = 1e-9;

/// Blocks of the standard-form vector.
#[derive(Clone)]
struct Split {
    xp: Vec<f64>,
    xm: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    s: f64,
}

impl Split {
    fn filled(n: usize, m: usize, v: f64) -> Split {
        Split { xp: vec![v; n], xm: vec![v; n], p: vec![v; m], q: vec![v; m], s: v }
    }

    fn iter(&self) -> impl Iterator<Item = &f64> {
        self.xp.iter().chain(&self.xm).chain(&self.p).chain(&self.q).chain(core::iter::once(&self.s))
    }

    fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.xp
            .iter_mut()
            .chain(self.xm.iter_mut())
            .chain(self.p.iter_mut())
            .chain(self.q.iter_mut())
            .chain(core::iter::once(&mut self.s))
    }

    fn zip_map(&self, other: &Split, f: impl Fn(f64, f64) -> f64) -> Split {
        let z = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect::<Vec<f64>>();
        Split {
            xp: z(&self.xp, &other.xp),
            xm: z(&self.xm, &other.xm),
            p: z(&self.p, &other.p),
            q: z(&self.q, &other.q),
            s: f(self.s, other.s),
        }
    }

    fn dot(&self, other: &Split) -> f64 {
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    fn len(&self) -> usize {
        2 * self.xp.len() + 2 * self.p.len() + 1
    }
}

/// Constraint operator of the standard form.
struct Op<'a> {
    a: &'a Matrix,
}

impl Op<'_> {
    /// `M v`, as (residual rows, budget row).
    fn apply(&self, v: &Split) -> (Vec<f64>, f64) {
        let mut r = self.a.mul_vec(&sub(&v.xp, &v.xm));
        r.iter_mut().zip(v.p.iter().zip(&v.q)).for_each(|(ri, (pi, qi))| *ri += qi - pi);
        let b = v.p.iter().sum::<f64>() + v.q.iter().sum::<f64>() + v.s;
        (r, b)
    }

    /// `Mᵀ (λ, μ)`
    fn adjoint(&self, lam: &[f64], mu: f64) -> Split {
        let atl = self.a.tr_mul_vec(lam);
        Split {
            xm: atl.iter().map(|v| -v).collect(),
            xp: atl,
            p: lam.iter().map(|l| mu - l).collect(),
            q: lam.iter().map(|l| mu + l).collect(),
            s: mu,
        }
    }
}

/// Factorized normal matrix `M D Mᵀ` for a positive diagonal `D`.
struct Normal<'a> {
    a: &'a Matrix,
    dx: Vec<f64>,
    dr: Vec<f64>,
    kind: NormalKind,
    e: Vec<f64>,
    /// `P⁻¹e`
    pe: Vec<f64>,
    schur: f64,
}

enum NormalKind {
    /// `P = A Dₓ Aᵀ + Dᵣ`
    Direct(Cholesky),
    /// Block elimination with `w = Dₓ Aᵀ z`. Rows with small `Dᵣ` (the
    /// tight set `T`) stay explicit; the rest are eliminated through
    /// `H = Dₓ⁻¹ + A_Lᵀ Dᵣ⁻¹ A_L`, leaving `S = D_T + A_T H⁻¹ A_Tᵀ`.
    Blocked(Blocked),
}

struct Blocked {
    tight: Vec<usize>,
    in_tight: Vec<bool>,
    h: Cholesky,
    /// Columns `H⁻¹ a_t` for `t ∈ T`.
    h_at: Vec<Vec<f64>>,
    s: Option<Cholesky>,
}

/// Rows whose `Dᵣ` falls this far below the largest are kept explicit.
const TIGHT_RATIO: f64 = 1e-6;

fn cholesky_regularized(mut g: Matrix) -> Result<Cholesky> {
    let n = g.rows();
    let top = (0..n).map(|i| g[(i, i)]).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let mut shift = 0.0;
    loop {
        match Cholesky::new(&g) {
            Ok(c) => return Ok(c),
            Err(e) if shift > 1e-6 * top => return Err(e),
            Err(_) => {
                let next = if shift == 0.0 { 1e-14 * top } else { 10.0 * shift };
                (0..n).for_each(|i| g[(i, i)] += next - shift);
                shift = next;
            }
        }
    }
}

impl<'a> Normal<'a> {
    fn new(a: &'a Matrix, d: &Split) -> Result<Normal<'a>> {
        let (m, n) = a.shape();
        let dx: Vec<f64> = d.xp.iter().zip(&d.xm).map(|(u, v)| u + v).collect();
        let dr: Vec<f64> = d.p.iter().zip(&d.q).map(|(u, v)| u + v).collect();
        let e: Vec<f64> = d.q.iter().zip(&d.p).map(|(u, v)| u - v).collect();
        let gamma = dr.iter().sum::<f64>() + d.s;
        let kind = if m <= n {
            let scaled = Matrix::from_fn(m, n, |i, j| a[(i, j)] * libm::sqrt(dx[j]));
            let mut g = scaled.gram_rows();
            (0..m).for_each(|i| g[(i, i)] += dr[i]);
            NormalKind::Direct(cholesky_regularized(g)?)
        } else {
            let top = dr.iter().cloned().fold(0.0f64, f64::max);
            let mut tight: Vec<usize> = (0..m).filter(|&i| dr[i] < TIGHT_RATIO * top).collect();
            tight.sort_by(|&i, &j| dr[i].total_cmp(&dr[j]));
            tight.truncate(n);
            let mut in_tight = vec![false; m];
            tight.iter().for_each(|&i| in_tight[i] = true);
            let scaled = Matrix::from_fn(m, n, |i, j| if in_tight[i] { 0.0 } else { a[(i, j)] / libm::sqrt(dr[i]) });
            let mut g = scaled.gram_cols();
            (0..n).for_each(|j| g[(j, j)] += 1.0 / dx[j]);
            let h = cholesky_regularized(g)?;
            let h_at: Vec<Vec<f64>> = tight.iter().map(|&t| h.solve(a.row(t))).collect();
            let s = if tight.is_empty() {
                None
            } else {
                let st = Matrix::from_fn(tight.len(), tight.len(), |r, c| {
                    dot(a.row(tight[r]), &h_at[c]) + if r == c { dr[tight[r]] } else { 0.0 }
                });
                Some(cholesky_regularized(st)?)
            };
            NormalKind::Blocked(Blocked { tight, in_tight, h, h_at, s })
        };
        let mut normal = Normal { a, dx, dr, kind, e: Vec::new(), pe: Vec::new(), schur: 0.0 };
        normal.pe = normal.solve_p(&e);
        normal.schur = gamma - dot(&e, &normal.pe);
        normal.e = e;
        Ok(normal)
    }

    /// `P z` from the unfactorized blocks.
    fn apply_p(&self, z: &[f64]) -> Vec<f64> {
        let t = self.a.tr_mul_vec(z);
        let t: Vec<f64> = t.iter().zip(&self.dx).map(|(u, d)| u * d).collect();
        let mut out = self.a.mul_vec(&t);
        out.iter_mut().zip(z.iter().zip(&self.dr)).for_each(|(o, (zi, d))| *o += d * zi);
        out
    }

    /// `P⁻¹ f` with two steps of iterative refinement.
    fn solve_p(&self, f: &[f64]) -> Vec<f64> {
        let mut z = self.solve_p_once(f);
        for _ in 0..2 {
            let r = sub(f, &self.apply_p(&z));
            let dz = self.solve_p_once(&r);
            z.iter_mut().zip(&dz).for_each(|(a, b)| *a += b);
        }
        z
    }

    fn solve_p_once(&self, f: &[f64]) -> Vec<f64> {
        match &self.kind {
            NormalKind::Direct(c) => c.solve(f),
            NormalKind::Blocked(bl) => {
                let g: Vec<f64> = (0..f.len()).map(|i| if bl.in_tight[i] { 0.0 } else { f[i] / self.dr[i] }).collect();
                let mut w = bl.h.solve(&self.a.tr_mul_vec(&g));
                let zt = match &bl.s {
                    Some(s) => {
                        let rhs: Vec<f64> = bl.tight.iter().map(|&t| f[t] - dot(self.a.row(t), &w)).collect();
                        let zt = s.solve(&rhs);
                        zt.iter().zip(&bl.h_at).for_each(|(zi, col)| axpy(*zi, col, &mut w));
                        zt
                    }
                    None => Vec::new(),
                };
                let aw = self.a.mul_vec(&w);
                let mut z: Vec<f64> = (0..f.len()).map(|i| (f[i] - aw[i]) / self.dr[i]).collect();
                bl.tight.iter().zip(&zt).for_each(|(&t, &v)| z[t] = v);
                z
            }
        }
    }

    fn solve(&self, f: &[f64], g: f64) -> (Vec<f64>, f64) {
        let pf = self.solve_p(f);
        let b = (g - dot(&self.e, &pf)) / self.schur;
        let lam = pf.iter().zip(&self.pe).map(|(u, v)| u - b * v).collect();
        (lam, b)
    }
}

/// Largest step in `(0, 1]` keeping `v + α dv ≥ 0`.
fn max_step(v: &Split, dv: &Split) -> f64 {
    v.iter().zip(dv.iter()).filter(|(_, d)| **d < 0.0).map(|(x, d)| -x / d).fold(1.0, f64::min)
}

pub fn l1_interior(a: &Matrix, y: &[f64], eps: f64) -> Result<(Vec<f64>, SolveDiagnostics)> {
    let (m, n) = a.shape();
    let tube = Tube::new(a, y, eps)?;
    if norm1(y) <= m as f64 * eps {
        return Ok((vec![0.0; n], SolveDiagnostics::exact(Method::InteriorPoint, 0.0)));
    }
    let sigma = (a.frobenius_norm() / libm::sqrt(n as f64)).max(f64::MIN_POSITIVE);
    let mut b = a.clone();
    b.scale(1.0 / sigma);
    let yb: Vec<f64> = y.iter().map(|v| v / sigma).collect();
    let budget = m as f64 * eps / sigma;
    let op = Op { a: &b };
    let mut cost = Split::filled(n, m, 0.0);
    cost.xp.iter_mut().chain(cost.xm.iter_mut()).for_each(|c| *c = 1.0);

    // Mehrotra starting point from least-norm primal and least-squares dual
    let ones = Split::filled(n, m, 1.0);
    let normal = Normal::new(&b, &ones)?;
    let (l0, mu0) = normal.solve(&yb, budget);
    let mut v = op.adjoint(&l0, mu0);
    let (cl, cm) = op.apply(&cost);
    let (l1, mu1) = normal.solve(&cl, cm);
    let mut lam = l1;
    let mut mu = mu1;
    let at = op.adjoint(&lam, mu);
    let mut z = cost.zip_map(&at, |c, t| c - t);
    let shift_v = (-1.5 * v.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
    let shift_z = (-1.5 * z.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
    v.iter_mut().for_each(|x| *x += shift_v);
    z.iter_mut().for_each(|x| *x += shift_z);
    let vz = v.dot(&z);
    let sv: f64 = v.iter().sum();
    let sz: f64 = z.iter().sum();
    let dv = if sz > 0.0 { 0.5 * vz / sz } else { 1.0 };
    let dz = if sv > 0.0 { 0.5 * vz / sv } else { 1.0 };
    v.iter_mut().for_each(|x| *x = (*x + dv).max(1e-8));
    z.iter_mut().for_each(|x| *x = (*x + dz).max(1e-8));

    // basic-ness ratios; a vertex has `|support| = |zero rows| + 1`
    let crossover = |v: &Split, z: &Split, lam: &[f64]| -> Option<Vec<f64>> {
        let x = sub(&v.xp, &v.xm);
        let col: Vec<f64> = (0..n).map(|j| (v.xp[j] / z.xp[j]).max(v.xm[j] / z.xm[j])).collect();
        let row: Vec<f64> = (0..m).map(|i| (v.p[i] / z.p[i]).max(v.q[i] / z.q[i])).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        cols.sort_by(|&i, &j| col[j].total_cmp(&col[i]));
        let mut rows: Vec<usize> = (0..m).collect();
        rows.sort_by(|&i, &j| row[i].total_cmp(&row[j]));
        let res = sub(&a.mul_vec(&x), y);
        let k_cols = col.iter().filter(|r| **r > 1.0).count();
        let k_rows = row.iter().filter(|r| **r < 1.0).count() + 1;
        [k_cols, k_rows]
            .into_iter()
            .filter(|&k| k >= 1 && k <= n.min(m + 1))
            .find_map(|k| vertex(a, y, eps, &x, &cols[..k], &rows[..k - 1], &res))
            .or_else(|| polish(a, y, eps, &x, lam))
    };

    let big = v.len() as f64;
    let bnorm = 1.0 + norm2(&yb) + budget;
    let mut iters = 0;
    let mut converged = false;
    let mut primal = f64::INFINITY;
    let mut best = (f64::INFINITY, v.clone(), z.clone(), lam.clone());
    let mut exact = None;
    while iters < MAX_ITER {
        let (mv, mb) = op.apply(&v);
        let rp: Vec<f64> = yb.iter().zip(&mv).map(|(u, w)| u - w).collect();
        let rpb = budget - mb;
        let at = op.adjoint(&lam, mu);
        let rd = cost.zip_map(&at, |c, t| c - t).zip_map(&z, |r, zz| r - zz);
        let gap = v.dot(&z) / big;
        primal = libm::hypot(norm2(&rp), rpb);
        let dual = libm::sqrt(rd.dot(&rd));
        let obj = v.xp.iter().sum::<f64>() + v.xm.iter().sum::<f64>();
        if primal <= TOL * bnorm && dual <= TOL * (1.0 + libm::sqrt(2.0 * n as f64)) && gap * big <= TOL * (1.0 + obj) {
            converged = true;
            break;
        }
        let merit = primal / bnorm + gap * big / (1.0 + obj);
        if !merit.is_finite() || merit > 1e3 * best.0 {
            break;
        }
        if merit < best.0 {
            best = (merit, v.clone(), z.clone(), lam.clone());
        }
        if merit < 1e-5 {
            exact = crossover(&v, &z, &lam);
            if exact.is_some() {
                break;
            }
        }
        iters += 1;

        let d = v.zip_map(&z, |x, zz| x / zz);
        let normal = Normal::new(&b, &d)?;
        // Δv = D MᵀΔλ + rc/z − D rd, with M Δv = rp
        let direction = |rc: &Split| -> (Split, Vec<f64>, f64, Split) {
            let base = rc.zip_map(&z, |c, zz| c / zz).zip_map(&d.zip_map(&rd, |di, ri| di * ri), |u, w| u - w);
            let (mbl, mbb) = op.apply(&base);
            let f: Vec<f64> = rp.iter().zip(&mbl).map(|(u, w)| u - w).collect();
            let (dl, dm) = normal.solve(&f, rpb - mbb);
            let mt = op.adjoint(&dl, dm);
            let dvv = d.zip_map(&mt, |di, t| di * t).zip_map(&base, |u, w| u + w);
            let dzz = rd.zip_map(&mt, |r, t| r - t);
            (dvv, dl, dm, dzz)
        };
        let rc_aff = v.zip_map(&z, |x, zz| -x * zz);
        let (dva, _, _, dza) = direction(&rc_aff);
        let ap = max_step(&v, &dva);
        let ad = max_step(&z, &dza);
        let v_aff = v.zip_map(&dva, |x, d| x + ap * d);
        let z_aff = z.zip_map(&dza, |x, d| x + ad * d);
        let gap_aff = v_aff.dot(&z_aff) / big;
        let centering = libm::pow(gap_aff / gap, 3.0).min(1.0);
        let rc = rc_aff
            .zip_map(&dva.zip_map(&dza, |a1, a2| a1 * a2), |r, c| r - c)
            .zip_map(&ones, |r, _| r + centering * gap);
        let (dvv, dl, dm, dzz) = direction(&rc);
        let ap = (0.995 * max_step(&v, &dvv)).min(1.0);
        let ad = (0.995 * max_step(&z, &dzz)).min(1.0);
        v = v.zip_map(&dvv, |x, d| x + ap * d);
        z = z.zip_map(&dzz, |x, d| x + ad * d);
        lam.iter_mut().zip(&dl).for_each(|(l, d)| *l += ad * d);
        mu += ad * dm;
    }

    if exact.is_none() && !converged {
        (_, v, z, lam) = best;
    }
    let exact = exact.or_else(|| crossover(&v, &z, &lam));
    let x = sub(&v.xp, &v.xm);
    let certified = exact.is_some();
    let xh = tube.repair(&exact.unwrap_or(x));
    let diag = SolveDiagnostics {
        iterations: iters,
        primal_residual: if certified { 0.0 } else { primal * sigma },
        feasibility_gap: tube.gap(&xh),
        objective: norm1(&xh),
        converged: converged || certified,
        method: Method::InteriorPoint,
    };
    Ok((xh, diag))
}

/// Candidate vertices read off an approximate solution `w` and row duals
/// `u`: the `k` largest entries of `w` form the support and `k − 1` rows
/// vanish, for `k` set by a few relative thresholds. The first candidate
/// carrying a dual certificate is returned.
pub(crate) fn polish(a: &Matrix, y: &[f64], eps: f64, w: &[f64], u: &[f64]) -> Option<Vec<f64>> {
    let (m, n) = a.shape();
    let top = w.iter().fold(0.0f64, |acc, v| acc.max(libm::fabs(*v)));
    if eps <= 0.0 || top == 0.0 {
        return None;
    }
    let mut cols: Vec<usize> = (0..n).collect();
    cols.sort_by(|&i, &j| libm::fabs(w[j]).total_cmp(&libm::fabs(w[i])));
    let res = sub(&a.mul_vec(w), y);
    let mut by_res: Vec<usize> = (0..m).collect();
    by_res.sort_by(|&i, &j| libm::fabs(res[i]).total_cmp(&libm::fabs(res[j])));
    let mut by_dual: Vec<usize> = (0..m).collect();
    by_dual.sort_by(|&i, &j| libm::fabs(u[i]).total_cmp(&libm::fabs(u[j])));
    let mut last = 0;
    for rel in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7] {
        let k = w.iter().filter(|v| libm::fabs(**v) > rel * top).count();
        if k == last || k > m + 1 {
            continue;
        }
        last = k;
        for rows in [&by_dual, &by_res] {
            if let Some(x) = vertex(a, y, eps, w, &cols[..k], &rows[..k - 1], &res) {
                return Some(x);
            }
        }
    }
    None
}

/// Vertex with the given support and vanishing residuals on `zero`, on the
/// tube boundary, if a dual certificate proves it optimal. Signs come from
/// `w` on the support and from `res` off `zero`.
fn vertex(
    a: &Matrix,
    y: &[f64],
    eps: f64,
    w: &[f64],
    support: &[usize],
    zero: &[usize],
    res: &[f64],
) -> Option<Vec<f64>> {
    let (m, n) = a.shape();
    let k = support.len();
    if k == 0 || zero.len() + 1 != k {
        return None;
    }
    let mut tau: Vec<f64> = res.iter().map(|&v| sign(v)).collect();
    let mut in_zero = vec![false; m];
    zero.iter().for_each(|&i| in_zero[i] = true);
    for i in 0..m {
        if in_zero[i] {
            tau[i] = 0.0;
        } else if tau[i] == 0.0 {
            return None;
        }
    }
    let tau_row: Vec<f64> = support.iter().map(|&j| (0..m).map(|i| tau[i] * a[(i, j)]).sum()).collect();
    let mat = Matrix::from_fn(k, k, |r, c| if r < zero.len() { a[(zero[r], support[c])] } else { tau_row[c] });
    let mut rhs: Vec<f64> = zero.iter().map(|&i| y[i]).collect();
    rhs.push(m as f64 * eps + tau.iter().zip(y).map(|(t, v)| t * v).sum::<f64>());
    let ls = LeastSquares::new(&mat);
    if !ls.full_row_rank() {
        return None;
    }
    let xs = ls.solve(&rhs);
    if support.iter().zip(&xs).any(|(&j, &v)| v * w[j] <= 0.0) {
        return None;
    }
    let mut x = vec![0.0; n];
    support.iter().zip(&xs).for_each(|(&j, &v)| x[j] = v);
    let slack = norm2(y).max(1.0) * CERT_TOL;
    let r = sub(&a.mul_vec(&x), y);
    if (0..m).any(|i| tau[i] * r[i] < -slack) {
        return None;
    }

    // stationarity on the support: A_Sᵀu = −sign(x_S), u = v·g with g ∈ ∂‖r‖₁
    let neg_sign: Vec<f64> = support.iter().map(|&j| -sign(w[j])).collect();
    let dual = LeastSquares::new(&mat.transpose()).solve(&neg_sign);
    let v = dual[k - 1];
    if v < -CERT_TOL {
        return None;
    }
    let mut u: Vec<f64> = tau.iter().map(|t| v * t).collect();
    for (r, &i) in zero.iter().enumerate() {
        if libm::fabs(dual[r]) > v * (1.0 + CERT_TOL) + CERT_TOL {
            return None;
        }
        u[i] = dual[r];
    }
    let atu = a.tr_mul_vec(&u);
    let mut inside = vec![false; n];
    support.iter().for_each(|&j| inside[j] = true);
    if (0..n).any(|j| !inside[j] && libm::fabs(atu[j]) > 1.0 + CERT_TOL) {
        return None;
    }
    Some(x)
}
