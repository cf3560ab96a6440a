//! Lower-edge eigenpairs of self-adjoint sparse operators.
//!
//! Thick-restart Lanczos with full reorthogonalization, run in the
//! operator's own weighted inner product so `W⁻¹K` operators can be solved
//! without symmetrizing first. After the requested pairs converge, further
//! runs from fresh random starts deflated against the pairs found so far
//! look for eigenvalues the first Krylov sequence missed (typically second
//! copies of degenerate levels); any that fall below the current top pair
//! are swapped in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::discretize::{weighted_dot, SparseOperator};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct Spectrum<T> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Normalized in the operator's weighted inner product.
    pub eigenvectors: Vec<Vec<T>>,
    /// `‖Av - λv‖_w / ‖A‖_est`.
    pub residuals: Vec<T>,
    /// Largest Ritz value magnitude seen, the scale of `residuals`.
    pub norm_estimate: T,
    /// Operator applications.
    pub matvecs: usize,
    pub restarts: usize,
    pub seed: u64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
    /// Cap on operator applications across all runs.
    pub max_iter: usize,
    /// Krylov basis size; default `max(2k + 20, 48)`.
    pub basis: Option<usize>,
    /// Keep iterates `w`-orthogonal to the constant vector.
    pub exclude_constant: bool,
    /// Deflated runs searching for missed eigenvalues.
    pub verify_runs: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { k: 6, tol: 1e-10, seed: 42, max_iter: 200_000, basis: None, exclude_constant: false, verify_runs: 8 }
    }
}

impl EigenOptions {
    pub fn new(k: usize) -> Self {
        Self { k, ..Self::default() }
    }
}

#[derive(Debug, Clone, Error)]
pub enum EigenError<T: Real> {
    #[error("requested {k} eigenpairs of a {dim}-dimensional operator")]
    TooMany { k: usize, dim: usize },
    #[error("need at least one eigenpair")]
    ZeroCount,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("operator is not self-adjoint in its weight (relative defect {0:e})")]
    NotSelfAdjoint(f64),
    #[error("non-positive weight at row {0}")]
    BadWeight(usize),
    #[error("only {converged} of {k} eigenpairs converged within {matvecs} operator applications")]
    NoConvergence { converged: usize, k: usize, matvecs: usize, partial: Box<Spectrum<T>> },
}

/// Self-adjointness check applied before solving.
pub const SELF_ADJOINT_GUARD: f64 = 1e-8;

struct Ctx<'a, T> {
    op: &'a SparseOperator<T>,
    w: &'a [T],
    tol: T,
    norm_est: T,
    matvecs: usize,
    restarts: usize,
    max_iter: usize,
    rng: ChaCha8Rng,
}

impl<T: Real> Ctx<'_, T> {
    fn apply(&mut self, v: &[T], out: &mut [T]) {
        self.op.matvec_into(v, out);
        self.matvecs += 1;
    }

    fn dot(&self, a: &[T], b: &[T]) -> T {
        weighted_dot(self.w, a, b)
    }

    fn norm(&self, a: &[T]) -> T {
        self.dot(a, a).sqrt()
    }

    /// Two passes of classical Gram-Schmidt against `basis` and `locked`.
    fn orthogonalize(&self, v: &mut [T], basis: &[Vec<T>], locked: &[Vec<T>]) {
        for _ in 0..2 {
            for b in locked.iter().chain(basis) {
                let c = self.dot(b, v);
                for (x, &y) in v.iter_mut().zip(b) {
                    *x = *x - c * y;
                }
            }
        }
    }

    fn random_unit(&mut self, basis: &[Vec<T>], locked: &[Vec<T>]) -> Option<Vec<T>> {
        for _ in 0..8 {
            let mut v: Vec<T> = (0..self.op.dim()).map(|_| T::lit(self.rng.gen_range(-1.0..1.0))).collect();
            let before = self.norm(&v);
            self.orthogonalize(&mut v, basis, locked);
            let nv = self.norm(&v);
            if nv > T::lit(1e-8) * before {
                v.iter_mut().for_each(|x| *x = *x / nv);
                return Some(v);
            }
        }
        None
    }

    fn explicit_residual(&mut self, lambda: T, v: &[T]) -> T {
        let mut av = vec![T::zero(); v.len()];
        self.apply(v, &mut av);
        let r: Vec<T> = av.iter().zip(v).map(|(&a, &x)| a - lambda * x).collect();
        self.norm(&r) / self.norm_est.max(T::min_positive_value())
    }

    /// Krylov-Schur iteration for the `nev` smallest eigenpairs of the
    /// operator restricted to the `w`-complement of `locked`.
    fn solve(&mut self, nev: usize, locked: &[Vec<T>], basis_size: usize) -> (Vec<T>, Vec<Vec<T>>, bool) {
        let n = self.op.dim();
        let avail = n - locked.len();
        let nev = nev.min(avail);
        if nev == 0 {
            return (Vec::new(), Vec::new(), true);
        }
        let ncv = basis_size.max(nev + 2).min(avail);
        let Some(v0) = self.random_unit(&[], locked) else {
            return (Vec::new(), Vec::new(), true);
        };
        let mut v: Vec<Vec<T>> = vec![v0];
        let mut h: Vec<Vec<T>> = vec![vec![T::zero(); ncv]; ncv];
        let mut b: Vec<T> = Vec::new();
        let mut f = vec![T::zero(); n];
        let mut first = true;

        loop {
            // expand to ncv vectors
            while v.len() < ncv || first {
                let p = if first { 0 } else { v.len() };
                if !first {
                    let beta = self.norm(&f);
                    let (next, coupling) = if beta > T::epsilon() * self.norm_est * T::lit(16.0) {
                        (f.iter().map(|&x| x / beta).collect(), beta)
                    } else {
                        match self.random_unit(&v, locked) {
                            Some(r) => (r, T::zero()),
                            None => break,
                        }
                    };
                    for j in 0..p {
                        h[p][j] = coupling * b[j];
                        h[j][p] = coupling * b[j];
                    }
                    v.push(next);
                }
                first = false;
                let mut w = vec![T::zero(); n];
                self.apply(&v[p], &mut w);
                let alpha = self.dot(&v[p], &w);
                h[p][p] = alpha;
                self.norm_est = self.norm_est.max(alpha.abs());
                self.orthogonalize(&mut w, &v, locked);
                f = w;
                b = vec![T::zero(); p + 1];
                b[p] = T::one();
                if self.matvecs >= self.max_iter {
                    break;
                }
            }

            let p = v.len();
            let small: Vec<Vec<T>> = (0..p).map(|i| (0..p).map(|j| T::half() * (h[i][j] + h[j][i])).collect()).collect();
            let (theta, s) = symmetric_eigen(&small);
            for t in &theta {
                self.norm_est = self.norm_est.max(t.abs());
            }
            let beta = self.norm(&f);
            let est: Vec<T> = (0..p)
                .map(|i| beta * (0..p).fold(T::zero(), |acc, j| acc + b[j] * s[j][i]).abs())
                .collect();
            let thresh = self.tol * self.norm_est;
            let want = nev.min(p);
            let done = est[..want].iter().all(|&r| r <= thresh) || p == avail;
            let out_of_budget = self.matvecs >= self.max_iter;

            if done || out_of_budget {
                let vecs = ritz(&v, &s, want);
                let vals = theta[..want].to_vec();
                let explicit_ok = done
                    && vals.iter().zip(&vecs).all(|(&l, y)| {
                        let r = self.explicit_residual(l, y);
                        r <= self.tol
                    });
                if explicit_ok || out_of_budget {
                    return (vals, vecs, explicit_ok);
                }
            }

            // thick restart
            self.restarts += 1;
            let keep = (nev + (ncv - nev) / 2).min(p - 1).max(nev.min(p - 1)).max(1);
            let new_v = ritz(&v, &s, keep);
            let new_b: Vec<T> = (0..keep).map(|c| (0..p).fold(T::zero(), |acc, j| acc + b[j] * s[j][c])).collect();
            for row in h.iter_mut() {
                row.iter_mut().for_each(|x| *x = T::zero());
            }
            for (c, &t) in theta.iter().take(keep).enumerate() {
                h[c][c] = t;
            }
            v = new_v;
            b = new_b;
            // continue expanding from the residual direction f
            let beta = self.norm(&f);
            let next = if beta > T::epsilon() * self.norm_est * T::lit(16.0) {
                let mut nx: Vec<T> = f.iter().map(|&x| x / beta).collect();
                self.orthogonalize(&mut nx, &v, locked);
                let nn = self.norm(&nx);
                nx.iter_mut().for_each(|x| *x = *x / nn);
                Some((nx, beta))
            } else {
                self.random_unit(&v, locked).map(|r| (r, T::zero()))
            };
            let Some((nx, coupling)) = next else {
                let vals = theta[..want].to_vec();
                return (vals, ritz(&v, &s, want), false);
            };
            let pk = v.len();
            for j in 0..pk {
                h[pk][j] = coupling * b[j];
                h[j][pk] = coupling * b[j];
            }
            v.push(nx);
            let mut w = vec![T::zero(); n];
            self.apply(&v[pk], &mut w);
            let alpha = self.dot(&v[pk], &w);
            h[pk][pk] = alpha;
            self.orthogonalize(&mut w, &v, locked);
            f = w;
            b = vec![T::zero(); pk + 1];
            b[pk] = T::one();
        }
    }
}

/// First `cols` Ritz vectors `V s_c`.
fn ritz<T: Real>(v: &[Vec<T>], s: &[Vec<T>], cols: usize) -> Vec<Vec<T>> {
    let n = v[0].len();
    (0..cols)
        .map(|c| {
            let mut y = vec![T::zero(); n];
            for (j, vj) in v.iter().enumerate() {
                let sj = s[j][c];
                for (yi, &x) in y.iter_mut().zip(vj) {
                    *yi = *yi + sj * x;
                }
            }
            y
        })
        .collect()
}

/// The `opts.k` smallest eigenpairs of an operator self-adjoint in its own weight.
pub fn smallest_eigenpairs<T: Real>(op: &SparseOperator<T>, opts: &EigenOptions) -> Result<Spectrum<T>, EigenError<T>> {
    let n = op.dim();
    if opts.k == 0 {
        return Err(EigenError::ZeroCount);
    }
    let reserved = usize::from(opts.exclude_constant);
    if opts.k + reserved > n {
        return Err(EigenError::TooMany { k: opts.k, dim: n });
    }
    if !(opts.tol > 0.0) {
        return Err(EigenError::BadTolerance(opts.tol));
    }
    if let Some(i) = op.weight.iter().position(|&w| !(w > T::zero())) {
        return Err(EigenError::BadWeight(i));
    }
    let defect = op.weighted_symmetry_defect(&op.weight).as_f64();
    if defect > SELF_ADJOINT_GUARD {
        return Err(EigenError::NotSelfAdjoint(defect));
    }

    let mut ctx = Ctx {
        op,
        w: &op.weight,
        tol: T::lit(opts.tol),
        norm_est: T::zero(),
        matvecs: 0,
        restarts: 0,
        max_iter: opts.max_iter,
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
    };
    let mut locked: Vec<Vec<T>> = Vec::new();
    if opts.exclude_constant {
        let c = vec![T::one(); n];
        let nc = ctx.norm(&c);
        locked.push(c.iter().map(|&x| x / nc).collect());
    }
    let basis = opts.basis.unwrap_or((2 * opts.k + 20).max(48));

    let (mut vals, mut vecs, mut ok) = ctx.solve(opts.k, &locked, basis);
    let mut rounds = 0;
    while ok && rounds < opts.verify_runs && locked.len() + vecs.len() < n {
        rounds += 1;
        let mut defl = locked.clone();
        defl.extend(vecs.iter().cloned());
        let (extra_vals, extra_vecs, extra_ok) = ctx.solve(1, &defl, basis.min(n - defl.len()).max(2));
        let Some(&theta) = extra_vals.first() else { break };
        let top = *vals.last().expect("k >= 1");
        if theta < top - T::lit(2.0) * ctx.tol * ctx.norm_est {
            vals.push(theta);
            vecs.push(extra_vecs.into_iter().next().expect("pair"));
            let mut order: Vec<usize> = (0..vals.len()).collect();
            order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).expect("finite"));
            order.truncate(opts.k);
            vals = order.iter().map(|&i| vals[i]).collect();
            vecs = order.iter().map(|&i| vecs[i].clone()).collect();
            ok = extra_ok;
        } else {
            ok = extra_ok || theta >= top;
            break;
        }
    }

    let residuals: Vec<T> = vals.iter().zip(&vecs).map(|(&l, y)| ctx.explicit_residual(l, y)).collect();
    let converged_count = residuals.iter().filter(|&&r| r <= ctx.tol).count();
    let spectrum = Spectrum {
        eigenvalues: vals,
        eigenvectors: vecs,
        residuals,
        norm_estimate: ctx.norm_est,
        matvecs: ctx.matvecs,
        restarts: ctx.restarts,
        seed: opts.seed,
        converged: ok && converged_count == opts.k,
    };
    if spectrum.converged {
        Ok(spectrum)
    } else {
        Err(EigenError::NoConvergence {
            converged: converged_count,
            k: opts.k,
            matvecs: spectrum.matvecs,
            partial: Box::new(spectrum),
        })
    }
}

/// One row of [`residual_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow<T> {
    pub index: usize,
    pub eigenvalue: T,
    /// Recomputed `‖Av - λv‖_w / ‖A‖_est`.
    pub residual: T,
    pub stored: T,
}

/// Recompute every residual from the operator, independently of the solver.
pub fn residual_report<T: Real>(op: &SparseOperator<T>, spec: &Spectrum<T>) -> Vec<ResidualRow<T>> {
    let scale = spec.norm_estimate.max(T::min_positive_value());
    spec.eigenvalues
        .iter()
        .zip(&spec.eigenvectors)
        .zip(&spec.residuals)
        .enumerate()
        .map(|(index, ((&l, v), &stored))| {
            let av = op.matvec(v);
            let r: Vec<T> = av.iter().zip(v).map(|(&a, &x)| a - l * x).collect();
            let residual = weighted_dot(&op.weight, &r, &r).sqrt() / scale;
            ResidualRow { index, eigenvalue: l, residual, stored }
        })
        .collect()
}

/// All eigenpairs of a dense symmetric matrix: Householder reduction to
/// tridiagonal form followed by implicit QL. Returns ascending eigenvalues
/// and the matrix whose columns are the eigenvectors.
pub fn symmetric_eigen<T: Real>(a: &[Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let n = a.len();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut v: Vec<Vec<T>> = a.to_vec();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| d[i]).collect();
    let vecs = (0..n).map(|r| order.iter().map(|&c| v[r][c]).collect()).collect();
    (vals, vecs)
}

fn tred2<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = T::zero();
        let mut h = T::zero();
        for dk in d.iter().take(i) {
            scale = scale + dk.abs();
        }
        if scale == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
                v[j][i] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk = *dk / scale;
                h = h + *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g = g + v[k][j] * d[k];
                    e[k] = e[k] + v[k][j] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] = v[k][j] - (f * e[k] + g * d[k]);
                }
                d[j] = v[i - 1][j];
                v[i][j] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g = g + v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] = v[k][j] - g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = T::zero();
    }
    v[n - 1][n - 1] = T::one();
    e[0] = T::zero();
}

fn tql2<T: Real>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        let m = m.min(n - 1);
        if m > l {
            for _ in 0..64 {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::two() * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        let hk = row[i + 1];
                        row[i + 1] = s * row[i] + c * hk;
                        row[i] = c * row[i] - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
}
