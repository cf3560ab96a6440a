//! Frames, shape operator, curvatures and tube metrics of a parametric surface.
//!
//! Sign conventions: `e3 = e1 × e2 / |e1 × e2|`; the shape tensor `gamma` is
//! defined by `∂_α e3 = γ^β_α e_β` and stored as `gamma[β][α]`. The Weingarten
//! map is `-gamma`, so `H = -tr(γ)/2` and `K = det(γ)`. With these choices the
//! tube volume weight is `f(q) = det(I + qγ) = 1 - 2Hq + Kq²`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::dsl::{eval_jet2, EvalError, Expr};
use crate::jet::Jet2;
use crate::scalar::Real;
use crate::small::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("degenerate immersion at ({s1}, {s2}): |e1 x e2| = {norm:e}")]
    Degenerate { s1: f64, s2: f64, norm: f64 },
    #[error("tube validity violated at q = {q}: admissible q in ({q_min}, {q_max}), max |q| = {max_abs_q}")]
    TubeValidity {
        q: f64,
        q_min: f64,
        q_max: f64,
        max_abs_q: f64,
    },
}

/// Embedding `(s1, s2) -> x ∈ E³` evaluated as jets.
pub trait Embedding<T: Real>: Send + Sync {
    fn jets(&self, s1: T, s2: T) -> Result<[Jet2<T>; 3], GeometryError>;
}

/// Embedding given by three coordinate expressions with bound parameters.
#[derive(Debug, Clone)]
pub struct ExprEmbedding<T> {
    pub coords: [Expr; 3],
    pub params: BTreeMap<String, T>,
}

impl<T: Real> Embedding<T> for ExprEmbedding<T> {
    fn jets(&self, s1: T, s2: T) -> Result<[Jet2<T>; 3], GeometryError> {
        Ok([
            eval_jet2(&self.coords[0], s1, s2, &self.params)?,
            eval_jet2(&self.coords[1], s1, s2, &self.params)?,
            eval_jet2(&self.coords[2], s1, s2, &self.params)?,
        ])
    }
}

/// Closed-form embedding written directly in jet arithmetic.
pub struct FnEmbedding<F>(pub F);

impl<T, F> Embedding<T> for FnEmbedding<F>
where
    T: Real,
    F: Fn(Jet2<T>, Jet2<T>) -> [Jet2<T>; 3] + Send + Sync,
{
    fn jets(&self, s1: T, s2: T) -> Result<[Jet2<T>; 3], GeometryError> {
        Ok((self.0)(Jet2::var1(s1), Jet2::var2(s2)))
    }
}

struct Rigid<T: Real> {
    inner: Arc<dyn Embedding<T>>,
    rotation: [[T; 3]; 3],
    translation: [T; 3],
}

impl<T: Real> Embedding<T> for Rigid<T> {
    fn jets(&self, s1: T, s2: T) -> Result<[Jet2<T>; 3], GeometryError> {
        let x = self.inner.jets(s1, s2)?;
        let row = |i: usize| {
            x[0].scale(self.rotation[i][0]) + x[1].scale(self.rotation[i][1]) + x[2].scale(self.rotation[i][2])
                + self.translation[i]
        };
        Ok([row(0), row(1), row(2)])
    }
}

struct Swapped<T: Real>(Arc<dyn Embedding<T>>);

impl<T: Real> Embedding<T> for Swapped<T> {
    fn jets(&self, s1: T, s2: T) -> Result<[Jet2<T>; 3], GeometryError> {
        let x = self.0.jets(s2, s1)?;
        let swap = |j: Jet2<T>| Jet2::new(j.v, j.d2, j.d1, j.d22, j.d12, j.d11);
        Ok([swap(x[0]), swap(x[1]), swap(x[2])])
    }
}

/// A parametrized surface over the rectangle `[0, L1] × [0, L2]`.
#[derive(Clone)]
pub struct SurfacePatch<T: Real> {
    pub name: String,
    pub embedding: Arc<dyn Embedding<T>>,
    pub lengths: [T; 2],
    pub boundary: [Boundary; 2],
    /// Absolute threshold on `|e1 × e2|` below which a point is rejected.
    pub immersion_tol: T,
}

impl<T: Real> fmt::Debug for SurfacePatch<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SurfacePatch")
            .field("name", &self.name)
            .field("lengths", &self.lengths)
            .field("boundary", &self.boundary)
            .finish_non_exhaustive()
    }
}

pub const DEFAULT_IMMERSION_TOL: f64 = 1e-12;

impl<T: Real> SurfacePatch<T> {
    pub fn new(
        name: impl Into<String>,
        embedding: Arc<dyn Embedding<T>>,
        lengths: [T; 2],
        boundary: [Boundary; 2],
    ) -> Self {
        Self {
            name: name.into(),
            embedding,
            lengths,
            boundary,
            immersion_tol: T::lit(DEFAULT_IMMERSION_TOL),
        }
    }

    pub fn from_fn<F>(name: impl Into<String>, f: F, lengths: [T; 2], boundary: [Boundary; 2]) -> Self
    where
        F: Fn(Jet2<T>, Jet2<T>) -> [Jet2<T>; 3] + Send + Sync + 'static,
    {
        Self::new(name, Arc::new(FnEmbedding(f)), lengths, boundary)
    }

    /// The same surface moved by `x ↦ R x + t`.
    pub fn transformed(&self, rotation: [[T; 3]; 3], translation: [T; 3]) -> Self {
        Self {
            embedding: Arc::new(Rigid { inner: self.embedding.clone(), rotation, translation }),
            ..self.clone()
        }
    }

    /// The same surface with the parameters exchanged, which flips the normal.
    pub fn swapped(&self) -> Self {
        Self {
            embedding: Arc::new(Swapped(self.embedding.clone())),
            lengths: [self.lengths[1], self.lengths[0]],
            boundary: [self.boundary[1], self.boundary[0]],
            ..self.clone()
        }
    }

    pub fn point(&self, s1: T, s2: T) -> Result<PointGeometry<T>, GeometryError> {
        point_geometry(self, s1, s2)
    }
}

/// Differential geometry of the surface at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointGeometry<T> {
    pub s: [T; 2],
    pub x: Vec3<T>,
    pub e1: Vec3<T>,
    pub e2: Vec3<T>,
    pub e3: Vec3<T>,
    /// `∂_α e3`, indexed by α.
    pub de3: [Vec3<T>; 2],
    pub g: Mat2<T>,
    pub g_inv: Mat2<T>,
    pub sqrt_det_g: T,
    /// `gamma[β][α] = γ^β_{3α}`.
    pub gamma: Mat2<T>,
    pub mean_curvature: T,
    pub gauss_curvature: T,
    /// `H² - K`.
    pub geo_pot: T,
}

impl<T: Real> PointGeometry<T> {
    /// Eigenvalues of `gamma`, i.e. minus the principal curvatures, ascending.
    pub fn gamma_eigenvalues(&self) -> [T; 2] {
        let half_tr = -self.mean_curvature;
        let disc = self.geo_pot.max(T::zero()).sqrt();
        [half_tr - disc, half_tr + disc]
    }

    pub fn max_abs_curvature(&self) -> T {
        self.mean_curvature.abs() + self.geo_pot.max(T::zero()).sqrt()
    }

    /// Open interval of normal offsets `q` around 0 on which `f(q) > 0`.
    pub fn admissible_q(&self) -> (T, T) {
        let mut lo = T::neg_infinity();
        let mut hi = T::infinity();
        for lam in self.gamma_eigenvalues() {
            if lam > T::zero() {
                lo = lo.max(-lam.recip());
            } else if lam < T::zero() {
                hi = hi.min(-lam.recip());
            }
        }
        (lo, hi)
    }

    /// Largest `|q|` valid on both sides, `1 / max |κ|`.
    pub fn max_admissible_offset(&self) -> T {
        self.max_abs_curvature().recip()
    }

    /// `(√f)'' / √f = f'' / (2f) - f'² / (4f²)` at `q`.
    pub fn liouville_potential(&self, q: T) -> T {
        let (tr, det) = (trace2(self.gamma), det2(self.gamma));
        let f = self.weight(q);
        let d1 = tr + T::two() * q * det;
        det / f - d1 * d1 / (T::lit(4.0) * f * f)
    }

    /// `f(q) = 1 + q tr(γ) + q² det(γ)`.
    pub fn weight(&self, q: T) -> T {
        T::one() + q * trace2(self.gamma) + q * q * det2(self.gamma)
    }
}

/// Frame, first fundamental form, shape tensor and curvatures at `(s1, s2)`.
pub fn point_geometry<T: Real>(patch: &SurfacePatch<T>, s1: T, s2: T) -> Result<PointGeometry<T>, GeometryError> {
    let x = patch.embedding.jets(s1, s2)?;
    let pick = |f: fn(&Jet2<T>) -> T| [f(&x[0]), f(&x[1]), f(&x[2])];
    let e1 = pick(|j| j.d1);
    let e2 = pick(|j| j.d2);
    let x11 = pick(|j| j.d11);
    let x12 = pick(|j| j.d12);
    let x22 = pick(|j| j.d22);

    let n = cross3(e1, e2);
    let nn = norm3(n);
    if !(nn > patch.immersion_tol) {
        return Err(GeometryError::Degenerate { s1: s1.as_f64(), s2: s2.as_f64(), norm: nn.as_f64() });
    }
    let e3 = scale3(n, nn.recip());
    // ∂_α n = ∂_α e1 × e2 + e1 × ∂_α e2
    let dn = [
        add3(cross3(x11, e2), cross3(e1, x12)),
        add3(cross3(x12, e2), cross3(e1, x22)),
    ];
    let de3 = dn.map(|d| sub3(scale3(d, nn.recip()), scale3(n, dot3(n, d) / (nn * nn * nn))));

    let g = [[dot3(e1, e1), dot3(e1, e2)], [dot3(e2, e1), dot3(e2, e2)]];
    let g_inv = inv2(g);
    let det_g = det2(g);
    let tangents = [e1, e2];
    // b[α][δ] = ∂_α e3 · e_δ = (γᵀ g)[α][δ]  ⇒  γ = g⁻¹ bᵀ
    let mut b = [[T::zero(); 2]; 2];
    for a in 0..2 {
        for d in 0..2 {
            b[a][d] = dot3(de3[a], tangents[d]);
        }
    }
    let gamma = mul2(g_inv, transpose2(b));
    let h = -T::half() * trace2(gamma);
    let k = det2(gamma);
    Ok(PointGeometry {
        s: [s1, s2],
        x: pick(|j| j.v),
        e1,
        e2,
        e3,
        de3,
        g,
        g_inv,
        sqrt_det_g: det_g.sqrt(),
        gamma,
        mean_curvature: h,
        gauss_curvature: k,
        geo_pot: h * h - k,
    })
}

/// Metric data of the parallel surface at normal offset `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TubeGeometry<T> {
    pub q: T,
    pub g_sq: Mat2<T>,
    pub g_sq_inv: Mat2<T>,
    /// Determinant of the block metric `diag(g_sq, 1)`.
    pub g_ts_det: T,
    pub f: T,
    /// Moving frame `E[i][μ] = ∂_μ x^i`, columns `(E_1, E_2, E_3)`.
    pub frame: [[T; 3]; 3],
}

pub fn tube_metric<T: Real>(pg: &PointGeometry<T>, q: T) -> Result<TubeGeometry<T>, GeometryError> {
    let (lo, hi) = pg.admissible_q();
    let f = pg.weight(q);
    if !(q > lo && q < hi && f > T::zero()) {
        return Err(GeometryError::TubeValidity {
            q: q.as_f64(),
            q_min: lo.as_f64(),
            q_max: hi.as_f64(),
            max_abs_q: pg.max_admissible_offset().as_f64(),
        });
    }
    let gm = pg.gamma;
    let gt = transpose2(gm);
    let linear = add2(mul2(gt, pg.g), mul2(pg.g, gm));
    let quadratic = mul2(mul2(gt, pg.g), gm);
    let g_sq = add2(add2(pg.g, scale2(linear, q)), scale2(quadratic, q * q));

    let tangents = [pg.e1, pg.e2];
    let mut frame = [[T::zero(); 3]; 3];
    for a in 0..2 {
        let col = add3(
            tangents[a],
            add3(scale3(tangents[0], q * gm[0][a]), scale3(tangents[1], q * gm[1][a])),
        );
        for i in 0..3 {
            frame[i][a] = col[i];
        }
    }
    for i in 0..3 {
        frame[i][2] = pg.e3[i];
    }
    Ok(TubeGeometry { q, g_sq, g_sq_inv: inv2(g_sq), g_ts_det: det2(g_sq), f, frame })
}

/// Relative residual of `det g_{S_q} = f² det g_S`, maximized with the residual
/// of the same identity computed from the Gram determinant of the moving frame.
pub fn det_identity_residual<T: Real>(patch: &SurfacePatch<T>, s1: T, s2: T, q: T) -> Result<T, GeometryError> {
    let pg = point_geometry(patch, s1, s2)?;
    let tube = tube_metric(&pg, q)?;
    let rhs = tube.f * tube.f * det2(pg.g);
    let direct = (tube.g_ts_det - rhs).abs() / rhs;
    // det of the 3×3 Gram matrix EᵀE is det(E)²
    let frame_det = det3(tube.frame);
    let gram = (frame_det * frame_det - rhs).abs() / rhs;
    Ok(direct.max(gram))
}
