use thiserror::Error;

use super::grid::{Grid2, Grid3};
use super::sparse::SparseOperator;
use crate::geometry::{point_geometry, tube_metric, GeometryError, PointGeometry, SurfacePatch};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("grid has no unknowns")]
    EmptyGrid,
    #[error("tube half-width {epsilon} exceeds the admissible offset {max_epsilon} at node ({s1}, {s2})")]
    TubeValidity {
        s1: f64,
        s2: f64,
        epsilon: f64,
        max_epsilon: f64,
    },
    #[error("non-positive weight {value} at row {row}")]
    NonPositiveWeight { row: usize, value: f64 },
}

/// Point geometry on every extended node of a surface grid (unknowns plus
/// Dirichlet boundary nodes), stored by [`Grid2::ext_row`].
#[derive(Debug, Clone)]
pub struct GeometryCache<T> {
    pub grid: Grid2<T>,
    pub nodes: Vec<PointGeometry<T>>,
}

impl<T: Real> GeometryCache<T> {
    pub fn build(patch: &SurfacePatch<T>, grid: &Grid2<T>) -> Result<Self, GeometryError> {
        let [a1, a2] = grid.axes;
        let mut nodes = Vec::with_capacity(grid.ext_len());
        for e2 in 0..a2.ext_len() {
            for e1 in 0..a1.ext_len() {
                nodes.push(point_geometry(patch, a1.ext_coord(e1), a2.ext_coord(e2))?);
            }
        }
        Ok(Self { grid: *grid, nodes })
    }

    pub fn ext(&self, e1: usize, e2: usize) -> &PointGeometry<T> {
        &self.nodes[self.grid.ext_row(e1, e2)]
    }

    /// Geometry at unknown `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> &PointGeometry<T> {
        self.ext(self.grid.axes[0].ext(i), self.grid.axes[1].ext(j))
    }

    /// Geometry at surface row `r`.
    pub fn at_row(&self, r: usize) -> &PointGeometry<T> {
        let (i, j) = self.grid.index(r);
        self.at(i, j)
    }

    /// `H² - K` at every unknown, in row order.
    pub fn geo_pot(&self) -> Vec<T> {
        (0..self.grid.len()).map(|r| self.at_row(r).geo_pot).collect()
    }

    pub fn sqrt_det_g(&self) -> Vec<T> {
        (0..self.grid.len()).map(|r| self.at_row(r).sqrt_det_g).collect()
    }

    /// Smallest `1 / max |κ|` over all nodes, boundary nodes included.
    pub fn max_admissible_epsilon(&self) -> T {
        self.nodes.iter().fold(T::infinity(), |m, p| m.min(p.max_admissible_offset()))
    }
}

/// Assembled `-Δ_S - (H² - K)` on a surface grid.
#[derive(Debug, Clone)]
pub struct Hamiltonian2D<T> {
    pub op: SparseOperator<T>,
    pub geometry: GeometryCache<T>,
    pub grid: Grid2<T>,
    pub surface: String,
    /// `H² - K` at the unknowns.
    pub potential: Vec<T>,
}

/// Assembled `-Δ` on the tube `|q| < ε` around a surface.
#[derive(Debug, Clone)]
pub struct Hamiltonian3D<T> {
    pub op: SparseOperator<T>,
    pub geometry: GeometryCache<T>,
    pub grid: Grid3<T>,
    pub surface: String,
    /// Volume weight `f(q)` at every 3D unknown.
    pub f: Vec<T>,
}

/// How the normal part `-(1/f) ∂_q (f ∂_q ·)` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalScheme {
    /// Flux form with coefficient `√g f` at half layers.
    #[default]
    Flux,
    /// `f^{-1/2} (-∂_q² + V) f^{1/2}` with `V = (√f)'' / √f` evaluated
    /// exactly at the layers. Free of the `O(nq⁻²)` transverse bias the flux
    /// form keeps as `ε → 0` at fixed `nq`.
    Liouville,
}

/// Which metric to use inside the tube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TubeMetric {
    /// The induced metric `diag(g_{S_q}, 1)` with weight `f(q)`.
    Induced,
    /// The product metric `diag(g_S, 1)`, `f ≡ 1`.
    Product,
}

/// Flux-form assembly over `layers` copies of a surface grid.
///
/// `coef[k][ext]` holds `(a11, a12, a22)` on extended nodes of layer `k`;
/// `qstencil`, when present, gives the normal part of the stiffness matrix:
/// `diag[k][r]` and the symmetric coupling `below[k][r]` between layers `k`
/// and `k - 1` (unused for `k = 0`).
/// Returns `W⁻¹ K + diag(extra)` where `K` is the symmetric stiffness matrix.
fn assemble_layers<T: Real>(
    grid: &Grid2<T>,
    coef: &[Vec<[T; 3]>],
    weight: Vec<T>,
    qstencil: Option<(&[Vec<T>], &[Vec<T>])>,
    extra: Option<&[T]>,
) -> SparseOperator<T> {
    let [a1, a2] = grid.axes;
    let m = grid.len();
    let layers = coef.len();
    let (ih1, ih2) = ((a1.h * a1.h).recip(), (a2.h * a2.h).recip());
    let cross = (T::lit(4.0) * a1.h * a2.h).recip();
    let half = T::half();
    let mut rows = Vec::with_capacity(m * layers);
    for (k, layer) in coef.iter().enumerate() {
        let at = |e1: usize, e2: usize| layer[grid.ext_row(e1, e2)];
        for r in 0..m {
            let (i, j) = grid.index(r);
            let (e1, e2) = (a1.ext(i), a2.ext(j));
            let here = at(e1, e2);
            let offset = k * m;
            let mut row: Vec<(usize, T)> = Vec::with_capacity(13);
            let mut diag = T::zero();

            let (e1p, i_p) = a1.neighbor(i, 1);
            let (e1m, i_m) = a1.neighbor(i, -1);
            let (e2p, j_p) = a2.neighbor(j, 1);
            let (e2m, j_m) = a2.neighbor(j, -1);

            // direction 1, half-point coefficients by arithmetic averaging
            for (en, un) in [(e1p, i_p), (e1m, i_m)] {
                let c = (here[0] + at(en, e2)[0]) * half * ih1;
                diag = diag + c;
                if let Some(u) = un {
                    row.push((offset + grid.row(u, j), -c));
                }
            }
            for (en, un) in [(e2p, j_p), (e2m, j_m)] {
                let c = (here[2] + at(e1, en)[2]) * half * ih2;
                diag = diag + c;
                if let Some(u) = un {
                    row.push((offset + grid.row(i, u), -c));
                }
            }
            // mixed terms ∂1(a12 ∂2) + ∂2(a12 ∂1), centered
            let a12 = |e1: usize, e2: usize| at(e1, e2)[1];
            let corners = [
                (i_p, j_p, -(a12(e1p, e2) + a12(e1, e2p))),
                (i_m, j_m, -(a12(e1m, e2) + a12(e1, e2m))),
                (i_p, j_m, a12(e1p, e2) + a12(e1, e2m)),
                (i_m, j_p, a12(e1m, e2) + a12(e1, e2p)),
            ];
            for (ui, uj, c) in corners {
                if let (Some(ui), Some(uj)) = (ui, uj) {
                    if c != T::zero() {
                        row.push((offset + grid.row(ui, uj), c * cross));
                    }
                }
            }
            if let Some((qdiag, below)) = qstencil {
                diag = diag + qdiag[k][r];
                if k > 0 {
                    row.push((offset - m + r, below[k][r]));
                }
                if k + 1 < layers {
                    row.push((offset + m + r, below[k + 1][r]));
                }
            }
            row.push((offset + r, diag));
            let w = weight[offset + r];
            for entry in row.iter_mut() {
                entry.1 = entry.1 / w;
            }
            if let Some(extra) = extra {
                row.push((offset + r, extra[offset + r]));
            }
            rows.push(row);
        }
    }
    SparseOperator::from_rows(rows, weight)
}

fn metric_coefficients<T: Real>(sqrt_g: T, g_inv: [[T; 2]; 2]) -> [T; 3] {
    [sqrt_g * g_inv[0][0], sqrt_g * g_inv[0][1], sqrt_g * g_inv[1][1]]
}

/// Assemble `-Δ_S - (H² - K)` with weight `√det g_S`.
pub fn assemble_h2d<T: Real>(patch: &SurfacePatch<T>, grid: &Grid2<T>) -> Result<Hamiltonian2D<T>, AssemblyError> {
    assemble_h2d_with(patch, grid, true)
}

/// As [`assemble_h2d`]; `with_potential = false` gives the bare `-Δ_S`.
pub fn assemble_h2d_with<T: Real>(
    patch: &SurfacePatch<T>,
    grid: &Grid2<T>,
    with_potential: bool,
) -> Result<Hamiltonian2D<T>, AssemblyError> {
    if grid.is_empty() {
        return Err(AssemblyError::EmptyGrid);
    }
    let geometry = GeometryCache::build(patch, grid)?;
    let coef: Vec<[T; 3]> = geometry.nodes.iter().map(|p| metric_coefficients(p.sqrt_det_g, p.g_inv)).collect();
    let weight = geometry.sqrt_det_g();
    let potential = geometry.geo_pot();
    let shift: Vec<T> = potential.iter().map(|&v| -v).collect();
    let op = assemble_layers(grid, &[coef], weight, None, with_potential.then_some(shift.as_slice()));
    Ok(Hamiltonian2D { op, geometry, grid: *grid, surface: patch.name.clone(), potential })
}

/// Assemble the tube Laplacian `-Δ` with Dirichlet walls at `q = ±ε` and
/// weight `√det g_S · f(q)`.
pub fn assemble_h3d<T: Real>(patch: &SurfacePatch<T>, grid: &Grid3<T>) -> Result<Hamiltonian3D<T>, AssemblyError> {
    assemble_h3d_with(patch, grid, TubeMetric::Induced, NormalScheme::Flux)
}

pub fn assemble_h3d_with<T: Real>(
    patch: &SurfacePatch<T>,
    grid: &Grid3<T>,
    metric: TubeMetric,
    scheme: NormalScheme,
) -> Result<Hamiltonian3D<T>, AssemblyError> {
    if grid.is_empty() {
        return Err(AssemblyError::EmptyGrid);
    }
    let base = &grid.base;
    let geometry = GeometryCache::build(patch, base)?;
    if metric == TubeMetric::Induced {
        for p in &geometry.nodes {
            let (lo, hi) = p.admissible_q();
            if !(lo < -grid.epsilon && grid.epsilon < hi) {
                return Err(AssemblyError::TubeValidity {
                    s1: p.s[0].as_f64(),
                    s2: p.s[1].as_f64(),
                    epsilon: grid.epsilon.as_f64(),
                    max_epsilon: (-lo).min(hi).as_f64(),
                });
            }
        }
    }
    let weight_at = |p: &PointGeometry<T>, q: T| match metric {
        TubeMetric::Induced => p.weight(q),
        TubeMetric::Product => T::one(),
    };
    let mut coef = Vec::with_capacity(grid.nq);
    for k in 0..grid.nq {
        let q = grid.q(k);
        let layer = geometry
            .nodes
            .iter()
            .map(|p| match metric {
                TubeMetric::Induced => {
                    let t = tube_metric(p, q)?;
                    Ok(metric_coefficients(p.sqrt_det_g * t.f, t.g_sq_inv))
                }
                TubeMetric::Product => Ok(metric_coefficients(p.sqrt_det_g, p.g_inv)),
            })
            .collect::<Result<Vec<_>, GeometryError>>()?;
        coef.push(layer);
    }
    let m = base.len();
    let ihq = (grid.hq * grid.hq).recip();
    let mut f = Vec::with_capacity(grid.len());
    let mut weight = Vec::with_capacity(grid.len());
    for k in 0..grid.nq {
        let q = grid.q(k);
        for r in 0..m {
            let p = geometry.at_row(r);
            let fk = weight_at(p, q);
            f.push(fk);
            weight.push(p.sqrt_det_g * fk);
        }
    }
    let (qdiag, below): (Vec<Vec<T>>, Vec<Vec<T>>) = match scheme {
        NormalScheme::Flux => {
            let qc: Vec<Vec<T>> = (0..=grid.nq)
                .map(|h| {
                    let q = grid.q_half_above(h as isize - 1);
                    (0..m).map(|r| {
                        let p = geometry.at_row(r);
                        p.sqrt_det_g * weight_at(p, q) * ihq
                    })
                    .collect()
                })
                .collect();
            let diag = (0..grid.nq).map(|k| (0..m).map(|r| qc[k][r] + qc[k + 1][r]).collect()).collect();
            let below = (0..grid.nq).map(|k| qc[k].iter().map(|&c| -c).collect()).collect();
            (diag, below)
        }
        NormalScheme::Liouville => {
            let diag = (0..grid.nq)
                .map(|k| {
                    let q = grid.q(k);
                    (0..m)
                        .map(|r| {
                            let p = geometry.at_row(r);
                            let pot = match metric {
                                TubeMetric::Induced => p.liouville_potential(q),
                                TubeMetric::Product => T::zero(),
                            };
                            weight[k * m + r] * (T::two() * ihq + pot)
                        })
                        .collect()
                })
                .collect();
            let below = (0..grid.nq)
                .map(|k| {
                    (0..m)
                        .map(|r| {
                            if k == 0 {
                                return T::zero();
                            }
                            let p = geometry.at_row(r);
                            -p.sqrt_det_g * (f[k * m + r] * f[(k - 1) * m + r]).sqrt() * ihq
                        })
                        .collect()
                })
                .collect();
            (diag, below)
        }
    };
    let layers: Vec<Vec<[T; 3]>> = coef;
    let op = assemble_layers(base, &layers, weight, Some((&qdiag, &below)), None);
    Ok(Hamiltonian3D { op, geometry, grid: *grid, surface: patch.name.clone(), f })
}

/// Result of [`symmetrize`].
#[derive(Debug, Clone)]
pub struct Symmetrized<T> {
    /// `(S + Sᵀ)/2` with `S = W^{1/2} A W^{-1/2}`, unit weight.
    pub op: SparseOperator<T>,
    /// `max |S - Sᵀ|` before symmetrization.
    pub defect: T,
    /// `W^{1/2}` of the input, for mapping eigenvectors back.
    pub sqrt_weight: Vec<T>,
}

impl<T: Real> Symmetrized<T> {
    /// Map an eigenvector of the symmetric operator back to the weighted problem.
    pub fn unsymmetrize(&self, v: &[T]) -> Vec<T> {
        v.iter().zip(&self.sqrt_weight).map(|(&x, &s)| x / s).collect()
    }
}

/// Similarity-transform a weighted operator to a plain symmetric matrix.
pub fn symmetrize<T: Real>(op: &SparseOperator<T>) -> Result<Symmetrized<T>, AssemblyError> {
    if let Some((row, &value)) = op.weight.iter().enumerate().find(|(_, &w)| !(w > T::zero())) {
        return Err(AssemblyError::NonPositiveWeight { row, value: value.as_f64() });
    }
    let s: Vec<T> = op.weight.iter().map(|w| w.sqrt()).collect();
    let inv: Vec<T> = s.iter().map(|x| x.recip()).collect();
    let scaled = op.scaled(&s, &inv);
    let n = op.dim();
    let mut defect = T::zero();
    let mut rows = vec![Vec::new(); n];
    for i in 0..n {
        for (j, v) in scaled.row(i) {
            let t = scaled.get(j, i);
            defect = defect.max((v - t).abs());
            rows[i].push((j, T::half() * v));
            rows[j].push((i, T::half() * v));
        }
    }
    let op = SparseOperator::from_rows(rows, vec![T::one(); n]);
    Ok(Symmetrized { op, defect, sqrt_weight: s })
}
