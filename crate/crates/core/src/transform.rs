//! Weighted inner products, right-adjoints, the tube-weight conjugation, the
//! normal momentum, the projection onto normal-momentum-free states and the
//! restriction to a surface layer, all as explicit sparse matrices.

use thiserror::Error;

use crate::discretize::{weighted_dot, AssemblyError, Grid3, Hamiltonian3D, SparseOperator};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("weight must be positive, found {value} at index {index}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("normal momentum needs at least 3 layers, got {nq}")]
    TooFewLayers { nq: usize },
    #[error("restriction to q = 0 needs an odd layer count, got {nq}")]
    EvenLayers { nq: usize },
    #[error("layer {layer} out of range for {nq} layers")]
    LayerOutOfRange { layer: usize, nq: usize },
    #[error("conjugated operator has flat-weight symmetry defect {defect:e} above {limit:e}")]
    SymmetryDefect { defect: f64, limit: f64 },
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

/// Which pairing a [`WeightedSpace`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// `w = √det g_S · f(q)`, the volume form of the tube.
    Tube,
    /// `w = √det g_S` on every layer.
    FlatInQ,
    Custom,
}

/// `ℝⁿ` with the pairing `⟨u, v⟩_w = Σ w_i u_i v_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpace<T> {
    pub weight: Vec<T>,
    pub kind: SpaceKind,
}

impl<T: Real> WeightedSpace<T> {
    pub fn new(weight: Vec<T>, kind: SpaceKind) -> Result<Self, TransformError> {
        if let Some((index, &w)) = weight.iter().enumerate().find(|(_, &w)| !(w > T::zero())) {
            return Err(TransformError::NonPositiveWeight { index, value: w.as_f64() });
        }
        Ok(Self { weight, kind })
    }

    pub fn custom(weight: Vec<T>) -> Result<Self, TransformError> {
        Self::new(weight, SpaceKind::Custom)
    }

    pub fn unit(n: usize) -> Self {
        Self { weight: vec![T::one(); n], kind: SpaceKind::Custom }
    }

    /// The tube volume weight of an assembled 3D Hamiltonian.
    pub fn tube(h: &Hamiltonian3D<T>) -> Self {
        Self { weight: h.op.weight.clone(), kind: SpaceKind::Tube }
    }

    /// `√det g_S` replicated over the layers of `h`.
    pub fn flat_in_q(h: &Hamiltonian3D<T>) -> Self {
        Self { weight: h.grid.extend_constant(&h.geometry.sqrt_det_g()), kind: SpaceKind::FlatInQ }
    }

    pub fn dim(&self) -> usize {
        self.weight.len()
    }

    pub fn pairing(&self, u: &[T], v: &[T]) -> T {
        weighted_dot(&self.weight, u, v)
    }

    fn check(&self, n: usize) -> Result<(), TransformError> {
        if n == self.dim() {
            Ok(())
        } else {
            Err(TransformError::DimensionMismatch { expected: self.dim(), found: n })
        }
    }
}

/// Right-adjoint `A* = W⁻¹ Aᵀ W`, the matrix with `⟨A* u, v⟩_w = ⟨u, A v⟩_w`.
/// The result carries the space's weight.
pub fn weighted_adjoint<T: Real>(
    a: &SparseOperator<T>,
    space: &WeightedSpace<T>,
) -> Result<SparseOperator<T>, TransformError> {
    space.check(a.dim())?;
    let inv: Vec<T> = space.weight.iter().map(|w| w.recip()).collect();
    Ok(a.transpose().scaled(&inv, &space.weight).with_weight(space.weight.clone()))
}

/// Diagonal similarity by `f^{1/2}`: states transport as `φ = f^{1/2} ψ` and
/// operators as `L = F^{1/2} A F^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugationMap<T> {
    pub sqrt_f: Vec<T>,
    pub inv_sqrt_f: Vec<T>,
}

impl<T: Real> ConjugationMap<T> {
    pub fn from_f(f: &[T]) -> Result<Self, TransformError> {
        if let Some((index, &v)) = f.iter().enumerate().find(|(_, &v)| !(v > T::zero())) {
            return Err(TransformError::NonPositiveWeight { index, value: v.as_f64() });
        }
        let sqrt_f: Vec<T> = f.iter().map(|v| v.sqrt()).collect();
        let inv_sqrt_f = sqrt_f.iter().map(|v| v.recip()).collect();
        Ok(Self { sqrt_f, inv_sqrt_f })
    }

    pub fn dim(&self) -> usize {
        self.sqrt_f.len()
    }

    pub fn apply(&self, psi: &[T]) -> Vec<T> {
        psi.iter().zip(&self.sqrt_f).map(|(&x, &s)| x * s).collect()
    }

    pub fn inverse(&self, phi: &[T]) -> Vec<T> {
        phi.iter().zip(&self.inv_sqrt_f).map(|(&x, &s)| x * s).collect()
    }

    /// `F^{1/2} A F^{-1/2}`, keeping `a`'s weight.
    pub fn conjugate(&self, a: &SparseOperator<T>) -> Result<SparseOperator<T>, TransformError> {
        if a.dim() != self.dim() {
            return Err(TransformError::DimensionMismatch { expected: self.dim(), found: a.dim() });
        }
        Ok(a.scaled(&self.sqrt_f, &self.inv_sqrt_f))
    }
}

/// Largest flat-weight symmetry defect accepted by [`selfadjointize`].
pub const SELFADJOINT_LIMIT: f64 = 1e-10;

/// `L = F^{1/2} A F^{-1/2}` for the tube Hamiltonian, carrying the flat-in-q
/// weight, in which it is self-adjoint. Fails if the check does not hold.
pub fn selfadjointize<T: Real>(h: &Hamiltonian3D<T>) -> Result<SparseOperator<T>, TransformError> {
    let map = ConjugationMap::from_f(&h.f)?;
    let flat = WeightedSpace::flat_in_q(h);
    let l = map.conjugate(&h.op)?.with_weight(flat.weight);
    let defect = l.weighted_symmetry_defect(&l.weight).as_f64();
    if defect > SELFADJOINT_LIMIT {
        return Err(TransformError::SymmetryDefect { defect, limit: SELFADJOINT_LIMIT });
    }
    Ok(l)
}

/// Centered `∂_q` on the tube grid with zero Dirichlet walls. Unit weight.
pub fn normal_momentum<T: Real>(grid: &Grid3<T>) -> Result<SparseOperator<T>, TransformError> {
    if grid.nq < 3 {
        return Err(TransformError::TooFewLayers { nq: grid.nq });
    }
    let m = grid.base.len();
    let c = (T::two() * grid.hq).recip();
    let rows = (0..grid.len())
        .map(|row| {
            let k = row / m;
            let mut r = Vec::with_capacity(2);
            if k > 0 {
                r.push((row - m, -c));
            }
            if k + 1 < grid.nq {
                r.push((row + m, c));
            }
            r
        })
        .collect();
    Ok(SparseOperator::from_rows(rows, vec![T::one(); grid.len()]))
}

/// Multiplication by `q`.
pub fn position_q<T: Real>(grid: &Grid3<T>) -> SparseOperator<T> {
    let m = grid.base.len();
    let d = (0..grid.len()).map(|row| grid.q(row / m)).collect();
    SparseOperator::diagonal(d, vec![T::one(); grid.len()])
}

/// `max |([D_q, Q] - I) u|` over rows off the walls, for `u` the constant
/// and the linear function `q` on every surface node.
///
/// The centered commutator is the two-point average `(u_{k+1} + u_{k-1}) / 2`,
/// which is the identity on functions affine in `q`.
pub fn commutator_defect<T: Real>(grid: &Grid3<T>) -> Result<T, TransformError> {
    let d = normal_momentum(grid)?;
    let q = position_q(grid);
    let comm = d.mul(&q).add(&q.mul(&d), -T::one());
    let m = grid.base.len();
    let tests = [vec![T::one(); grid.len()], (0..grid.len()).map(|r| grid.q(r / m) + T::lit(0.3)).collect()];
    let mut worst = T::zero();
    for u in &tests {
        let cu = comm.matvec(u);
        for row in m..grid.len() - m {
            worst = worst.max((cu[row] - u[row]).abs());
        }
    }
    Ok(worst)
}

/// Average over the layers, replicated back onto every layer. Carries the
/// space's weight.
pub fn kernel_projection<T: Real>(
    grid: &Grid3<T>,
    space: &WeightedSpace<T>,
) -> Result<SparseOperator<T>, TransformError> {
    space.check(grid.len())?;
    let m = grid.base.len();
    let c = T::from_count(grid.nq).recip();
    let rows = (0..grid.len())
        .map(|row| {
            let r = row % m;
            (0..grid.nq).map(|l| (l * m + r, c)).collect()
        })
        .collect();
    Ok(SparseOperator::from_rows(rows, space.weight.clone()))
}

/// Relative defect of `Π` from its own `w`-adjoint.
pub fn projection_adjoint_defect<T: Real>(pi: &SparseOperator<T>, space: &WeightedSpace<T>) -> Result<T, TransformError> {
    space.check(pi.dim())?;
    Ok(pi.weighted_symmetry_defect(&space.weight))
}

fn layer_check<T: Real>(grid: &Grid3<T>, l: &SparseOperator<T>, layer: usize) -> Result<(), TransformError> {
    if l.dim() != grid.len() {
        return Err(TransformError::DimensionMismatch { expected: grid.len(), found: l.dim() });
    }
    if layer >= grid.nq {
        return Err(TransformError::LayerOutOfRange { layer, nq: grid.nq });
    }
    Ok(())
}

/// Embed `test` as a `q`-constant state, apply `l` and read layer `layer`.
pub fn restrict_to_layer<T: Real>(
    l: &SparseOperator<T>,
    grid: &Grid3<T>,
    test: &[T],
    layer: usize,
) -> Result<Vec<T>, TransformError> {
    layer_check(grid, l, layer)?;
    if test.len() != grid.base.len() {
        return Err(TransformError::DimensionMismatch { expected: grid.base.len(), found: test.len() });
    }
    let y = l.matvec(&grid.extend_constant(test));
    Ok(grid.layer(&y, layer).to_vec())
}

/// [`restrict_to_layer`] at the layer `q = 0`.
pub fn restrict_to_surface<T: Real>(
    l: &SparseOperator<T>,
    grid: &Grid3<T>,
    test: &[T],
) -> Result<Vec<T>, TransformError> {
    let c = grid.center_layer().ok_or(TransformError::EvenLayers { nq: grid.nq })?;
    restrict_to_layer(l, grid, test, c)
}

/// The surface matrix `u ↦ restrict_to_layer(l, u, layer)`, weighted by the
/// slice of `l`'s weight on that layer.
pub fn restricted_operator<T: Real>(
    l: &SparseOperator<T>,
    grid: &Grid3<T>,
    layer: usize,
) -> Result<SparseOperator<T>, TransformError> {
    layer_check(grid, l, layer)?;
    let m = grid.base.len();
    let rows = (0..m).map(|r| l.row(layer * m + r).map(|(j, v)| (j % m, v)).collect()).collect();
    Ok(SparseOperator::from_rows(rows, grid.layer(&l.weight, layer).to_vec()))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::catalog::builtin;
    use crate::discretize::{assemble_h2d, assemble_h3d, grid_for};
    use crate::scalar::max_abs;

    fn tube(name: &str, n: [usize; 2], nq: usize, eps: f64) -> Hamiltonian3D<f64> {
        let p = builtin(name, &BTreeMap::new()).unwrap().patch;
        assemble_h3d(&p, &Grid3::new(grid_for(&p, n), nq, eps)).unwrap()
    }

    #[test]
    fn adjoint_examples() {
        let sym = SparseOperator::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]], vec![1.0; 2]);
        assert_eq!(weighted_adjoint(&sym, &WeightedSpace::unit(2)).unwrap().to_dense(), sym.to_dense());

        let a = SparseOperator::from_dense(&[vec![0.0, 1.0], vec![0.0, 0.0]], vec![1.0; 2]);
        let space = WeightedSpace::custom(vec![1.0, 2.0]).unwrap();
        let star = weighted_adjoint(&a, &space).unwrap();
        assert_eq!(star.to_dense(), vec![vec![0.0, 0.0], vec![0.5, 0.0]]);
        let basis = [vec![1.0, 0.0], vec![0.0, 1.0]];
        for u in &basis {
            for v in &basis {
                assert_eq!(space.pairing(&star.matvec(u), v), space.pairing(u, &a.matvec(v)));
            }
        }
        assert!(matches!(
            weighted_adjoint(&a, &WeightedSpace::unit(3)),
            Err(TransformError::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(WeightedSpace::custom(vec![1.0, -1.0]).is_err());
    }

    #[test]
    fn conjugation_round_trip() {
        let map = ConjugationMap::from_f(&[0.5f64, 1.0, 2.25]).unwrap();
        let u = [1.0, -2.0, 3.0];
        let back = map.inverse(&map.apply(&u));
        for (a, b) in back.iter().zip(&u) {
            assert!((a - b).abs() <= 1e-14);
        }
        assert!(ConjugationMap::from_f(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn flat_plane_is_untouched() {
        let h = tube("plane", [6, 5], 5, 0.2);
        let l = selfadjointize(&h).unwrap();
        assert_eq!(l.values(), h.op.values());
    }

    #[test]
    fn cylinder_defect_gap() {
        let h = tube("cylinder", [16, 8], 9, 0.2);
        let flat = WeightedSpace::flat_in_q(&h);
        assert!(h.op.weighted_symmetry_defect(&flat.weight) >= 1e-3);
        let l = selfadjointize(&h).unwrap();
        assert!(l.weighted_symmetry_defect(&flat.weight) <= 1e-10);
    }

    #[test]
    fn momentum_antisymmetry_and_commutator() {
        let h = tube("cylinder", [8, 4], 7, 0.2);
        let d = normal_momentum(&h.grid).unwrap();
        assert_eq!(d.weighted_antisymmetry_defect(&WeightedSpace::flat_in_q(&h).weight), 0.0);
        assert!(d.weighted_antisymmetry_defect(&WeightedSpace::tube(&h).weight) >= 1e-3);
        assert!(commutator_defect(&h.grid).unwrap() <= 1e-12);
        assert!(matches!(
            normal_momentum(&Grid3::new(h.grid.base, 2, 0.1)),
            Err(TransformError::TooFewLayers { nq: 2 })
        ));
    }

    #[test]
    fn projection_properties() {
        let h = tube("torus", [8, 6], 5, 0.1);
        let flat = WeightedSpace::flat_in_q(&h);
        let pi = kernel_projection(&h.grid, &flat).unwrap();
        let u: Vec<f64> = (0..h.grid.len()).map(|i| ((i * 7919) % 113) as f64 / 113.0 - 0.5).collect();
        let pu = pi.matvec(&u);
        let ppu = pi.matvec(&pu);
        assert!(pu.iter().zip(&ppu).all(|(a, b)| (a - b).abs() <= 1e-14));
        let c = h.grid.extend_constant(&vec![0.25; h.grid.base.len()]);
        assert_eq!(pi.matvec(&c), c);
        assert!(projection_adjoint_defect(&pi, &flat).unwrap() <= 1e-12);
        assert!(projection_adjoint_defect(&pi, &WeightedSpace::tube(&h)).unwrap() > 0.0);
    }

    #[test]
    fn restriction_on_plane_is_the_flat_laplacian() {
        let p = builtin("plane", &BTreeMap::new()).unwrap().patch;
        let g = grid_for(&p, [7, 6]);
        let h3 = assemble_h3d(&p, &Grid3::new(g, 5, 0.3)).unwrap();
        let h2 = assemble_h2d(&p, &g).unwrap();
        let l = selfadjointize(&h3).unwrap();
        let test = g.sample(|a: f64, b: f64| a.sin() * (2.0 * b).sin());
        let got = restrict_to_surface(&l, &h3.grid, &test).unwrap();
        let want = h2.op.matvec(&test);
        let diff: Vec<f64> = got.iter().zip(&want).map(|(a, b)| a - b).collect();
        assert!(max_abs(&diff) <= 1e-12 * max_abs(&want));

        let r = restricted_operator(&l, &h3.grid, 2).unwrap();
        let via = r.matvec(&test);
        assert!(via.iter().zip(&got).all(|(a, b)| (a - b).abs() <= 1e-12));
        assert!(matches!(
            restrict_to_surface(&l, &Grid3::new(g, 4, 0.3), &test),
            Err(TransformError::DimensionMismatch { .. }) | Err(TransformError::EvenLayers { .. })
        ));
    }
}
