//! Grids and flux-form finite-difference operators.
//!
//! The surface operator is `-(1/√g) ∂_α(√g g^{αβ} ∂_β ·) - (H² - K)` and the
//! tube operator is the Laplacian in `(s1, s2, q)` with metric
//! `diag(g_{S_q}, 1)`. Both are assembled as `W⁻¹ K` where `K` is symmetric
//! and `W` is the diagonal volume weight, so the operator is self-adjoint in
//! `⟨,⟩_W`. Half-point coefficients are arithmetic means of nodal values;
//! the normal flux uses the exact weight at half layers. Dirichlet directions
//! keep only interior unknowns, periodic ones wrap.

mod assembly;
mod grid;
mod mm;
mod sparse;

pub use assembly::{
    assemble_h2d, assemble_h2d_with, assemble_h3d, assemble_h3d_with, symmetrize, AssemblyError, GeometryCache,
    Hamiltonian2D, Hamiltonian3D, NormalScheme, Symmetrized, TubeMetric,
};
pub use grid::{Axis, Grid2, Grid3};
pub use mm::{read_matrix_market, write_matrix_market, MM_HEADER};
pub use sparse::{dot, norm, weighted_dot, SparseOperator};

use crate::geometry::SurfacePatch;
use crate::scalar::Real;

/// Grid with `n` unknowns per direction matching the patch's domain and boundaries.
pub fn grid_for<T: Real>(patch: &SurfacePatch<T>, n: [usize; 2]) -> Grid2<T> {
    Grid2::new(n, patch.lengths, patch.boundary)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::catalog::builtin;

    fn patch(name: &str) -> SurfacePatch<f64> {
        builtin(name, &BTreeMap::new()).unwrap().patch
    }

    #[test]
    fn periodic_constants_see_only_the_potential() {
        let p = patch("torus");
        let h = assemble_h2d(&p, &grid_for(&p, [16, 12])).unwrap();
        let ones = vec![1.0; h.grid.len()];
        let y = h.op.matvec(&ones);
        for (yi, vi) in y.iter().zip(&h.potential) {
            assert!((yi + vi).abs() <= 1e-12 * (1.0 + h.op.max_abs()));
        }
    }

    #[test]
    fn flat_plane_matches_five_point_stencil() {
        let p = patch("plane");
        let g = grid_for(&p, [5, 4]);
        let h = assemble_h2d(&p, &g).unwrap();
        let (h1, h2) = (g.axes[0].h, g.axes[1].h);
        let r = g.row(2, 1);
        assert!((h.op.get(r, r) - (2.0 / (h1 * h1) + 2.0 / (h2 * h2))).abs() < 1e-12);
        assert!((h.op.get(r, g.row(3, 1)) + 1.0 / (h1 * h1)).abs() < 1e-12);
        assert!((h.op.get(r, g.row(2, 2)) + 1.0 / (h2 * h2)).abs() < 1e-12);
        assert_eq!(h.op.get(r, g.row(3, 2)), 0.0);
        assert!(h.op.pattern_symmetric());
    }

    #[test]
    fn weighted_symmetry_of_assembled_operators() {
        for name in ["torus", "cylinder", "catenoid", "corrugated"] {
            let p = patch(name);
            let h = assemble_h2d(&p, &grid_for(&p, [12, 10])).unwrap();
            assert!(h.op.pattern_symmetric(), "{name}");
            assert!(h.op.weighted_symmetry_defect(&h.op.weight) <= 1e-12, "{name}");
        }
    }

    #[test]
    fn symmetrize_examples() {
        let p = patch("plane");
        let h = assemble_h2d(&p, &grid_for(&p, [6, 6])).unwrap();
        assert_eq!(symmetrize(&h.op).unwrap().defect, 0.0);

        let t = patch("torus");
        let h = assemble_h2d(&t, &grid_for(&t, [32, 32])).unwrap();
        assert!(symmetrize(&h.op).unwrap().defect <= 1e-13);

        let skew = SparseOperator::from_dense(&[vec![0.0, 1.0], vec![0.0, 0.0]], vec![1.0, 1.0]);
        let s = symmetrize(&skew).unwrap();
        assert_eq!(s.defect, 1.0);
        assert_eq!(s.op.to_dense(), vec![vec![0.0, 0.5], vec![0.5, 0.0]]);

        let bad = skew.with_weight(vec![1.0, 0.0]);
        assert!(matches!(symmetrize(&bad), Err(AssemblyError::NonPositiveWeight { row: 1, .. })));
    }

    #[test]
    fn flat_tube_is_box_laplacian() {
        let p = patch("plane");
        let g3 = Grid3::new(grid_for(&p, [4, 4]), 3, 0.5);
        let h = assemble_h3d(&p, &g3).unwrap();
        assert!(h.f.iter().all(|&f| f == 1.0));
        let r = g3.row(1, 1, 1);
        let (h1, hq) = (g3.base.axes[0].h, g3.hq);
        assert!((h.op.get(r, r) - (4.0 / (h1 * h1) + 2.0 / (hq * hq))).abs() < 1e-10);
        assert!((h.op.get(r, g3.row(1, 1, 2)) + 1.0 / (hq * hq)).abs() < 1e-12);
    }

    #[test]
    fn q_constants_are_annihilated_away_from_the_walls() {
        // interior q-rows of the q-flux act on q-constants only through f, and
        // on the flat tube they vanish; only the wall layers see the constant
        let p = patch("plane");
        let g3 = Grid3::new(grid_for(&p, [1, 1]), 5, 0.5);
        let h = assemble_h3d(&p, &g3).unwrap();
        let y = h.op.matvec(&vec![1.0; g3.len()]);
        // one Dirichlet unknown per surface direction contributes 2/h² each
        let tangential = 2.0 / g3.base.axes[0].h.powi(2) + 2.0 / g3.base.axes[1].h.powi(2);
        for k in 1..4 {
            assert!((y[k] - tangential).abs() < 1e-10);
        }
        assert!((y[0] - tangential - 1.0 / g3.hq.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn tube_validity_is_checked() {
        let p = patch("cylinder");
        let g3 = Grid3::new(grid_for(&p, [8, 4]), 3, 1.5);
        match assemble_h3d(&p, &g3) {
            Err(AssemblyError::TubeValidity { max_epsilon, .. }) => assert!((max_epsilon - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn product_tube_centre_layer_carries_the_surface_laplacian() {
        let p = patch("torus");
        let base = grid_for(&p, [10, 8]);
        let g3 = Grid3::new(base, 5, 0.1);
        let h3 = assemble_h3d_with(&p, &g3, TubeMetric::Product, NormalScheme::Flux).unwrap();
        let h2 = assemble_h2d_with(&p, &base, false).unwrap();
        let c = g3.center_layer().unwrap();
        for r in 0..base.len() {
            let row3 = c * base.len() + r;
            for (j, v) in h2.op.row(r) {
                let got = h3.op.get(row3, c * base.len() + j);
                let expect = if j == r { v + 2.0 / (g3.hq * g3.hq) } else { v };
                assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1.0));
            }
        }
    }

    #[test]
    fn liouville_scheme_is_self_adjoint_and_flat_on_the_plane() {
        let p = patch("plane");
        let g3 = Grid3::new(grid_for(&p, [4, 3]), 5, 0.3);
        let flux = assemble_h3d(&p, &g3).unwrap();
        let liou = assemble_h3d_with(&p, &g3, TubeMetric::Induced, NormalScheme::Liouville).unwrap();
        for (a, b) in flux.op.to_dense().iter().flatten().zip(liou.op.to_dense().iter().flatten()) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        let t = patch("torus");
        let h = assemble_h3d_with(&t, &Grid3::new(grid_for(&t, [12, 10]), 7, 0.2), TubeMetric::Induced, NormalScheme::Liouville)
            .unwrap();
        assert!(h.op.pattern_symmetric());
        assert!(h.op.weighted_symmetry_defect(&h.op.weight) <= 1e-12);
    }

    #[test]
    fn liouville_potential_at_the_surface() {
        let t = patch("torus");
        let pg = crate::geometry::point_geometry(&t, 0.3, 1.1).unwrap();
        assert!((pg.liouville_potential(0.0) + pg.geo_pot).abs() <= 1e-14);
    }
}
