//! Effective Schrödinger operators for a particle confined to a surface in E³.
//!
//! The crate builds the operator `-Δ_S - (H² - K)` on a parametric surface in
//! two ways: directly, and by conjugating the Laplacian of a thin Dirichlet
//! tube around the surface by the square root of its volume weight, keeping
//! only normal-momentum-free states and reading off the `q = 0` layer. The
//! modules expose each step of the second route as explicit matrix
//! operations so the two can be compared numerically.
//!
//! All numerics are generic over [`Real`]; the aliases at the crate root fix
//! the scalar to `f64`.

pub mod catalog;
pub mod discretize;
pub mod dsl;
pub mod eigen;
pub mod geometry;
pub mod jet;
pub mod scalar;
pub mod small;
pub mod transform;

pub use scalar::Real;

pub type Jet = jet::Jet2<f64>;
pub type Patch = geometry::SurfacePatch<f64>;
pub type Point = geometry::PointGeometry<f64>;
pub type Tube = geometry::TubeGeometry<f64>;
pub type Operator = discretize::SparseOperator<f64>;
pub type Hamiltonian2 = discretize::Hamiltonian2D<f64>;
pub type Hamiltonian3 = discretize::Hamiltonian3D<f64>;
pub type Space = transform::WeightedSpace<f64>;
pub type Spectrum = eigen::Spectrum<f64>;
pub type Entry = catalog::CatalogEntry<f64>;
