//! Built-in surfaces with closed-form geometry.
//!
//! Each preset carries the embedding (written in jet arithmetic), its default
//! parameters, and closed-form `g_S`, `H`, `K` that the tests compare against
//! the jet-computed geometry. `H` here is signed with the crate's normal
//! convention (`e3 = e1 × e2 / |e1 × e2|`).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{Boundary, SurfacePatch};
use crate::jet::Jet2;
use crate::scalar::Real;
use crate::small::Mat2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown surface preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{preset}` has no parameter `{param}`")]
    UnknownParam { preset: String, param: String },
    #[error("invalid parameters for `{preset}`: {reason}")]
    InvalidParams { preset: String, reason: String },
    #[error("no spectral oracle for `{0}`")]
    NoOracle(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Plane,
    Cylinder,
    Torus,
    Sphere,
    Catenoid,
    Corrugated,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Plane,
        Preset::Cylinder,
        Preset::Torus,
        Preset::Sphere,
        Preset::Catenoid,
        Preset::Corrugated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Plane => "plane",
            Preset::Cylinder => "cylinder",
            Preset::Torus => "torus",
            Preset::Sphere => "sphere",
            Preset::Catenoid => "catenoid",
            Preset::Corrugated => "corrugated",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Parameter schema: `(name, default, meaning)`.
    pub fn schema(self) -> &'static [(&'static str, f64, &'static str)] {
        use std::f64::consts::PI;
        match self {
            Preset::Plane => &[("L1", PI, "side length along s1"), ("L2", PI, "side length along s2")],
            Preset::Cylinder => &[("R", 1.0, "radius"), ("L", PI, "axial length (s2)")],
            Preset::Torus => &[("R", 2.0, "distance from axis to tube centre"), ("r", 1.0, "tube radius, 0 < r < R")],
            Preset::Sphere => &[
                ("R", 1.0, "radius"),
                ("band", 0.0, "polar margin excluded at each pole, 0 <= band < pi/2"),
            ],
            Preset::Catenoid => &[("c", 1.0, "neck radius"), ("T", 1.0, "half height in the axial parameter")],
            Preset::Corrugated => &[
                ("a", 0.2, "amplitude"),
                ("k", 2.0, "wave number along s1"),
                ("L1", PI, "side length along s1"),
                ("L2", PI, "side length along s2"),
            ],
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Preset::Plane => "flat rectangle, Dirichlet x Dirichlet",
            Preset::Cylinder => "circular cylinder, s1 = angle (periodic) x s2 = axis (Dirichlet)",
            Preset::Torus => "torus of revolution, periodic x periodic",
            Preset::Sphere => "sphere in polar coordinates, s1 = polar angle (Dirichlet) x s2 = azimuth (periodic); geometry only",
            Preset::Catenoid => "catenoid, s1 = axial (Dirichlet) x s2 = angle (periodic); minimal surface",
            Preset::Corrugated => "graph z = a sin(k s1), Dirichlet x Dirichlet",
        }
    }

    /// Whether spectral runs are allowed on this preset.
    pub fn spectral(self) -> bool {
        !matches!(self, Preset::Sphere)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed-form geometry at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm<T> {
    pub g: Mat2<T>,
    pub mean_curvature: T,
    pub gauss_curvature: T,
}

type Oracle<T> = Arc<dyn Fn(T, T) -> ClosedForm<T> + Send + Sync>;

#[derive(Clone)]
pub struct CatalogEntry<T: Real> {
    pub preset: Preset,
    pub params: BTreeMap<String, T>,
    pub patch: SurfacePatch<T>,
    oracle: Oracle<T>,
}

impl<T: Real> fmt::Debug for CatalogEntry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("preset", &self.preset)
            .field("params", &self.params)
            .field("patch", &self.patch)
            .finish_non_exhaustive()
    }
}

impl<T: Real> CatalogEntry<T> {
    pub fn name(&self) -> &'static str {
        self.preset.name()
    }

    pub fn oracle(&self, s1: T, s2: T) -> ClosedForm<T> {
        (self.oracle)(s1, s2)
    }

    pub fn param(&self, name: &str) -> T {
        self.params[name]
    }
}

/// Look up a preset and bind its parameters; missing ones take defaults.
pub fn builtin<T: Real>(name: &str, params: &BTreeMap<String, T>) -> Result<CatalogEntry<T>, CatalogError> {
    let preset = Preset::from_name(name).ok_or_else(|| CatalogError::UnknownPreset(name.to_string()))?;
    let schema = preset.schema();
    for key in params.keys() {
        if !schema.iter().any(|(n, _, _)| n == key) {
            return Err(CatalogError::UnknownParam { preset: name.to_string(), param: key.clone() });
        }
    }
    let bound: BTreeMap<String, T> = schema
        .iter()
        .map(|(n, d, _)| (n.to_string(), params.get(*n).copied().unwrap_or_else(|| T::lit(*d))))
        .collect();
    let invalid = |reason: &str| CatalogError::InvalidParams { preset: name.to_string(), reason: reason.to_string() };
    let p = |k: &str| bound[k];
    let zero = T::zero();
    let two_pi = T::two() * T::PI();
    let (patch, oracle): (SurfacePatch<T>, Oracle<T>) = match preset {
        Preset::Plane => {
            let (l1, l2) = (p("L1"), p("L2"));
            if !(l1 > zero && l2 > zero) {
                return Err(invalid("side lengths must be positive"));
            }
            let patch = SurfacePatch::from_fn(
                name,
                |u: Jet2<T>, v: Jet2<T>| [u, v, Jet2::zero()],
                [l1, l2],
                [Boundary::Dirichlet; 2],
            );
            let oracle = Arc::new(|_: T, _: T| ClosedForm {
                g: [[T::one(), T::zero()], [T::zero(), T::one()]],
                mean_curvature: T::zero(),
                gauss_curvature: T::zero(),
            });
            (patch, oracle)
        }
        Preset::Cylinder => {
            let (r, l) = (p("R"), p("L"));
            if !(r > zero && l > zero) {
                return Err(invalid("R and L must be positive"));
            }
            let patch = SurfacePatch::from_fn(
                name,
                move |u: Jet2<T>, v: Jet2<T>| [u.cos().scale(r), u.sin().scale(r), v],
                [two_pi, l],
                [Boundary::Periodic, Boundary::Dirichlet],
            );
            let oracle = Arc::new(move |_: T, _: T| ClosedForm {
                g: [[r * r, T::zero()], [T::zero(), T::one()]],
                mean_curvature: -(T::two() * r).recip(),
                gauss_curvature: T::zero(),
            });
            (patch, oracle)
        }
        Preset::Torus => {
            let (big, small) = (p("R"), p("r"));
            if !(small > zero && small < big) {
                return Err(invalid("need 0 < r < R"));
            }
            let patch = SurfacePatch::from_fn(
                name,
                move |u: Jet2<T>, v: Jet2<T>| {
                    let rho = v.cos().scale(small) + big;
                    [rho * u.cos(), rho * u.sin(), v.sin().scale(small)]
                },
                [two_pi, two_pi],
                [Boundary::Periodic, Boundary::Periodic],
            );
            let oracle = Arc::new(move |_: T, v: T| {
                let rho = big + small * v.cos();
                ClosedForm {
                    g: [[rho * rho, T::zero()], [T::zero(), small * small]],
                    mean_curvature: -(big + T::two() * small * v.cos()) / (T::two() * small * rho),
                    gauss_curvature: v.cos() / (small * rho),
                }
            });
            (patch, oracle)
        }
        Preset::Sphere => {
            let (r, band) = (p("R"), p("band"));
            if !(r > zero) || band < zero || band >= T::FRAC_PI_2() {
                return Err(invalid("need R > 0 and 0 <= band < pi/2"));
            }
            let patch = SurfacePatch::from_fn(
                name,
                move |u: Jet2<T>, v: Jet2<T>| {
                    let theta = u + band;
                    let st = theta.sin();
                    [(st * v.cos()).scale(r), (st * v.sin()).scale(r), theta.cos().scale(r)]
                },
                [T::PI() - T::two() * band, two_pi],
                [Boundary::Dirichlet, Boundary::Periodic],
            );
            let oracle = Arc::new(move |u: T, _: T| {
                let st = (u + band).sin();
                ClosedForm {
                    g: [[r * r, T::zero()], [T::zero(), r * r * st * st]],
                    mean_curvature: -r.recip(),
                    gauss_curvature: (r * r).recip(),
                }
            });
            (patch, oracle)
        }
        Preset::Catenoid => {
            let (c, half) = (p("c"), p("T"));
            if !(c > zero && half > zero) {
                return Err(invalid("c and T must be positive"));
            }
            let patch = SurfacePatch::from_fn(
                name,
                move |u: Jet2<T>, v: Jet2<T>| {
                    let t = u + (-half);
                    let ch = t.cosh();
                    [(ch * v.cos()).scale(c), (ch * v.sin()).scale(c), t.scale(c)]
                },
                [T::two() * half, two_pi],
                [Boundary::Dirichlet, Boundary::Periodic],
            );
            let oracle = Arc::new(move |u: T, _: T| {
                let ch = (u - half).cosh();
                let gg = c * c * ch * ch;
                ClosedForm {
                    g: [[gg, T::zero()], [T::zero(), gg]],
                    mean_curvature: T::zero(),
                    gauss_curvature: -(gg * gg).recip() * c * c,
                }
            });
            (patch, oracle)
        }
        Preset::Corrugated => {
            let (a, k, l1, l2) = (p("a"), p("k"), p("L1"), p("L2"));
            if !(l1 > zero && l2 > zero) {
                return Err(invalid("side lengths must be positive"));
            }
            let patch = SurfacePatch::from_fn(
                name,
                move |u: Jet2<T>, v: Jet2<T>| [u, v, u.scale(k).sin().scale(a)],
                [l1, l2],
                [Boundary::Dirichlet; 2],
            );
            let oracle = Arc::new(move |u: T, _: T| {
                let h1 = a * k * (k * u).cos();
                let h2 = -a * k * k * (k * u).sin();
                let w = T::one() + h1 * h1;
                ClosedForm {
                    g: [[w, T::zero()], [T::zero(), T::one()]],
                    mean_curvature: h2 / (T::two() * w * w.sqrt()),
                    gauss_curvature: T::zero(),
                }
            });
            (patch, oracle)
        }
    };
    Ok(CatalogEntry { preset, params: bound, patch, oracle })
}

/// Closed-form eigenvalues of `-Δ_S - (H² - K)` in the continuum, ascending,
/// with multiplicity. Available for the plane and the cylinder.
pub fn spectral_oracle<T: Real>(entry: &CatalogEntry<T>, count: usize) -> Result<Vec<T>, CatalogError> {
    let pi = T::PI();
    let mut out = Vec::new();
    match entry.preset {
        Preset::Plane => {
            let (l1, l2) = (entry.param("L1"), entry.param("L2"));
            for m in 1..=count {
                for n in 1..=count {
                    let a = T::from_count(m) * pi / l1;
                    let b = T::from_count(n) * pi / l2;
                    out.push(a * a + b * b);
                }
            }
        }
        Preset::Cylinder => {
            let (r, l) = (entry.param("R"), entry.param("L"));
            let shift = (T::lit(4.0) * r * r).recip();
            for m in -(count as i64)..=(count as i64) {
                for n in 1..=count {
                    let mm = T::lit(m as f64) / r;
                    let b = T::from_count(n) * pi / l;
                    out.push(mm * mm + b * b - shift);
                }
            }
        }
        _ => return Err(CatalogError::NoOracle(entry.name().to_string())),
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.truncate(count);
    Ok(out)
}

/// Eigenvalues of the finite-difference operator itself on an `n1 × n2` grid,
/// ascending, with multiplicity. Available for the plane and the cylinder,
/// whose discretizations are exactly separable.
pub fn discrete_spectral_oracle<T: Real>(
    entry: &CatalogEntry<T>,
    n1: usize,
    n2: usize,
    count: usize,
) -> Result<Vec<T>, CatalogError> {
    let four = T::lit(4.0);
    let dirichlet = |n: usize, l: T| -> Vec<T> {
        let h = l / T::from_count(n + 1);
        (1..=n)
            .map(|k| {
                let s = (T::from_count(k) * T::PI() * h / (T::two() * l)).sin();
                four / (h * h) * s * s
            })
            .collect()
    };
    let (a, b): (Vec<T>, Vec<T>) = match entry.preset {
        Preset::Plane => (dirichlet(n1, entry.param("L1")), dirichlet(n2, entry.param("L2"))),
        Preset::Cylinder => {
            let r = entry.param("R");
            let h = T::two() * T::PI() / T::from_count(n1);
            let shift = (four * r * r).recip();
            let periodic = (0..n1)
                .map(|m| {
                    let s = (T::from_count(m) * h / T::two()).sin();
                    four / (r * r * h * h) * s * s - shift
                })
                .collect();
            (periodic, dirichlet(n2, entry.param("L")))
        }
        _ => return Err(CatalogError::NoOracle(entry.name().to_string())),
    };
    let mut out: Vec<T> = a.iter().flat_map(|&x| b.iter().map(move |&y| x + y)).collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.truncate(count);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(name: &str, params: &[(&str, f64)]) -> CatalogEntry<f64> {
        let map = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        builtin(name, &map).unwrap()
    }

    #[test]
    fn torus_inner_equator() {
        // v = π: R + 2r cos v = 0 so H = 0, K = -1/(r(R - r)) = -1, H² - K = R²/(4r²(R - r)²) = 1
        let e = entry("torus", &[]);
        let pg = e.patch.point(0.3, std::f64::consts::PI).unwrap();
        assert!(pg.mean_curvature.abs() <= 1e-12);
        assert!((pg.gauss_curvature + 1.0).abs() <= 1e-12);
        assert!((pg.geo_pot - 1.0).abs() <= 1e-12);
        let cf = e.oracle(0.3, std::f64::consts::PI);
        assert!((cf.gauss_curvature + 1.0).abs() <= 1e-15);
    }

    #[test]
    fn sphere_radius_two_is_umbilic() {
        let e = entry("sphere", &[("R", 2.0)]);
        for i in 1..12 {
            for j in 0..12 {
                let pg = e.patch.point(i as f64 * 0.26, j as f64 * 0.5).unwrap();
                assert!(pg.geo_pot.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn catenoid_is_minimal() {
        let e = entry("catenoid", &[]);
        for i in 0..12 {
            for j in 0..12 {
                let pg = e.patch.point(i as f64 * 2.0 / 11.0, j as f64 * 0.5).unwrap();
                assert!(pg.mean_curvature.abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn parameter_errors() {
        let none = BTreeMap::new();
        assert_eq!(
            builtin::<f64>("klein", &none).unwrap_err(),
            CatalogError::UnknownPreset("klein".into())
        );
        let bad: BTreeMap<String, f64> = [("r".to_string(), 3.0)].into();
        assert!(matches!(builtin("torus", &bad), Err(CatalogError::InvalidParams { .. })));
        let extra: BTreeMap<String, f64> = [("q".to_string(), 3.0)].into();
        assert!(matches!(builtin("plane", &extra), Err(CatalogError::UnknownParam { .. })));
    }

    #[test]
    fn continuum_oracles() {
        let plane = entry("plane", &[]);
        assert!((spectral_oracle(&plane, 1).unwrap()[0] - 2.0).abs() < 1e-14);
        let cyl = entry("cylinder", &[]);
        let ev = spectral_oracle(&cyl, 3).unwrap();
        assert!((ev[0] - 0.75).abs() < 1e-14);
        assert!((ev[1] - 1.75).abs() < 1e-14 && (ev[2] - 1.75).abs() < 1e-14);
        assert!(spectral_oracle(&entry("torus", &[]), 1).is_err());
    }

    #[test]
    fn discrete_plane_ground() {
        let plane = entry("plane", &[]);
        let h = std::f64::consts::PI / 64.0;
        let expected = 2.0 * (4.0 / (h * h)) * (h / 2.0).sin().powi(2);
        let got = discrete_spectral_oracle(&plane, 63, 63, 1).unwrap()[0];
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 1.99960).abs() < 1e-5);
    }
}
