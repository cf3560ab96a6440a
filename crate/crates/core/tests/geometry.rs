use std::collections::BTreeMap;

use proptest::prelude::*;
use squeezeqm::catalog::{builtin, Preset};
use squeezeqm::geometry::{det_identity_residual, point_geometry};
use squeezeqm::small::rotation_from_quaternion;
use squeezeqm::Entry;

fn entry(name: &str) -> Entry {
    builtin(name, &BTreeMap::new()).unwrap()
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / b.abs().max(scale)
}

#[test]
fn oracles_agree_with_jets_on_every_preset() {
    for preset in Preset::ALL {
        let e = entry(preset.name());
        let [l1, l2] = e.patch.lengths;
        let mut worst: f64 = 0.0;
        for i in 0..12 {
            for j in 0..12 {
                let s1 = l1 * (i as f64 + 0.5) / 12.0;
                let s2 = l2 * (j as f64 + 0.5) / 12.0;
                let p = point_geometry(&e.patch, s1, s2).unwrap();
                let cf = e.oracle(s1, s2);
                let scale = p.max_abs_curvature().max(1.0);
                worst = worst.max(rel(p.mean_curvature, cf.mean_curvature, scale));
                worst = worst.max(rel(p.gauss_curvature, cf.gauss_curvature, scale * scale));
                for a in 0..2 {
                    for b in 0..2 {
                        worst = worst.max(rel(p.g[a][b], cf.g[a][b], cf.g[0][0].abs().max(cf.g[1][1].abs())));
                    }
                }
            }
        }
        assert!(worst <= 1e-10, "{}: {worst:e}", preset.name());
    }
}

#[test]
fn torus_admissible_offset_matches_roots_of_the_weight() {
    let e = entry("torus");
    let mut from_curvature = f64::INFINITY;
    let mut from_roots = f64::INFINITY;
    for i in 0..12 {
        for j in 0..12 {
            let p = point_geometry(&e.patch, i as f64 * 0.5, j as f64 * std::f64::consts::PI / 6.0).unwrap();
            from_curvature = from_curvature.min(p.max_admissible_offset());
            // real roots of 1 - 2Hq + Kq²
            let (a, b, c) = (p.gauss_curvature, -2.0 * p.mean_curvature, 1.0);
            let roots: Vec<f64> = if a.abs() < 1e-14 {
                if b.abs() < 1e-14 { vec![] } else { vec![-c / b] }
            } else {
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 { vec![] } else { vec![(-b + disc.sqrt()) / (2.0 * a), (-b - disc.sqrt()) / (2.0 * a)] }
            };
            for r in roots {
                from_roots = from_roots.min(r.abs());
            }
        }
    }
    assert!((from_curvature - 1.0).abs() < 1e-12);
    assert!((from_curvature - from_roots).abs() < 1e-12);
}

#[test]
fn sphere_band_and_catenoid_minimality() {
    let mut params = BTreeMap::new();
    params.insert("R".to_string(), 2.0);
    params.insert("band".to_string(), 0.3);
    let s = builtin("sphere", &params).unwrap();
    let c = entry("catenoid");
    for i in 1..12 {
        for j in 0..12 {
            let (u, v) = (i as f64 / 12.0, j as f64 * 0.5);
            let ps = point_geometry(&s.patch, u * s.patch.lengths[0], v).unwrap();
            assert!(ps.geo_pot.abs() <= 1e-12);
            assert!((ps.mean_curvature + 0.5).abs() <= 1e-12);
            let pc = point_geometry(&c.patch, u * c.patch.lengths[0], v).unwrap();
            assert!(pc.mean_curvature.abs() <= 1e-10);
            assert!(pc.geo_pot >= 0.0);
        }
    }
}

fn quaternion() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-1.0f64..1.0).prop_filter("nonzero", |q| q.iter().map(|x| x * x).sum::<f64>() > 1e-2)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, rng_algorithm: prop::test_runner::RngAlgorithm::ChaCha, ..ProptestConfig::default() })]

    #[test]
    fn curvature_is_invariant_under_rigid_motion(
        q in quaternion(),
        t in prop::array::uniform3(-5.0f64..5.0),
        s1 in 0.1f64..6.0,
        s2 in 0.1f64..6.0,
        which in 0usize..3,
    ) {
        let name = ["torus", "corrugated", "catenoid"][which];
        let e = entry(name);
        let s1 = s1 / 6.2 * e.patch.lengths[0];
        let s2 = s2 / 6.2 * e.patch.lengths[1];
        let moved = e.patch.transformed(rotation_from_quaternion(q), t);
        let a = point_geometry(&e.patch, s1, s2).unwrap();
        let b = point_geometry(&moved, s1, s2).unwrap();
        let scale = a.max_abs_curvature().max(1.0);
        prop_assert!((a.mean_curvature - b.mean_curvature).abs() <= 1e-10 * scale);
        prop_assert!((a.gauss_curvature - b.gauss_curvature).abs() <= 1e-10 * scale * scale);
        prop_assert!((a.sqrt_det_g - b.sqrt_det_g).abs() <= 1e-10 * a.sqrt_det_g);
    }

    #[test]
    fn swapping_parameters_flips_the_mean_curvature(s1 in 0.05f64..0.95, s2 in 0.0f64..1.0, which in 0usize..4) {
        let name = ["torus", "cylinder", "corrugated", "sphere"][which];
        let e = entry(name);
        let [l1, l2] = e.patch.lengths;
        let a = point_geometry(&e.patch, s1 * l1, s2 * l2).unwrap();
        let b = point_geometry(&e.patch.swapped(), s2 * l2, s1 * l1).unwrap();
        let scale = a.max_abs_curvature().max(1.0);
        prop_assert!((a.mean_curvature + b.mean_curvature).abs() <= 1e-12 * scale);
        prop_assert!((a.gauss_curvature - b.gauss_curvature).abs() <= 1e-12 * scale * scale);
        prop_assert!((a.geo_pot - b.geo_pot).abs() <= 1e-12 * scale * scale);
    }

    #[test]
    fn determinant_identity_holds_inside_the_tube(s1 in 0.05f64..0.95, s2 in 0.0f64..1.0, t in -0.9f64..0.9, which in 0usize..6) {
        let e = entry(Preset::ALL[which].name());
        let [l1, l2] = e.patch.lengths;
        let p = point_geometry(&e.patch, s1 * l1, s2 * l2).unwrap();
        let q = t * p.max_admissible_offset().min(10.0);
        prop_assume!(p.weight(q) > 0.2);
        prop_assert!(det_identity_residual(&e.patch, s1 * l1, s2 * l2, q).unwrap() <= 1e-10);
    }
}
