//! The `verify` property battery.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use squeezeqm::discretize::{assemble_h2d, assemble_h3d_with, grid_for, Grid3, TubeMetric};
use squeezeqm::geometry::{det_identity_residual, point_geometry, Boundary};
use squeezeqm::transform::{
    commutator_defect, kernel_projection, normal_momentum, projection_adjoint_defect, restrict_to_surface,
    ConjugationMap, WeightedSpace, SELFADJOINT_LIMIT,
};
use squeezeqm::{Hamiltonian3, Patch};

use crate::config::{JobConfig, Scheme, Surface};
use crate::error::CliError;
use crate::report::{grid3_json, Reporter};

pub const DET_IDENTITY_LIMIT: f64 = 1e-10;
pub const EXACT_LIMIT: f64 = 1e-12;
/// Relative restriction residual treated as exact agreement.
pub const RESTRICTION_EXACT: f64 = 1e-10;
/// Smallest defect that counts as a nonzero witness.
pub const WITNESS_FLOOR: f64 = 1e-10;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub measured: Value,
    pub criterion: String,
}

fn check(name: &'static str, pass: bool, measured: Value, criterion: impl Into<String>) -> Check {
    Check { name, pass, measured, criterion: criterion.into() }
}

/// A defect that must vanish exactly when `f ≡ 1` and be visibly nonzero otherwise.
fn witness(name: &'static str, defect: f64, f_varies: bool) -> Check {
    let (pass, criterion) = if f_varies {
        (defect > WITNESS_FLOOR, format!("> {WITNESS_FLOOR:e} (f varies across the tube)"))
    } else {
        (defect <= EXACT_LIMIT, format!("<= {EXACT_LIMIT:e} (f = 1 everywhere)"))
    };
    check(name, pass, json!({"defect": defect}), criterion)
}

fn det_identity(patch: &Patch, samples: usize, seed: u64) -> Result<Check, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [l1, l2] = patch.lengths;
    let span = |b: Boundary| match b {
        Boundary::Periodic => 0.0..1.0,
        Boundary::Dirichlet => 0.02..0.98,
    };
    let (r1, r2) = (span(patch.boundary[0]), span(patch.boundary[1]));
    let mut worst: f64 = 0.0;
    let mut taken = 0;
    let mut tries = 0;
    while taken < samples && tries < 100 * samples {
        tries += 1;
        let (s1, s2) = (rng.gen_range(r1.clone()) * l1, rng.gen_range(r2.clone()) * l2);
        let p = point_geometry(patch, s1, s2)?;
        let (lo, hi) = p.admissible_q();
        let q = rng.gen_range(lo.max(-5.0)..hi.min(5.0));
        if p.weight(q) <= 0.2 {
            continue;
        }
        worst = worst.max(det_identity_residual(patch, s1, s2, q)?);
        taken += 1;
    }
    Ok(check(
        "det_identity",
        taken == samples && worst <= DET_IDENTITY_LIMIT,
        json!({"max_residual": worst, "samples": taken, "seed": seed}),
        format!("relative residual of det g_Sq = f^2 det g_S <= {DET_IDENTITY_LIMIT:e} over {samples} points"),
    ))
}

fn tube(patch: &Patch, n: [usize; 2], nq: usize, eps: f64, scheme: Scheme) -> Result<Hamiltonian3, CliError> {
    let grid = Grid3::new(grid_for(patch, n), nq, eps);
    Ok(assemble_h3d_with(patch, &grid, TubeMetric::Induced, scheme.into())?)
}

fn restriction_residual(patch: &Patch, h3: &Hamiltonian3) -> Result<(f64, f64), CliError> {
    let base = h3.grid.base;
    let h2 = assemble_h2d(patch, &base)?;
    let l = ConjugationMap::from_f(&h3.f)?.conjugate(&h3.op)?;
    let [l1, l2] = patch.lengths;
    let test = base.sample(|a, b| (1.3 * a / l1 + 0.4).sin() * (2.0 * std::f64::consts::PI * b / l2).cos());
    let got = restrict_to_surface(&l, &h3.grid, &test)?;
    let want = h2.op.matvec(&test);
    let diff = got.iter().zip(&want).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = want.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok((diff, scale))
}

pub fn run(cfg: &JobConfig, out: &Path) -> Result<(), CliError> {
    let rep = Reporter::start("verify", cfg);
    let s = Surface::resolve(&cfg.surface)?;
    s.require_spectral()?;
    let scheme = cfg.scheme_or(Scheme::Flux);
    let (n, nq, eps) = ([cfg.grid.n1, cfg.grid.n2], cfg.tube.nq, cfg.tube.epsilon);
    let h = tube(&s.patch, n, nq, eps, scheme)?;
    let grid = h.grid;
    let f_varies = h.f.iter().any(|f| (f - 1.0).abs() > EXACT_LIMIT);
    let flat = WeightedSpace::flat_in_q(&h);
    let tube_space = WeightedSpace::tube(&h);
    let mut checks = vec![det_identity(&s.patch, cfg.verify.samples, cfg.verify.seed)?];

    checks.push(check(
        "generator_tube_symmetry",
        h.op.weighted_symmetry_defect(&tube_space.weight) <= EXACT_LIMIT,
        json!({"defect": h.op.weighted_symmetry_defect(&tube_space.weight)}),
        format!("A self-adjoint in the tube weight sqrt(g) f: <= {EXACT_LIMIT:e}"),
    ));
    checks.push(witness("generator_flat_symmetry", h.op.weighted_symmetry_defect(&flat.weight), f_varies));

    let map = ConjugationMap::from_f(&h.f)?;
    let l = map.conjugate(&h.op)?;
    let l_defect = l.weighted_symmetry_defect(&flat.weight);
    checks.push(check(
        "conjugated_flat_symmetry",
        l_defect <= SELFADJOINT_LIMIT,
        json!({"defect": l_defect}),
        format!("L = f^(1/2) A f^(-1/2) self-adjoint in the flat weight sqrt(g): <= {SELFADJOINT_LIMIT:e}"),
    ));
    let inv_f: Vec<f64> = h.f.iter().map(|f| f.recip()).collect();
    let reverse = ConjugationMap::from_f(&inv_f)?.conjugate(&h.op)?;
    checks.push(witness("reverse_conjugation_flat_symmetry", reverse.weighted_symmetry_defect(&flat.weight), f_varies));

    let d = normal_momentum(&grid)?;
    let d_flat = d.weighted_antisymmetry_defect(&flat.weight);
    checks.push(check(
        "normal_momentum_flat_antisymmetry",
        d_flat <= EXACT_LIMIT,
        json!({"defect": d_flat}),
        format!("<= {EXACT_LIMIT:e}"),
    ));
    checks.push(witness("normal_momentum_tube_antisymmetry", d.weighted_antisymmetry_defect(&tube_space.weight), f_varies));
    let comm = commutator_defect(&grid)?;
    checks.push(check(
        "commutator_identity",
        comm <= EXACT_LIMIT,
        json!({"defect": comm}),
        format!("[D_q, q] acts as the identity on q-affine states: <= {EXACT_LIMIT:e}"),
    ));

    let pi = kernel_projection(&grid, &flat)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.verify.seed);
    let mut idem: f64 = 0.0;
    for _ in 0..5 {
        let u: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pu = pi.matvec(&u);
        let ppu = pi.matvec(&pu);
        idem = pu.iter().zip(&ppu).fold(idem, |m, (a, b)| m.max((a - b).abs()));
    }
    checks.push(check(
        "projection_idempotence",
        idem <= EXACT_LIMIT,
        json!({"defect": idem, "vectors": 5, "seed": cfg.verify.seed}),
        format!("max |P(Pu) - Pu| <= {EXACT_LIMIT:e}"),
    ));
    let p_flat = projection_adjoint_defect(&pi, &flat)?;
    checks.push(check(
        "projection_flat_adjoint",
        p_flat <= EXACT_LIMIT,
        json!({"defect": p_flat}),
        format!("<= {EXACT_LIMIT:e}"),
    ));
    checks.push(witness("projection_tube_adjoint", projection_adjoint_defect(&pi, &tube_space)?, f_varies));

    let (coarse, coarse_scale) = restriction_residual(&s.patch, &h)?;
    let fine_h = tube(&s.patch, [2 * n[0], 2 * n[1]], 2 * nq - 1, eps, scheme)?;
    let (fine, fine_scale) = restriction_residual(&s.patch, &fine_h)?;
    let exact = coarse <= RESTRICTION_EXACT * coarse_scale.max(1.0) && fine <= RESTRICTION_EXACT * fine_scale.max(1.0);
    let ratio = coarse / fine;
    checks.push(check(
        "restriction_convergence",
        exact || (3.0..=5.0).contains(&ratio),
        json!({
            "coarse": {"n": n, "nq": nq, "residual": coarse, "scale": coarse_scale},
            "fine": {"n": [2 * n[0], 2 * n[1]], "nq": 2 * nq - 1, "residual": fine, "scale": fine_scale},
            "ratio": if fine > 0.0 { json!(ratio) } else { Value::Null },
            "exact": exact,
        }),
        format!("exact (<= {RESTRICTION_EXACT:e} relative) at both resolutions, or coarse/fine ratio in [3, 5]"),
    ));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    let results = json!({
        "surface": s.patch.name,
        "grid": grid3_json(&grid),
        "scheme": scheme,
        "f_varies": f_varies,
        "conventions": {
            "volume_factor": "det g_Sq = f^2 det g_S with f = 1 - 2 H q + K q^2",
            "conjugation": "L = f^(1/2) A f^(-1/2), flat weight sqrt(g) in q",
        },
        "checks": checks,
        "passed": checks.len() - failed.len(),
        "failed": failed,
    });
    let defects: serde_json::Map<String, Value> = checks
        .iter()
        .filter_map(|c| c.measured.get("defect").map(|d| (c.name.to_string(), d.clone())))
        .collect();
    let err = (!failed.is_empty()).then(|| CliError::Verify(format!("failing checks: {}", failed.join(", "))));
    rep.write(out, "verify.json", results, Value::Object(defects), err.as_ref())?;
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
