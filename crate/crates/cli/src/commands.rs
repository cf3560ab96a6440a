//! One function per subcommand. Each writes its tables and report into `out`.

use std::f64::consts::PI;
use std::path::Path;

use serde_json::{json, Value};
use squeezeqm::catalog::{discrete_spectral_oracle, spectral_oracle, Preset};
use squeezeqm::discretize::{
    assemble_h2d, assemble_h3d_with, grid_for, symmetrize, write_matrix_market, Grid2, Grid3, TubeMetric,
};
use squeezeqm::dsl::Func;
use squeezeqm::eigen::{residual_report, smallest_eigenpairs, EigenError, ResidualRow};
use squeezeqm::geometry::point_geometry;
use squeezeqm::{Operator, Spectrum};

use crate::config::{JobConfig, Scheme, Surface};
use crate::error::CliError;
use crate::output::{write_atomic, write_json, Csv};
use crate::report::{finite, grid2_json, grid3_json, Reporter};

/// Ground energy of the discrete normal stencil on a flat slab of half width `eps`.
pub fn transverse_discrete(grid: &Grid3<f64>) -> f64 {
    let s = (PI * grid.hq / (4.0 * grid.epsilon)).sin();
    4.0 / (grid.hq * grid.hq) * s * s
}

pub fn transverse_continuum(eps: f64) -> f64 {
    PI * PI / (4.0 * eps * eps)
}

fn surface_grid(cfg: &JobConfig, s: &Surface) -> Grid2<f64> {
    grid_for(&s.patch, [cfg.grid.n1, cfg.grid.n2])
}

#[derive(Default, Clone, Copy)]
struct Range {
    min: f64,
    max: f64,
    argmin: [f64; 2],
    argmax: [f64; 2],
    seen: bool,
}

impl Range {
    fn push(&mut self, x: f64, at: [f64; 2]) {
        if !self.seen || x < self.min {
            self.min = x;
            self.argmin = at;
        }
        if !self.seen || x > self.max {
            self.max = x;
            self.argmax = at;
        }
        self.seen = true;
    }

    fn json(&self) -> Value {
        json!({"min": self.min, "max": self.max, "argmin": self.argmin, "argmax": self.argmax})
    }
}

pub fn geometry(cfg: &JobConfig, out: &Path) -> Result<(), CliError> {
    let rep = Reporter::start("geometry", cfg);
    let s = Surface::resolve(&cfg.surface)?;
    let grid = surface_grid(cfg, &s);
    let mut csv = Csv::new(&["s1", "s2", "H", "K", "geo_pot", "sqrt_detg"]);
    let mut ranges = [Range::default(); 4];
    let mut max_curv: f64 = 0.0;
    let mut max_eps = f64::INFINITY;
    let (mut oracle_h, mut oracle_k): (f64, f64) = (0.0, 0.0);
    for row in 0..grid.len() {
        let (i, j) = grid.index(row);
        let at = grid.coords(i, j);
        let p = point_geometry(&s.patch, at[0], at[1])?;
        let vals = [p.mean_curvature, p.gauss_curvature, p.geo_pot, p.sqrt_det_g];
        for (r, v) in ranges.iter_mut().zip(vals) {
            r.push(v, at);
        }
        max_curv = max_curv.max(p.max_abs_curvature());
        max_eps = max_eps.min(p.max_admissible_offset());
        if let Some(e) = &s.entry {
            let cf = e.oracle(at[0], at[1]);
            let scale = p.max_abs_curvature().max(1.0);
            oracle_h = oracle_h.max((p.mean_curvature - cf.mean_curvature).abs() / scale);
            oracle_k = oracle_k.max((p.gauss_curvature - cf.gauss_curvature).abs() / (scale * scale));
        }
        csv.row(vec![at[0].into(), at[1].into(), vals[0].into(), vals[1].into(), vals[2].into(), vals[3].into()]);
    }
    csv.write(out, "geometry.csv")?;
    let summary = json!({
        "surface": s.patch.name,
        "points": grid.len(),
        "grid": grid2_json(&grid),
        "H": ranges[0].json(),
        "K": ranges[1].json(),
        "geo_pot": ranges[2].json(),
        "sqrt_detg": ranges[3].json(),
        "max_abs_curvature": max_curv,
        "max_admissible_epsilon": finite(max_eps),
        "tube_epsilon": cfg.tube.epsilon,
        "tube_epsilon_admissible": cfg.tube.epsilon < max_eps,
    });
    let defects = match s.entry {
        Some(_) => json!({"oracle_mean_curvature": oracle_h, "oracle_gauss_curvature": oracle_k}),
        None => json!({}),
    };
    rep.write(out, "geometry.json", summary, defects, None)
}

/// Solve, or hand back the error with whatever partial spectrum exists.
fn solve(op: &Operator, cfg: &JobConfig) -> Result<Spectrum, (CliError, Option<Spectrum>)> {
    smallest_eigenpairs(op, &cfg.eigen.options()).map_err(|e| {
        let msg = e.to_string();
        match e {
            EigenError::NoConvergence { partial, .. } => (CliError::Solver(msg), Some(*partial)),
            _ => (CliError::Solver(msg), None),
        }
    })
}

fn spectrum_json(spec: &Spectrum, rows: &[ResidualRow<f64>]) -> Value {
    json!({
        "eigenvalues": spec.eigenvalues,
        "residuals": rows.iter().map(|r| r.residual).collect::<Vec<_>>(),
        "norm_estimate": spec.norm_estimate,
        "matvecs": spec.matvecs,
        "restarts": spec.restarts,
        "seed": spec.seed,
        "converged": spec.converged,
    })
}

fn max_residual(rows: &[ResidualRow<f64>]) -> f64 {
    rows.iter().fold(0.0, |m, r| m.max(r.residual))
}

/// MatrixMarket file of the symmetrized operator plus a JSON sidecar.
fn dump_matrix(out: &Path, stem: &str, op: &Operator, surface: &str, grid: Value) -> Result<(), CliError> {
    let sym = symmetrize(op)?;
    let mut bytes = Vec::new();
    write_matrix_market(&sym.op, &mut bytes).map_err(|e| CliError::io(out.join(format!("{stem}.mtx")), e))?;
    write_atomic(out, &format!("{stem}.mtx"), &bytes)?;
    let sidecar = json!({
        "matrix": format!("{stem}.mtx"),
        "surface": surface,
        "dim": sym.op.dim(),
        "nnz": sym.op.nnz(),
        "storage": "lower triangle, 1-based",
        "transform": "S = W^(1/2) A W^(-1/2); A = W^(-1/2) S W^(1/2)",
        "symmetry_defect": sym.defect,
        "grid": grid,
        "weight": op.weight,
    });
    write_json(out, &format!("{stem}.json"), &sidecar).map(|_| ())
}

pub fn spectrum2d(cfg: &JobConfig, out: &Path, dump: bool) -> Result<(), CliError> {
    let rep = Reporter::start("spectrum2d", cfg);
    let s = Surface::resolve(&cfg.surface)?;
    s.require_spectral()?;
    let grid = surface_grid(cfg, &s);
    let h = assemble_h2d(&s.patch, &grid)?;
    if dump {
        dump_matrix(out, "operator2d", &h.op, &s.patch.name, grid2_json(&grid))?;
    }
    let symmetry = h.op.weighted_symmetry_defect(&h.op.weight);
    let spec = match solve(&h.op, cfg) {
        Ok(spec) => spec,
        Err((err, partial)) => {
            let results = json!({"partial": partial.map(|p| p.eigenvalues)});
            rep.write(out, "spectrum2d.json", results, json!({"weighted_symmetry": symmetry}), Some(&err))?;
            return Err(err);
        }
    };
    let rows = residual_report(&h.op, &spec);
    let mut csv = Csv::new(&["index", "eigenvalue", "residual"]);
    for r in &rows {
        csv.row(vec![r.index.into(), r.eigenvalue.into(), r.residual.into()]);
    }
    csv.write(out, "spectrum2d.csv")?;
    let mut results = spectrum_json(&spec, &rows);
    results["surface"] = json!(s.patch.name);
    results["grid"] = grid2_json(&grid);
    let mut defects = json!({"weighted_symmetry": symmetry, "max_residual": max_residual(&rows)});
    if let Some(e) = s.entry.as_ref().filter(|e| matches!(e.preset, Preset::Plane | Preset::Cylinder)) {
        let k = spec.eigenvalues.len();
        let discrete = discrete_spectral_oracle(e, grid.n1(), grid.n2(), k).map_err(|e| CliError::Config(e.to_string()))?;
        let continuum = spectral_oracle(e, k).map_err(|e| CliError::Config(e.to_string()))?;
        let worst = spec.eigenvalues.iter().zip(&discrete).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        results["oracle"] = json!({"discrete": discrete, "continuum": continuum});
        defects["discrete_oracle_max_abs"] = json!(worst);
    }
    rep.write(out, "spectrum2d.json", results, defects, None)
}

pub fn spectrum3d(cfg: &JobConfig, out: &Path, dump: bool) -> Result<(), CliError> {
    let rep = Reporter::start("spectrum3d", cfg);
    let s = Surface::resolve(&cfg.surface)?;
    s.require_spectral()?;
    let scheme = cfg.scheme_or(Scheme::Flux);
    let grid = Grid3::new(surface_grid(cfg, &s), cfg.tube.nq, cfg.tube.epsilon);
    let h = assemble_h3d_with(&s.patch, &grid, TubeMetric::Induced, scheme.into())?;
    if dump {
        dump_matrix(out, "operator3d", &h.op, &s.patch.name, grid3_json(&grid))?;
    }
    let symmetry = h.op.weighted_symmetry_defect(&h.op.weight);
    let transverse = transverse_discrete(&grid);
    let spec = match solve(&h.op, cfg) {
        Ok(spec) => spec,
        Err((err, partial)) => {
            let results = json!({"partial": partial.map(|p| p.eigenvalues)});
            rep.write(out, "spectrum3d.json", results, json!({"weighted_symmetry": symmetry}), Some(&err))?;
            return Err(err);
        }
    };
    let rows = residual_report(&h.op, &spec);
    let mut csv = Csv::new(&["index", "eigenvalue", "eigenvalue_minus_transverse", "residual"]);
    for r in &rows {
        csv.row(vec![r.index.into(), r.eigenvalue.into(), (r.eigenvalue - transverse).into(), r.residual.into()]);
    }
    csv.write(out, "spectrum3d.csv")?;
    let mut results = spectrum_json(&spec, &rows);
    results["surface"] = json!(s.patch.name);
    results["grid"] = grid3_json(&grid);
    results["scheme"] = json!(scheme);
    results["transverse_discrete"] = json!(transverse);
    results["transverse_continuum"] = json!(transverse_continuum(grid.epsilon));
    results["max_admissible_epsilon"] = finite(h.geometry.max_admissible_epsilon());
    let defects = json!({"tube_weighted_symmetry": symmetry, "max_residual": max_residual(&rows)});
    rep.write(out, "spectrum3d.json", results, defects, None)
}

pub fn squeeze(cfg: &JobConfig, out: &Path, dump: bool) -> Result<(), CliError> {
    let rep = Reporter::start("squeeze", cfg);
    let s = Surface::resolve(&cfg.surface)?;
    s.require_spectral()?;
    let scheme = cfg.scheme_or(Scheme::Liouville);
    let base = surface_grid(cfg, &s);
    let h2 = assemble_h2d(&s.patch, &base)?;
    let spec2 = match solve(&h2.op, cfg) {
        Ok(spec) => spec,
        Err((err, _)) => {
            rep.write(out, "squeeze.json", json!({"surface_solve": "failed"}), json!({}), Some(&err))?;
            return Err(err);
        }
    };
    let e2 = spec2.eigenvalues.clone();
    let mut csv = Csv::new(&["epsilon", "i", "E3d", "E3d_minus_transverse", "E2d", "gap"]);
    let mut per_eps = Vec::new();
    let mut first_failure: Option<CliError> = None;
    for (idx, &eps) in cfg.squeeze.epsilons.iter().enumerate() {
        let grid = Grid3::new(base, cfg.tube.nq, eps);
        let transverse = transverse_discrete(&grid);
        let mut record = json!({
            "epsilon": eps,
            "transverse_discrete": transverse,
            "transverse_continuum": transverse_continuum(eps),
        });
        let attempt = (|| -> Result<(Spectrum, f64), CliError> {
            let h = assemble_h3d_with(&s.patch, &grid, TubeMetric::Induced, scheme.into())?;
            if dump {
                dump_matrix(out, &format!("operator3d_eps{idx}"), &h.op, &s.patch.name, grid3_json(&grid))?;
            }
            let spec = solve(&h.op, cfg).map_err(|(e, _)| e)?;
            let worst = max_residual(&residual_report(&h.op, &spec));
            Ok((spec, worst))
        })();
        match attempt {
            Ok((spec, worst)) => {
                let mut gaps = Vec::new();
                for (i, (&e3, &e2)) in spec.eigenvalues.iter().zip(&e2).enumerate() {
                    let gap = (e3 - transverse - e2).abs();
                    gaps.push(gap);
                    csv.row(vec![eps.into(), i.into(), e3.into(), (e3 - transverse).into(), e2.into(), gap.into()]);
                }
                record["status"] = json!("ok");
                record["E3d"] = json!(spec.eigenvalues);
                record["gaps"] = json!(gaps);
                record["max_residual"] = json!(worst);
                record["matvecs"] = json!(spec.matvecs);
            }
            Err(err) => {
                if matches!(err, CliError::Io { .. }) {
                    return Err(err);
                }
                record["status"] = json!("failed");
                record["exit_code"] = json!(err.exit_code());
                record["error"] = json!(err.to_string());
                first_failure.get_or_insert(err);
            }
        }
        per_eps.push(record);
    }
    csv.write(out, "squeeze.csv")?;
    let results = json!({
        "surface": s.patch.name,
        "grid": grid2_json(&base),
        "nq": cfg.tube.nq,
        "scheme": scheme,
        "E2d": e2,
        "transverse_subtracted": "discrete",
        "epsilons": per_eps,
    });
    let defects = json!({"surface_max_residual": max_residual(&residual_report(&h2.op, &spec2))});
    rep.write(out, "squeeze.json", results, defects, None)?;
    match first_failure {
        Some(err) => Err(err),
        None => Ok(()),
    }
}

pub fn surfaces() -> Value {
    let presets: Vec<Value> = Preset::ALL
        .iter()
        .map(|p| {
            let params: Vec<Value> =
                p.schema().iter().map(|(n, d, m)| json!({"name": n, "default": d, "meaning": m})).collect();
            json!({"name": p.name(), "description": p.description(), "spectral": p.spectral(), "params": params})
        })
        .collect();
    json!({
        "presets": presets,
        "custom": {
            "fields": ["name", "x", "y", "z", "lengths", "periodic", "params"],
            "variables": ["s1", "s2"],
            "functions": Func::ALL.iter().map(|f| f.name()).collect::<Vec<_>>(),
        },
    })
}
