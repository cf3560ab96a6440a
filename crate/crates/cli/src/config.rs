//! Job configuration: JSON in, validated surface and options out.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use squeezeqm::catalog::{builtin, Preset};
use squeezeqm::discretize::NormalScheme;
use squeezeqm::dsl::{parse, validate_symbols};
use squeezeqm::eigen::EigenOptions;
use squeezeqm::geometry::{Boundary, ExprEmbedding};
use squeezeqm::{Entry, Patch};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tube: TubeConfig,
    #[serde(default)]
    pub eigen: EigenConfig,
    #[serde(default)]
    pub squeeze: SqueezeConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomSurface>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSurface {
    #[serde(default = "default_custom_name")]
    pub name: String,
    pub x: String,
    pub y: String,
    pub z: String,
    pub lengths: [f64; 2],
    pub periodic: [bool; 2],
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

fn default_custom_name() -> String {
    "custom".to_string()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_n")]
    pub n1: usize,
    #[serde(default = "default_n")]
    pub n2: usize,
}

fn default_n() -> usize {
    32
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n1: default_n(), n2: default_n() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Flux,
    Liouville,
}

impl From<Scheme> for NormalScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Flux => NormalScheme::Flux,
            Scheme::Liouville => NormalScheme::Liouville,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_nq")]
    pub nq: usize,
    /// Normal discretization; absent means flux, except for `squeeze`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_nq() -> usize {
    9
}

impl Default for TubeConfig {
    fn default() -> Self {
        Self { epsilon: default_epsilon(), nq: default_nq(), scheme: None }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_k() -> usize {
    6
}

fn default_tol() -> f64 {
    1e-10
}

fn default_seed() -> u64 {
    42
}

fn default_max_iter() -> usize {
    200_000
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self { k: default_k(), tol: default_tol(), seed: default_seed(), max_iter: default_max_iter() }
    }
}

impl EigenConfig {
    pub fn options(&self) -> EigenOptions {
        EigenOptions { tol: self.tol, seed: self.seed, max_iter: self.max_iter, ..EigenOptions::new(self.k) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeConfig {
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
}

fn default_epsilons() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}

impl Default for SqueezeConfig {
    fn default() -> Self {
        Self { epsilons: default_epsilons() }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_samples() -> usize {
    200
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { samples: default_samples(), seed: default_seed() }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: JobConfig = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Static checks; tube validity against the geometry happens at run time.
    pub fn validate(&self) -> Result<(), CliError> {
        let s = &self.surface;
        match (&s.preset, &s.custom) {
            (Some(_), Some(_)) => return Err(bad("surface: give either `preset` or `custom`, not both")),
            (None, None) => return Err(bad("surface: one of `preset` or `custom` is required")),
            (None, Some(_)) if !s.params.is_empty() => {
                return Err(bad("surface.params applies to presets; put custom parameters in surface.custom.params"))
            }
            _ => {}
        }
        for (k, v) in s.params.iter().chain(s.custom.iter().flat_map(|c| c.params.iter())) {
            if !v.is_finite() {
                return Err(bad(format!("surface parameter `{k}` must be finite")));
            }
        }
        if let Some(c) = &s.custom {
            if !c.lengths.iter().all(|l| l.is_finite() && *l > 0.0) {
                return Err(bad("surface.custom.lengths must be positive"));
            }
            for k in c.params.keys() {
                if k == "s1" || k == "s2" {
                    return Err(bad(format!("surface.custom.params: `{k}` is reserved for a coordinate")));
                }
            }
        }
        if self.grid.n1 < 3 || self.grid.n2 < 3 {
            return Err(bad("grid.n1 and grid.n2 must be at least 3"));
        }
        if self.tube.nq < 3 || self.tube.nq % 2 == 0 {
            return Err(bad(format!("tube.nq must be odd and at least 3, got {}", self.tube.nq)));
        }
        check_epsilon("tube.epsilon", self.tube.epsilon)?;
        if self.squeeze.epsilons.is_empty() {
            return Err(bad("squeeze.epsilons must not be empty"));
        }
        for &e in &self.squeeze.epsilons {
            check_epsilon("squeeze.epsilons", e)?;
        }
        if self.eigen.k == 0 {
            return Err(bad("eigen.k must be at least 1"));
        }
        if !(self.eigen.tol.is_finite() && self.eigen.tol > 0.0) {
            return Err(bad("eigen.tol must be positive"));
        }
        if self.eigen.max_iter == 0 {
            return Err(bad("eigen.max_iter must be at least 1"));
        }
        if self.verify.samples == 0 {
            return Err(bad("verify.samples must be at least 1"));
        }
        Ok(())
    }

    pub fn scheme_or(&self, fallback: Scheme) -> Scheme {
        self.tube.scheme.unwrap_or(fallback)
    }
}

fn check_epsilon(field: &str, e: f64) -> Result<(), CliError> {
    if e.is_finite() && e > 0.0 {
        Ok(())
    } else {
        Err(bad(format!("{field} must be positive, got {e}")))
    }
}

/// A resolved surface: the patch, plus the catalog entry for presets.
pub struct Surface {
    pub patch: Patch,
    pub entry: Option<Entry>,
}

impl Surface {
    pub fn resolve(cfg: &SurfaceConfig) -> Result<Self, CliError> {
        if let Some(name) = &cfg.preset {
            let entry = builtin(name, &cfg.params).map_err(|e| bad(e.to_string()))?;
            return Ok(Self { patch: entry.patch.clone(), entry: Some(entry) });
        }
        let c = cfg.custom.as_ref().ok_or_else(|| bad("surface: missing"))?;
        let declared: Vec<&str> = c.params.keys().map(String::as_str).collect();
        let mut coords = Vec::with_capacity(3);
        for (axis, text) in [("x", &c.x), ("y", &c.y), ("z", &c.z)] {
            let ast = parse(text).map_err(|e| bad(format!("surface.custom.{axis}: {e}")))?;
            validate_symbols(&ast, &declared).map_err(|e| bad(format!("surface.custom.{axis}: {e}")))?;
            coords.push(ast);
        }
        let coords: [_; 3] = coords.try_into().expect("three coordinates");
        let boundary = c.periodic.map(|p| if p { Boundary::Periodic } else { Boundary::Dirichlet });
        let embedding = ExprEmbedding { coords, params: c.params.clone() };
        Ok(Self { patch: Patch::new(c.name.clone(), Arc::new(embedding), c.lengths, boundary), entry: None })
    }

    /// Refuse spectral work on presets whose parametrization is singular
    /// inside the grid (the full sphere).
    pub fn require_spectral(&self) -> Result<(), CliError> {
        if let Some(e) = &self.entry {
            if !e.preset.spectral() && !(e.preset == Preset::Sphere && e.param("band") > 0.0) {
                return Err(bad(format!(
                    "preset `{}` is geometry-only (singular at the poles); set band > 0 to cut the caps",
                    e.name()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(text: &str) -> i32 {
        JobConfig::from_json(text).unwrap_err().exit_code()
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = JobConfig::from_json(r#"{"surface": {"preset": "torus"}}"#).unwrap();
        assert_eq!((cfg.grid.n1, cfg.tube.nq, cfg.eigen.seed, cfg.verify.seed), (32, 9, 42, 42));
        assert_eq!(cfg.scheme_or(Scheme::Liouville), Scheme::Liouville);
    }

    #[test]
    fn schema_violations_are_config_errors() {
        assert_eq!(code(r#"{"surface": {"preset": "torus"}, "tube": {"nq": 8}}"#), 2);
        assert_eq!(code(r#"{"surface": {"preset": "torus"}, "bogus": 1}"#), 2);
        assert_eq!(code(r#"{"surface": {}}"#), 2);
        assert_eq!(code(r#"{"surface": {"preset": "torus"}, "tube": {"scheme": "spectral"}}"#), 2);
        assert_eq!(code(r#"{"surface": {"preset": "torus"}, "squeeze": {"epsilons": [0.1, -1]}}"#), 2);
        assert_eq!(code("not json"), 2);
    }

    #[test]
    fn custom_surfaces_are_checked() {
        let ok = r#"{"surface": {"custom": {"x": "(R + r*cos(s2))*cos(s1)", "y": "(R + r*cos(s2))*sin(s1)",
            "z": "r*sin(s2)", "lengths": [6.283185307179586, 6.283185307179586], "periodic": [true, true],
            "params": {"R": 2, "r": 1}}}}"#;
        let cfg = JobConfig::from_json(ok).unwrap();
        let s = Surface::resolve(&cfg.surface).unwrap();
        let p = s.patch.point(0.3, 3.141592653589793).unwrap();
        assert!((p.geo_pot - 1.0).abs() < 1e-12);

        let undeclared = ok.replace(r#""R": 2, "#, "");
        let cfg = JobConfig::from_json(&undeclared).unwrap();
        let err = Surface::resolve(&cfg.surface).err().unwrap();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains('R'));

        let broken = ok.replace("r*sin(s2)", "r*sin(s2");
        let cfg = JobConfig::from_json(&broken).unwrap();
        assert!(Surface::resolve(&cfg.surface).err().unwrap().to_string().contains("byte"));
    }

    #[test]
    fn full_sphere_is_geometry_only() {
        let cfg = JobConfig::from_json(r#"{"surface": {"preset": "sphere"}}"#).unwrap();
        assert!(Surface::resolve(&cfg.surface).unwrap().require_spectral().is_err());
        let cfg = JobConfig::from_json(r#"{"surface": {"preset": "sphere", "params": {"band": 0.2}}}"#).unwrap();
        assert!(Surface::resolve(&cfg.surface).unwrap().require_spectral().is_ok());
    }

    fn docs() -> std::path::PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs")
    }

    fn keys(v: &serde_json::Value) -> Vec<String> {
        v.as_object().unwrap().keys().cloned().collect()
    }

    #[test]
    fn published_examples_load() {
        for entry in std::fs::read_dir(docs().join("examples")).unwrap() {
            let path = entry.unwrap().path();
            let cfg = JobConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            Surface::resolve(&cfg.surface).unwrap();
        }
    }

    #[test]
    fn schema_names_every_field() {
        let schema: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(docs().join("job.schema.json")).unwrap()).unwrap();
        let props = &schema["properties"];
        let mut cfg = JobConfig::from_json(r#"{"surface": {"preset": "torus", "params": {"R": 3}}, "output": "o"}"#).unwrap();
        cfg.tube.scheme = Some(Scheme::Flux);
        let echo = serde_json::to_value(&cfg).unwrap();
        assert_eq!(keys(&echo), keys(props));
        for section in ["grid", "tube", "eigen", "squeeze", "verify"] {
            assert_eq!(keys(&echo[section]), keys(&props[section]["properties"]), "{section}");
        }
        let custom = JobConfig::load(&docs().join("examples/custom_torus_verify.json")).unwrap();
        let echo = serde_json::to_value(&custom).unwrap();
        assert_eq!(keys(&echo["surface"]["custom"]), keys(&props["surface"]["properties"]["custom"]["properties"]));
        let mut surface = keys(&props["surface"]["properties"]);
        surface.sort();
        assert_eq!(surface, ["custom", "params", "preset"]);
    }
}
