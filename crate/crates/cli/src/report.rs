use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use squeezeqm::discretize::{Grid2, Grid3};
use squeezeqm::geometry::Boundary;

use crate::config::JobConfig;
use crate::error::CliError;
use crate::output::write_json;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Timing {
    pub seconds: f64,
}

/// The JSON report every command writes next to its tables.
#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub config: &'a JobConfig,
    pub timing: Timing,
    pub results: Value,
    pub defects: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub struct Reporter<'a> {
    pub command: &'a str,
    pub config: &'a JobConfig,
    start: Instant,
}

impl<'a> Reporter<'a> {
    pub fn start(command: &'a str, config: &'a JobConfig) -> Self {
        Self { command, config, start: Instant::now() }
    }

    pub fn write(
        &self,
        dir: &Path,
        name: &str,
        results: Value,
        defects: Value,
        error: Option<&CliError>,
    ) -> Result<(), CliError> {
        let report = Report {
            command: self.command,
            version: VERSION,
            config: self.config,
            timing: Timing { seconds: self.start.elapsed().as_secs_f64() },
            results,
            defects,
            error: error.map(ToString::to_string),
        };
        write_json(dir, name, &report).map(|_| ())
    }
}

fn boundary_name(b: Boundary) -> &'static str {
    match b {
        Boundary::Periodic => "periodic",
        Boundary::Dirichlet => "dirichlet",
    }
}

pub fn grid2_json(g: &Grid2<f64>) -> Value {
    json!({
        "n1": g.n1(),
        "n2": g.n2(),
        "lengths": [g.axes[0].length, g.axes[1].length],
        "h": [g.axes[0].h, g.axes[1].h],
        "boundary": [boundary_name(g.axes[0].boundary), boundary_name(g.axes[1].boundary)],
        "ordering": "row = j*n1 + i",
    })
}

pub fn grid3_json(g: &Grid3<f64>) -> Value {
    let mut v = grid2_json(&g.base);
    v["nq"] = json!(g.nq);
    v["epsilon"] = json!(g.epsilon);
    v["hq"] = json!(g.hq);
    v["q_boundary"] = json!("dirichlet");
    v["ordering"] = json!("row = k*n1*n2 + j*n1 + i");
    v
}

/// `null` for infinities, which JSON cannot carry.
pub fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
