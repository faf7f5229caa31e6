//! Run configuration: one TOML record per run.
//!
//! ```toml
//! seed = 7
//!
//! [geometry]
//! kind = "minkowski"
//!
//! [tube]
//! p0 = [0, 0, 0, 0]
//! p1 = [0, 1, 0, 0]
//! region = { min = [-2, -2, -2, -2], max = [2, 2, 2, 2] }
//!
//! [tube.sampling]
//! budget = 2000
//! ```
//!
//! Each subcommand reads its own block (`sigma`, `parallel`, `tube`,
//! `conditions`, `transport`, `compare`). `--seed`, `--out` and `--format`
//! override `seed` and `[output]`.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tgeom::riemannian::BvpOptions;
use tgeom::tube::TubeKind;
use tgeom::{GeometryConfig, Point, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// Directory receiving the report and any data files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallel: Option<ParallelBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tube: Option<TubeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport: Option<TransportBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaBlock {
    pub p: Point,
    pub q: Point,
    /// Solver settings for metric geometries.
    #[serde(default)]
    pub bvp: BvpOptions,
}

fn default_tol() -> f64 {
    1e-9
}

/// A vector as its `[origin, head]` pair.
pub type VectorPair = [Point; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelBlock {
    pub a: VectorPair,
    pub b: VectorPair,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sampling {
    pub budget: usize,
    pub tol: f64,
    pub grad_tol: f64,
    pub classify: usize,
    pub max_iterations: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        let d = tgeom::tube::SampleOptions::default();
        Self {
            budget: d.budget,
            tol: d.tol,
            grad_tol: d.grad_tol,
            classify: d.classify,
            max_iterations: d.max_iterations,
        }
    }
}

impl Sampling {
    pub fn options(&self, seed: u64) -> tgeom::tube::SampleOptions {
        tgeom::tube::SampleOptions {
            budget: self.budget,
            tol: self.tol,
            grad_tol: self.grad_tol,
            seed,
            classify: self.classify,
            max_iterations: self.max_iterations,
        }
    }
}

fn through_origin() -> TubeKind {
    TubeKind::TubeThroughOrigin
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeBlock {
    #[serde(default = "through_origin")]
    pub kind: TubeKind,
    pub p0: Point,
    pub p1: Point,
    /// Tube origin for `remote-tube`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<Point>,
    /// Auxiliary points for `surface-intersection-line`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aux: Vec<Point>,
    pub region: Region,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness: Option<ThicknessBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThicknessBlock {
    pub stations: Vec<Point>,
    #[serde(default = "default_rays")]
    pub rays: usize,
    #[serde(default = "default_radial_steps")]
    pub radial_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_radius: Option<f64>,
    #[serde(default = "default_membership")]
    pub tol: f64,
}

fn default_rays() -> usize {
    tgeom::tube::ThicknessOptions::default().rays
}

fn default_radial_steps() -> usize {
    tgeom::tube::ThicknessOptions::default().radial_steps
}

fn default_membership() -> f64 {
    tgeom::tube::ThicknessOptions::default().tol
}

impl ThicknessBlock {
    pub fn options(&self) -> tgeom::tube::ThicknessOptions {
        tgeom::tube::ThicknessOptions {
            rays: self.rays,
            radial_steps: self.radial_steps,
            max_radius: self.max_radius,
            tol: self.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameBlock {
    pub p0: Point,
    pub heads: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsBlock {
    /// Candidate dimension; defaults to the chart dimension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Search region for condition IV, and the box a generated cloud fills.
    pub region: Region,
    /// Explicit cloud; otherwise `cloud_size` quasi-random points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud: Option<Vec<Point>>,
    #[serde(default = "default_cloud_size")]
    pub cloud_size: usize,
    /// Defaults to the first `n + 1` cloud points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameBlock>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Condition I threshold on `|F| / Hadamard bound`.
    #[serde(default = "default_det_tol")]
    pub det_tol: f64,
    #[serde(default = "default_tol")]
    pub reconstruction_tol: f64,
    #[serde(default = "default_starts")]
    pub starts: u32,
    #[serde(default = "default_root_tol")]
    pub root_tol: f64,
    #[serde(default = "default_targets")]
    pub targets: usize,
}

fn default_cloud_size() -> usize {
    50
}

fn default_trials() -> usize {
    200
}

fn default_det_tol() -> f64 {
    1e-8
}

fn default_starts() -> u32 {
    64
}

fn default_root_tol() -> f64 {
    1e-10
}

fn default_targets() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollinearBlock {
    pub a: VectorPair,
    pub b: VectorPair,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

/// How consecutive path corners are joined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edges {
    /// Straight chart segments.
    #[default]
    Chart,
    /// Geodesic segments from the boundary-value solver.
    Geodesic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportBlock {
    /// Covariant components at the first path corner.
    pub u0: Vec<f64>,
    /// Polyline corners in chart coordinates.
    pub path: Vec<Point>,
    /// Second route with the same endpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternate: Option<Vec<Point>>,
    #[serde(default)]
    pub edges: Edges,
    #[serde(default)]
    pub bvp: BvpOptions,
    #[serde(default = "default_per_edge")]
    pub per_edge: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collinear: Option<CollinearBlock>,
}

fn default_per_edge() -> usize {
    64
}

fn default_steps() -> usize {
    8
}

fn default_threshold() -> f64 {
    tgeom::tube::CompareOptions::default().threshold
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBlock {
    pub p0: Point,
    pub p1: Point,
    pub aux: Vec<Point>,
    pub region: Region,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

pub fn parse(text: &str) -> Result<RunConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_record() {
        let c = parse("[geometry]\nkind = \"euclidean\"\ndim = 2\n[sigma]\np = [0, 0]\nq = [3, 4]\n").unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.output.format, Format::Json);
        let s = c.sigma.unwrap();
        assert_eq!(s.q.coords(), &[3.0, 4.0]);
    }

    #[test]
    fn unknown_field_names_the_line() {
        let err = parse("[geometry]\nkind = \"minkowski\"\nradious = 1\n").unwrap_err();
        assert!(err.contains("radious"), "{err}");
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn rejects_bad_points() {
        assert!(parse("[geometry]\nkind = \"sphere\"\n[sigma]\np = []\nq = [0, 1]\n").is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let text = "seed = 3\n[geometry]\nkind = \"minkowski\"\n[tube]\np0 = [0, 0, 0, 0]\np1 = [1, 0, 0, 0]\nregion = { min = [-1, -1, -1, -1], max = [1, 1, 1, 1] }\n[tube.sampling]\nbudget = 10\n";
        let c = parse(text).unwrap();
        let again = parse(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }
}
