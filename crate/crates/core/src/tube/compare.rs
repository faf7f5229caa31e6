use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::Method;
use super::refine::{project, RefineOptions};
use super::sample::{sample_tube, SampleOptions, TubeSampleSet};
use super::spec::TubeSpec;
use crate::error::Result;
use crate::point::Point;
use crate::region::Region;
use crate::world::WorldFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Same,
    Different,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectSummary {
    pub samples: usize,
    pub dimension: usize,
    pub method: Method,
}

impl From<&TubeSampleSet> for ObjectSummary {
    fn from(s: &TubeSampleSet) -> Self {
        Self {
            samples: s.samples.len(),
            dimension: s.local_dimension,
            method: s.method,
        }
    }
}

/// Distances between the tube through `P₀, P₁` and the line cut out by the
/// auxiliary surfaces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub tube: ObjectSummary,
    pub line: ObjectSummary,
    /// Largest distance from a tube sample to the line.
    pub tube_to_line: f64,
    pub line_to_tube: f64,
    pub hausdorff: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareOptions {
    pub sampling: SampleOptions,
    /// Largest Hausdorff gap still reported as the same object.
    pub threshold: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            sampling: SampleOptions::default(),
            threshold: 1e-6,
        }
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Largest distance from the points of `from` to the zero set of `onto`.
///
/// Each point is projected onto the other object; when that fails the
/// nearest sample of the other object bounds the distance instead.
fn directed(
    from: &TubeSampleSet,
    onto: &TubeSpec,
    onto_samples: &TubeSampleSet,
    region: &Region,
    tol: f64,
) -> Result<f64> {
    let opts = RefineOptions {
        max_iterations: 60,
        max_step: 0.25 * region.diameter(),
    };
    let d: Vec<f64> = from
        .samples
        .par_iter()
        .map(|s| {
            let x = s.point.coords();
            let projected = project(onto, x, &opts)?;
            if projected.relative <= tol {
                return Ok(distance(x, &projected.x));
            }
            Ok(onto_samples
                .points()
                .map(|q| distance(x, q.coords()))
                .fold(f64::INFINITY, f64::min))
        })
        .collect::<Result<_>>()?;
    Ok(d.into_iter().fold(0.0, f64::max))
}

/// Samples both the tube `{R | (P₀P₁.P₀R)² = |P₀P₁|²|P₀R|²}` and the line
/// `∩ₖ {R | f(P₀,P₁,Pₖ,R) = 0}` from the same seeds and measures how far
/// apart they are.
pub fn compare_definitions(
    sigma: &WorldFunction,
    p0: &Point,
    p1: &Point,
    aux: &[Point],
    region: &Region,
    opts: &CompareOptions,
) -> Result<Comparison> {
    let tube = TubeSpec::through_origin(sigma.clone(), p0.clone(), p1.clone())?;
    let line = TubeSpec::surface_intersection(sigma.clone(), p0.clone(), p1.clone(), aux.to_vec())?;
    let tube_set = sample_tube(&tube, region, &opts.sampling)?;
    let line_set = sample_tube(&line, region, &opts.sampling)?;
    let tol = opts.sampling.tol;
    let tube_to_line = directed(&tube_set, &line, &line_set, region, tol)?;
    let line_to_tube = directed(&line_set, &tube, &tube_set, region, tol)?;
    let hausdorff = tube_to_line.max(line_to_tube);
    Ok(Comparison {
        tube: (&tube_set).into(),
        line: (&line_set).into(),
        tube_to_line,
        line_to_tube,
        hausdorff,
        threshold: opts.threshold,
        verdict: if hausdorff < opts.threshold {
            Verdict::Same
        } else {
            Verdict::Different
        },
    })
}
