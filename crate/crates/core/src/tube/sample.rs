use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{classify_dimension, Method};
use super::refine::{project, RefineOptions};
use super::spec::{TubeKind, TubeSpec};
use crate::diff;
use crate::error::{Error, Result};
use crate::linalg;
use crate::point::Point;
use crate::region::Region;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleClass {
    Regular,
    Critical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSample {
    pub point: Point,
    pub residual: f64,
    pub grad_norm: f64,
    pub class: SampleClass,
}

/// Members of a tube or line found inside a region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TubeSampleSet {
    pub kind: TubeKind,
    pub samples: Vec<TubeSample>,
    pub local_dimension: usize,
    pub method: Method,
    pub seeds: usize,
    pub tol: f64,
    pub grad_tol: f64,
}

impl TubeSampleSet {
    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.samples.iter().map(|s| &s.point)
    }

    pub fn count(&self, class: SampleClass) -> usize {
        self.samples.iter().filter(|s| s.class == class).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleOptions {
    /// Number of quasi-random seeds.
    pub budget: usize,
    /// Membership: `|F| ≤ tol · scale`.
    pub tol: f64,
    /// Critical points: `|∇F| ≤ grad_tol · gradient scale`.
    pub grad_tol: f64,
    pub seed: u64,
    /// Samples whose dimension is classified; the verdict is their mode.
    pub classify: usize,
    pub max_iterations: usize,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            budget: 1000,
            tol: 1e-10,
            grad_tol: 1e-6,
            seed: 0,
            classify: 16,
            max_iterations: 60,
        }
    }
}

impl SampleOptions {
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 || self.budget > u32::MAX as usize {
            return Err(Error::InvalidParameter {
                name: "budget",
                reason: format!("must be in 1..=2^32-1, got {}", self.budget),
            });
        }
        for (name, v) in [("tol", self.tol), ("grad_tol", self.grad_tol)] {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Gradient norm of a member, or the smallest Jacobian singular value for
/// lines.
pub(crate) fn regularity(spec: &TubeSpec, x: &[f64]) -> Result<(f64, f64)> {
    let (_, scale) = spec.value_and_scale(x)?;
    let gscale = spec.gradient_scale(scale);
    let g = if spec.is_scalar() {
        let g = diff::gradient(|p| spec.value(p), x)?;
        g.iter().map(|c| c * c).sum::<f64>().sqrt()
    } else {
        let j = super::refine::jacobian(spec, x)?;
        linalg::singular_values(&j).last().copied().unwrap_or(0.0)
    };
    Ok((g, gscale))
}

/// Refines `budget` Sobol seeds onto the zero set and keeps the members that
/// end inside the region.
pub(crate) fn collect_members(spec: &TubeSpec, region: &Region, opts: &SampleOptions) -> Result<Vec<TubeSample>> {
    let refine = RefineOptions {
        max_iterations: opts.max_iterations,
        max_step: 0.25 * region.diameter(),
    };
    let found: Vec<Option<TubeSample>> = (0..opts.budget as u32)
        .into_par_iter()
        .map(|i| {
            let seed = region.sobol_point(i, opts.seed);
            let r = match project(spec, seed.coords(), &refine) {
                Ok(r) => r,
                Err(_) => return Ok(None),
            };
            if !(r.relative <= opts.tol) || !region.contains(&r.x) {
                return Ok(None);
            }
            let (g, gscale) = regularity(spec, &r.x)?;
            Ok(Some(TubeSample {
                point: Point::new(r.x)?,
                residual: r.residual,
                grad_norm: g,
                class: if g > opts.grad_tol * gscale {
                    SampleClass::Regular
                } else {
                    SampleClass::Critical
                },
            }))
        })
        .collect::<Result<_>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// Samples a tube or line inside `region` and estimates its local
/// dimension.
pub fn sample_tube(spec: &TubeSpec, region: &Region, opts: &SampleOptions) -> Result<TubeSampleSet> {
    opts.validate()?;
    region.validate()?;
    if region.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: region.dim(),
        });
    }
    if !region.contains(spec.anchor().coords()) {
        return Err(Error::InvalidTube("region does not contain the tube origin".into()));
    }
    let samples = collect_members(spec, region, opts)?;
    if samples.is_empty() {
        return Err(Error::EmptySampleSet(format!(
            "none of {} seeds refined to a member inside the region",
            opts.budget
        )));
    }
    let (local_dimension, method) = vote(spec, &samples, opts)?;
    Ok(TubeSampleSet {
        kind: spec.kind(),
        samples,
        local_dimension,
        method,
        seeds: opts.budget,
        tol: opts.tol,
        grad_tol: opts.grad_tol,
    })
}

/// Mode of the classifications of evenly spaced samples. Ties go to the
/// lower dimension.
fn vote(spec: &TubeSpec, samples: &[TubeSample], opts: &SampleOptions) -> Result<(usize, Method)> {
    let k = opts.classify.clamp(1, samples.len());
    let picks: Vec<&TubeSample> = (0..k).map(|i| &samples[i * samples.len() / k]).collect();
    let results: Vec<Result<(usize, Method)>> = picks
        .par_iter()
        .map(|s| classify_dimension(spec, &s.point, opts.grad_tol))
        .collect();
    let mut tally: Vec<((usize, Method), usize)> = Vec::new();
    let mut first_err = None;
    for r in results {
        match r {
            Ok(c) => match tally.iter_mut().find(|(key, _)| *key == c) {
                Some((_, n)) => *n += 1,
                None => tally.push((c, 1)),
            },
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    tally.sort_by(|a, b| b.1.cmp(&a.1).then(a.0 .0.cmp(&b.0 .0)));
    match tally.first() {
        Some((c, _)) => Ok(*c),
        None => Err(first_err.expect("at least one classification ran")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;
    use crate::world::WorldFunction;

    #[test]
    fn euclidean_tube_is_line() {
        let e3 = WorldFunction::euclidean_identity(3).unwrap();
        let spec = TubeSpec::through_origin(e3, pt![0, 0, 0], pt![1, 2, 2]).unwrap();
        let region = Region::cube(3, -3.0, 3.0).unwrap();
        let set = sample_tube(
            &spec,
            &region,
            &SampleOptions {
                budget: 200,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!((set.local_dimension, set.method), (1, Method::HessianNullity));
        for p in set.points() {
            let c = p.coords();
            let t = (c[0] + 2.0 * c[1] + 2.0 * c[2]) / 9.0;
            let off = ((c[0] - t).powi(2) + (c[1] - 2.0 * t).powi(2) + (c[2] - 2.0 * t).powi(2)).sqrt();
            assert!(off < 1e-7, "{c:?}");
        }
    }

    #[test]
    fn region_must_hold_origin() {
        let spec = TubeSpec::through_origin(WorldFunction::minkowski(), Point::origin(4), pt![1, 0, 0, 0]).unwrap();
        let region = Region::cube(4, 1.0, 2.0).unwrap();
        assert!(sample_tube(&spec, &region, &SampleOptions::default()).is_err());
    }
}
