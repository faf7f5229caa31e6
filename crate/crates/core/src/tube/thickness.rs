use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::TubeSpec;
use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThicknessOptions {
    /// Directions scanned in the transverse hyperplane.
    pub rays: usize,
    pub radial_steps: usize,
    /// Scan radius; defaults to the chart length of `P₀P₁`.
    pub max_radius: Option<f64>,
    /// Membership for tangential roots: `|F| ≤ tol · scale`.
    pub tol: f64,
}

impl Default for ThicknessOptions {
    fn default() -> Self {
        Self {
            rays: 64,
            radial_steps: 400,
            max_radius: None,
            tol: 1e-10,
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= n);
    n
}

/// Orthonormal basis of the complement of `axis` (unit).
fn complement(axis: &[f64]) -> Vec<Vec<f64>> {
    let n = axis.len();
    let mut basis: Vec<Vec<f64>> = vec![axis.to_vec()];
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(b).for_each(|(a, b)| *a -= d * b);
        }
        if normalize(&mut v) > 1e-8 {
            basis.push(v);
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Unit directions spread over the sphere of dimension `m − 1`.
fn directions(m: usize, count: usize) -> Vec<Vec<f64>> {
    match m {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => (0..count as u32)
            .filter_map(|k| {
                let mut v: Vec<f64> = (0..m as u32)
                    .map(|d| 2.0 * sobol_burley::sample(k, d, 0xd1) as f64 - 1.0)
                    .collect();
                (normalize(&mut v) > 1e-3).then_some(v)
            })
            .collect(),
    }
}

/// Largest transverse chart distance from the axis through `P₀P₁` to a
/// member of the tube, within the hyperplane through `station` orthogonal
/// (chart-Euclidean) to the axis.
///
/// Each ray is scanned for sign changes of `F`, refined by bisection.
/// Sign changes across a jump of `F` (a step in the world function) are
/// rejected. Grid points with `|F|` within tolerance count as tangential
/// roots, which is how the degenerate axis itself registers (radius 0).
pub fn tube_cross_section_thickness(spec: &TubeSpec, station: &Point, opts: &ThicknessOptions) -> Result<f64> {
    if !spec.is_scalar() {
        return Err(Error::InvalidTube("thickness is defined for tubes, not lines".into()));
    }
    station.ensure_dim(spec.dim())?;
    if opts.rays == 0 || opts.radial_steps == 0 {
        return Err(Error::InvalidParameter {
            name: "rays",
            reason: "rays and radial_steps must be positive".into(),
        });
    }
    let p0 = spec.anchor().coords();
    let mut axis: Vec<f64> = spec
        .p1()
        .coords()
        .iter()
        .zip(spec.p0().coords())
        .map(|(a, b)| a - b)
        .collect();
    let length = normalize(&mut axis);
    if !(length > 0.0) {
        return Err(Error::InvalidTube("P₀ and P₁ coincide".into()));
    }
    let s = station.coords();
    let rel: Vec<f64> = s.iter().zip(p0).map(|(a, b)| a - b).collect();
    let along: f64 = rel.iter().zip(&axis).map(|(a, b)| a * b).sum();
    let off = rel
        .iter()
        .zip(&axis)
        .map(|(r, a)| (r - along * a).powi(2))
        .sum::<f64>()
        .sqrt();
    let reach = s.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
    if off > 1e-9 * reach {
        return Err(Error::InvalidParameter {
            name: "station",
            reason: format!("lies {off:e} off the axis"),
        });
    }
    let max_radius = opts.max_radius.unwrap_or(length);
    let basis = complement(&axis);
    let rays: Vec<Vec<f64>> = directions(basis.len(), opts.rays)
        .into_iter()
        .map(|d| {
            (0..s.len())
                .map(|i| d.iter().zip(&basis).map(|(w, b)| w * b[i]).sum())
                .collect()
        })
        .collect();
    let radii: Vec<f64> = rays
        .par_iter()
        .map(|u| ray_extent(spec, s, u, max_radius, opts))
        .collect::<Result<_>>()?;
    Ok(radii.into_iter().fold(0.0, f64::max))
}

fn ray_extent(spec: &TubeSpec, s: &[f64], u: &[f64], max_radius: f64, opts: &ThicknessOptions) -> Result<f64> {
    let at = |r: f64| -> Result<(f64, f64)> {
        let p: Vec<f64> = s.iter().zip(u).map(|(a, b)| a + r * b).collect();
        spec.value_and_scale(&p)
    };
    let h = max_radius / opts.radial_steps as f64;
    let mut best = f64::NEG_INFINITY;
    let (mut prev_f, prev_scale) = at(0.0)?;
    if prev_f.abs() <= opts.tol * prev_scale {
        best = 0.0;
    }
    for j in 1..=opts.radial_steps {
        let r = j as f64 * h;
        let (f, scale) = at(r)?;
        if f.abs() <= opts.tol * scale {
            best = best.max(r);
        } else if prev_f != 0.0 && f.signum() != prev_f.signum() {
            let (mut lo, mut hi) = (r - h, r);
            let (mut flo, mut fhi) = (prev_f, f);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let (fm, _) = at(mid)?;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    flo = 0.0;
                    fhi = 0.0;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                    fhi = fm;
                }
            }
            let (_, local_scale) = at(0.5 * (lo + hi))?;
            if flo.abs().max(fhi.abs()) <= 1e-8 * local_scale {
                best = best.max(0.5 * (lo + hi));
            }
        }
        prev_f = f;
    }
    Ok(best.max(0.0))
}
