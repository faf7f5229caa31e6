use serde::{Deserialize, Serialize};

use super::refine::{jacobian, project, semidefinite, RefineOptions};
use super::spec::TubeSpec;
use crate::diff;
use crate::error::{Error, Result};
use crate::linalg;
use crate::point::Point;

/// How a local dimension was determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GradientRank,
    HessianNullity,
    LocalPca,
}

/// Full diagnostics of a dimension classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub dimension: usize,
    pub method: Method,
    /// `|∇F|` for tubes, smallest singular value of the Jacobian for lines.
    pub gradient_norm: f64,
    pub gradient_scale: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub hessian_eigenvalues: Vec<f64>,
    /// Band half-width at `ε` over that at `ε/100`: about 10 across a
    /// quadratic (degenerate) zero set, about 100 across a regular one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band_ratio: Option<f64>,
}

/// Relative eigenvalue size treated as zero in a finite-difference Hessian.
const HESSIAN_ZERO: f64 = 1e-5;
/// Required ratio between retained and discarded singular values.
const PCA_GAP: f64 = 10.0;

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.iter().map(|c| c / n).collect()
}

/// Largest `t` with `|F(x + s·u)| ≤ eps` for all sampled `s ≤ t`.
fn band_halfwidth(spec: &TubeSpec, x: &[f64], u: &[f64], eps: f64) -> Result<f64> {
    let at = |t: f64| -> Result<f64> {
        let p: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + t * b).collect();
        Ok(spec.value(&p)?.abs())
    };
    let reach = x.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
    let mut hi = 1e-14 * reach;
    while at(hi)? <= eps {
        hi *= 2.0;
        if hi > reach {
            return Ok(hi);
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? <= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn band_ratio(spec: &TubeSpec, x: &[f64], u: &[f64], scale: f64) -> Result<f64> {
    let eps = 1e-6 * scale;
    let wide = band_halfwidth(spec, x, u, eps)?;
    let narrow = band_halfwidth(spec, x, u, eps / 100.0)?;
    Ok(if narrow > 0.0 { wide / narrow } else { f64::INFINITY })
}

/// Local dimension of the zero set at an on-tube point.
///
/// A nonvanishing gradient means a regular hypersurface (`dim − 1`). At a
/// critical point a semidefinite Hessian gives the dimension as its
/// nullity. Indefinite critical points (cone vertices) and any disagreement
/// with the two-scale band test fall back to local PCA of nearby members.
pub fn classify_dimension(spec: &TubeSpec, point: &Point, tol: f64) -> Result<(usize, Method)> {
    let c = classify_detailed(spec, point, tol)?;
    Ok((c.dimension, c.method))
}

pub fn classify_detailed(spec: &TubeSpec, point: &Point, tol: f64) -> Result<Classification> {
    point.ensure_dim(spec.dim())?;
    let x = point.coords();
    let n = spec.dim();
    let (_, scale) = spec.value_and_scale(x)?;
    let gscale = spec.gradient_scale(scale);
    if !spec.is_scalar() {
        let j = jacobian(spec, x)?;
        let sv = linalg::singular_values(&j);
        let smallest = sv.last().copied().unwrap_or(0.0);
        if smallest > tol * gscale {
            return Ok(Classification {
                dimension: n - sv.len(),
                method: Method::GradientRank,
                gradient_norm: smallest,
                gradient_scale: gscale,
                hessian_eigenvalues: Vec::new(),
                band_ratio: None,
            });
        }
        let dimension = local_pca(spec, x)?;
        return Ok(Classification {
            dimension,
            method: Method::LocalPca,
            gradient_norm: smallest,
            gradient_scale: gscale,
            hessian_eigenvalues: Vec::new(),
            band_ratio: None,
        });
    }
    let value = |p: &[f64]| spec.value(p);
    let g = diff::gradient(value, x)?;
    let gnorm = g.iter().map(|c| c * c).sum::<f64>().sqrt();
    if gnorm > tol * gscale {
        let ratio = band_ratio(spec, x, &unit(&g), scale)?;
        if ratio > 30.0 {
            return Ok(Classification {
                dimension: n - 1,
                method: Method::GradientRank,
                gradient_norm: gnorm,
                gradient_scale: gscale,
                hessian_eigenvalues: Vec::new(),
                band_ratio: Some(ratio),
            });
        }
    }
    let h = diff::hessian(value, x)?;
    let (ev, vecs) = linalg::symmetric_eigen_sorted(&h);
    let top = ev.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if gnorm <= tol * gscale && semidefinite(&ev, HESSIAN_ZERO) {
        let nullity = ev.iter().filter(|e| e.abs() <= HESSIAN_ZERO * top).count();
        let k = (0..n)
            .max_by(|&a, &b| ev[a].abs().total_cmp(&ev[b].abs()))
            .expect("non-empty");
        let u: Vec<f64> = vecs.column(k).iter().copied().collect();
        let ratio = band_ratio(spec, x, &u, scale)?;
        if (3.0..=30.0).contains(&ratio) {
            return Ok(Classification {
                dimension: nullity,
                method: Method::HessianNullity,
                gradient_norm: gnorm,
                gradient_scale: gscale,
                hessian_eigenvalues: ev,
                band_ratio: Some(ratio),
            });
        }
    }
    Ok(Classification {
        dimension: local_pca(spec, x)?,
        method: Method::LocalPca,
        gradient_norm: gnorm,
        gradient_scale: gscale,
        hessian_eigenvalues: ev,
        band_ratio: None,
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Members of the zero set found by projecting seeds from a ball.
fn members_near(spec: &TubeSpec, center: &[f64], radius: f64, count: u32, keep: f64) -> Result<Vec<Vec<f64>>> {
    let n = center.len();
    let opts = RefineOptions {
        max_iterations: 40,
        max_step: radius,
    };
    let mut out = Vec::new();
    for i in 0..count {
        let offset: Vec<f64> = (0..n as u32)
            .map(|d| (2.0 * sobol_burley::sample(i, d, 0x5eed) as f64 - 1.0) * radius)
            .collect();
        let start: Vec<f64> = center.iter().zip(&offset).map(|(a, b)| a + b).collect();
        let r = project(spec, &start, &opts)?;
        if r.relative <= 1e-10 && distance(&r.x, center) <= keep {
            out.push(r.x);
        }
    }
    Ok(out)
}

/// Index of the first singular value gap of at least [`PCA_GAP`], which is
/// the number of retained components.
fn pca_dimension(points: &[Vec<f64>]) -> Result<usize> {
    let n = points[0].len();
    let m = points.len();
    let mean: Vec<f64> = (0..n)
        .map(|c| points.iter().map(|p| p[c]).sum::<f64>() / m as f64)
        .collect();
    let centered = nalgebra::DMatrix::from_fn(m, n, |r, c| points[r][c] - mean[c]);
    let sv = linalg::singular_values(&centered);
    let floor = sv[0] * 1e-12;
    let mut best = (0usize, 0.0_f64);
    for i in 0..sv.len() - 1 {
        let ratio = sv[i] / sv[i + 1].max(floor);
        if ratio > best.1 {
            best = (i + 1, ratio);
        }
    }
    if best.1 >= PCA_GAP {
        Ok(best.0)
    } else {
        Err(Error::DimensionUnresolved { spectrum: sv })
    }
}

/// Dimension from principal components of members in small balls around
/// nearby anchors, so that a cone vertex is judged by the sheets meeting
/// there rather than by the vertex itself.
fn local_pca(spec: &TubeSpec, x: &[f64]) -> Result<usize> {
    let n = x.len();
    let reach = x.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
    let r = 1e-2 * reach;
    let anchors: Vec<Vec<f64>> = members_near(spec, x, r, 64, r)?
        .into_iter()
        .filter(|a| distance(a, x) >= 0.25 * r)
        .take(5)
        .collect();
    let mut votes = vec![0usize; n + 1];
    let mut last_err = None;
    for a in &anchors {
        let rho = distance(a, x) / 20.0;
        let cloud = members_near(spec, a, rho, 48, 2.0 * rho)?;
        if cloud.len() < n + 2 {
            continue;
        }
        match pca_dimension(&cloud) {
            Ok(d) => votes[d] += 1,
            Err(e) => last_err = Some(e),
        }
    }
    let (dim, count) = votes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("non-empty");
    if *count == 0 {
        return Err(last_err.unwrap_or(Error::DimensionUnresolved { spectrum: Vec::new() }));
    }
    Ok(dim)
}
