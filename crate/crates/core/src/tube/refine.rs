use nalgebra::{DMatrix, DVector};

use super::spec::TubeSpec;
use crate::diff;
use crate::error::Result;
use crate::linalg;

/// A point moved onto (or near) the zero set.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Refined {
    pub x: Vec<f64>,
    /// Residual relative to its magnitude scale.
    pub relative: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct RefineOptions {
    pub max_iterations: usize,
    /// Largest step, in chart units.
    pub max_step: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn clip(step: &mut [f64], max: f64) {
    let n = norm(step);
    if n > max {
        step.iter_mut().for_each(|c| *c *= max / n);
    }
}

fn add(x: &[f64], d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + b).collect()
}

/// Whether the nonzero eigenvalues share a sign; eigenvalues below
/// `rel · max|λ|` count as zero.
pub(crate) fn semidefinite(eigenvalues: &[f64], rel: f64) -> bool {
    let top = eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let cut = rel * top;
    let pos = eigenvalues.iter().any(|&e| e > cut);
    let neg = eigenvalues.iter().any(|&e| e < -cut);
    top > 0.0 && !(pos && neg)
}

/// Projects onto `F = 0` by Newton steps along the gradient.
///
/// Near a semidefinite critical set `F` is quadratic and the gradient step
/// only halves the distance. When progress stalls like that, a
/// pseudo-inverse Hessian step on `∇F` is tried as well and the better of
/// the two is kept.
fn project_scalar(spec: &TubeSpec, start: &[f64], opts: &RefineOptions) -> Result<Refined> {
    let value = |p: &[f64]| spec.value(p);
    let mut x = start.to_vec();
    let (mut f, mut scale) = spec.value_and_scale(&x)?;
    for _ in 0..opts.max_iterations {
        if f == 0.0 {
            break;
        }
        let g = diff::gradient(value, &x)?;
        let g2: f64 = g.iter().map(|c| c * c).sum();
        let mut best: Option<(Vec<f64>, f64)> = None;
        if g2 > 0.0 {
            let mut d: Vec<f64> = g.iter().map(|c| -f * c / g2).collect();
            clip(&mut d, opts.max_step);
            let xn = add(&x, &d);
            if let Ok(fnew) = value(&xn) {
                best = Some((xn, fnew));
            }
        }
        let slow = best.as_ref().is_none_or(|(_, fnew)| fnew.abs() > 0.1 * f.abs());
        if slow {
            let h = diff::hessian(value, &x)?;
            let ev = linalg::symmetric_eigenvalues(&h);
            if semidefinite(&ev, 1e-6) {
                let gv = DVector::from_column_slice(&g);
                let mut d: Vec<f64> = linalg::lstsq(&h, &(-gv), 1e-6).iter().copied().collect();
                clip(&mut d, opts.max_step);
                let xh = add(&x, &d);
                if let Ok(fh) = value(&xh) {
                    if best.as_ref().is_none_or(|(_, fb)| fh.abs() < fb.abs()) {
                        best = Some((xh, fh));
                    }
                }
            }
        }
        match best {
            Some((xb, fb)) if fb.abs() < f.abs() => {
                x = xb;
                let (fv, s) = spec.value_and_scale(&x)?;
                f = fv;
                scale = s;
            }
            _ => break,
        }
    }
    Ok(Refined {
        relative: if scale > 0.0 { f.abs() / scale } else { f.abs() },
        residual: f,
        x,
    })
}

/// Central-difference Jacobian of the residual vector.
pub(crate) fn jacobian(spec: &TubeSpec, x: &[f64]) -> Result<DMatrix<f64>> {
    let n = x.len();
    let m = spec.aux().len().max(1);
    let mut j = DMatrix::zeros(m, n);
    let mut probe = x.to_vec();
    for c in 0..n {
        let h = diff::first_step(x[c]);
        probe[c] = x[c] + h;
        let up = probe[c];
        let (fp, _) = spec.residuals(&probe)?;
        probe[c] = x[c] - h;
        let down = probe[c];
        let (fm, _) = spec.residuals(&probe)?;
        probe[c] = x[c];
        for r in 0..m {
            j[(r, c)] = (fp[r] - fm[r]) / (up - down);
        }
    }
    Ok(j)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
}

/// Damped Gauss–Newton with minimum-norm steps on `(f_2, …, f_n)`.
fn project_vector(spec: &TubeSpec, start: &[f64], opts: &RefineOptions) -> Result<Refined> {
    let mut x = start.to_vec();
    let (mut f, mut scale) = spec.residuals(&x)?;
    for _ in 0..opts.max_iterations {
        let current = max_abs(&f);
        if current == 0.0 {
            break;
        }
        let j = jacobian(spec, &x)?;
        let mut d: Vec<f64> = linalg::lstsq(&j, &(-DVector::from_column_slice(&f)), 1e-10)
            .iter()
            .copied()
            .collect();
        clip(&mut d, opts.max_step);
        let mut lambda = 1.0;
        let mut moved = false;
        while lambda >= 1.0 / 64.0 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + lambda * b).collect();
            if let Ok((ft, st)) = spec.residuals(&trial) {
                if max_abs(&ft) < current {
                    x = trial;
                    f = ft;
                    scale = st;
                    moved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let worst = f
        .iter()
        .copied()
        .fold(0.0, |m: f64, c| if c.abs() > m.abs() { c } else { m });
    Ok(Refined {
        relative: if scale > 0.0 { worst.abs() / scale } else { worst.abs() },
        residual: worst,
        x,
    })
}

/// Moves `start` onto the zero set of the spec.
pub(crate) fn project(spec: &TubeSpec, start: &[f64], opts: &RefineOptions) -> Result<Refined> {
    if spec.is_scalar() {
        project_scalar(spec, start, opts)
    } else {
        project_vector(spec, start, opts)
    }
}
