use nalgebra::{Matrix4x3, Vector3, Vector4};
use serde::Serialize;

use crate::error::Result;
use crate::point::Point;

/// Parameters of `x = (a, τ, a cos ψ, a sin ψ)`, the spacelike tube through
/// the origin along `e = (0, 1, 0, 0)` in Minkowski space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyFit {
    pub a: f64,
    pub tau: f64,
    pub psi: f64,
    /// Chart distance between `x` and the fitted family member.
    pub residual: f64,
}

pub fn spacelike_family_point(a: f64, tau: f64, psi: f64) -> Point {
    let (s, c) = psi.sin_cos();
    Point::from_unchecked(vec![a, tau, a * c, a * s])
}

fn model(p: &Vector3<f64>) -> Vector4<f64> {
    let (s, c) = p[2].sin_cos();
    Vector4::new(p[0], p[1], p[0] * c, p[0] * s)
}

/// Nonlinear least-squares fit of `(a, τ, ψ)` to a 4-point, started from
/// `a = x⁰`, `τ = x¹`, `ψ = atan2(x³/a, x²/a)`.
pub fn fit_spacelike_family(x: &Point) -> Result<FamilyFit> {
    x.ensure_dim(4)?;
    let c = x.coords();
    let target = Vector4::new(c[0], c[1], c[2], c[3]);
    let sign = if c[0] < 0.0 { -1.0 } else { 1.0 };
    let mut p = Vector3::new(c[0], c[1], (sign * c[3]).atan2(sign * c[2]));
    let mut r = target - model(&p);
    for _ in 0..30 {
        let (s, co) = p[2].sin_cos();
        let j = Matrix4x3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, co, 0.0, -p[0] * s, s, 0.0, p[0] * co);
        let Some(step) = j.svd(true, true).solve(&r, 1e-14).ok() else {
            break;
        };
        let trial = p + step;
        let tr = target - model(&trial);
        if tr.norm() >= r.norm() {
            break;
        }
        p = trial;
        r = tr;
    }
    Ok(FamilyFit {
        a: p[0],
        tau: p[1],
        psi: p[2],
        residual: r.norm(),
    })
}
