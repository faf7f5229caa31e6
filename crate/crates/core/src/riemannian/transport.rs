use serde::Serialize;

use super::geodesic::{geodesic_bvp, BvpOptions};
use super::metric::MetricField;
use crate::error::{Error, Result};
use crate::point::Point;

/// Covariant components after transport along a polyline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportResult {
    pub components: Vec<f64>,
    pub path_used: Vec<Point>,
    /// Largest relative deviation of `g^ik u_i u_k` from its initial value.
    pub norm_drift: f64,
}

fn rate(metric: &MetricField, x: &[f64], dx: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let n = metric.dim();
    let gamma = metric.christoffel(&Point::from_unchecked(x.to_vec()))?;
    Ok((0..n)
        .map(|i| {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += gamma.get(k, i, l) * u[k] * dx[l];
                }
            }
            acc
        })
        .collect())
}

/// Transports a covector along a chart polyline, integrating
/// `du_i = Γ^k_il u_k dx^l` with `steps_per_segment` RK4 substeps per edge.
///
/// This is the sign that keeps `g^ik u_i u_k` constant for covariant
/// components; a singular metric anywhere on an edge rejects that edge.
pub fn parallel_transport(
    metric: &MetricField,
    u0: &[f64],
    path: &[Point],
    steps_per_segment: usize,
) -> Result<TransportResult> {
    let n = metric.dim();
    if u0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: u0.len(),
        });
    }
    if path.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, found: 0 });
    }
    if steps_per_segment == 0 {
        return Err(Error::InvalidParameter {
            name: "steps_per_segment",
            reason: "must be positive".into(),
        });
    }
    for p in path {
        p.ensure_dim(n)?;
    }
    let norm = |x: &[f64], u: &[f64]| metric.inverse_product(&Point::from_unchecked(x.to_vec()), u, u);
    let mut u = u0.to_vec();
    let norm0 = norm(path[0].coords(), &u).map_err(|e| on_segment(e, 0))?;
    let mut drift: f64 = 0.0;
    for (segment, edge) in path.windows(2).enumerate() {
        let (a, b) = (edge[0].coords(), edge[1].coords());
        let d: Vec<f64> = (0..n).map(|i| b[i] - a[i]).collect();
        let h = 1.0 / steps_per_segment as f64;
        let at = |t: f64| -> Vec<f64> { (0..n).map(|i| a[i] + t * d[i]).collect() };
        let shifted = |u: &[f64], k: &[f64], c: f64| -> Vec<f64> { u.iter().zip(k).map(|(u, k)| u + c * k).collect() };
        for s in 0..steps_per_segment {
            let t = s as f64 * h;
            let step = || -> Result<Vec<f64>> {
                let k1 = rate(metric, &at(t), &d, &u)?;
                let k2 = rate(metric, &at(t + 0.5 * h), &d, &shifted(&u, &k1, 0.5 * h))?;
                let k3 = rate(metric, &at(t + 0.5 * h), &d, &shifted(&u, &k2, 0.5 * h))?;
                let k4 = rate(metric, &at(t + h), &d, &shifted(&u, &k3, h))?;
                Ok((0..n)
                    .map(|i| u[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
                    .collect())
            };
            u = step().map_err(|e| on_segment(e, segment))?;
        }
        let now = norm(b, &u).map_err(|e| on_segment(e, segment))?;
        let scale = norm0.abs().max(f64::MIN_POSITIVE);
        drift = drift.max((now - norm0).abs() / scale);
    }
    Ok(TransportResult {
        components: u,
        path_used: path.to_vec(),
        norm_drift: drift,
    })
}

fn on_segment(e: Error, segment: usize) -> Error {
    match e {
        Error::SingularMetric { point, condition } => Error::SingularPath {
            segment,
            point,
            condition,
        },
        other => other,
    }
}

/// Polyline through `corners` whose edges are geodesic segments of the
/// metric, resolved into the solver's nodes. Each edge starts where the
/// previous one ended, so periodic coordinates unwrap continuously.
pub fn geodesic_polyline(metric: &MetricField, corners: &[Point], options: &BvpOptions) -> Result<Vec<Point>> {
    let Some(first) = corners.first() else {
        return Err(Error::InsufficientPoints { needed: 1, found: 0 });
    };
    let mut out = vec![first.clone()];
    for corner in &corners[1..] {
        let from = out.last().expect("polyline starts with a corner").clone();
        let sol = geodesic_bvp(metric, &from, corner, options)?;
        if !sol.converged {
            return Err(Error::NoConvergence { residual: sol.residual });
        }
        out.extend(
            sol.path[1..]
                .iter()
                .map(|node| Point::from_unchecked(node.point.clone())),
        );
    }
    Ok(out)
}

/// Angle between two covectors at `x` under `g^ik`.
pub fn covector_angle(metric: &MetricField, x: &Point, u: &[f64], w: &[f64]) -> Result<f64> {
    let uw = metric.inverse_product(x, u, w)?;
    let uu = metric.inverse_product(x, u, u)?;
    let ww = metric.inverse_product(x, w, w)?;
    let c = (uw / (uu * ww).sqrt()).clamp(-1.0, 1.0);
    if metric.dim() == 2 {
        // sin from the orientation form of g^ik keeps small angles accurate.
        let ginv = metric.inverse_at(x.coords())?;
        let s = (u[0] * w[1] - u[1] * w[0]) * ginv.determinant().sqrt() / (uu * ww).sqrt();
        return Ok(s.atan2(c).abs());
    }
    Ok(c.acos())
}

/// Samples a chart polyline through `corners`, splitting each edge into
/// `per_edge` pieces.
pub fn densify(corners: &[Point], per_edge: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(corners.len().saturating_sub(1) * per_edge + 1);
    for edge in corners.windows(2) {
        let (a, b) = (edge[0].coords(), edge[1].coords());
        for k in 0..per_edge {
            let t = k as f64 / per_edge as f64;
            out.push(Point::from_unchecked(
                a.iter().zip(b).map(|(a, b)| a + t * (b - a)).collect(),
            ));
        }
    }
    if let Some(last) = corners.last() {
        out.push(last.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;
    use std::f64::consts::PI;

    #[test]
    fn flat_loop_is_identity() {
        let m = MetricField::flat(2).unwrap();
        let path = vec![pt![0, 0], pt![1, 0], pt![1, 1], pt![0, 0]];
        let r = parallel_transport(&m, &[0.3, -0.7], &path, 8).unwrap();
        assert_eq!(r.components, vec![0.3, -0.7]);
    }

    #[test]
    fn out_and_back_restores() {
        let m = MetricField::sphere(1.0).unwrap();
        let path = densify(&[pt![0.5, 0.2], pt![1.4, 0.2], pt![0.5, 0.2]], 50);
        let u0 = [0.2, 0.6];
        let r = parallel_transport(&m, &u0, &path, 4).unwrap();
        for (a, b) in r.components.iter().zip(u0) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn latitude_circle_rotation() {
        // Closed-form holonomy of a latitude circle: 2π(1 − cos θ).
        let m = MetricField::sphere(1.0).unwrap();
        let theta = 1.0_f64;
        let corners: Vec<Point> = (0..=4).map(|k| pt![theta, k as f64 * PI / 2.0]).collect();
        let r = parallel_transport(&m, &[1.0, 0.0], &corners, 400).unwrap();
        let angle = covector_angle(&m, &pt![theta, 0], &[1.0, 0.0], &r.components).unwrap();
        let expected = 2.0 * PI * (1.0 - theta.cos());
        let wrapped = expected.min(2.0 * PI - expected);
        assert!((angle - wrapped).abs() < 1e-8, "{angle} vs {wrapped}");
        assert!(r.norm_drift < 1e-8);
    }

    #[test]
    fn singular_segment_reported() {
        let m = MetricField::sphere(1.0).unwrap();
        let path = vec![pt![0.5, 0], pt![0, 0]];
        match parallel_transport(&m, &[1.0, 0.0], &path, 4) {
            Err(Error::SingularPath { segment, .. }) => assert_eq!(segment, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn geodesic_octant_rotates_quarter_turn() {
        // Orthonormal triad at equal colatitude acos(1/√3); its geodesic
        // triangle is an octant of area π/2 around the pole.
        let m = MetricField::sphere(1.0).unwrap();
        let theta = (1.0 / 3f64.sqrt()).acos();
        let corners: Vec<Point> = (0..=3).map(|k| pt![theta, k as f64 * 2.0 * PI / 3.0]).collect();
        let path = geodesic_polyline(&m, &corners, &BvpOptions::default()).unwrap();
        let end = path.last().unwrap().coords();
        assert!(m
            .reduced_difference(corners[0].coords(), end)
            .iter()
            .all(|d| d.abs() < 1e-8));
        let r = parallel_transport(&m, &[1.0, 0.0], &densify(&path, 4), 4).unwrap();
        let angle = covector_angle(&m, &corners[0], &[1.0, 0.0], &r.components).unwrap();
        assert!((angle - PI / 2.0).abs() < 1e-4, "{angle}");
        assert!(r.norm_drift < 1e-8);
    }
}
