//! The σ-immanent vector calculus.
//!
//! A vector is an ordered pair of points. Its scalar product with another
//! vector is built from four world-function values only; no coordinates,
//! dimension, or transport path enter.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::euclideanity::{gram_matrix, hadamard_bound};
use crate::point::Point;
use crate::world::WorldFunction;

/// Default relative tolerance for the equality tests in this module.
pub const DEFAULT_TOL: f64 = 1e-9;

/// The vector `P₀P₁`: an ordered pair of points, possibly coincident.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointPairVector {
    pub origin: Point,
    pub head: Point,
}

impl PointPairVector {
    pub fn new(origin: Point, head: Point) -> Result<Self> {
        head.ensure_dim(origin.dim())?;
        Ok(Self { origin, head })
    }

    pub fn reversed(&self) -> Self {
        Self {
            origin: self.head.clone(),
            head: self.origin.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.origin.dim()
    }
}

/// `(P₀P₁.Q₀Q₁) = σ(P₀,Q₁) + σ(P₁,Q₀) − σ(P₀,Q₀) − σ(P₁,Q₁)`.
///
/// Evaluated as a difference of two pair sums, which makes both symmetry
/// and antisymmetry under reversal exact in floating point.
pub fn scalar_product(sigma: &WorldFunction, a: &PointPairVector, b: &PointPairVector) -> Result<f64> {
    let plus = sigma.evaluate(&a.origin, &b.head)? + sigma.evaluate(&a.head, &b.origin)?;
    let minus = sigma.evaluate(&a.origin, &b.origin)? + sigma.evaluate(&a.head, &b.head)?;
    Ok(plus - minus)
}

/// `|a|² = (a.a)`, identically `2σ(origin, head)`.
pub fn squared_norm(sigma: &WorldFunction, a: &PointPairVector) -> Result<f64> {
    scalar_product(sigma, a, a)
}

/// Absolute parallelism `(a.b) = |a|·|b|`.
///
/// Defined only for vectors with real norms; an indefinite (negative)
/// squared norm is an error pointing at [`is_collinear`]. Zero vectors are
/// parallel to everything (the defining equation reads `0 = 0`).
pub fn is_parallel(sigma: &WorldFunction, a: &PointPairVector, b: &PointPairVector, tol: f64) -> Result<bool> {
    let aa = squared_norm(sigma, a)?;
    let bb = squared_norm(sigma, b)?;
    for n in [aa, bb] {
        if n < 0.0 {
            return Err(Error::IndefiniteNorm { squared_norm: n });
        }
    }
    let ab = scalar_product(sigma, a, b)?;
    let norms = aa.sqrt() * bb.sqrt();
    Ok((ab - norms).abs() <= tol * ab.abs().max(norms))
}

/// Residual of the collinearity determinant, `(a.b)² − (a.a)(b.b)`.
pub fn collinearity_residual(sigma: &WorldFunction, a: &PointPairVector, b: &PointPairVector) -> Result<f64> {
    let aa = squared_norm(sigma, a)?;
    let bb = squared_norm(sigma, b)?;
    let ab = scalar_product(sigma, a, b)?;
    Ok(ab * ab - aa * bb)
}

/// Collinearity (parallel or antiparallel) via the Gram determinant
/// `(a.a)(b.b) − (a.b)² = 0`; valid for any signature.
///
/// The residual is normalized by `max(|(a.a)(b.b)|, (a.b)²)`. Two zero
/// vectors, or a zero vector against anything, count as collinear.
pub fn is_collinear(sigma: &WorldFunction, a: &PointPairVector, b: &PointPairVector, tol: f64) -> Result<bool> {
    let aa = squared_norm(sigma, a)?;
    let bb = squared_norm(sigma, b)?;
    let ab = scalar_product(sigma, a, b)?;
    let residual = ab * ab - aa * bb;
    Ok(residual.abs() <= tol * (aa * bb).abs().max(ab * ab))
}

fn vec_of(p0: &Point, head: &Point) -> PointPairVector {
    PointPairVector {
        origin: p0.clone(),
        head: head.clone(),
    }
}

/// The 2×2 determinant
/// `f = (P₀P₁.P₀R)(P₀Pₖ.P₀P₁) − (P₀Pₖ.P₀R)(P₀P₁.P₀P₁)`,
/// whose zero set is one of the surfaces cut out by an auxiliary point.
pub fn collinearity_surface_residual(
    sigma: &WorldFunction,
    p0: &Point,
    p1: &Point,
    pk: &Point,
    r: &Point,
) -> Result<f64> {
    let e = vec_of(p0, p1);
    let k = vec_of(p0, pk);
    let x = vec_of(p0, r);
    let ex = scalar_product(sigma, &e, &x)?;
    let kx = scalar_product(sigma, &k, &x)?;
    let ee = scalar_product(sigma, &e, &e)?;
    let ke = scalar_product(sigma, &k, &e)?;
    Ok(ex * ke - kx * ee)
}

/// Outcome of fitting `(P₀Pᵢ.P₀R) = a (P₀Pᵢ.P₀P₁)` over a basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProportionalFit {
    /// Least-squares proportionality constant.
    pub a: f64,
    /// Largest relation residual, relative to the relation magnitudes.
    pub max_residual: f64,
    /// All relations hold with a single constant within tolerance.
    pub consistent: bool,
}

/// Checks the component form of collinearity: a single constant `a` with
/// `(P₀Pᵢ.P₀R) = a (P₀Pᵢ.P₀P₁)` for every basis vector `P₀Pᵢ`, where
/// `basis[0]` is `P₁`.
///
/// `a` comes from a least-squares fit, independently of the determinant
/// route in [`collinearity_surface_residual`]. `a = 0` (R at P₀) is
/// reported as consistent, matching the vanishing determinants.
pub fn proportional_components_check(
    sigma: &WorldFunction,
    p0: &Point,
    basis: &[Point],
    r: &Point,
    tol: f64,
) -> Result<ProportionalFit> {
    let Some(p1) = basis.first() else {
        return Err(Error::InsufficientPoints { needed: 1, found: 0 });
    };
    let gram = gram_matrix(sigma, p0, basis)?;
    let det = gram.determinant();
    if !(det.abs() > 1e-12 * hadamard_bound(&gram)) {
        return Err(Error::DegenerateBasis { determinant: det });
    }
    let e = vec_of(p0, p1);
    let x = vec_of(p0, r);
    let mut lhs = Vec::with_capacity(basis.len());
    let mut rhs = Vec::with_capacity(basis.len());
    for pi in basis {
        let v = vec_of(p0, pi);
        lhs.push(scalar_product(sigma, &v, &x)?);
        rhs.push(scalar_product(sigma, &v, &e)?);
    }
    let num: f64 = lhs.iter().zip(&rhs).map(|(u, v)| u * v).sum();
    let den: f64 = rhs.iter().map(|v| v * v).sum();
    let a = num / den;
    let scale = lhs
        .iter()
        .chain(rhs.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let max_residual = lhs
        .iter()
        .zip(&rhs)
        .map(|(u, v)| (u - a * v).abs() / (scale * a.abs().max(1.0)))
        .fold(0.0_f64, f64::max);
    Ok(ProportionalFit {
        a,
        max_residual,
        consistent: max_residual <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    fn v(a: Point, b: Point) -> PointPairVector {
        PointPairVector::new(a, b).unwrap()
    }

    fn e2() -> WorldFunction {
        WorldFunction::euclidean_identity(2).unwrap()
    }

    #[test]
    fn scalar_product_examples() {
        let s = e2();
        let a = v(pt![0, 0], pt![1, 0]);
        let b = v(pt![0, 1], pt![1, 1]);
        assert_eq!(scalar_product(&s, &a, &b).unwrap(), 1.0);
        let z = v(pt![2, 3], pt![2, 3]);
        assert_eq!(scalar_product(&s, &z, &b).unwrap(), 0.0);
        let m = WorldFunction::minkowski();
        let t = v(pt![0, 0, 0, 0], pt![1, 0, 0, 0]);
        assert_eq!(scalar_product(&m, &t, &t).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(PointPairVector::new(pt![0, 0], pt![0, 0, 0]).is_err());
        let a = v(pt![0, 0, 0], pt![1, 0, 0]);
        assert!(matches!(
            scalar_product(&e2(), &a, &a),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn squared_norm_examples() {
        assert_eq!(squared_norm(&e2(), &v(pt![0, 0], pt![3, 4])).unwrap(), 25.0);
        let m = WorldFunction::minkowski();
        assert_eq!(squared_norm(&m, &v(pt![0, 0, 0, 0], pt![0, 1, 0, 0])).unwrap(), -1.0);
        assert_eq!(squared_norm(&m, &v(pt![1, 2, 3, 4], pt![1, 2, 3, 4])).unwrap(), 0.0);
    }

    #[test]
    fn parallel_examples() {
        let s = e2();
        let a = v(pt![0, 0], pt![1, 0]);
        assert!(is_parallel(&s, &a, &v(pt![0, 5], pt![2, 5]), DEFAULT_TOL).unwrap());
        assert!(!is_parallel(&s, &a, &v(pt![2, 5], pt![0, 5]), DEFAULT_TOL).unwrap());
        assert!(!is_parallel(&s, &a, &v(pt![0, 0], pt![0, 1]), DEFAULT_TOL).unwrap());
        // zero vector: degenerate, 0 = 0
        assert!(is_parallel(&s, &v(pt![1, 1], pt![1, 1]), &a, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn parallel_rejects_spacelike() {
        let m = WorldFunction::minkowski();
        let e = v(pt![0, 0, 0, 0], pt![0, 1, 0, 0]);
        assert!(matches!(
            is_parallel(&m, &e, &e, DEFAULT_TOL),
            Err(Error::IndefiniteNorm { squared_norm }) if squared_norm == -1.0
        ));
    }

    #[test]
    fn collinear_examples() {
        let m = WorldFunction::minkowski();
        let o = pt![0, 0, 0, 0];
        let e = v(o.clone(), pt![0, 1, 0, 0]);
        let x = v(o.clone(), pt![1, 2, 0.5, 3f64.sqrt() / 2.0]);
        assert!(is_collinear(&m, &e, &x, DEFAULT_TOL).unwrap());
        let e = v(o.clone(), pt![1, 0, 0, 0]);
        let x = v(o.clone(), pt![2, 0.1, 0, 0]);
        assert!(!is_collinear(&m, &e, &x, DEFAULT_TOL).unwrap());
        assert!((collinearity_residual(&m, &e, &x).unwrap() - 0.01).abs() < 1e-12);
        let s = e2();
        assert!(is_collinear(&s, &v(pt![0, 0], pt![1, 0]), &v(pt![0, 0], pt![2, 0]), DEFAULT_TOL).unwrap());
        // antiparallel counts as collinear
        assert!(is_collinear(&s, &v(pt![0, 0], pt![1, 0]), &v(pt![0, 0], pt![-3, 0]), DEFAULT_TOL).unwrap());
    }

    #[test]
    fn surface_residual_examples() {
        let s = e2();
        let (p0, p1, pk) = (pt![0, 0], pt![1, 0], pt![0, 1]);
        assert_eq!(
            collinearity_surface_residual(&s, &p0, &p1, &pk, &pt![2, 0]).unwrap(),
            0.0
        );
        assert_eq!(collinearity_surface_residual(&s, &p0, &p1, &pk, &p0).unwrap(), 0.0);
        let r = pt![1, 1];
        let got = collinearity_surface_residual(&s, &p0, &p1, &pk, &r).unwrap();
        // oracle: plain dot products of displacement vectors
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        let (e, k, x) = ([1.0, 0.0], [0.0, 1.0], [1.0, 1.0]);
        let oracle = dot(e, x) * dot(k, e) - dot(k, x) * dot(e, e);
        assert_eq!(oracle, -1.0);
        assert_eq!(got, oracle);
    }

    #[test]
    fn proportional_examples() {
        let s = e2();
        let basis = [pt![1, 0], pt![0, 1]];
        let fit = proportional_components_check(&s, &pt![0, 0], &basis, &pt![3, 0], DEFAULT_TOL).unwrap();
        assert!(fit.consistent);
        assert!((fit.a - 3.0).abs() < 1e-14);
        let fit = proportional_components_check(&s, &pt![0, 0], &basis, &pt![1, 1], DEFAULT_TOL).unwrap();
        assert!(!fit.consistent);

        let s3 = WorldFunction::euclidean_identity(3).unwrap();
        let basis = [pt![1, 0, 0], pt![0, 1, 0], pt![0, 0, 1]];
        let fit = proportional_components_check(&s3, &pt![0, 0, 0], &basis, &pt![2, 0, 0], DEFAULT_TOL).unwrap();
        assert!(fit.consistent);
        assert!((fit.a - 2.0).abs() < 1e-14);
    }

    #[test]
    fn proportional_rejects_degenerate_basis() {
        let s = e2();
        let basis = [pt![1, 0], pt![2, 0]];
        assert!(matches!(
            proportional_components_check(&s, &pt![0, 0], &basis, &pt![3, 0], DEFAULT_TOL),
            Err(Error::DegenerateBasis { .. })
        ));
    }
}
