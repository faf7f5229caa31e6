use super::metric::MetricField;
use crate::diff;
use crate::error::Result;
use crate::point::Point;
use crate::world::WorldFunction;

/// `σ_i(x, x') = ∂σ(x, x')/∂x^i` by central differences in the first
/// argument. The Riemannian vector from `x` to `x'` is its negation.
pub fn sigma_gradient(sigma: &WorldFunction, x: &Point, xprime: &Point) -> Result<Vec<f64>> {
    x.ensure_dim(sigma.dim())?;
    xprime.ensure_dim(sigma.dim())?;
    diff::gradient(|p| sigma.eval_coords(p, xprime.coords()), x.coords())
}

/// `g^ik(x) σ_i(x, x') σ_k(x, x'')` for two vectors sharing the origin `x`.
pub fn riemannian_scalar_product(
    metric: &MetricField,
    sigma: &WorldFunction,
    x: &Point,
    xprime: &Point,
    xsecond: &Point,
) -> Result<f64> {
    let a = sigma_gradient(sigma, x, xprime)?;
    let b = sigma_gradient(sigma, x, xsecond)?;
    metric.inverse_product(x, &a, &b)
}
