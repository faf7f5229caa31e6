use std::collections::HashMap;

use parking_lot::RwLock;

use super::geodesic::{geodesic_bvp, BvpOptions, GeodesicSolution};
use super::metric::MetricField;
use crate::error::{Error, Result};
use crate::point::Point;

const CACHE_LIMIT: usize = 1 << 20;

/// `σ_R(x, x') = ½ · sign · L²` from geodesic boundary value solves, memoized
/// per point pair.
///
/// Pairs are put in a canonical order before solving, so `σ(x, x')` and
/// `σ(x', x)` are the same computation and agree bitwise. The memo key is the
/// exact bit pattern of both points.
#[derive(Debug)]
pub struct MetricWorld {
    metric: MetricField,
    options: BvpOptions,
    cache: RwLock<HashMap<Vec<u64>, f64>>,
}

impl MetricWorld {
    pub fn new(metric: MetricField, options: BvpOptions) -> Self {
        Self {
            metric,
            options,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn options(&self) -> &BvpOptions {
        &self.options
    }

    /// The geodesic segment behind `σ(x, x')`, solved in the given order.
    pub fn segment(&self, x: &[f64], xprime: &[f64]) -> Result<GeodesicSolution> {
        geodesic_bvp(
            &self.metric,
            &Point::from_unchecked(x.to_vec()),
            &Point::from_unchecked(xprime.to_vec()),
            &self.options,
        )
    }

    pub fn sigma(&self, x: &[f64], xprime: &[f64]) -> Result<f64> {
        if x == xprime {
            return Ok(0.0);
        }
        let swap = x
            .iter()
            .zip(xprime)
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .is_some_and(|o| o.is_gt());
        let (a, b) = if swap { (xprime, x) } else { (x, xprime) };
        let key: Vec<u64> = a.iter().chain(b).map(|c| c.to_bits()).collect();
        if let Some(&v) = self.cache.read().get(&key) {
            return Ok(v);
        }
        let solution = self.segment(a, b)?;
        if !solution.converged {
            return Err(Error::NoConvergence {
                residual: solution.residual,
            });
        }
        let value = solution.sigma();
        let mut cache = self.cache.write();
        if cache.len() >= CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, value);
        Ok(value)
    }
}
