//! Axis-aligned chart boxes and low-discrepancy seeds inside them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

/// A bounded box `min[i] ≤ x^i ≤ max[i]` in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Region {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        let r = Self { min, max };
        r.validate()?;
        Ok(r)
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn validate(&self) -> Result<()> {
        if self.min.len() != self.max.len() || self.min.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                found: self.max.len(),
            });
        }
        for (a, b) in self.min.iter().zip(&self.max) {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "region",
                    reason: format!("need finite min < max per axis, got [{a}, {b}]"),
                });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .all(|(c, (a, b))| (a..=b).contains(&c))
    }

    pub fn diameter(&self) -> f64 {
        self.min
            .iter()
            .zip(&self.max)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    /// Maps a unit-cube sample into the box.
    pub fn scale(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(u, (a, b))| a + u * (b - a))
            .collect()
    }

    /// The `index`-th point of an Owen-scrambled Sobol sequence in the box.
    pub fn sobol_point(&self, index: u32, seed: u64) -> Point {
        let scramble = (seed ^ (seed >> 32)) as u32;
        let unit: Vec<f64> = (0..self.dim() as u32)
            .map(|d| sobol_burley::sample(index, d, scramble) as f64)
            .collect();
        Point::from_unchecked(self.scale(&unit))
    }
}
