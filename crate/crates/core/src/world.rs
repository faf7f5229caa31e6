//! World functions: the single datum defining a geometry.
//!
//! A world function `σ(P, Q)` is half the squared "distance" between two
//! points. Every built-in here satisfies `σ(P, P) = 0` and `σ(P, Q) = σ(Q, P)`
//! exactly in floating point, and evaluation is deterministic.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::point::Point;
use crate::riemannian::{BvpOptions, MetricField, MetricWorld};

/// Kind tag of a world function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Euclidean,
    Minkowski,
    DistortedMinkowski,
    Sphere,
    NumericRiemannian,
}

#[derive(Debug, Clone)]
enum Geometry {
    /// Constant metric, row-major.
    Euclidean {
        metric: Vec<f64>,
    },
    Minkowski,
    DistortedMinkowski {
        distortion: f64,
        sigma0: f64,
    },
    /// Colatitude/longitude chart.
    Sphere {
        radius: f64,
    },
    Riemannian(Arc<MetricWorld>),
}

/// An immutable, cheaply clonable world function.
#[derive(Debug, Clone)]
pub struct WorldFunction {
    dim: usize,
    geometry: Geometry,
}

/// Kind-specific parameters of a world function, as exposed to reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WorldParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub distortion: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
}

impl WorldFunction {
    /// `σ(x, x') = ½ g_ik (x^i − x'^i)(x^k − x'^k)` for a constant symmetric
    /// positive-definite `metric` given row-major.
    pub fn euclidean(dim: usize, metric: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "must be positive".into(),
            });
        }
        if metric.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: metric.len(),
            });
        }
        check_symmetric(dim, metric)?;
        let ev = linalg::symmetric_eigenvalues(&linalg::square_from_row_major(dim, metric));
        if let Some(&bad) = ev.iter().find(|&&e| !(e > 0.0)) {
            return Err(Error::NotPositiveDefinite { eigenvalue: bad });
        }
        Ok(Self {
            dim,
            geometry: Geometry::Euclidean {
                metric: metric.to_vec(),
            },
        })
    }

    /// Euclidean world function with the identity metric.
    pub fn euclidean_identity(dim: usize) -> Result<Self> {
        let mut m = vec![0.0; dim * dim];
        for i in 0..dim {
            m[i * dim + i] = 1.0;
        }
        Self::euclidean(dim, &m)
    }

    /// Minkowski space-time, signature (+, −, −, −).
    pub fn minkowski() -> Self {
        Self {
            dim: 4,
            geometry: Geometry::Minkowski,
        }
    }

    /// `σ = σ_M + D` where `σ_M > σ₀`, and `σ = σ_M` elsewhere (sharp step).
    pub fn distorted_minkowski(distortion: f64, sigma0: f64) -> Result<Self> {
        if !(distortion >= 0.0) || !distortion.is_finite() {
            return Err(Error::InvalidParameter {
                name: "D",
                reason: format!("must be finite and nonnegative, got {distortion}"),
            });
        }
        if !(sigma0 >= 0.0) || !sigma0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma0",
                reason: format!("must be finite and nonnegative, got {sigma0}"),
            });
        }
        Ok(Self {
            dim: 4,
            geometry: Geometry::DistortedMinkowski { distortion, sigma0 },
        })
    }

    /// Sphere of the given radius in colatitude/longitude coordinates:
    /// `σ = ½ (radius · Θ)²` with `Θ` the central angle.
    pub fn sphere(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter {
                name: "radius",
                reason: format!("must be finite and positive, got {radius}"),
            });
        }
        Ok(Self {
            dim: 2,
            geometry: Geometry::Sphere { radius },
        })
    }

    /// World function of a metric field, `σ = ½ (∫ √(g dx dx))²` along the
    /// geodesic segment found by the boundary-value solver.
    pub fn from_metric(metric: MetricField) -> Self {
        Self::from_metric_with(metric, BvpOptions::default())
    }

    pub fn from_metric_with(metric: MetricField, options: BvpOptions) -> Self {
        Self {
            dim: metric.dim(),
            geometry: Geometry::Riemannian(Arc::new(MetricWorld::new(metric, options))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> Kind {
        match self.geometry {
            Geometry::Euclidean { .. } => Kind::Euclidean,
            Geometry::Minkowski => Kind::Minkowski,
            Geometry::DistortedMinkowski { .. } => Kind::DistortedMinkowski,
            Geometry::Sphere { .. } => Kind::Sphere,
            Geometry::Riemannian(_) => Kind::NumericRiemannian,
        }
    }

    pub fn params(&self) -> WorldParams {
        match &self.geometry {
            Geometry::Euclidean { metric } => WorldParams {
                metric: Some(metric.clone()),
                ..Default::default()
            },
            Geometry::Minkowski => WorldParams::default(),
            Geometry::DistortedMinkowski { distortion, sigma0 } => WorldParams {
                distortion: Some(*distortion),
                sigma0: Some(*sigma0),
                ..Default::default()
            },
            Geometry::Sphere { radius } => WorldParams {
                radius: Some(*radius),
                ..Default::default()
            },
            Geometry::Riemannian(w) => WorldParams {
                metric: w.metric().constant_matrix().map(<[f64]>::to_vec),
                radius: w.metric().sphere_radius(),
                ..Default::default()
            },
        }
    }

    /// The metric field behind a numeric Riemannian world function.
    pub fn metric_field(&self) -> Option<&MetricField> {
        match &self.geometry {
            Geometry::Riemannian(w) => Some(w.metric()),
            _ => None,
        }
    }

    /// Evaluates `σ(p, q)`.
    pub fn evaluate(&self, p: &Point, q: &Point) -> Result<f64> {
        p.ensure_dim(self.dim)?;
        q.ensure_dim(self.dim)?;
        self.eval_coords(p.coords(), q.coords())
    }

    /// Evaluates on raw coordinates whose length has already been checked.
    pub(crate) fn eval_coords(&self, p: &[f64], q: &[f64]) -> Result<f64> {
        match &self.geometry {
            Geometry::Euclidean { metric } => Ok(quadratic(self.dim, metric, p, q)),
            Geometry::Minkowski => Ok(minkowski(p, q)),
            Geometry::DistortedMinkowski { distortion, sigma0 } => {
                let s = minkowski(p, q);
                Ok(if s > *sigma0 { s + distortion } else { s })
            }
            Geometry::Sphere { radius } => {
                let theta = central_angle(p, q);
                let arc = radius * theta;
                Ok(0.5 * arc * arc)
            }
            Geometry::Riemannian(w) => w.sigma(p, q),
        }
    }
}

fn check_symmetric(dim: usize, m: &[f64]) -> Result<()> {
    for row in 0..dim {
        for col in row + 1..dim {
            let (upper, lower) = (m[row * dim + col], m[col * dim + row]);
            let scale = upper.abs().max(lower.abs()).max(f64::MIN_POSITIVE);
            if (upper - lower).abs() > 1e-12 * scale || !upper.is_finite() || !lower.is_finite() {
                return Err(Error::NonSymmetricMetric { row, col, upper, lower });
            }
        }
    }
    Ok(())
}

// Products d_i d_k are invariant under d -> -d, so swapping arguments is exact.
fn quadratic(dim: usize, metric: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..dim {
        let di = p[i] - q[i];
        for k in 0..dim {
            let g = metric[i * dim + k];
            if g != 0.0 {
                acc += g * (di * (p[k] - q[k]));
            }
        }
    }
    0.5 * acc
}

fn minkowski(p: &[f64], q: &[f64]) -> f64 {
    let d: [f64; 4] = std::array::from_fn(|i| p[i] - q[i]);
    0.5 * (d[0] * d[0] - d[1] * d[1] - d[2] * d[2] - d[3] * d[3])
}

fn unit_vector(p: &[f64]) -> [f64; 3] {
    let (st, ct) = p[0].sin_cos();
    let (sp, cp) = p[1].sin_cos();
    [st * cp, st * sp, ct]
}

/// Central angle between two colatitude/longitude points via
/// `atan2(|n₁ × n₂|, n₁ · n₂)`, stable near 0 and π and exactly symmetric.
pub fn central_angle(p: &[f64], q: &[f64]) -> f64 {
    let a = unit_vector(p);
    let b = unit_vector(q);
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    sin.atan2(cos).clamp(0.0, PI)
}

/// Structured-text geometry record.
///
/// Fields: `kind` (one of `euclidean`, `minkowski`, `distorted-minkowski`,
/// `sphere`, `numeric-riemannian`), `dim`, `metric` (row-major), `radius`,
/// `D`, `sigma0`, and for `numeric-riemannian` the metric `field`
/// (`flat`, `sphere` or `constant`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<MetricFieldKind>,
}

/// Metric fields available to `numeric-riemannian` geometries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricFieldKind {
    Flat,
    Sphere,
    Constant,
}

impl GeometryConfig {
    pub fn build(&self) -> Result<WorldFunction> {
        match self.kind {
            Kind::Euclidean => {
                let dim = self.require_dim()?;
                match &self.metric {
                    Some(m) => WorldFunction::euclidean(dim, m),
                    None => WorldFunction::euclidean_identity(dim),
                }
            }
            Kind::Minkowski => Ok(WorldFunction::minkowski()),
            Kind::DistortedMinkowski => {
                WorldFunction::distorted_minkowski(self.distortion.unwrap_or(0.0), self.sigma0.unwrap_or(0.0))
            }
            Kind::Sphere => WorldFunction::sphere(self.radius.unwrap_or(1.0)),
            Kind::NumericRiemannian => Ok(WorldFunction::from_metric(self.metric_field()?)),
        }
    }

    /// Metric field described by this record (for Riemannian-side commands).
    pub fn metric_field(&self) -> Result<MetricField> {
        let field = self.field.unwrap_or(match self.kind {
            Kind::Sphere => MetricFieldKind::Sphere,
            _ if self.metric.is_some() => MetricFieldKind::Constant,
            _ => MetricFieldKind::Flat,
        });
        match field {
            MetricFieldKind::Flat => MetricField::flat(self.require_dim()?),
            MetricFieldKind::Sphere => MetricField::sphere(self.radius.unwrap_or(1.0)),
            MetricFieldKind::Constant => {
                let dim = self.require_dim()?;
                let m = self.metric.as_ref().ok_or(Error::InvalidParameter {
                    name: "metric",
                    reason: "required for a constant metric field".into(),
                })?;
                MetricField::constant(dim, m)
            }
        }
    }

    fn require_dim(&self) -> Result<usize> {
        match (self.dim, &self.metric) {
            (Some(d), _) => Ok(d),
            (None, Some(m)) => {
                let d = (m.len() as f64).sqrt().round() as usize;
                if d * d == m.len() && d > 0 {
                    Ok(d)
                } else {
                    Err(Error::InvalidParameter {
                        name: "metric",
                        reason: format!("length {} is not a perfect square", m.len()),
                    })
                }
            }
            (None, None) => Err(Error::InvalidParameter {
                name: "dim",
                reason: "required".into(),
            }),
        }
    }
}
