use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::diff::first_step;
use crate::error::{Error, Result};
use crate::linalg;
use crate::point::Point;

/// Signature class of a metric field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Signature {
    RiemannianPositive,
    /// Exactly one positive eigenvalue.
    Lorentzian,
}

#[derive(Debug, Clone, PartialEq)]
enum Field {
    Flat,
    Sphere {
        radius: f64,
    },
    /// Row-major constant matrix.
    Constant {
        matrix: Vec<f64>,
    },
}

/// A position-dependent metric tensor `g_ik(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    dim: usize,
    field: Field,
    signature: Signature,
}

/// Condition number above which a metric counts as singular.
const SINGULAR_CONDITION: f64 = 1e14;

impl MetricField {
    /// Identity metric.
    pub fn flat(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "must be positive".into(),
            });
        }
        Ok(Self {
            dim,
            field: Field::Flat,
            signature: Signature::RiemannianPositive,
        })
    }

    /// `g = diag(r², r² sin²θ)` in colatitude/longitude coordinates.
    pub fn sphere(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter {
                name: "radius",
                reason: format!("must be finite and positive, got {radius}"),
            });
        }
        Ok(Self {
            dim: 2,
            field: Field::Sphere { radius },
            signature: Signature::RiemannianPositive,
        })
    }

    /// A constant symmetric matrix, either positive definite or Lorentzian.
    pub fn constant(dim: usize, matrix: &[f64]) -> Result<Self> {
        if matrix.len() != dim * dim || dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.len(),
            });
        }
        for r in 0..dim {
            for c in r + 1..dim {
                let (upper, lower) = (matrix[r * dim + c], matrix[c * dim + r]);
                if upper != lower {
                    return Err(Error::NonSymmetricMetric {
                        row: r,
                        col: c,
                        upper,
                        lower,
                    });
                }
            }
        }
        let ev = linalg::symmetric_eigenvalues(&linalg::square_from_row_major(dim, matrix));
        let scale = ev.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let positive = ev.iter().filter(|&&e| e > 1e-12 * scale).count();
        let negative = ev.iter().filter(|&&e| e < -1e-12 * scale).count();
        let signature = if positive == dim {
            Signature::RiemannianPositive
        } else if positive == 1 && negative == dim - 1 {
            Signature::Lorentzian
        } else {
            return Err(Error::WrongSignature {
                expected: "riemannian-positive or lorentzian",
                eigenvalues: ev,
            });
        };
        Ok(Self {
            dim,
            field: Field::Constant {
                matrix: matrix.to_vec(),
            },
            signature,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn constant_matrix(&self) -> Option<&[f64]> {
        match &self.field {
            Field::Constant { matrix } => Some(matrix),
            _ => None,
        }
    }

    pub fn sphere_radius(&self) -> Option<f64> {
        match self.field {
            Field::Sphere { radius } => Some(radius),
            _ => None,
        }
    }

    /// Period of each chart coordinate, if it is an angle.
    pub fn periods(&self) -> Vec<Option<f64>> {
        match self.field {
            Field::Sphere { .. } => vec![None, Some(std::f64::consts::TAU)],
            _ => vec![None; self.dim],
        }
    }

    /// `b − a` with periodic coordinates reduced to the nearest image.
    pub fn reduced_difference(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter()
            .zip(b)
            .zip(self.periods())
            .map(|((&a, &b), period)| {
                let d = b - a;
                match period {
                    Some(p) => d - p * (d / p).round(),
                    None => d,
                }
            })
            .collect()
    }

    /// Whether the field is the same matrix everywhere.
    pub fn is_constant(&self) -> bool {
        !matches!(self.field, Field::Sphere { .. })
    }

    /// `g_ik(x)`, row-major.
    pub fn components(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        match &self.field {
            Field::Flat => {
                let mut g = vec![0.0; n * n];
                for i in 0..n {
                    g[i * n + i] = 1.0;
                }
                g
            }
            Field::Sphere { radius } => {
                let r2 = radius * radius;
                let s = x[0].sin();
                vec![r2, 0.0, 0.0, r2 * s * s]
            }
            Field::Constant { matrix } => matrix.clone(),
        }
    }

    pub fn at(&self, x: &Point) -> Result<DMatrix<f64>> {
        x.ensure_dim(self.dim)?;
        Ok(DMatrix::from_row_slice(
            self.dim,
            self.dim,
            &self.components(x.coords()),
        ))
    }

    /// `g^ik(x)`; singular metrics are rejected with their condition number.
    pub fn inverse_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = DMatrix::from_row_slice(self.dim, self.dim, &self.components(x));
        let condition = linalg::condition_number(&linalg::symmetric_eigenvalues(&g));
        if !(condition < SINGULAR_CONDITION) {
            return Err(Error::SingularMetric {
                point: x.to_vec(),
                condition,
            });
        }
        g.try_inverse().ok_or_else(|| Error::SingularMetric {
            point: x.to_vec(),
            condition,
        })
    }

    /// `∂_l g_ij` by central differences; entry `[l][i * dim + j]`.
    fn derivatives(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim;
        if self.is_constant() {
            return vec![vec![0.0; n * n]; n];
        }
        let mut probe = x.to_vec();
        (0..n)
            .map(|l| {
                let h = first_step(x[l]);
                probe[l] = x[l] + h;
                let up = probe[l];
                let gp = self.components(&probe);
                probe[l] = x[l] - h;
                let down = probe[l];
                let gm = self.components(&probe);
                probe[l] = x[l];
                gp.iter().zip(&gm).map(|(a, b)| (a - b) / (up - down)).collect()
            })
            .collect()
    }

    /// Christoffel symbols of the first kind,
    /// `Γ_{j,il} = ½ (g_ij,l + g_lj,i − g_il,j)`; exactly symmetric in `(i, l)`.
    pub(crate) fn first_kind(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let d = self.derivatives(x);
        let mut out = vec![0.0; n * n * n];
        for j in 0..n {
            for i in 0..n {
                for l in i..n {
                    let v = 0.5 * ((d[l][i * n + j] + d[i][l * n + j]) - d[j][i * n + l]);
                    out[(j * n + i) * n + l] = v;
                    out[(j * n + l) * n + i] = v;
                }
            }
        }
        out
    }

    /// Christoffel symbols `Γ^k_il = ½ g^kj (g_ij,l + g_lj,i − g_il,j)`.
    pub fn christoffel(&self, x: &Point) -> Result<Christoffel> {
        x.ensure_dim(self.dim)?;
        let n = self.dim;
        let ginv = self.inverse_at(x.coords())?;
        let first = self.first_kind(x.coords());
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for l in i..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += ginv[(k, j)] * first[(j * n + i) * n + l];
                    }
                    data[(k * n + i) * n + l] = acc;
                    data[(k * n + l) * n + i] = acc;
                }
            }
        }
        Ok(Christoffel { dim: n, data })
    }

    /// Geodesic acceleration `a^i = −Γ^i_kl v^k v^l`, obtained by solving
    /// `g a = −Γ_{j,kl} v^k v^l`.
    ///
    /// At coordinate degeneracies of the chart (e.g. sphere poles) the system
    /// is singular; it is accepted only when consistent, which holds for
    /// motion along the degenerate chart line.
    pub(crate) fn acceleration(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim;
        if self.is_constant() {
            return Ok(vec![0.0; n]);
        }
        let first = self.first_kind(x);
        let mut b = DVector::zeros(n);
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                for l in 0..n {
                    acc += first[(j * n + k) * n + l] * v[k] * v[l];
                }
            }
            b[j] = -acc;
        }
        let g = DMatrix::from_row_slice(n, n, &self.components(x));
        let condition = linalg::condition_number(&linalg::symmetric_eigenvalues(&g));
        if condition < SINGULAR_CONDITION {
            if let Some(a) = g.clone().lu().solve(&b) {
                return Ok(a.iter().copied().collect());
            }
        }
        let a = linalg::lstsq(&g, &b, 1e-12);
        let miss = (&g * &a - &b).amax();
        let scale = b.amax() + v.iter().fold(0.0_f64, |m, c| m.max(c.abs())).powi(2) * 1e-300;
        if miss <= 1e-10 * scale.max(f64::MIN_POSITIVE) || b.amax() == 0.0 {
            Ok(a.iter().copied().collect())
        } else {
            Err(Error::SingularMetric {
                point: x.to_vec(),
                condition,
            })
        }
    }

    /// `g_ik v^i v^k`.
    pub(crate) fn quadratic_form(&self, x: &[f64], v: &[f64]) -> f64 {
        let n = self.dim;
        let g = self.components(x);
        let mut acc = 0.0;
        for i in 0..n {
            for k in 0..n {
                acc += g[i * n + k] * v[i] * v[k];
            }
        }
        acc
    }

    /// `g^ik u_i w_k` for covariant components.
    pub fn inverse_product(&self, x: &Point, u: &[f64], w: &[f64]) -> Result<f64> {
        x.ensure_dim(self.dim)?;
        let ginv = self.inverse_at(x.coords())?;
        let mut acc = 0.0;
        for i in 0..self.dim {
            for k in 0..self.dim {
                acc += ginv[(i, k)] * u[i] * w[k];
            }
        }
        Ok(acc)
    }
}

/// Christoffel symbols of the second kind, `Γ^k_il`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Γ^k_il`.
    pub fn get(&self, k: usize, i: usize, l: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + l]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }
}
