use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euclideanity::BasisFrame;
use crate::point::Point;
use crate::world::WorldFunction;

/// Which collinearity object is being resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TubeKind {
    /// `{R | (P₀P₁.P₀R)² = |P₀P₁|²|P₀R|²}`.
    TubeThroughOrigin,
    /// `{R | (P₀P₁.Q₀R)² = |P₀P₁|²|Q₀R|²}`.
    RemoteTube,
    /// Intersection of the surfaces `f(P₀,P₁,Pₖ,R) = 0`, `k = 2..n`.
    SurfaceIntersectionLine,
}

/// A tube or line together with its world function.
#[derive(Debug, Clone)]
pub struct TubeSpec {
    kind: TubeKind,
    sigma: WorldFunction,
    p0: Point,
    p1: Point,
    q0: Option<Point>,
    aux: Vec<Point>,
    ee: f64,
    /// `(P₀Pₖ.P₀P₁)` per auxiliary point.
    ke: Vec<f64>,
}

// Same association as `sigma::scalar_product`, so both agree bitwise.
fn sp(s: &WorldFunction, a0: &[f64], a1: &[f64], b0: &[f64], b1: &[f64]) -> Result<f64> {
    let plus = s.eval_coords(a0, b1)? + s.eval_coords(a1, b0)?;
    let minus = s.eval_coords(a0, b0)? + s.eval_coords(a1, b1)?;
    Ok(plus - minus)
}

impl TubeSpec {
    fn build(
        kind: TubeKind,
        sigma: WorldFunction,
        p0: Point,
        p1: Point,
        q0: Option<Point>,
        aux: Vec<Point>,
    ) -> Result<Self> {
        let dim = sigma.dim();
        for p in [&p0, &p1].into_iter().chain(q0.as_ref()).chain(&aux) {
            p.ensure_dim(dim)?;
        }
        let ee = sp(&sigma, p0.coords(), p1.coords(), p0.coords(), p1.coords())?;
        let ke = aux
            .iter()
            .map(|k| sp(&sigma, p0.coords(), k.coords(), p0.coords(), p1.coords()))
            .collect::<Result<_>>()?;
        Ok(Self {
            kind,
            sigma,
            p0,
            p1,
            q0,
            aux,
            ee,
            ke,
        })
    }

    pub fn through_origin(sigma: WorldFunction, p0: Point, p1: Point) -> Result<Self> {
        Self::build(TubeKind::TubeThroughOrigin, sigma, p0, p1, None, Vec::new())
    }

    pub fn remote(sigma: WorldFunction, p0: Point, p1: Point, q0: Point) -> Result<Self> {
        Self::build(TubeKind::RemoteTube, sigma, p0, p1, Some(q0), Vec::new())
    }

    /// Requires `dim − 1` auxiliary points completing `P₀P₁` to a
    /// nonsingular frame.
    pub fn surface_intersection(sigma: WorldFunction, p0: Point, p1: Point, aux: Vec<Point>) -> Result<Self> {
        let dim = sigma.dim();
        if aux.len() + 1 != dim {
            return Err(Error::InvalidTube(format!(
                "surface-intersection-line in dimension {dim} needs {} auxiliary points, got {}",
                dim - 1,
                aux.len()
            )));
        }
        let mut heads = vec![p1.clone()];
        heads.extend(aux.iter().cloned());
        BasisFrame::new(&sigma, p0.clone(), heads)?.require_inverse()?;
        Self::build(TubeKind::SurfaceIntersectionLine, sigma, p0, p1, None, aux)
    }

    /// Builds any kind from optional parts, checking that the required ones
    /// are present.
    pub fn new(
        kind: TubeKind,
        sigma: WorldFunction,
        p0: Point,
        p1: Point,
        q0: Option<Point>,
        aux: Vec<Point>,
    ) -> Result<Self> {
        match kind {
            TubeKind::TubeThroughOrigin => Self::through_origin(sigma, p0, p1),
            TubeKind::RemoteTube => {
                let q0 = q0.ok_or_else(|| Error::InvalidTube("remote-tube requires q0".into()))?;
                Self::remote(sigma, p0, p1, q0)
            }
            TubeKind::SurfaceIntersectionLine => Self::surface_intersection(sigma, p0, p1, aux),
        }
    }

    pub fn kind(&self) -> TubeKind {
        self.kind
    }

    pub fn sigma(&self) -> &WorldFunction {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn p0(&self) -> &Point {
        &self.p0
    }

    pub fn p1(&self) -> &Point {
        &self.p1
    }

    pub fn q0(&self) -> Option<&Point> {
        self.q0.as_ref()
    }

    pub fn aux(&self) -> &[Point] {
        &self.aux
    }

    /// `(P₀P₁.P₀P₁)`.
    pub fn axis_norm(&self) -> f64 {
        self.ee
    }

    /// The origin of the running vector: `Q₀` for remote tubes, else `P₀`.
    pub fn anchor(&self) -> &Point {
        self.q0.as_ref().unwrap_or(&self.p0)
    }

    pub fn is_scalar(&self) -> bool {
        self.kind != TubeKind::SurfaceIntersectionLine
    }

    /// `F = (e.x)² − (e.e)(x.x)` and its magnitude scale
    /// `max((e.x)², |(e.e)(x.x)|, (e.e)²)`.
    fn tube_value(&self, r: &[f64]) -> Result<(f64, f64)> {
        let (p0, p1, o) = (self.p0.coords(), self.p1.coords(), self.anchor().coords());
        let ex = sp(&self.sigma, p0, p1, o, r)?;
        let xx = sp(&self.sigma, o, r, o, r)?;
        let ee = self.ee;
        let f = ex * ex - ee * xx;
        Ok((f, (ex * ex).max((ee * xx).abs()).max(ee * ee)))
    }

    /// `f_k = (e.x)(Pₖ.e) − (Pₖ.x)(e.e)` for each auxiliary point, and the
    /// common scale.
    fn line_values(&self, r: &[f64]) -> Result<(Vec<f64>, f64)> {
        let (p0, p1) = (self.p0.coords(), self.p1.coords());
        let ex = sp(&self.sigma, p0, p1, p0, r)?;
        let ee = self.ee;
        let mut scale = ee * ee;
        let mut out = Vec::with_capacity(self.aux.len());
        for (k, ke) in self.aux.iter().zip(&self.ke) {
            let kx = sp(&self.sigma, p0, k.coords(), p0, r)?;
            let (a, b) = (ex * ke, kx * ee);
            scale = scale.max(a.abs()).max(b.abs());
            out.push(a - b);
        }
        Ok((out, scale))
    }

    /// Residual components: `[F]` for tubes, `[f_2, …, f_n]` for the line.
    pub(crate) fn residuals(&self, r: &[f64]) -> Result<(Vec<f64>, f64)> {
        if self.is_scalar() {
            let (f, s) = self.tube_value(r)?;
            Ok((vec![f], s))
        } else {
            self.line_values(r)
        }
    }

    /// Scalar residual; for the line, the component of largest magnitude.
    pub(crate) fn value(&self, r: &[f64]) -> Result<f64> {
        if self.is_scalar() {
            return Ok(self.tube_value(r)?.0);
        }
        let (v, _) = self.line_values(r)?;
        Ok(v.into_iter().fold(0.0, |m, f| if f.abs() > m.abs() { f } else { m }))
    }

    /// Residual and its magnitude scale.
    pub(crate) fn value_and_scale(&self, r: &[f64]) -> Result<(f64, f64)> {
        if self.is_scalar() {
            return self.tube_value(r);
        }
        let (v, s) = self.line_values(r)?;
        Ok((v.into_iter().fold(0.0, |m, f| if f.abs() > m.abs() { f } else { m }), s))
    }

    /// Typical gradient magnitude at residual scale `scale`.
    pub(crate) fn gradient_scale(&self, scale: f64) -> f64 {
        let e = self.ee.abs().sqrt();
        if e == 0.0 {
            return scale.sqrt();
        }
        if self.is_scalar() {
            scale.sqrt() * e
        } else {
            scale / e
        }
    }
}

/// Residual of `r` against the tube or line: zero exactly on the object.
pub fn tube_residual(spec: &TubeSpec, r: &Point) -> Result<f64> {
    r.ensure_dim(spec.dim())?;
    spec.value(r.coords())
}

/// `|residual| / scale`: the quantity compared with the membership
/// tolerance.
pub fn tube_relative_residual(spec: &TubeSpec, r: &Point) -> Result<f64> {
    r.ensure_dim(spec.dim())?;
    let (f, scale) = spec.value_and_scale(r.coords())?;
    Ok(if scale > 0.0 { f.abs() / scale } else { f.abs() })
}
