use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::metric::MetricField;
use crate::error::{Error, Result};
use crate::linalg;
use crate::point::Point;

/// One node of a geodesic path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicNode {
    pub tau: f64,
    pub point: Vec<f64>,
    pub velocity: Vec<f64>,
}

/// A geodesic path with its arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSolution {
    pub path: Vec<GeodesicNode>,
    pub length: f64,
    /// Sign of `g_ik ẋ^i ẋ^k` along the path: 1, −1, or 0 for null curves.
    pub sign: f64,
    pub converged: bool,
    /// Chart distance between the terminal point and the requested one.
    pub residual: f64,
}

impl GeodesicSolution {
    /// `½ · sign · L²`.
    pub fn sigma(&self) -> f64 {
        0.5 * self.sign * self.length * self.length
    }

    pub fn endpoint(&self) -> &[f64] {
        &self.path.last().expect("path is never empty").point
    }

    /// Writes `tau,x0..,v0..` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let n = self.path.first().map_or(0, |node| node.point.len());
        let mut header = vec!["tau".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.extend((0..n).map(|i| format!("v{i}")));
        writeln!(out, "{}", header.join(","))?;
        for node in &self.path {
            let mut row = vec![format!("{:.16e}", node.tau)];
            row.extend(node.point.iter().map(|c| format!("{c:.16e}")));
            row.extend(node.velocity.iter().map(|c| format!("{c:.16e}")));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Settings for the multiple-shooting boundary value solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BvpOptions {
    pub segments: usize,
    /// Total RK4 steps over `τ ∈ [0, 1]`, split evenly across segments.
    pub steps: usize,
    pub max_iterations: usize,
    /// Terminal chart distance accepted as converged.
    pub tolerance: f64,
}

impl Default for BvpOptions {
    fn default() -> Self {
        Self {
            segments: 4,
            steps: 256,
            max_iterations: 40,
            tolerance: 1e-8,
        }
    }
}

impl BvpOptions {
    pub fn validate(&self) -> Result<()> {
        if self.segments == 0 || self.steps < self.segments || !self.steps.is_multiple_of(self.segments) {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: format!(
                    "need a positive multiple of segments ({}), got {}",
                    self.segments, self.steps
                ),
            });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

// State layout: [x (n), v (n), s].
fn derivative(metric: &MetricField, state: &[f64]) -> Result<Vec<f64>> {
    let n = metric.dim();
    let (x, v) = (&state[..n], &state[n..2 * n]);
    let a = metric.acceleration(x, v)?;
    let mut d = Vec::with_capacity(2 * n + 1);
    d.extend_from_slice(v);
    d.extend(a);
    d.push(metric.quadratic_form(x, v).abs().sqrt());
    Ok(d)
}

fn rk4_step(metric: &MetricField, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let axpy = |a: &[f64], k: &[f64], c: f64| -> Vec<f64> { a.iter().zip(k).map(|(a, k)| a + c * k).collect() };
    let k1 = derivative(metric, y)?;
    let k2 = derivative(metric, &axpy(y, &k1, 0.5 * h))?;
    let k3 = derivative(metric, &axpy(y, &k2, 0.5 * h))?;
    let k4 = derivative(metric, &axpy(y, &k3, h))?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
        .collect())
}

/// Integrates `steps` RK4 steps of size `h`, recording every state.
/// Stops early at a metric singularity, returning the states so far.
fn integrate_states(metric: &MetricField, start: Vec<f64>, h: f64, steps: usize) -> (Vec<Vec<f64>>, Option<Error>) {
    let mut states = Vec::with_capacity(steps + 1);
    states.push(start);
    for _ in 0..steps {
        let last = states.last().expect("non-empty");
        match rk4_step(metric, last, h) {
            Ok(next) if next.iter().all(|c| c.is_finite()) => states.push(next),
            Ok(_) => {
                return (
                    states,
                    Some(Error::NoConvergence {
                        residual: f64::INFINITY,
                    }),
                )
            }
            Err(e) => return (states, Some(e)),
        }
    }
    (states, None)
}

fn endpoint_state(metric: &MetricField, start: Vec<f64>, h: f64, steps: usize) -> Result<Vec<f64>> {
    let mut y = start;
    for _ in 0..steps {
        y = rk4_step(metric, &y, h)?;
    }
    if y.iter().all(|c| c.is_finite()) {
        Ok(y)
    } else {
        Err(Error::NoConvergence {
            residual: f64::INFINITY,
        })
    }
}

fn interval_sign(metric: &MetricField, states: &[Vec<f64>]) -> Result<f64> {
    let n = metric.dim();
    let forms: Vec<f64> = states
        .iter()
        .map(|s| metric.quadratic_form(&s[..n], &s[n..2 * n]))
        .collect();
    let scale = forms.iter().fold(0.0_f64, |m, f| m.max(f.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let cut = 1e-10 * scale;
    let pos = forms.iter().any(|&f| f > cut);
    let neg = forms.iter().any(|&f| f < -cut);
    match (pos, neg) {
        (true, true) => Err(Error::MixedCharacter),
        (true, false) => Ok(1.0),
        (false, true) => Ok(-1.0),
        (false, false) => Ok(0.0),
    }
}

fn nodes(states: &[Vec<f64>], n: usize, tau0: f64, h: f64) -> Vec<GeodesicNode> {
    states
        .iter()
        .enumerate()
        .map(|(k, s)| GeodesicNode {
            tau: tau0 + k as f64 * h,
            point: s[..n].to_vec(),
            velocity: s[n..2 * n].to_vec(),
        })
        .collect()
}

/// Integrates the geodesic equation from `x0` with initial velocity `v0`
/// over `[0, tau_max]` using fixed-step RK4.
///
/// A metric singularity on the way yields the partial path with
/// `converged = false`.
pub fn geodesic_integrate(
    metric: &MetricField,
    x0: &Point,
    v0: &[f64],
    tau_max: f64,
    steps: usize,
) -> Result<GeodesicSolution> {
    let n = metric.dim();
    x0.ensure_dim(n)?;
    if v0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v0.len(),
        });
    }
    if steps == 0 || !tau_max.is_finite() {
        return Err(Error::InvalidParameter {
            name: "steps",
            reason: "need at least one step over a finite interval".into(),
        });
    }
    let mut start = x0.coords().to_vec();
    start.extend_from_slice(v0);
    start.push(0.0);
    let h = tau_max / steps as f64;
    let (states, failure) = integrate_states(metric, start, h, steps);
    let sign = interval_sign(metric, &states).unwrap_or(f64::NAN);
    Ok(GeodesicSolution {
        length: states.last().expect("non-empty")[2 * n],
        path: nodes(&states, n, 0.0, h),
        sign,
        converged: failure.is_none() && !sign.is_nan(),
        residual: 0.0,
    })
}

/// Moves periodic target coordinates to the image nearest `from`.
fn lift(metric: &MetricField, from: &[f64], to: &[f64]) -> Vec<f64> {
    from.iter()
        .zip(metric.reduced_difference(from, to))
        .map(|(f, d)| f + d)
        .collect()
}

/// Solves the geodesic boundary value problem between `x` and `xprime` by
/// multiple shooting with a damped Newton iteration.
///
/// The initial guess is the chart secant. If Newton fails from there, the
/// target is moved out from `x` along the secant in stages instead.
/// Periodic chart coordinates are lifted to the image of `xprime` nearest
/// `x` first.
pub fn geodesic_bvp(metric: &MetricField, x: &Point, xprime: &Point, options: &BvpOptions) -> Result<GeodesicSolution> {
    x.ensure_dim(metric.dim())?;
    xprime.ensure_dim(metric.dim())?;
    options.validate()?;
    let target = lift(metric, x.coords(), xprime.coords());
    Shooting::new(metric, x.coords(), &target, options).solve()
}

struct Shooting<'a> {
    metric: &'a MetricField,
    n: usize,
    segments: usize,
    per_segment: usize,
    h: f64,
    start: Vec<f64>,
    target: Vec<f64>,
    options: &'a BvpOptions,
}

impl<'a> Shooting<'a> {
    fn new(metric: &'a MetricField, start: &[f64], target: &[f64], options: &'a BvpOptions) -> Self {
        Self {
            metric,
            n: metric.dim(),
            segments: options.segments,
            per_segment: options.steps / options.segments,
            h: 1.0 / options.steps as f64,
            start: start.to_vec(),
            target: target.to_vec(),
            options,
        }
    }

    // Unknowns: v_0, then (x_j, v_j) for j = 1..segments.
    fn unknowns(&self) -> usize {
        self.n * (2 * self.segments - 1)
    }

    fn secant(&self) -> Vec<f64> {
        let n = self.n;
        let dx: Vec<f64> = (0..n).map(|i| self.target[i] - self.start[i]).collect();
        let mut z = dx.clone();
        for j in 1..self.segments {
            let t = j as f64 / self.segments as f64;
            z.extend((0..n).map(|i| self.start[i] + t * dx[i]));
            z.extend_from_slice(&dx);
        }
        z
    }

    fn segment_start(&self, z: &[f64], j: usize) -> Vec<f64> {
        let n = self.n;
        let mut s = Vec::with_capacity(2 * n + 1);
        if j == 0 {
            s.extend_from_slice(&self.start);
            s.extend_from_slice(&z[..n]);
        } else {
            let off = n + (j - 1) * 2 * n;
            s.extend_from_slice(&z[off..off + 2 * n]);
        }
        s.push(0.0);
        s
    }

    fn segment_end(&self, z: &[f64], j: usize) -> Result<Vec<f64>> {
        endpoint_state(self.metric, self.segment_start(z, j), self.h, self.per_segment)
    }

    // Residual block of segment j: continuity (2n) or terminal match (n).
    fn segment_residual(&self, z: &[f64], j: usize, end: &[f64]) -> Vec<f64> {
        let n = self.n;
        if j + 1 < self.segments {
            let next = self.segment_start(z, j + 1);
            (0..2 * n).map(|i| end[i] - next[i]).collect()
        } else {
            (0..n).map(|i| end[i] - self.target[i]).collect()
        }
    }

    fn residual(&self, z: &[f64]) -> Result<DVector<f64>> {
        let mut r = Vec::with_capacity(self.unknowns());
        for j in 0..self.segments {
            let end = self.segment_end(z, j)?;
            r.extend(self.segment_residual(z, j, &end));
        }
        Ok(DVector::from_vec(r))
    }

    fn terminal_miss(&self, r: &DVector<f64>) -> f64 {
        let tail = r.len() - self.n;
        r.rows(tail, self.n).norm()
    }

    fn jacobian(&self, z: &[f64], r: &DVector<f64>) -> Result<DMatrix<f64>> {
        let m = self.unknowns();
        let n = self.n;
        let mut jac = DMatrix::zeros(m, m);
        let mut probe = z.to_vec();
        // Column c perturbs exactly one segment's start; rows of that segment's
        // block change through its end, and the previous block through the
        // continuity target.
        for c in 0..m {
            let seg = if c < n { 0 } else { 1 + (c - n) / (2 * n) };
            let step = f64::EPSILON.sqrt() * z[c].abs().max(1.0);
            probe[c] = z[c] + step;
            let actual = probe[c] - z[c];
            let end = self.segment_end(&probe, seg)?;
            let block = self.segment_residual(&probe, seg, &end);
            let row0 = seg * 2 * n;
            for (k, v) in block.iter().enumerate() {
                jac[(row0 + k, c)] = (v - r[row0 + k]) / actual;
            }
            if seg > 0 {
                // d(end_{j-1} − start_j)/d start_j = −I
                let local = c - n - (seg - 1) * 2 * n;
                jac[((seg - 1) * 2 * n + local, c)] = -1.0;
            }
            probe[c] = z[c];
        }
        Ok(jac)
    }

    fn assemble(&self, z: &[f64], residual: f64, converged: bool) -> Result<GeodesicSolution> {
        let n = self.n;
        let mut path = Vec::with_capacity(self.options.steps + 1);
        let mut all_states = Vec::new();
        let mut length = 0.0;
        for j in 0..self.segments {
            let (mut states, failure) =
                integrate_states(self.metric, self.segment_start(z, j), self.h, self.per_segment);
            if let Some(e) = failure {
                return Err(e);
            }
            for s in &mut states {
                s[2 * n] += length;
            }
            length = states.last().expect("non-empty")[2 * n];
            let tau0 = j as f64 / self.segments as f64;
            let mut seg_nodes = nodes(&states, n, tau0, self.h);
            if j > 0 {
                seg_nodes.remove(0);
                states.remove(0);
            }
            path.extend(seg_nodes);
            all_states.extend(states);
        }
        let sign = interval_sign(self.metric, &all_states)?;
        Ok(GeodesicSolution {
            path,
            length,
            sign,
            converged,
            residual,
        })
    }

    /// Damped Newton from `z`; returns the last iterate and its residual.
    fn newton(&self, mut z: Vec<f64>) -> Result<(Vec<f64>, DVector<f64>)> {
        let mut r = self.residual(&z)?;
        let mut norm = r.norm();
        let scale = self
            .target
            .iter()
            .chain(&self.start)
            .fold(1.0_f64, |m, c| m.max(c.abs()));
        let floor = 1e-14 * scale;
        let mut stalled = 0;
        for _ in 0..self.options.max_iterations {
            if norm <= floor {
                break;
            }
            let jac = self.jacobian(&z, &r)?;
            let step = linalg::solve(&jac, &(-&r));
            let mut lambda = 1.0;
            let mut accepted = None;
            while lambda >= 1.0 / 1024.0 {
                let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
                if let Ok(tr) = self.residual(&trial) {
                    let tn = tr.norm();
                    if tn < norm {
                        accepted = Some((trial, tr, tn));
                        break;
                    }
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((trial, tr, tn)) => {
                    // Converged iterates that barely improve are round-off.
                    stalled = if tn > 0.5 * norm && norm < self.options.tolerance {
                        stalled + 1
                    } else {
                        0
                    };
                    z = trial;
                    r = tr;
                    norm = tn;
                    if stalled >= 2 {
                        break;
                    }
                }
                None => break,
            }
        }
        Ok((z, r))
    }

    /// Moves the target from the start to its final position in `stages`
    /// steps, seeding each solve with the previous solution.
    fn continuation(&self, stages: usize) -> Option<(Vec<f64>, DVector<f64>)> {
        let mut z = None;
        let mut last = None;
        for k in 1..=stages {
            let t = k as f64 / stages as f64;
            let partial: Vec<f64> = self
                .start
                .iter()
                .zip(&self.target)
                .map(|(a, b)| a + t * (b - a))
                .collect();
            let stage = Shooting::new(self.metric, &self.start, &partial, self.options);
            let guess = z.take().unwrap_or_else(|| stage.secant());
            let (next, r) = stage.newton(guess).ok()?;
            if r.norm() > self.options.tolerance {
                return None;
            }
            z = Some(next.clone());
            last = Some((next, r));
        }
        last
    }

    fn solve(&self) -> Result<GeodesicSolution> {
        let (mut z, mut r) = self.newton(self.secant())?;
        if r.norm() > self.options.tolerance {
            if let Some(found) = [4, 16].into_iter().find_map(|stages| self.continuation(stages)) {
                (z, r) = found;
            }
        }
        let norm = r.norm();
        let miss = self.terminal_miss(&r);
        let converged = norm <= self.options.tolerance;
        if !converged {
            return Ok(GeodesicSolution {
                path: vec![GeodesicNode {
                    tau: 0.0,
                    point: self.start.clone(),
                    velocity: z[..self.n].to_vec(),
                }],
                length: f64::NAN,
                sign: f64::NAN,
                converged: false,
                residual: miss.max(norm),
            });
        }
        self.assemble(&z, miss, true)
    }
}
