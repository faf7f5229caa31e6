//! Numerical checks of the four conditions singling out proper Euclidean
//! space among world functions.
//!
//! The conditions are exact statements over all point subsets. Here they are
//! checked on finite samples: a pass means no counterexample was found.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::point::Point;
use crate::region::Region;
use crate::sigma::{scalar_product, PointPairVector};
use crate::world::WorldFunction;

/// Gram matrix `g_il = (P₀Pᵢ.P₀Pₗ)`; exactly symmetric.
pub fn gram_matrix(sigma: &WorldFunction, p0: &Point, heads: &[Point]) -> Result<DMatrix<f64>> {
    let n = heads.len();
    let vectors: Vec<PointPairVector> = heads
        .iter()
        .map(|h| PointPairVector::new(p0.clone(), h.clone()))
        .collect::<Result<_>>()?;
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for l in i..n {
            let v = scalar_product(sigma, &vectors[i], &vectors[l])?;
            g[(i, l)] = v;
            g[(l, i)] = v;
        }
    }
    Ok(g)
}

/// Product of row norms, an upper bound on `|det g|`. Used as the scale for
/// determinant tolerances since diagonal entries vanish for null vectors.
pub fn hadamard_bound(gram: &DMatrix<f64>) -> f64 {
    gram.row_iter().map(|r| r.norm()).product()
}

fn lexical(a: &Point, b: &Point) -> std::cmp::Ordering {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// `Fₙ = det‖(P₀Pᵢ.P₀Pₖ)‖`.
///
/// A relabeling of heads conjugates the Gram matrix by a permutation and
/// leaves the determinant unchanged. Heads are sorted into a canonical order
/// first so that this holds bitwise, not just up to rounding.
pub fn gram_determinant(sigma: &WorldFunction, p0: &Point, heads: &[Point]) -> Result<f64> {
    let mut sorted = heads.to_vec();
    sorted.sort_by(lexical);
    Ok(gram_matrix(sigma, p0, &sorted)?.determinant())
}

/// An origin with `n` basis heads and their Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFrame {
    pub p0: Point,
    pub basis_heads: Vec<Point>,
    pub gram: DMatrix<f64>,
    /// `None` when the Gram matrix is singular.
    pub gram_inverse: Option<DMatrix<f64>>,
}

/// Relative determinant below which a frame counts as singular.
const SINGULAR_FRAME: f64 = 1e-12;

impl BasisFrame {
    pub fn new(sigma: &WorldFunction, p0: Point, basis_heads: Vec<Point>) -> Result<Self> {
        if basis_heads.is_empty() {
            return Err(Error::InsufficientPoints { needed: 1, found: 0 });
        }
        let gram = gram_matrix(sigma, &p0, &basis_heads)?;
        let det = gram.determinant();
        let gram_inverse = if det.abs() > SINGULAR_FRAME * hadamard_bound(&gram) {
            gram.clone().try_inverse()
        } else {
            None
        };
        Ok(Self {
            p0,
            basis_heads,
            gram,
            gram_inverse,
        })
    }

    pub fn n(&self) -> usize {
        self.basis_heads.len()
    }

    pub fn require_inverse(&self) -> Result<&DMatrix<f64>> {
        self.gram_inverse.as_ref().ok_or(Error::DegenerateBasis {
            determinant: self.gram.determinant(),
        })
    }
}

/// Covariant σ-coordinates `xᵢ(P) = (P₀Pᵢ.P₀P)`.
pub fn sigma_coordinates(sigma: &WorldFunction, frame: &BasisFrame, p: &Point) -> Result<Vec<f64>> {
    frame.require_inverse()?;
    raw_coordinates(sigma, frame, p.coords())
}

fn raw_coordinates(sigma: &WorldFunction, frame: &BasisFrame, p: &[f64]) -> Result<Vec<f64>> {
    let p0 = frame.p0.coords();
    let s0p = sigma.eval_coords(p0, p)?;
    frame
        .basis_heads
        .iter()
        .map(|h| {
            let h = h.coords();
            // (P₀Pᵢ.P₀P) = σ(P₀,P) + σ(Pᵢ,P₀) − σ(P₀,P₀) − σ(Pᵢ,P)
            let plus = s0p + sigma.eval_coords(h, p0)?;
            let minus = sigma.eval_coords(p0, p0)? + sigma.eval_coords(h, p)?;
            Ok(plus - minus)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    I,
    II,
    III,
    IV,
}

/// Diagnostics behind a condition verdict.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Witness {
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    pub max_residual: f64,
}

impl Witness {
    pub fn is_empty(&self) -> bool {
        self.note.is_empty() && self.points.is_empty() && self.residuals.is_empty() && self.eigenvalues.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub passed: bool,
    pub witness: Witness,
}

/// Sampling settings for condition I.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsetSampling {
    pub trials: usize,
    /// Relative to the Hadamard bound of each Gram matrix.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SubsetSampling {
    fn default() -> Self {
        Self {
            trials: 200,
            tol: 1e-8,
            seed: 0,
        }
    }
}

fn relative_determinant(sigma: &WorldFunction, cloud: &[Point], idx: &[usize]) -> Result<f64> {
    let p0 = &cloud[idx[0]];
    let heads: Vec<Point> = idx[1..].iter().map(|&i| cloud[i].clone()).collect();
    let g = gram_matrix(sigma, p0, &heads)?;
    let bound = hadamard_bound(&g);
    Ok(if bound == 0.0 {
        0.0
    } else {
        g.determinant().abs() / bound
    })
}

/// Condition I at candidate dimension `n`: some `n + 1` points span a
/// nondegenerate frame, and no `n + 2` points do.
pub fn check_condition_i(
    sigma: &WorldFunction,
    n: usize,
    cloud: &[Point],
    sampling: &SubsetSampling,
) -> Result<ConditionReport> {
    if n == 0 || cloud.len() < n + 2 {
        return Err(Error::InsufficientPoints {
            needed: n.max(1) + 2,
            found: cloud.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let subsets: Vec<(Vec<usize>, Vec<usize>)> = (0..sampling.trials)
        .map(|_| {
            let small = index::sample(&mut rng, cloud.len(), n + 1).into_vec();
            let large = index::sample(&mut rng, cloud.len(), n + 2).into_vec();
            (small, large)
        })
        .collect();
    let ratios: Vec<(f64, f64)> = subsets
        .par_iter()
        .map(|(small, large)| {
            Ok((
                relative_determinant(sigma, cloud, small)?,
                relative_determinant(sigma, cloud, large)?,
            ))
        })
        .collect::<Result<_>>()?;
    let best_small = ratios.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_large = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let spans = best_small > sampling.tol;
    let counterexample = ratios.iter().position(|r| r.1 > sampling.tol);
    let mut witness = Witness {
        trials: Some(sampling.trials),
        residuals: vec![best_small, worst_large],
        max_residual: worst_large,
        ..Default::default()
    };
    if let Some(t) = counterexample {
        witness.note = format!("{} points with nonzero relative F_{} = {:e}", n + 2, n + 1, ratios[t].1);
        witness.points = subsets[t].1.iter().map(|&i| cloud[i].coords().to_vec()).collect();
    } else if !spans {
        witness.note = format!("no sampled {} points give a nondegenerate F_{n}", n + 1);
    } else {
        witness.note = format!("no counterexample found in {} trials", sampling.trials);
    }
    Ok(ConditionReport {
        condition: Condition::I,
        passed: spans && counterexample.is_none(),
        witness,
    })
}

/// `½ g^ik Δxᵢ Δxₖ` from σ-coordinates.
pub fn reconstruct_sigma(frame: &BasisFrame, xp: &[f64], xq: &[f64]) -> Result<f64> {
    let ginv = frame.require_inverse()?;
    let d = DVector::from_iterator(xp.len(), xp.iter().zip(xq).map(|(a, b)| a - b));
    Ok(0.5 * d.dot(&(ginv * &d)))
}

/// Condition II: the world function is recovered from σ-coordinates by the
/// Euclidean quadratic form, `|σ − ½g^ikΔxᵢΔxₖ| ≤ tol·max(|σ|, 1)`.
pub fn check_condition_ii(
    sigma: &WorldFunction,
    frame: &BasisFrame,
    pairs: &[(Point, Point)],
    tol: f64,
) -> Result<ConditionReport> {
    frame.require_inverse()?;
    let residuals: Vec<f64> = pairs
        .par_iter()
        .map(|(p, q)| {
            let s = sigma.evaluate(p, q)?;
            let xp = sigma_coordinates(sigma, frame, p)?;
            let xq = sigma_coordinates(sigma, frame, q)?;
            let e = reconstruct_sigma(frame, &xp, &xq)?;
            Ok((s - e).abs() / s.abs().max(1.0))
        })
        .collect::<Result<_>>()?;
    let worst = residuals
        .iter()
        .copied()
        .enumerate()
        .fold(None, |acc: Option<(usize, f64)>, (i, r)| match acc {
            Some((_, m)) if m >= r => acc,
            _ => Some((i, r)),
        });
    let max_residual = worst.map_or(0.0, |w| w.1);
    let passed = max_residual <= tol;
    let mut witness = Witness {
        max_residual,
        ..Default::default()
    };
    if let Some((i, r)) = worst {
        witness.points = vec![pairs[i].0.coords().to_vec(), pairs[i].1.coords().to_vec()];
        witness.residuals = vec![r];
        witness.note = format!("largest relative reconstruction error over {} pairs", pairs.len());
    }
    Ok(ConditionReport {
        condition: Condition::II,
        passed,
        witness,
    })
}

/// Condition III: the frame's Gram matrix has only positive eigenvalues.
pub fn check_condition_iii(frame: &BasisFrame) -> ConditionReport {
    let ev = linalg::symmetric_eigenvalues(&frame.gram);
    let scale = ev.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let passed = scale > 0.0 && ev.iter().all(|&e| e > SINGULAR_FRAME * scale);
    let note = if passed {
        String::new()
    } else if ev.iter().any(|&e| e.abs() <= SINGULAR_FRAME * scale) {
        "zero eigenvalue".into()
    } else {
        "negative eigenvalue".into()
    };
    ConditionReport {
        condition: Condition::III,
        passed,
        witness: Witness {
            note,
            max_residual: ev.first().copied().unwrap_or(0.0),
            eigenvalues: ev,
            ..Default::default()
        },
    }
}

/// Settings for the multi-start solve of condition IV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootSearch {
    pub starts: u32,
    /// Accepted `|x(P) − y| / max(|y|, 1)`.
    pub tol: f64,
    /// Chart radius within which roots are one solution.
    pub merge_radius: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for RootSearch {
    fn default() -> Self {
        Self {
            starts: 64,
            tol: 1e-10,
            merge_radius: 1e-6,
            max_iterations: 60,
            seed: 0,
        }
    }
}

fn newton_root(
    sigma: &WorldFunction,
    frame: &BasisFrame,
    y: &[f64],
    start: Vec<f64>,
    region: &Region,
    search: &RootSearch,
) -> Option<Vec<f64>> {
    let eval = |p: &[f64]| -> Option<DVector<f64>> {
        let x = raw_coordinates(sigma, frame, p).ok()?;
        Some(DVector::from_iterator(y.len(), x.iter().zip(y).map(|(a, b)| a - b)))
    };
    let scale = y.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut p = start;
    let mut r = eval(&p)?;
    for _ in 0..search.max_iterations {
        if r.norm() <= search.tol * scale {
            break;
        }
        let dim = p.len();
        let mut jac = DMatrix::zeros(y.len(), dim);
        for c in 0..dim {
            let h = f64::EPSILON.cbrt() * p[c].abs().max(1.0);
            let mut up = p.clone();
            let mut down = p.clone();
            up[c] += h;
            down[c] -= h;
            let d = (eval(&up)? - eval(&down)?) / (up[c] - down[c]);
            jac.set_column(c, &d);
        }
        let step = linalg::lstsq(&jac, &(-&r), 1e-14);
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-4 {
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Some(tr) = eval(&trial) {
                if tr.norm() < r.norm() {
                    p = trial;
                    r = tr;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (r.norm() <= search.tol * scale && region.contains(&p)).then_some(p)
}

fn cluster(roots: &[Vec<f64>], radius: f64) -> Vec<Vec<f64>> {
    let mut reps: Vec<Vec<f64>> = Vec::new();
    for r in roots {
        let near = reps
            .iter()
            .any(|c| c.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= radius);
        if !near {
            reps.push(r.clone());
        }
    }
    reps.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    reps
}

/// Solutions of `(P₀Pᵢ.P₀P) = yᵢ` for `P` in `region`, one representative
/// per cluster.
pub fn solve_sigma_coordinates(
    sigma: &WorldFunction,
    frame: &BasisFrame,
    y: &[f64],
    region: &Region,
    search: &RootSearch,
) -> Result<Vec<Vec<f64>>> {
    if y.len() != frame.n() {
        return Err(Error::DimensionMismatch {
            expected: frame.n(),
            found: y.len(),
        });
    }
    if region.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: region.dim(),
        });
    }
    let roots: Vec<Vec<f64>> = (0..search.starts)
        .into_par_iter()
        .filter_map(|i| {
            let start = region.sobol_point(i, search.seed).into_coords();
            newton_root(sigma, frame, y, start, region, search)
        })
        .collect();
    Ok(cluster(&roots, search.merge_radius))
}

/// Condition IV: each sampled target tuple has exactly one σ-coordinate
/// preimage inside the bounded search region.
pub fn check_condition_iv(
    sigma: &WorldFunction,
    frame: &BasisFrame,
    targets: &[Vec<f64>],
    region: &Region,
    search: &RootSearch,
) -> Result<ConditionReport> {
    frame.require_inverse()?;
    region.validate()?;
    let mut witness = Witness {
        region: Some(region.clone()),
        ..Default::default()
    };
    let mut passed = true;
    for y in targets {
        let roots = solve_sigma_coordinates(sigma, frame, y, region, search)?;
        if roots.len() != 1 {
            passed = false;
            if witness.note.is_empty() {
                witness.note = format!("target {y:?} has {} solutions in the region", roots.len());
                witness.points = roots.clone();
                witness.residuals = y.clone();
            }
        }
        witness.max_residual = witness.max_residual.max((roots.len() as f64 - 1.0).abs());
    }
    if passed {
        witness.note = format!("unique solution for all {} targets", targets.len());
    }
    Ok(ConditionReport {
        condition: Condition::IV,
        passed,
        witness,
    })
}

/// Settings for running all four conditions on one cloud.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionSuite {
    pub sampling: SubsetSampling,
    /// Condition II tolerance.
    pub reconstruction_tol: f64,
    pub search: RootSearch,
    /// Cloud points whose σ-coordinates serve as condition IV targets.
    pub targets: usize,
}

impl Default for ConditionSuite {
    fn default() -> Self {
        Self {
            sampling: SubsetSampling::default(),
            reconstruction_tol: 1e-9,
            search: RootSearch::default(),
            targets: 8,
        }
    }
}

fn degenerate(condition: Condition, frame: &BasisFrame) -> ConditionReport {
    ConditionReport {
        condition,
        passed: false,
        witness: Witness {
            note: "frame is degenerate".into(),
            max_residual: frame.gram.determinant().abs(),
            ..Default::default()
        },
    }
}

/// Conditions I–IV at dimension `n`. Condition II compares consecutive
/// cloud points; condition IV inverts the σ-coordinates of the first
/// `targets` cloud points within `region`. A degenerate frame fails II and
/// IV instead of aborting the run.
pub fn check_conditions(
    sigma: &WorldFunction,
    n: usize,
    cloud: &[Point],
    frame: &BasisFrame,
    region: &Region,
    suite: &ConditionSuite,
) -> Result<[ConditionReport; 4]> {
    let i = check_condition_i(sigma, n, cloud, &suite.sampling)?;
    let iii = check_condition_iii(frame);
    if frame.gram_inverse.is_none() {
        return Ok([
            i,
            degenerate(Condition::II, frame),
            iii,
            degenerate(Condition::IV, frame),
        ]);
    }
    let pairs: Vec<(Point, Point)> = cloud.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    let ii = check_condition_ii(sigma, frame, &pairs, suite.reconstruction_tol)?;
    let targets: Vec<Vec<f64>> = cloud
        .iter()
        .take(suite.targets)
        .map(|p| raw_coordinates(sigma, frame, p.coords()))
        .collect::<Result<_>>()?;
    let iv = check_condition_iv(sigma, frame, &targets, region, &suite.search)?;
    Ok([i, ii, iii, iv])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    fn e2() -> WorldFunction {
        WorldFunction::euclidean_identity(2).unwrap()
    }

    #[test]
    fn determinant_examples() {
        let s = e2();
        let o = pt![0, 0];
        assert!((gram_determinant(&s, &o, &[pt![1, 0], pt![0, 1]]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(gram_determinant(&s, &o, &[pt![1, 0], pt![2, 0]]).unwrap(), 0.0);
        let m = WorldFunction::minkowski();
        let d = gram_determinant(&m, &Point::origin(4), &[pt![1, 0, 0, 0], pt![0, 1, 0, 0]]).unwrap();
        assert!((d + 1.0).abs() < 1e-15);
    }

    #[test]
    fn coordinates_examples() {
        let s = e2();
        let f = BasisFrame::new(&s, pt![0, 0], vec![pt![1, 0], pt![0, 1]]).unwrap();
        assert_eq!(sigma_coordinates(&s, &f, &pt![3, 4]).unwrap(), vec![3.0, 4.0]);
        assert_eq!(sigma_coordinates(&s, &f, &pt![0, 0]).unwrap(), vec![0.0, 0.0]);
        let g = BasisFrame::new(&s, pt![0, 0], vec![pt![2, 0], pt![0, 1]]).unwrap();
        // (P₀P₁.P₀P) = (2,0)·(1,1) = 2, (P₀P₂.P₀P) = (0,1)·(1,1) = 1
        assert_eq!(sigma_coordinates(&s, &g, &pt![1, 1]).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn singular_frame_rejected() {
        let s = e2();
        let f = BasisFrame::new(&s, pt![0, 0], vec![pt![1, 0], pt![1, 0]]).unwrap();
        assert!(matches!(
            sigma_coordinates(&s, &f, &pt![1, 1]),
            Err(Error::DegenerateBasis { .. })
        ));
        let r = check_condition_iii(&f);
        assert!(!r.passed);
        assert_eq!(r.witness.note, "zero eigenvalue");
    }

    #[test]
    fn minkowski_frame_fails_iii() {
        let m = WorldFunction::minkowski();
        let heads = vec![pt![1, 0, 0, 0], pt![0, 1, 0, 0], pt![0, 0, 1, 0], pt![0, 0, 0, 1]];
        let f = BasisFrame::new(&m, Point::origin(4), heads).unwrap();
        let r = check_condition_iii(&f);
        assert!(!r.passed);
        assert_eq!(r.witness.eigenvalues, vec![-1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn euclidean_unique_roots() {
        let s = e2();
        let f = BasisFrame::new(&s, pt![0, 0], vec![pt![1, 0], pt![0, 1]]).unwrap();
        let region = Region::cube(2, -10.0, 10.0).unwrap();
        let roots = solve_sigma_coordinates(&s, &f, &[3.0, 4.0], &region, &RootSearch::default()).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0][0] - 3.0).abs() < 1e-8 && (roots[0][1] - 4.0).abs() < 1e-8);
        let origin = solve_sigma_coordinates(&s, &f, &[0.0, 0.0], &region, &RootSearch::default()).unwrap();
        assert_eq!(origin.len(), 1);
        assert!(origin[0].iter().all(|c| c.abs() < 1e-8));
    }

    fn suite_verdicts(sigma: &WorldFunction, n: usize, region: &Region) -> Vec<bool> {
        let cloud: Vec<Point> = (0..30).map(|i| region.sobol_point(i, 3)).collect();
        let frame = BasisFrame::new(sigma, cloud[0].clone(), cloud[1..=n].to_vec()).unwrap();
        check_conditions(sigma, n, &cloud, &frame, region, &ConditionSuite::default())
            .unwrap()
            .iter()
            .map(|r| r.passed)
            .collect()
    }

    #[test]
    fn suite_separates_geometries() {
        let e3 = WorldFunction::euclidean_identity(3).unwrap();
        assert_eq!(
            suite_verdicts(&e3, 3, &Region::cube(3, -5.0, 5.0).unwrap()),
            vec![true; 4]
        );
        let m = WorldFunction::minkowski();
        assert_eq!(
            suite_verdicts(&m, 4, &Region::cube(4, -5.0, 5.0).unwrap()),
            vec![true, true, false, true]
        );
        let sphere = WorldFunction::sphere(1.0).unwrap();
        let band = Region::new(vec![0.5, -1.0], vec![2.6, 1.0]).unwrap();
        assert!(!suite_verdicts(&sphere, 2, &band)[0]);
    }
}
