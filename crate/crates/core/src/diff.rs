//! Central finite differences.

use nalgebra::DMatrix;

use crate::error::Result;

/// Optimal central-difference step for first derivatives.
pub fn first_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Step for second derivatives.
pub fn second_step(x: f64) -> f64 {
    f64::EPSILON.powf(0.25) * x.abs().max(1.0)
}

/// Central-difference gradient of a scalar function.
pub fn gradient<F>(f: F, x: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = first_step(x[i]);
        probe[i] = x[i] + h;
        let up = probe[i];
        let fp = f(&probe)?;
        probe[i] = x[i] - h;
        let down = probe[i];
        let fm = f(&probe)?;
        probe[i] = x[i];
        g.push((fp - fm) / (up - down));
    }
    Ok(g)
}

/// Central-difference Hessian of a scalar function; exactly symmetric.
pub fn hessian<F>(f: F, x: &[f64]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = x.len();
    let steps: Vec<f64> = x.iter().map(|&v| second_step(v)).collect();
    let f0 = f(x)?;
    let mut h = DMatrix::zeros(n, n);
    let mut probe = x.to_vec();
    for i in 0..n {
        probe[i] = x[i] + steps[i];
        let fp = f(&probe)?;
        probe[i] = x[i] - steps[i];
        let fm = f(&probe)?;
        probe[i] = x[i];
        h[(i, i)] = (fp - 2.0 * f0 + fm) / (steps[i] * steps[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| -> Result<f64> {
                probe[i] = x[i] + si * steps[i];
                probe[j] = x[j] + sj * steps[j];
                let v = f(&probe);
                probe[i] = x[i];
                probe[j] = x[j];
                v
            };
            let v = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?)
                / (4.0 * steps[i] * steps[j]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_derivatives() {
        let f = |x: &[f64]| Ok(x[0] * x[0] + 3.0 * x[0] * x[1] - x[1] * x[1]);
        let g = gradient(f, &[1.0, 2.0]).unwrap();
        assert!((g[0] - 8.0).abs() < 1e-8 && (g[1] + 1.0).abs() < 1e-8);
        let h = hessian(f, &[1.0, 2.0]).unwrap();
        assert!((h[(0, 0)] - 2.0).abs() < 1e-6);
        assert!((h[(0, 1)] - 3.0).abs() < 1e-6);
        assert!((h[(1, 1)] + 2.0).abs() < 1e-6);
    }
}
