//! Small dense linear-algebra helpers over `nalgebra`.

use nalgebra::{DMatrix, DVector};

/// Row-major square matrix from a flat slice.
pub(crate) fn square_from_row_major(dim: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(dim, dim, data)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues ascending and
/// eigenvectors as matching columns.
pub(crate) fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Ratio of largest to smallest eigenvalue magnitude; infinite when singular.
pub(crate) fn condition_number(eigenvalues: &[f64]) -> f64 {
    let max = eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let min = eigenvalues.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Minimum-norm least-squares solution of `a x = b`, discarding singular
/// values below `rcond` times the largest.
pub(crate) fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> DVector<f64> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, s| m.max(*s));
    let cut = smax * rcond;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut x = DVector::zeros(a.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cut && s > 0.0 {
            let coef = u.column(k).dot(b) / s;
            x += vt.row(k).transpose() * coef;
        }
    }
    x
}

/// Solves `a x = b`, falling back to least squares when LU fails.
pub(crate) fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    match a.clone().lu().solve(b) {
        Some(x) if x.iter().all(|v| v.is_finite()) => x,
        _ => lstsq(a, b, 1e-13),
    }
}

/// Singular values, descending.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}
