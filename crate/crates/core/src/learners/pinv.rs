//! Moore-Penrose pseudoinverse via singular value decomposition.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative cutoff below which singular values are treated as zero:
/// `1e-12 * max(rows, cols)`, applied against the largest singular value.
fn cutoff(rows: usize, cols: usize) -> f64 {
    1e-12 * rows.max(cols) as f64
}

/// Compute the Moore-Penrose generalized inverse of `a`.
///
/// The result satisfies the four defining conditions `AXA = A`, `XAX = X`,
/// `(XA)^T = XA`, `(AX)^T = AX` to within SVD accuracy. Singular values
/// below the relative cutoff are zeroed, so rank-deficient input is fine.
pub fn moore_penrose_pinv(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("pseudoinverse of non-finite matrix".into()));
    }
    let (rows, cols) = a.shape();
    let svd = a.clone().svd(true, true);
    let u = svd
        .u
        .as_ref()
        .ok_or_else(|| Error::Numeric("SVD did not produce U".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::Numeric("SVD did not produce V^T".into()))?;
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tol = cutoff(rows, cols) * max_sv;

    // X = V * S^+ * U^T, built without forming S^+ explicitly.
    let k = svd.singular_values.len();
    let mut scaled_ut = u.transpose();
    for i in 0..k {
        let s = svd.singular_values[i];
        let inv = if s > tol && s > 0.0 { 1.0 / s } else { 0.0 };
        scaled_ut.row_mut(i).scale_mut(inv);
    }
    Ok(v_t.transpose() * scaled_ut)
}

/// Least-squares solve `min ||a x - b||` through the pseudoinverse,
/// returning the minimum-norm solution.
pub fn pinv_solve(a: &DMatrix<f64>, b: &nalgebra::DVector<f64>) -> Result<nalgebra::DVector<f64>> {
    if a.nrows() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "solve dimension mismatch: {}x{} vs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    Ok(moore_penrose_pinv(a)? * b)
}

/// Residuals of the four Penrose conditions, each normalized by the
/// Frobenius norm of its reference side (floored at 1).
pub fn penrose_residuals(a: &DMatrix<f64>, x: &DMatrix<f64>) -> [f64; 4] {
    let norm = |m: &DMatrix<f64>| m.norm().max(1e-300);
    let axa = a * x * a;
    let xax = x * a * x;
    let xa = x * a;
    let ax = a * x;
    [
        (&axa - a).norm() / norm(a).max(1.0),
        (&xax - x).norm() / norm(x).max(1.0),
        (xa.transpose() - &xa).norm() / norm(&xa).max(1.0),
        (ax.transpose() - &ax).norm() / norm(&ax).max(1.0),
    ]
}
