//! Kernel functions and kernel matrices for the twin SVR learner.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel choice. The RBF value lies in (0, 1] with K(x, x) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelDescriptor {
    Linear,
    Rbf { gamma: f64 },
}

impl KernelDescriptor {
    pub fn rbf(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rbf gamma must be positive, got {gamma}"
            )));
        }
        Ok(KernelDescriptor::Rbf { gamma })
    }

    /// Evaluate the kernel on two equal-length vectors.
    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            KernelDescriptor::Linear => x.iter().zip(z).map(|(a, b)| a * b).sum(),
            KernelDescriptor::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// Kernel matrix with entry (i, j) = kernel(x_i, z_j), rows of `x` against
/// rows of `z`. Fails when the feature dimensions differ.
pub fn kernel_matrix(
    x: &DMatrix<f64>,
    z: &DMatrix<f64>,
    kernel: KernelDescriptor,
) -> Result<DMatrix<f64>> {
    if x.ncols() != z.ncols() {
        return Err(Error::InvalidParameter(format!(
            "kernel dimension mismatch: {} vs {} features",
            x.ncols(),
            z.ncols()
        )));
    }
    let mut k = DMatrix::zeros(x.nrows(), z.nrows());
    for i in 0..x.nrows() {
        let xi: Vec<f64> = x.row(i).iter().cloned().collect();
        for j in 0..z.nrows() {
            let zj: Vec<f64> = z.row(j).iter().cloned().collect();
            k[(i, j)] = kernel.eval(&xi, &zj);
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn rbf_is_one_at_zero_distance() {
        let k = KernelDescriptor::rbf(0.5).unwrap();
        assert_eq!(k.eval(&[1.0, -2.0], &[1.0, -2.0]), 1.0);
    }

    #[test]
    fn linear_dot_product() {
        let x = dmatrix![1.0, 2.0];
        let k = kernel_matrix(&x, &x, KernelDescriptor::Linear).unwrap();
        assert_eq!(k[(0, 0)], 5.0);
    }

    #[test]
    fn rbf_matrix_symmetric_on_same_input() {
        let x = dmatrix![0.0, 1.0; 2.0, -1.0; 0.5, 0.5];
        let k = kernel_matrix(&x, &x, KernelDescriptor::rbf(0.3).unwrap()).unwrap();
        for i in 0..3 {
            assert_eq!(k[(i, i)], 1.0);
            for j in 0..3 {
                assert!((k[(i, j)] - k[(j, i)]).abs() < 1e-15);
                assert!(k[(i, j)] > 0.0 && k[(i, j)] <= 1.0);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let x = dmatrix![1.0, 2.0];
        let z = dmatrix![1.0, 2.0, 3.0];
        assert!(kernel_matrix(&x, &z, KernelDescriptor::Linear).is_err());
    }
}
