//! Isotropic compliance and stiffness laws.

use crate::error::{Error, Result};
use crate::tensor::{self, Matrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    pub lambda: f64,
    pub mu: f64,
    pub dim: usize,
}

impl MaterialParams {
    pub fn new(lambda: f64, mu: f64, dim: usize) -> Result<Self> {
        if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "Lamé constants must be positive, got lambda={lambda}, mu={mu}"
            )));
        }
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!("unsupported dimension {dim}")));
        }
        Ok(Self { lambda, mu, dim })
    }

    /// `𝒜σ = (σ - λ/(dλ+2μ) tr(σ) δ) / 2μ`.
    pub fn compliance_apply(&self, sigma: &Matrix) -> Matrix {
        let c = self.lambda / (self.dim as f64 * self.lambda + 2.0 * self.mu) * tensor::trace(sigma);
        let mut out = *sigma;
        for (i, row) in out.iter_mut().enumerate().take(self.dim) {
            row[i] -= c;
        }
        tensor::mat_scale(&out, 0.5 / self.mu)
    }

    /// `2με + λ tr(ε) δ`.
    pub fn stiffness_apply(&self, eps: &Matrix) -> Matrix {
        let t = self.lambda * tensor::trace(eps);
        let mut out = tensor::mat_scale(eps, 2.0 * self.mu);
        for (i, row) in out.iter_mut().enumerate().take(self.dim) {
            row[i] += t;
        }
        out
    }
}

pub fn compliance_apply(sigma: &Matrix, mat: &MaterialParams) -> Matrix {
    mat.compliance_apply(sigma)
}

pub fn stiffness_apply(eps: &Matrix, mat: &MaterialParams) -> Matrix {
    mat.stiffness_apply(eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{identity, ZERO_MAT};

    #[test]
    fn identity_and_shear() {
        let m = MaterialParams::new(0.3, 0.35, 2).unwrap();
        let a = m.compliance_apply(&identity(2));
        assert!((a[0][0] - 1.0 / (2.0 * 0.3 + 0.7)).abs() < 1e-15);
        assert_eq!(a[0][1], 0.0);
        let s = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]];
        let a = m.compliance_apply(&s);
        assert!((a[0][1] - 1.0 / 0.7).abs() < 1e-15 && a[0][0] == 0.0);
        assert_eq!(m.stiffness_apply(&ZERO_MAT), ZERO_MAT);
        let s = m.stiffness_apply(&identity(2));
        assert!((s[1][1] - (0.7 + 0.6)).abs() < 1e-15 && s[2][2] == 0.0);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(MaterialParams::new(0.0, 1.0, 2).is_err());
        assert!(MaterialParams::new(1.0, -1.0, 3).is_err());
        assert!(MaterialParams::new(1.0, 1.0, 4).is_err());
    }
}
