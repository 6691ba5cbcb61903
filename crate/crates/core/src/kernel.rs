//! Kernel form of the min-max learner, driven by kernel evaluations only.
//!
//! The primal pair `(w_t, Sigma_t)` is carried implicitly through dual
//! coefficients: a vector `alpha` over stored inputs and a symmetric matrix
//! `beta` over pairs of stored inputs, so that
//!
//! ```text
//! w_t     = sum_i alpha_i x_i
//! Sigma_t = sum_{j,k} beta_{j,k} x_j x_k' + b^{-1} I
//! ```
//!
//! The per-round update factors through the single intermediate vector
//! `g = beta k` (with `k_l = K(x_l, x_t)`), which collapses the quadruple
//! sum in the interior `beta` block to the outer product `g g'` and keeps
//! each round at `O(t^2)` kernel-free arithmetic.

use serde::{Deserialize, Serialize};

use crate::linalg::{SymMatrix, Vector};
use crate::primal::LearnerError;

/// Kernel choices: `x'z`, `(x'z + offset)^degree`, or `exp(-gamma |x-z|^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    Polynomial { degree: u32, offset: f64 },
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<(), LearnerError> {
        match self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Polynomial { degree, offset } => {
                if *degree < 1 {
                    return Err(LearnerError::InvalidParameter(
                        "polynomial degree must be >= 1".into(),
                    ));
                }
                if !(*offset >= 0.0 && offset.is_finite()) {
                    return Err(LearnerError::InvalidParameter(format!(
                        "polynomial offset must be >= 0, got {offset}"
                    )));
                }
                Ok(())
            }
            KernelSpec::Rbf { gamma } => {
                if !(*gamma > 0.0 && gamma.is_finite()) {
                    return Err(LearnerError::InvalidParameter(format!(
                        "rbf gamma must be > 0, got {gamma}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: &Vector, z: &Vector) -> f64 {
        assert_eq!(x.dim(), z.dim(), "dimension mismatch");
        match self {
            KernelSpec::Linear => x.dot(z),
            KernelSpec::Polynomial { degree, offset } => (x.dot(z) + offset).powi(*degree as i32),
            KernelSpec::Rbf { gamma } => (-gamma * x.sub(z).norm_sq()).exp(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KernelWemm {
    kernel: KernelSpec,
    alpha: Vec<f64>,
    beta: Vec<Vec<f64>>,
    support: Vec<Vector>,
    b_reg: f64,
}

impl KernelWemm {
    pub fn new(kernel: KernelSpec, b_reg: f64) -> Result<Self, LearnerError> {
        if !(b_reg > 1.0) {
            return Err(LearnerError::InvalidRegularizer(b_reg));
        }
        kernel.validate()?;
        Ok(KernelWemm {
            kernel,
            alpha: Vec::new(),
            beta: Vec::new(),
            support: Vec::new(),
            b_reg,
        })
    }

    pub fn rounds(&self) -> usize {
        self.support.len()
    }

    pub fn b_reg(&self) -> f64 {
        self.b_reg
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self, j: usize, k: usize) -> f64 {
        self.beta[j][k]
    }

    pub fn support(&self) -> &[Vector] {
        &self.support
    }

    /// `yhat_t = sum_i alpha_i K(x, x_i)`; zero before the first update.
    pub fn predict(&self, x: &Vector) -> f64 {
        self.support
            .iter()
            .zip(self.alpha.iter())
            .map(|(xi, a)| a * self.kernel.eval(x, xi))
            .sum()
    }

    pub fn update(&mut self, x: Vector, y: f64) {
        assert!(y.is_finite(), "label must be finite");
        let b_inv = 1.0 / self.b_reg;

        let k: Vec<f64> = self
            .support
            .iter()
            .map(|xi| self.kernel.eval(xi, &x))
            .collect();
        let residual = y - self
            .alpha
            .iter()
            .zip(k.iter())
            .map(|(a, kl)| a * kl)
            .sum::<f64>();
        let g: Vec<f64> = self
            .beta
            .iter()
            .map(|row| row.iter().zip(k.iter()).map(|(b, kl)| b * kl).sum())
            .collect();

        for (a, gi) in self.alpha.iter_mut().zip(g.iter()) {
            *a += residual * gi;
        }
        self.alpha.push(b_inv * residual);

        for (row, gj) in self.beta.iter_mut().zip(g.iter()) {
            for (entry, gl) in row.iter_mut().zip(g.iter()) {
                *entry -= gj * gl;
            }
        }
        for (j, row) in self.beta.iter_mut().enumerate() {
            row.push(-b_inv * g[j]);
        }
        let mut last: Vec<f64> = g.iter().map(|gj| -b_inv * gj).collect();
        last.push(-b_inv * b_inv);
        self.beta.push(last);

        self.support.push(x);
    }

    /// Largest `|beta_{j,k} - beta_{k,j}|`.
    pub fn beta_asymmetry(&self) -> f64 {
        let t = self.beta.len();
        let mut worst = 0.0f64;
        for j in 0..t {
            for k in (j + 1)..t {
                worst = worst.max((self.beta[j][k] - self.beta[k][j]).abs());
            }
        }
        worst
    }

    /// `sum_i alpha_i x_i`; equals the primal weight vector under the linear
    /// kernel.
    pub fn implied_weights(&self, dim: usize) -> Vector {
        let mut w = Vector::zeros(dim);
        for (xi, a) in self.support.iter().zip(self.alpha.iter()) {
            w.add_scaled(*a, xi);
        }
        w
    }

    /// `sum_{j,k} beta_{j,k} x_j x_k' + b^{-1} I`; equals the primal Sigma
    /// under the linear kernel.
    pub fn implied_sigma(&self, dim: usize) -> SymMatrix {
        let t = self.support.len();
        let mut entries = vec![0.0; dim * dim];
        for j in 0..t {
            // Fold row j into one rank-one pass: x_j (sum_k beta_jk x_k)'.
            let mut acc = Vector::zeros(dim);
            for k in 0..t {
                acc.add_scaled(self.beta[j][k], &self.support[k]);
            }
            let xj = &self.support[j];
            for r in 0..dim {
                for c in 0..dim {
                    entries[r * dim + c] += xj[r] * acc[c];
                }
            }
        }
        for i in 0..dim {
            entries[i * dim + i] += 1.0 / self.b_reg;
        }
        SymMatrix::from_rows(dim, &entries)
    }
}
