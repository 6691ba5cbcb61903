//! The weighted last-step min-max learner in recursive primal form.
//!
//! State is a weight vector `w` and a covariance-like matrix `Sigma`. Each
//! round computes the example weight
//!
//! ```text
//! a_t = 1 / (1 - x' Sigma_{t-1} x)
//! ```
//!
//! then applies
//!
//! ```text
//! w_t     = w_{t-1} + (y_t - x' w_{t-1}) Sigma_{t-1} x
//! Sigma_t = Sigma_{t-1} - Sigma_{t-1} x x' Sigma_{t-1}
//! ```
//!
//! The recursion is authoritative; the accumulators `A_t = b I + sum a_s x x'`
//! and `b_vec_t = sum a_s y_s x_s` are maintained alongside purely as
//! diagnostics, which lets tests confirm `Sigma_t * A_t = I` and
//! `w_t = Sigma_t b_vec_t` at every round.

use thiserror::Error;

use crate::linalg::{SymMatrix, Vector};

/// Slack allowed on the input-norm precondition `|x| <= 1`.
pub const NORM_TOL: f64 = 1e-12;

/// How close `x' Sigma x` may get to 1 before the weight is degenerate.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("regularizer b must be greater than 1, got {0}")]
    InvalidRegularizer(f64),
    #[error("input norm {norm} exceeds 1 + 1e-12 (prescale the stream or reject it)")]
    InputNormViolation { norm: f64 },
    #[error("x' Sigma x = {quad} is too close to 1; the example weight is degenerate")]
    DegenerateWeight { quad: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone)]
pub struct WemmLearner {
    w: Vector,
    sigma: SymMatrix,
    a_mat: SymMatrix,
    b_vec: Vector,
    b_reg: f64,
    t: usize,
    a_history: Vec<f64>,
}

impl WemmLearner {
    /// `w_0 = 0`, `Sigma_0 = b^{-1} I`. Requires `b > 1`.
    pub fn new(dim: usize, b_reg: f64) -> Result<Self, LearnerError> {
        if !(b_reg > 1.0) {
            return Err(LearnerError::InvalidRegularizer(b_reg));
        }
        Ok(WemmLearner {
            w: Vector::zeros(dim),
            sigma: SymMatrix::scaled_identity(dim, 1.0 / b_reg),
            a_mat: SymMatrix::scaled_identity(dim, b_reg),
            b_vec: Vector::zeros(dim),
            b_reg,
            t: 0,
            a_history: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    pub fn b_reg(&self) -> f64 {
        self.b_reg
    }

    pub fn rounds(&self) -> usize {
        self.t
    }

    pub fn weights(&self) -> &Vector {
        &self.w
    }

    pub fn sigma(&self) -> &SymMatrix {
        &self.sigma
    }

    /// Diagnostic accumulator `A_t`.
    pub fn a_matrix(&self) -> &SymMatrix {
        &self.a_mat
    }

    /// Diagnostic accumulator `b_vec_t`.
    pub fn b_accumulator(&self) -> &Vector {
        &self.b_vec
    }

    pub fn weight_history(&self) -> &[f64] {
        &self.a_history
    }

    fn check_norm(&self, x: &Vector) -> Result<(), LearnerError> {
        let norm = x.norm();
        if norm > 1.0 + NORM_TOL {
            return Err(LearnerError::InputNormViolation { norm });
        }
        Ok(())
    }

    /// `yhat = x' w_{t-1}`.
    pub fn predict(&self, x: &Vector) -> Result<f64, LearnerError> {
        self.check_norm(x)?;
        Ok(self.w.dot(x))
    }

    /// The equality weight `a_t = 1 / (1 - x' Sigma_{t-1} x)`.
    pub fn weight(&self, x: &Vector) -> Result<f64, LearnerError> {
        let quad = self.sigma.quad_form(x);
        if quad >= 1.0 - DEGENERATE_TOL {
            return Err(LearnerError::DegenerateWeight { quad });
        }
        Ok(1.0 / (1.0 - quad))
    }

    /// Processes one example, returning the weight `a_t` it was given.
    pub fn update(&mut self, x: &Vector, y: f64) -> Result<f64, LearnerError> {
        self.check_norm(x)?;
        assert!(y.is_finite(), "label must be finite");
        let a = self.weight(x)?;

        let s = self.sigma.matvec(x);
        let residual = y - self.w.dot(x);
        self.w.add_scaled(residual, &s);
        self.sigma = self.sigma.rank_one_update(-1.0, &s);

        self.a_mat = self.a_mat.rank_one_update(a, x);
        self.b_vec.add_scaled(a * y, x);

        self.t += 1;
        self.a_history.push(a);
        Ok(a)
    }
}
