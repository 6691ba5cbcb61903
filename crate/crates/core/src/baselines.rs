//! Second-order comparison learners sharing one state shape.
//!
//! All four maintain `(w, Sigma)` with `w_0 = 0`, `Sigma_0 = b^{-1} I`, and
//! differ only in their update formulas:
//!
//! * AROWR: `Sigma^{-1} += (1/r) x x'`,
//!   `w += (y - x'w) Sigma x / (r + x' Sigma x)`.
//! * AAR: ridge updates, but the prediction is shrunk to
//!   `x'w / (1 + x' Sigma x)` — equivalent to ridge trained with the extra
//!   pair `(x_t, 0)`.
//! * Ridge: `Sigma^{-1} += x x'`,
//!   `w += (y - x'w) Sigma x / (1 + x' Sigma x)`.
//! * RLS: exponentially weighted least squares with forgetting factor
//!   `0 < r <= 1` and no regularization beyond the `Sigma_0` initializer.
//!
//! Sigma updates are applied in rank-one inverse (Sherman-Morrison) form so
//! `Sigma` always tracks the inverse of the accumulated design matrix.

use serde::{Deserialize, Serialize};

use crate::linalg::{SymMatrix, Vector};
use crate::primal::LearnerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Arowr,
    Aar,
    Ridge,
    Rls,
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::Arowr => "arowr",
            BaselineKind::Aar => "aar",
            BaselineKind::Ridge => "ridge",
            BaselineKind::Rls => "rls",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BaselineLearner {
    kind: BaselineKind,
    w: Vector,
    sigma: SymMatrix,
    b_reg: f64,
    r: f64,
    t: usize,
}

impl BaselineLearner {
    /// `r` is the AROWR regularizer or the RLS forgetting factor; it is
    /// ignored by AAR and Ridge.
    pub fn new(kind: BaselineKind, dim: usize, b_reg: f64, r: f64) -> Result<Self, LearnerError> {
        if !(b_reg > 0.0) {
            return Err(LearnerError::InvalidParameter(format!(
                "b must be > 0, got {b_reg}"
            )));
        }
        match kind {
            BaselineKind::Arowr if !(r > 0.0) => {
                return Err(LearnerError::InvalidParameter(format!(
                    "arowr requires r > 0, got {r}"
                )));
            }
            BaselineKind::Rls if !(r > 0.0 && r <= 1.0) => {
                return Err(LearnerError::InvalidParameter(format!(
                    "rls requires 0 < r <= 1, got {r}"
                )));
            }
            _ => {}
        }
        Ok(BaselineLearner {
            kind,
            w: Vector::zeros(dim),
            sigma: SymMatrix::scaled_identity(dim, 1.0 / b_reg),
            b_reg,
            r,
            t: 0,
        })
    }

    pub fn arowr(dim: usize, b_reg: f64, r: f64) -> Result<Self, LearnerError> {
        Self::new(BaselineKind::Arowr, dim, b_reg, r)
    }

    pub fn aar(dim: usize, b_reg: f64) -> Result<Self, LearnerError> {
        Self::new(BaselineKind::Aar, dim, b_reg, 1.0)
    }

    pub fn ridge(dim: usize, b_reg: f64) -> Result<Self, LearnerError> {
        Self::new(BaselineKind::Ridge, dim, b_reg, 1.0)
    }

    pub fn rls(dim: usize, b_reg: f64, r: f64) -> Result<Self, LearnerError> {
        Self::new(BaselineKind::Rls, dim, b_reg, r)
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
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

    pub fn predict(&self, x: &Vector) -> f64 {
        match self.kind {
            BaselineKind::Aar => self.w.dot(x) / (1.0 + self.sigma.quad_form(x)),
            _ => self.w.dot(x),
        }
    }

    pub fn update(&mut self, x: &Vector, y: f64) {
        assert!(y.is_finite(), "label must be finite");
        let s = self.sigma.matvec(x);
        let q = x.dot(&s);
        let residual = y - self.w.dot(x);
        match self.kind {
            BaselineKind::Arowr => {
                let denom = self.r + q;
                self.w.add_scaled(residual / denom, &s);
                self.sigma = self.sigma.rank_one_update(-1.0 / denom, &s);
            }
            BaselineKind::Aar | BaselineKind::Ridge => {
                let denom = 1.0 + q;
                self.w.add_scaled(residual / denom, &s);
                self.sigma = self.sigma.rank_one_update(-1.0 / denom, &s);
            }
            BaselineKind::Rls => {
                let denom = self.r + q;
                self.w.add_scaled(residual / denom, &s);
                self.sigma = self
                    .sigma
                    .rank_one_update(-1.0 / denom, &s)
                    .scale(1.0 / self.r);
            }
        }
        self.t += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::Rng;
    use crate::stream::{Example, Stream};
    use approx::assert_abs_diff_eq;

    #[test]
    fn init_formulas_and_validation() {
        let ridge = BaselineLearner::ridge(2, 1.0).unwrap();
        assert_eq!(ridge.sigma(), &SymMatrix::identity(2));

        let aar = BaselineLearner::aar(1, 4.0).unwrap();
        assert_eq!(aar.sigma().get(0, 0), 0.25);

        assert!(BaselineLearner::arowr(2, 1.0, 0.0).is_err());
        assert!(BaselineLearner::rls(2, 1.0, 1.5).is_err());
        assert!(BaselineLearner::ridge(2, 0.0).is_err());
    }

    #[test]
    fn fresh_states_predict_zero() {
        let x = Vector::from_slice(&[0.4, -0.1]);
        for learner in [
            BaselineLearner::arowr(2, 1.0, 1.0).unwrap(),
            BaselineLearner::aar(2, 1.0).unwrap(),
            BaselineLearner::ridge(2, 1.0).unwrap(),
            BaselineLearner::rls(2, 1.0, 0.9).unwrap(),
        ] {
            assert_eq!(learner.predict(&x), 0.0);
        }
    }

    #[test]
    fn aar_shrinkage_formula() {
        // Synthetic state w = e1, Sigma = I, x = e1 predicts 1/(1+1).
        let mut aar = BaselineLearner::aar(2, 1.0).unwrap();
        aar.w = Vector::basis(2, 0);
        aar.sigma = SymMatrix::identity(2);
        assert_eq!(aar.predict(&Vector::basis(2, 0)), 0.5);
    }

    #[test]
    fn ridge_hand_evaluated_update() {
        // b = 1, x = e1, y = 1: Sigma_1 = diag(1/2, 1), w_1 = (1/2, 0).
        let mut ridge = BaselineLearner::ridge(2, 1.0).unwrap();
        let x = Vector::basis(2, 0);
        ridge.update(&x, 1.0);
        assert_eq!(ridge.weights().as_slice(), &[0.5, 0.0]);
        assert_eq!(ridge.sigma().get(0, 0), 0.5);
        assert_eq!(ridge.sigma().get(1, 1), 1.0);
        assert_eq!(ridge.predict(&x), 0.5);
    }

    #[test]
    fn arowr_large_r_stops_learning() {
        let mut learner = BaselineLearner::arowr(2, 1.0, 1e12).unwrap();
        learner.update(&Vector::basis(2, 0), 1.0);
        assert!(learner.weights().norm() <= 1e-10);
    }

    fn random_stream(seed: u64, dim: usize, rounds: usize) -> Stream {
        let mut rng = Rng::new(seed);
        let examples = (0..rounds)
            .map(|_| {
                let raw: Vec<f64> = (0..dim).map(|_| rng.gaussian()).collect();
                let n: f64 = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
                let x: Vec<f64> = raw.iter().map(|v| 0.9 * v / n).collect();
                Example::new(Vector::from_slice(&x), rng.gaussian())
            })
            .collect();
        Stream::new(examples, dim, "test".into(), seed)
    }

    #[test]
    fn ridge_matches_batch_solution_every_round() {
        let b = 1.5;
        let stream = random_stream(3, 3, 40);
        let mut learner = BaselineLearner::ridge(3, b).unwrap();
        let mut a_mat = SymMatrix::scaled_identity(3, b);
        let mut b_vec = Vector::zeros(3);
        for ex in stream.iter() {
            learner.update(&ex.x, ex.y);
            a_mat = a_mat.rank_one_update(1.0, &ex.x);
            b_vec.add_scaled(ex.y, &ex.x);
            let batch = a_mat.solve_spd(&b_vec).unwrap();
            let diff = learner.weights().sub(&batch).norm_inf();
            assert!(diff <= 1e-7 * (1.0 + batch.norm_inf()), "diff {diff}");
        }
    }

    #[test]
    fn aar_equals_ridge_on_augmented_stream() {
        let b = 2.0;
        let stream = random_stream(8, 2, 30);
        let mut aar = BaselineLearner::aar(2, b).unwrap();
        for (t, ex) in stream.iter().enumerate() {
            // Ridge trained on the prefix plus the extra pair (x_t, 0).
            let mut ridge = BaselineLearner::ridge(2, b).unwrap();
            for prev in stream.iter().take(t) {
                ridge.update(&prev.x, prev.y);
            }
            ridge.update(&ex.x, 0.0);
            let expected = ridge.weights().dot(&ex.x);
            assert_abs_diff_eq!(aar.predict(&ex.x), expected, epsilon = 1e-8);
            aar.update(&ex.x, ex.y);
        }
    }

    #[test]
    fn rls_with_unit_forgetting_matches_ridge() {
        let stream = random_stream(5, 2, 25);
        let mut rls = BaselineLearner::rls(2, 2.0, 1.0).unwrap();
        let mut ridge = BaselineLearner::ridge(2, 2.0).unwrap();
        for ex in stream.iter() {
            assert_eq!(rls.predict(&ex.x), ridge.predict(&ex.x));
            rls.update(&ex.x, ex.y);
            ridge.update(&ex.x, ex.y);
        }
    }

    #[test]
    fn rls_tracks_discounted_batch_solution() {
        let r = 0.9;
        let b = 1.0;
        let stream = random_stream(12, 2, 30);
        let mut rls = BaselineLearner::rls(2, b, r).unwrap();
        for (t, ex) in stream.iter().enumerate() {
            rls.update(&ex.x, ex.y);
            // Direct solve of sum_i r^{t-i} (y_i - x'w)^2 with the decayed
            // Sigma_0 initializer.
            let count = t + 1;
            let mut a_mat = SymMatrix::scaled_identity(2, b * r.powi(count as i32));
            let mut b_vec = Vector::zeros(2);
            for (i, prev) in stream.iter().take(count).enumerate() {
                let weight = r.powi((count - 1 - i) as i32);
                a_mat = a_mat.rank_one_update(weight, &prev.x);
                b_vec.add_scaled(weight * prev.y, &prev.x);
            }
            let batch = a_mat.solve_spd(&b_vec).unwrap();
            assert!(rls.weights().sub(&batch).norm_inf() <= 1e-7);
        }
    }
}
