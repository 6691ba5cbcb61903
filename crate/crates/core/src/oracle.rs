//! Closed-form batch comparators.
//!
//! The stationary problem `min_u b|u|^2 + sum_t a_t (y_t - u'x_t)^2` has the
//! unique minimizer `u = A^{-1} b_vec` with minimal value
//! `sum_t a_t y_t^2 - b_vec' A^{-1} b_vec`.
//!
//! The non-stationary problem over a T-tuple anchored at `u_bar`,
//!
//! ```text
//! min  b|u_bar|^2 + c sum_t |u_t - u_bar|^2 + sum_t a~_t (y_t - u_t'x_t)^2
//! ```
//!
//! reduces exactly to the stationary problem with effective weights
//! `a_t = 1 / (a~_t^{-1} + c^{-1}|x_t|^2)`; the per-round minimizers are
//! `u_t = u_bar + [c^{-1} / (a~_t^{-1} + c^{-1}|x_t|^2)] (y_t - u_bar'x_t) x_t`.

use thiserror::Error;

use crate::linalg::{LinalgError, SymMatrix, Vector};
use crate::stream::Stream;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("stream is empty")]
    EmptyStream,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("weights length {weights} does not match stream length {stream}")]
    LengthMismatch { weights: usize, stream: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Batch-oracle output for one comparator vector, with an optional
/// non-stationary block for a comparator tuple.
#[derive(Debug, Clone)]
pub struct ComparatorReport {
    pub u_star: Vector,
    pub per_round_loss: Vec<f64>,
    /// `L_T(u_star)`.
    pub total_loss: f64,
    /// `L_T^a(u_star)`.
    pub weighted_loss: f64,
    /// `S = max_t loss_t(u_star)`; zero for an empty stream.
    pub worst_loss: f64,
    /// `b |u_star|^2 + L^a(u_star)`, the optimal objective value.
    pub objective: f64,
    pub nonstationary: Option<DriftComparator>,
}

/// The optimal comparator tuple of the drift-penalized problem.
#[derive(Debug, Clone)]
pub struct DriftComparator {
    pub u_bar: Vector,
    pub u_path: Vec<Vector>,
    /// `V_m = sum_t |u_t - u_bar|^2`.
    pub v_m: f64,
    /// Minimal value of the drift-penalized objective.
    pub j_min: f64,
    /// `L_T(u_1..u_T)` of the tuple.
    pub tuple_loss: f64,
    /// `L_T^a~(u_1..u_T)` of the tuple.
    pub weighted_tuple_loss: f64,
    /// `sup_t loss_t(u_t)` of the tuple.
    pub worst_loss: f64,
    /// Per-round losses of the tuple.
    pub per_round_loss: Vec<f64>,
}

fn check_weights(stream: &Stream, weights: &[f64]) -> Result<(), OracleError> {
    if weights.len() != stream.len() {
        return Err(OracleError::LengthMismatch {
            weights: weights.len(),
            stream: stream.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(OracleError::InvalidParameter(format!(
            "weights must be positive and finite, got {w}"
        )));
    }
    Ok(())
}

/// Minimizer and minimal value of `b|u|^2 + sum_t a_t (y_t - u'x_t)^2`.
pub fn batch_optimum(
    stream: &Stream,
    weights: &[f64],
    b_reg: f64,
) -> Result<(Vector, f64), OracleError> {
    if !(b_reg > 0.0) {
        return Err(OracleError::InvalidParameter(format!(
            "b must be > 0, got {b_reg}"
        )));
    }
    check_weights(stream, weights)?;
    let d = stream.dim();
    let mut a_mat = SymMatrix::scaled_identity(d, b_reg);
    let mut b_vec = Vector::zeros(d);
    let mut weighted_label_sq = 0.0;
    for (ex, a) in stream.iter().zip(weights.iter()) {
        a_mat = a_mat.rank_one_update(*a, &ex.x);
        b_vec.add_scaled(a * ex.y, &ex.x);
        weighted_label_sq += a * ex.y * ex.y;
    }
    let u = a_mat.solve_spd(&b_vec)?;
    let f_min = weighted_label_sq - b_vec.dot(&u);
    Ok((u, f_min))
}

pub fn per_round_losses(stream: &Stream, u: &Vector) -> Vec<f64> {
    stream
        .iter()
        .map(|ex| {
            let r = ex.y - u.dot(&ex.x);
            r * r
        })
        .collect()
}

/// `sum_t (y_t - u'x_t)^2`.
pub fn plain_loss(stream: &Stream, u: &Vector) -> f64 {
    per_round_losses(stream, u).iter().sum()
}

/// `sum_t a_t (y_t - u'x_t)^2`.
pub fn weighted_loss(stream: &Stream, weights: &[f64], u: &Vector) -> Result<f64, OracleError> {
    check_weights(stream, weights)?;
    Ok(per_round_losses(stream, u)
        .iter()
        .zip(weights.iter())
        .map(|(l, a)| a * l)
        .sum())
}

/// `max_t loss_t(u)`, the loss on the worst example.
pub fn worst_example_loss(stream: &Stream, u: &Vector) -> Result<f64, OracleError> {
    if stream.is_empty() {
        return Err(OracleError::EmptyStream);
    }
    Ok(per_round_losses(stream, u)
        .iter()
        .fold(0.0, |m, l| m.max(*l)))
}

/// Full report at the weighted-problem optimum.
pub fn comparator_report(
    stream: &Stream,
    weights: &[f64],
    b_reg: f64,
) -> Result<ComparatorReport, OracleError> {
    let (u_star, _) = batch_optimum(stream, weights, b_reg)?;
    comparator_report_at(stream, weights, b_reg, u_star)
}

/// Report for a caller-supplied comparator vector (the bounds hold for any
/// `u`; the tightest certificate uses the minimizer).
pub fn comparator_report_at(
    stream: &Stream,
    weights: &[f64],
    b_reg: f64,
    u: Vector,
) -> Result<ComparatorReport, OracleError> {
    check_weights(stream, weights)?;
    let per_round_loss = per_round_losses(stream, &u);
    let total_loss = per_round_loss.iter().sum();
    let weighted: f64 = per_round_loss
        .iter()
        .zip(weights.iter())
        .map(|(l, a)| a * l)
        .sum();
    let worst = per_round_loss.iter().fold(0.0f64, |m, l| m.max(*l));
    let objective = b_reg * u.norm_sq() + weighted;
    Ok(ComparatorReport {
        u_star: u,
        per_round_loss,
        total_loss,
        weighted_loss: weighted,
        worst_loss: worst,
        objective,
        nonstationary: None,
    })
}

/// Effective stationary weights `1 / (a~_t^{-1} + c^{-1} |x_t|^2)`.
pub fn effective_weights(
    stream: &Stream,
    a_tilde: &[f64],
    c: f64,
) -> Result<Vec<f64>, OracleError> {
    if !(c > 0.0) {
        return Err(OracleError::InvalidParameter(format!(
            "c must be > 0, got {c}"
        )));
    }
    if a_tilde.len() != stream.len() {
        return Err(OracleError::LengthMismatch {
            weights: a_tilde.len(),
            stream: stream.len(),
        });
    }
    if let Some(a) = a_tilde.iter().find(|a| !(**a >= 1.0 && a.is_finite())) {
        return Err(OracleError::InvalidParameter(format!(
            "a~ weights must be >= 1, got {a}"
        )));
    }
    Ok(stream
        .iter()
        .zip(a_tilde.iter())
        .map(|(ex, at)| 1.0 / (1.0 / at + ex.x.norm_sq() / c))
        .collect())
}

/// Closed-form optimum of the drift-penalized comparator problem.
pub fn nonstationary_optimum(
    stream: &Stream,
    a_tilde: &[f64],
    b_reg: f64,
    c: f64,
) -> Result<DriftComparator, OracleError> {
    let effective = effective_weights(stream, a_tilde, c)?;
    let (u_bar, _) = batch_optimum(stream, &effective, b_reg)?;

    let mut u_path = Vec::with_capacity(stream.len());
    let mut j_min = b_reg * u_bar.norm_sq();
    for (ex, aeff) in stream.iter().zip(effective.iter()) {
        let anchor_residual = ex.y - u_bar.dot(&ex.x);
        let gain = (1.0 / c) * aeff;
        let mut u_t = u_bar.clone();
        u_t.add_scaled(gain * anchor_residual, &ex.x);
        j_min += aeff * anchor_residual * anchor_residual;
        u_path.push(u_t);
    }

    let v_m: f64 = u_path.iter().map(|u| u.sub(&u_bar).norm_sq()).sum();
    let per_round_loss: Vec<f64> = stream
        .iter()
        .zip(u_path.iter())
        .map(|(ex, u)| {
            let r = ex.y - u.dot(&ex.x);
            r * r
        })
        .collect();
    let tuple_loss = per_round_loss.iter().sum();
    let weighted_tuple_loss = per_round_loss
        .iter()
        .zip(a_tilde.iter())
        .map(|(l, a)| a * l)
        .sum();
    let worst_loss = per_round_loss.iter().fold(0.0f64, |m, l| m.max(*l));

    Ok(DriftComparator {
        u_bar,
        u_path,
        v_m,
        j_min,
        tuple_loss,
        weighted_tuple_loss,
        worst_loss,
        per_round_loss,
    })
}
