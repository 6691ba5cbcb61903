//! Numeric certificates for the regret identities and bounds.
//!
//! Each certifier takes a completed run (trace plus stream) and a comparator
//! report, rebuilds whatever accumulator quantities it needs from the
//! recorded `a_t` sequence, and emits a [`BoundReport`]: the certified
//! quantity, the bound value broken into named terms, the slack, and a
//! pass flag at a relative tolerance.
//!
//! Certified statements, with `beta = b/(b-1)`, `S` the comparator's worst
//! per-round loss, and `A_T = b I + sum_t a_t x_t x_t'`:
//!
//! * equality: `L_T(alg) = b|u*|^2 + L^a(u*)` (two-sided);
//! * log bound: `L^a(u) - L(u) <= beta S ln|A_T/b|` and the regret form
//!   `L_T(alg) - L(u) <= b|u|^2 + beta S ln|A_T/b|`;
//! * sub-log bound: the gap term is `beta S d (1 + ln(1 + L(u)/(S d)))`,
//!   defined as 0 in the limit `S = 0`;
//! * drift bounds over a comparator tuple anchored at `u_bar`, at a caller
//!   drift price `c` and at the minimizing `c_V`.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{LinalgError, SymMatrix, Vector};
use crate::oracle::{comparator_report_at, ComparatorReport, DriftComparator, OracleError};
use crate::stream::Stream;
use crate::trace::RunTrace;

/// Default relative certification tolerance.
pub const REL_TOL: f64 = 1e-6;

/// Slack allowed when classifying a recorded weight sequence as the
/// equality choice.
const EQUALITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("trace was not produced under equality weights")]
    WeightModeMismatch,
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("instance too large for exhaustive check: d={d}, tau={tau} (caps: d<=3, tau<=6)")]
    InstanceTooLarge { d: usize, tau: usize },
    #[error("lengths do not match: {0}")]
    LengthMismatch(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// One certified statement. `terms` sum to `rhs`; `slack = rhs - lhs`.
/// One-sided reports pass when `slack >= -tol`; two-sided (equality)
/// reports additionally require `slack <= tol`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub theorem: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub tol: f64,
    pub two_sided: bool,
    pub terms: BTreeMap<String, f64>,
}

impl BoundReport {
    fn from_terms(
        theorem: &str,
        lhs: f64,
        terms: BTreeMap<String, f64>,
        rel_tol: f64,
        two_sided: bool,
    ) -> Self {
        let rhs: f64 = terms.values().sum();
        let slack = rhs - lhs;
        let tol = rel_tol * (1.0 + rhs.abs());
        let pass = if two_sided {
            slack.abs() <= tol
        } else {
            slack >= -tol
        };
        BoundReport {
            theorem: theorem.to_string(),
            lhs,
            rhs,
            slack,
            pass,
            tol,
            two_sided,
            terms,
        }
    }
}

/// Accumulator quantities rebuilt from a stream and its recorded weights.
#[derive(Debug, Clone)]
pub struct WeightReplay {
    /// `x_t' A_{t-1}^{-1} x_t` per round.
    pub q_pre: Vec<f64>,
    /// `x_t' A_t^{-1} x_t` per round.
    pub q_post: Vec<f64>,
    /// `ln |A_T / b|`.
    pub log_det_ratio: f64,
    /// Whether every round satisfied `1 + a_t q_pre - a_t = 0` to within
    /// classification tolerance.
    pub equality: bool,
}

/// Rebuilds `A_t` round by round from `(x_t, a_t)` and classifies the
/// weight sequence.
pub fn replay_weights(
    stream: &Stream,
    weights: &[f64],
    b_reg: f64,
) -> Result<WeightReplay, CertifyError> {
    if weights.len() != stream.len() {
        return Err(CertifyError::LengthMismatch(format!(
            "{} weights vs {} examples",
            weights.len(),
            stream.len()
        )));
    }
    if let Some(a) = weights.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
        return Err(CertifyError::InvalidParameter(format!(
            "weights must be positive and finite, got {a}"
        )));
    }
    if !(b_reg > 0.0) {
        return Err(CertifyError::InvalidParameter(format!(
            "b must be > 0, got {b_reg}"
        )));
    }
    let d = stream.dim();
    let mut a_mat = SymMatrix::scaled_identity(d, b_reg);
    let mut q_pre = Vec::with_capacity(stream.len());
    let mut q_post = Vec::with_capacity(stream.len());
    let mut equality = true;
    for (ex, a) in stream.iter().zip(weights.iter()) {
        let pre = a_mat.solve_spd(&ex.x)?.dot(&ex.x);
        a_mat = a_mat.rank_one_update(*a, &ex.x);
        let post = a_mat.solve_spd(&ex.x)?.dot(&ex.x);
        if (1.0 + a * pre - a).abs() > EQUALITY_TOL * a.max(1.0) {
            equality = false;
        }
        q_pre.push(pre);
        q_post.push(post);
    }
    let log_det_ratio = a_mat.log_det()? - d as f64 * b_reg.ln();
    Ok(WeightReplay {
        q_pre,
        q_post,
        log_det_ratio,
        equality,
    })
}

fn trace_weights(trace: &RunTrace) -> Result<Vec<f64>, CertifyError> {
    trace.weights().ok_or(CertifyError::WeightModeMismatch)
}

fn require_equality(replay: &WeightReplay) -> Result<(), CertifyError> {
    if !replay.equality {
        return Err(CertifyError::WeightModeMismatch);
    }
    Ok(())
}

fn require_bound_preconditions(stream: &Stream, b_reg: f64) -> Result<(), CertifyError> {
    if !(b_reg > 1.0) {
        return Err(CertifyError::PreconditionViolation(format!(
            "regret bounds require b > 1, got {b_reg}"
        )));
    }
    if stream.max_norm() > 1.0 + 1e-12 {
        return Err(CertifyError::PreconditionViolation(format!(
            "recorded max input norm {} exceeds 1",
            stream.max_norm()
        )));
    }
    Ok(())
}

/// Equality certificate: `L_T(alg)` against the optimal weighted objective
/// `b|u*|^2 + L^a(u*)`, two-sided.
pub fn certify_theorem2(
    stream: &Stream,
    trace: &RunTrace,
    comp: &ComparatorReport,
    rel_tol: f64,
) -> Result<BoundReport, CertifyError> {
    let weights = trace_weights(trace)?;
    let replay = replay_weights(stream, &weights, trace.b_reg)?;
    require_equality(&replay)?;
    let mut terms = BTreeMap::new();
    terms.insert(
        "b_norm_u_sq".to_string(),
        trace.b_reg * comp.u_star.norm_sq(),
    );
    terms.insert("weighted_comparator_loss".to_string(), comp.weighted_loss);
    Ok(BoundReport::from_terms(
        "theorem2",
        trace.total_loss(),
        terms,
        rel_tol,
        true,
    ))
}

/// Log-determinant certificates: the weighted-loss gap and the realized
/// regret, both bounded through `beta S ln|A_T/b|`.
pub fn certify_theorem3(
    stream: &Stream,
    trace: &RunTrace,
    comp: &ComparatorReport,
    rel_tol: f64,
) -> Result<Vec<BoundReport>, CertifyError> {
    require_bound_preconditions(stream, trace.b_reg)?;
    let weights = trace_weights(trace)?;
    let replay = replay_weights(stream, &weights, trace.b_reg)?;
    require_equality(&replay)?;

    let b = trace.b_reg;
    let log_term = (b / (b - 1.0)) * comp.worst_loss * replay.log_det_ratio;

    let mut gap_terms = BTreeMap::new();
    gap_terms.insert("log_term".to_string(), log_term);
    let gap = BoundReport::from_terms(
        "theorem3_gap",
        comp.weighted_loss - comp.total_loss,
        gap_terms,
        rel_tol,
        false,
    );

    let mut regret_terms = BTreeMap::new();
    regret_terms.insert("b_norm_u_sq".to_string(), b * comp.u_star.norm_sq());
    regret_terms.insert("log_term".to_string(), log_term);
    let regret = BoundReport::from_terms(
        "theorem3_regret",
        trace.total_loss() - comp.total_loss,
        regret_terms,
        rel_tol,
        false,
    );
    Ok(vec![gap, regret])
}

/// Closed-form regret bound `b|u|^2 + S d beta ln(1 + T/(d(b-1)))`, which
/// dominates the log-determinant form whenever all inputs sit in the unit
/// ball.
pub fn theorem3_table_rhs(b_reg: f64, worst_loss: f64, dim: usize, rounds: usize) -> f64 {
    let d = dim as f64;
    worst_loss * d * (b_reg / (b_reg - 1.0)) * (1.0 + rounds as f64 / (d * (b_reg - 1.0))).ln()
}

/// The sub-logarithmic gap term `beta S d (1 + ln(1 + L/(S d)))`, with the
/// `S = 0` limit pinned to 0.
pub fn sub_log_gap_term(b_reg: f64, worst_loss: f64, dim: usize, comparator_loss: f64) -> f64 {
    if worst_loss == 0.0 {
        return 0.0;
    }
    let d = dim as f64;
    (b_reg / (b_reg - 1.0))
        * worst_loss
        * d
        * (1.0 + (1.0 + comparator_loss / (worst_loss * d)).ln())
}

/// Sub-logarithmic certificates: gap and regret forms of the
/// loss-dependent bound.
pub fn certify_theorem4(
    stream: &Stream,
    trace: &RunTrace,
    comp: &ComparatorReport,
    rel_tol: f64,
) -> Result<Vec<BoundReport>, CertifyError> {
    require_bound_preconditions(stream, trace.b_reg)?;
    let weights = trace_weights(trace)?;
    let replay = replay_weights(stream, &weights, trace.b_reg)?;
    require_equality(&replay)?;

    let b = trace.b_reg;
    let term = sub_log_gap_term(b, comp.worst_loss, stream.dim(), comp.total_loss);

    let mut gap_terms = BTreeMap::new();
    gap_terms.insert("sub_log_term".to_string(), term);
    let gap = BoundReport::from_terms(
        "theorem4_gap",
        comp.weighted_loss - comp.total_loss,
        gap_terms,
        rel_tol,
        false,
    );

    let mut regret_terms = BTreeMap::new();
    regret_terms.insert("b_norm_u_sq".to_string(), b * comp.u_star.norm_sq());
    regret_terms.insert("sub_log_term".to_string(), term);
    let regret = BoundReport::from_terms(
        "theorem4_regret",
        trace.total_loss() - comp.total_loss,
        regret_terms,
        rel_tol,
        false,
    );
    Ok(vec![gap, regret])
}

/// Dual-norm stacking check: `sum_t loss_t (a_t - 1) <= S sum_{t in I}
/// (a_t - 1)` where `I` holds the `ceil(sum loss / S)` largest weights
/// (ties broken by earlier index).
pub fn check_lemma5(losses: &[f64], weights: &[f64], s: f64) -> Result<bool, CertifyError> {
    if !(s > 0.0) {
        return Err(CertifyError::InvalidParameter(format!(
            "S must be > 0, got {s}"
        )));
    }
    if losses.len() != weights.len() {
        return Err(CertifyError::LengthMismatch(format!(
            "{} losses vs {} weights",
            losses.len(),
            weights.len()
        )));
    }
    let total: f64 = losses.iter().sum();
    let t_prime = ((total / s).ceil() as usize).min(losses.len());
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        weights[j]
            .partial_cmp(&weights[i])
            .expect("finite weights")
            .then(i.cmp(&j))
    });
    let lhs: f64 = losses
        .iter()
        .zip(weights.iter())
        .map(|(l, a)| l * (a - 1.0))
        .sum();
    let rhs: f64 = s * order
        .iter()
        .take(t_prime)
        .map(|&i| weights[i] - 1.0)
        .sum::<f64>();
    Ok(lhs <= rhs + 1e-9)
}

fn unit_directions(d: usize) -> Vec<Vector> {
    // Normalized nonzero points of {-1, 0, 1}^d, deduplicated antipodally
    // (x and -x give the same outer product, hence the same weights). In
    // two dimensions this is the 8-direction compass grid, halved; the
    // standard basis (the eigenvector directions of b*I) is included.
    let mut dirs = Vec::new();
    let total = 3usize.pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let mut v = vec![0.0; d];
        for entry in v.iter_mut() {
            *entry = (c % 3) as f64 - 1.0;
            c /= 3;
        }
        if v.iter().all(|x| *x == 0.0) {
            continue;
        }
        if v.iter().find(|x| **x != 0.0).copied() == Some(-1.0) {
            continue;
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        dirs.push(Vector::from_slice(
            &v.iter().map(|x| x / norm).collect::<Vec<_>>(),
        ));
    }
    dirs
}

/// Exhaustive worst-sequence check of the eigenvalue bound
/// `sum_t a_t <= tau + max_alloc sum_s sum_{r=1..n_s} 1/(lambda_s + r - 2)`
/// over all unit-norm input sequences drawn from a fixed direction grid.
/// Only small instances are accepted.
pub fn check_lemma6(b_reg: f64, d: usize, tau: usize) -> Result<bool, CertifyError> {
    if !(b_reg > 1.0) {
        return Err(CertifyError::InvalidParameter(format!(
            "b must be > 1, got {b_reg}"
        )));
    }
    if d == 0 || tau == 0 || d > 3 || tau > 6 {
        return Err(CertifyError::InstanceTooLarge { d, tau });
    }

    // Largest rhs over allocations of tau uses among d equal eigenvalues b.
    fn best_allocation(b: f64, d: usize, remaining: usize) -> f64 {
        if d == 1 {
            return (1..=remaining).map(|r| 1.0 / (b + r as f64 - 2.0)).sum();
        }
        (0..=remaining)
            .map(|n| {
                let here: f64 = (1..=n).map(|r| 1.0 / (b + r as f64 - 2.0)).sum();
                here + best_allocation(b, d - 1, remaining - n)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
    let bound = tau as f64 + best_allocation(b_reg, d, tau);

    let dirs = unit_directions(d);
    let mut indices = vec![0usize; tau];
    let mut worst = f64::NEG_INFINITY;
    loop {
        // Run the weight recursion on this sequence.
        let mut sigma = SymMatrix::scaled_identity(d, 1.0 / b_reg);
        let mut sum_a = 0.0;
        for &i in &indices {
            let x = &dirs[i];
            let s = sigma.matvec(x);
            let q = x.dot(&s);
            sum_a += 1.0 / (1.0 - q);
            sigma = sigma.rank_one_update(-1.0, &s);
        }
        worst = worst.max(sum_a);
        // Odometer over direction indices.
        let mut pos = 0;
        loop {
            if pos == tau {
                return Ok(worst <= bound + 1e-9);
            }
            indices[pos] += 1;
            if indices[pos] < dirs.len() {
                break;
            }
            indices[pos] = 0;
            pos += 1;
        }
    }
}

/// Drift weights `a~_t = 1/(1/a_t - |x_t|^2 / c)`, requiring the
/// feasibility condition `1/b + 1/c <= 1` and a strictly positive
/// denominator every round.
pub fn nonstationary_weights(
    stream: &Stream,
    weights: &[f64],
    b_reg: f64,
    c: f64,
) -> Result<Vec<f64>, CertifyError> {
    if !(c > 0.0) {
        return Err(CertifyError::InvalidParameter(format!(
            "c must be > 0, got {c}"
        )));
    }
    if !(b_reg > 1.0) {
        return Err(CertifyError::PreconditionViolation(format!(
            "b must be > 1, got {b_reg}"
        )));
    }
    if 1.0 / b_reg + 1.0 / c > 1.0 {
        return Err(CertifyError::InfeasibleParameters(format!(
            "1/b + 1/c = {} exceeds 1",
            1.0 / b_reg + 1.0 / c
        )));
    }
    if weights.len() != stream.len() {
        return Err(CertifyError::LengthMismatch(format!(
            "{} weights vs {} examples",
            weights.len(),
            stream.len()
        )));
    }
    let mut out = Vec::with_capacity(weights.len());
    for (ex, a) in stream.iter().zip(weights.iter()) {
        let denom = 1.0 / a - ex.x.norm_sq() / c;
        if denom <= 1e-12 {
            return Err(CertifyError::InfeasibleParameters(format!(
                "drift weight denominator {denom} at the feasibility boundary"
            )));
        }
        out.push(1.0 / denom);
    }
    Ok(out)
}

/// The drift price minimizing the Corollary-level bound,
/// `c_V = beta (1 + sqrt(S T / V_m))`.
pub fn c_v(b_reg: f64, worst_loss: f64, rounds: usize, v_m: f64) -> f64 {
    (b_reg / (b_reg - 1.0)) * (1.0 + (worst_loss * rounds as f64 / v_m).sqrt())
}

/// Non-stationary certificates against a drifting comparator tuple:
/// the loss bound at drift price `c`, the weighted-loss gap, and the
/// regret bound at `c`, at `c_V`, and in the sub-logarithmic variant.
///
/// A comparator with `V_m = 0` carries no drift, and the certificates
/// reduce exactly to the stationary log-determinant ones.
pub fn certify_corollaries(
    stream: &Stream,
    trace: &RunTrace,
    drift: &DriftComparator,
    c: f64,
    rel_tol: f64,
) -> Result<Vec<BoundReport>, CertifyError> {
    require_bound_preconditions(stream, trace.b_reg)?;
    let weights = trace_weights(trace)?;

    if drift.v_m == 0.0 {
        let comp = comparator_report_at(stream, &weights, trace.b_reg, drift.u_bar.clone())?;
        return certify_theorem3(stream, trace, &comp, rel_tol);
    }

    let replay = replay_weights(stream, &weights, trace.b_reg)?;
    require_equality(&replay)?;
    let b = trace.b_reg;
    if 1.0 / b + 1.0 / c > 1.0 {
        return Err(CertifyError::InfeasibleParameters(format!(
            "1/b + 1/c = {} exceeds 1",
            1.0 / b + 1.0 / c
        )));
    }
    let beta = b / (b - 1.0);
    let s = drift.worst_loss;
    let t = stream.len() as f64;
    let d = stream.dim();
    let cor10_denom = c * (1.0 - 1.0 / b) * (1.0 - 1.0 / b) - (1.0 - 1.0 / b);
    if cor10_denom <= 0.0 {
        return Err(CertifyError::InfeasibleParameters(format!(
            "drift-term denominator c(1-1/b)^2 - (1-1/b) = {cor10_denom} is not positive"
        )));
    }

    let b_norm_ubar = b * drift.u_bar.norm_sq();
    let log_term = beta * s * replay.log_det_ratio;
    let drift_term = t * s / cor10_denom;

    let mut reports = Vec::new();

    let mut terms9 = BTreeMap::new();
    terms9.insert("b_norm_ubar_sq".to_string(), b_norm_ubar);
    terms9.insert("drift_penalty".to_string(), c * drift.v_m);
    terms9.insert("weighted_tuple_loss".to_string(), drift.weighted_tuple_loss);
    reports.push(BoundReport::from_terms(
        "corollary9",
        trace.total_loss(),
        terms9,
        rel_tol,
        false,
    ));

    let mut terms10 = BTreeMap::new();
    terms10.insert("log_term".to_string(), log_term);
    terms10.insert("drift_term".to_string(), drift_term);
    reports.push(BoundReport::from_terms(
        "corollary10",
        drift.weighted_tuple_loss - drift.tuple_loss,
        terms10,
        rel_tol,
        false,
    ));

    let regret_lhs = trace.total_loss() - drift.tuple_loss;

    let mut terms11 = BTreeMap::new();
    terms11.insert("b_norm_ubar_sq".to_string(), b_norm_ubar);
    terms11.insert("log_term".to_string(), log_term);
    terms11.insert("drift_penalty".to_string(), c * drift.v_m);
    terms11.insert("drift_term".to_string(), drift_term);
    reports.push(BoundReport::from_terms(
        "corollary11",
        regret_lhs,
        terms11,
        rel_tol,
        false,
    ));

    let vm_term = beta * (drift.v_m + 2.0 * (s * t * drift.v_m).sqrt());
    let mut terms11v = BTreeMap::new();
    terms11v.insert("b_norm_ubar_sq".to_string(), b_norm_ubar);
    terms11v.insert("log_term".to_string(), log_term);
    terms11v.insert("vm_term".to_string(), vm_term);
    reports.push(BoundReport::from_terms(
        "corollary11_cv",
        regret_lhs,
        terms11v,
        rel_tol,
        false,
    ));

    let mut terms11t4 = BTreeMap::new();
    terms11t4.insert("b_norm_ubar_sq".to_string(), b_norm_ubar);
    terms11t4.insert(
        "sub_log_term".to_string(),
        sub_log_gap_term(b, s, d, drift.tuple_loss),
    );
    terms11t4.insert("vm_term".to_string(), vm_term);
    reports.push(BoundReport::from_terms(
        "corollary11_thm4",
        regret_lhs,
        terms11t4,
        rel_tol,
        false,
    ));

    Ok(reports)
}
