//! Per-round run traces and the loops that produce them.
//!
//! A trace records, for every round, the label, the prediction, the square
//! loss, the example weight `a_t` (min-max learner only), and the running
//! cumulative loss. The CSV layout is `t,y,yhat,loss,a_t,cum_loss` with an
//! empty `a_t` field for learners that have no such weight. Everything the
//! bound certifiers need can be recovered from a trace plus its stream;
//! no re-simulation is required.

use std::time::Instant;

use crate::baselines::{BaselineKind, BaselineLearner};
use crate::kernel::{KernelSpec, KernelWemm};
use crate::primal::{LearnerError, WemmLearner};
use crate::stream::{Stream, StreamError};

#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub t: usize,
    pub y: f64,
    pub yhat: f64,
    pub loss: f64,
    pub a_t: Option<f64>,
    pub cum_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub learner: String,
    pub b_reg: f64,
    pub rounds: Vec<RoundTrace>,
    /// `ln det(A_T)` of the final accumulator, where available.
    pub log_det_a: Option<f64>,
    pub wall_ms: f64,
}

impl RunTrace {
    pub fn total_loss(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.cum_loss)
    }

    /// The recorded `a_t` sequence; `None` if any round lacks one.
    pub fn weights(&self) -> Option<Vec<f64>> {
        self.rounds.iter().map(|r| r.a_t).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,y,yhat,loss,a_t,cum_loss\n");
        for r in &self.rounds {
            let a = r.a_t.map_or(String::new(), |a| a.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.t, r.y, r.yhat, r.loss, a, r.cum_loss
            ));
        }
        out
    }

    /// Parses a trace CSV. The regularizer is not part of the wire format,
    /// so the caller supplies it.
    pub fn from_csv(text: &str, learner: &str, b_reg: f64) -> Result<RunTrace, StreamError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(StreamError::Empty)?;
        if header != "t,y,yhat,loss,a_t,cum_loss" {
            return Err(StreamError::Parse {
                line: 1,
                msg: format!("bad trace header {header:?}"),
            });
        }
        let mut rounds = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(StreamError::DimensionMismatch {
                    line: lineno,
                    expected: 6,
                    found: fields.len(),
                });
            }
            let num = |s: &str, what: &str| -> Result<f64, StreamError> {
                s.parse().map_err(|_| StreamError::Parse {
                    line: lineno,
                    msg: format!("cannot parse {what} value {s:?}"),
                })
            };
            let t = fields[0].parse().map_err(|_| StreamError::Parse {
                line: lineno,
                msg: format!("cannot parse round index {:?}", fields[0]),
            })?;
            let a_t = if fields[4].is_empty() {
                None
            } else {
                Some(num(fields[4], "a_t")?)
            };
            rounds.push(RoundTrace {
                t,
                y: num(fields[1], "y")?,
                yhat: num(fields[2], "yhat")?,
                loss: num(fields[3], "loss")?,
                a_t,
                cum_loss: num(fields[5], "cum_loss")?,
            });
        }
        Ok(RunTrace {
            learner: learner.to_string(),
            b_reg,
            rounds,
            log_det_a: None,
            wall_ms: 0.0,
        })
    }
}

fn record_round(
    rounds: &mut Vec<RoundTrace>,
    t: usize,
    y: f64,
    yhat: f64,
    a_t: Option<f64>,
    cum_loss: &mut f64,
) {
    let loss = (yhat - y) * (yhat - y);
    *cum_loss += loss;
    rounds.push(RoundTrace {
        t,
        y,
        yhat,
        loss,
        a_t,
        cum_loss: *cum_loss,
    });
}

/// Runs the primal min-max learner over the stream.
pub fn run_wemm(stream: &Stream, b_reg: f64) -> Result<RunTrace, LearnerError> {
    let start = Instant::now();
    let mut learner = WemmLearner::new(stream.dim(), b_reg)?;
    let mut rounds = Vec::with_capacity(stream.len());
    let mut cum = 0.0;
    for (i, ex) in stream.iter().enumerate() {
        let yhat = learner.predict(&ex.x)?;
        let a = learner.update(&ex.x, ex.y)?;
        record_round(&mut rounds, i + 1, ex.y, yhat, Some(a), &mut cum);
    }
    let log_det_a = learner.a_matrix().log_det().ok();
    Ok(RunTrace {
        learner: "wemm".to_string(),
        b_reg,
        rounds,
        log_det_a,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs one of the comparison learners over the stream.
pub fn run_baseline(
    kind: BaselineKind,
    stream: &Stream,
    b_reg: f64,
    r: f64,
) -> Result<RunTrace, LearnerError> {
    let start = Instant::now();
    let mut learner = BaselineLearner::new(kind, stream.dim(), b_reg, r)?;
    let mut rounds = Vec::with_capacity(stream.len());
    let mut cum = 0.0;
    for (i, ex) in stream.iter().enumerate() {
        let yhat = learner.predict(&ex.x);
        learner.update(&ex.x, ex.y);
        record_round(&mut rounds, i + 1, ex.y, yhat, None, &mut cum);
    }
    Ok(RunTrace {
        learner: kind.name().to_string(),
        b_reg,
        rounds,
        log_det_a: None,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs the kernel learner over the stream.
pub fn run_kernel(
    stream: &Stream,
    kernel: KernelSpec,
    b_reg: f64,
) -> Result<RunTrace, LearnerError> {
    let start = Instant::now();
    let mut learner = KernelWemm::new(kernel, b_reg)?;
    let mut rounds = Vec::with_capacity(stream.len());
    let mut cum = 0.0;
    for (i, ex) in stream.iter().enumerate() {
        let yhat = learner.predict(&ex.x);
        learner.update(ex.x.clone(), ex.y);
        record_round(&mut rounds, i + 1, ex.y, yhat, None, &mut cum);
    }
    Ok(RunTrace {
        learner: "kernel_wemm".to_string(),
        b_reg,
        rounds,
        log_det_a: None,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Largest `K(x, x)` over the stream; the harness warns when this exceeds 1
/// since the regret analysis assumes unit-ball inputs.
pub fn max_self_kernel(stream: &Stream, kernel: &KernelSpec) -> f64 {
    stream
        .iter()
        .fold(0.0, |m, ex| m.max(kernel.eval(&ex.x, &ex.x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate, GeneratorKind, GeneratorSpec};

    fn sample_stream() -> Stream {
        let spec = GeneratorSpec {
            kind: GeneratorKind::GaussianNoise { sigma: 0.2 },
            dim: 2,
            rounds: 30,
            seed: 9,
            input_scale: 1.0,
        };
        generate(&spec).unwrap().0
    }

    #[test]
    fn cumulative_loss_is_monotone_prefix_sum() {
        let trace = run_wemm(&sample_stream(), 2.0).unwrap();
        let mut sum = 0.0;
        for r in &trace.rounds {
            sum += r.loss;
            assert!((r.cum_loss - sum).abs() <= 1e-12 * (1.0 + sum));
        }
        for pair in trace.rounds.windows(2) {
            assert!(pair[1].cum_loss >= pair[0].cum_loss);
        }
    }

    #[test]
    fn trace_csv_round_trip() {
        let trace = run_wemm(&sample_stream(), 2.0).unwrap();
        let csv = trace.to_csv();
        let back = RunTrace::from_csv(&csv, "wemm", 2.0).unwrap();
        assert_eq!(back.rounds.len(), trace.rounds.len());
        for (a, b) in trace.rounds.iter().zip(back.rounds.iter()) {
            assert_eq!(a.y.to_bits(), b.y.to_bits());
            assert_eq!(a.yhat.to_bits(), b.yhat.to_bits());
            assert_eq!(a.loss.to_bits(), b.loss.to_bits());
            assert_eq!(a.a_t.map(f64::to_bits), b.a_t.map(f64::to_bits));
            assert_eq!(a.cum_loss.to_bits(), b.cum_loss.to_bits());
        }
    }

    #[test]
    fn baseline_traces_leave_weight_column_empty() {
        let trace = run_baseline(BaselineKind::Ridge, &sample_stream(), 1.0, 1.0).unwrap();
        assert!(trace.rounds.iter().all(|r| r.a_t.is_none()));
        assert!(trace.to_csv().lines().nth(1).unwrap().contains(",,"));
    }
}
