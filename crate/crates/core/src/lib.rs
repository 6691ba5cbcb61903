// Parameter checks use negated comparisons (`!(b > 1.0)`) so that NaN fails
// validation instead of slipping through an inverted `<=`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Weighted last-step min-max online regression.
//!
//! The library implements a second-order online regression learner that
//! predicts assuming the current round is the last one, with per-example
//! weights chosen so the resulting min-max problem stays well defined
//! without any bound on the labels. Alongside the learner (in primal and
//! kernel form) it provides the standard second-order baselines, closed-form
//! batch comparators for stationary and drifting targets, deterministic
//! synthetic stream generators, and certifiers that check every regret
//! identity and bound numerically on completed runs.

pub mod baselines;
pub mod certify;
pub mod datagen;
pub mod kernel;
pub mod linalg;
pub mod oracle;
pub mod primal;
pub mod stream;
pub mod trace;

pub use baselines::{BaselineKind, BaselineLearner};
pub use certify::{BoundReport, CertifyError};
pub use datagen::{generate, GeneratorKind, GeneratorSpec, GroundTruth};
pub use kernel::{KernelSpec, KernelWemm};
pub use linalg::{LinalgError, SymMatrix, Vector};
pub use oracle::{ComparatorReport, DriftComparator, OracleError};
pub use primal::{LearnerError, WemmLearner};
pub use stream::{Example, NormPolicy, Stream, StreamError};
pub use trace::{RoundTrace, RunTrace};
