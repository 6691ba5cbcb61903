// Parameter checks use negated comparisons (`!(c > 0.0)`) so that NaN fails
// validation instead of slipping through an inverted `<=`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Experiment harness for the min-max online regression library.
//!
//! Parses a JSON experiment config, runs the selected learners over a
//! generated or file-loaded stream, invokes the batch comparators and bound
//! certifiers, and writes per-round trace CSVs plus a certification summary
//! JSON. The binary's exit code makes it usable as a CI gate: 0 when every
//! certificate passes, 2 on configuration errors, 3 on certification
//! failure, 1 on I/O problems.

use thiserror::Error;

pub mod config;
pub mod runner;

pub use config::{
    Algorithm, CertificationConfig, CertificationId, DriftPrice, ExperimentConfig, LearnerConfig,
    NonstationaryConfig, StreamSource,
};
pub use runner::{run_experiment, Outcome, Report};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io(_) => 1,
        }
    }
}

/// Exit code signalled when a certificate fails (reports are still written).
pub const EXIT_CERTIFICATION_FAILURE: i32 = 3;

/// The experiments exercised by the determinism gate: one noisy stationary
/// run with the stationary certificates, one realizable run, and one
/// drifting run with the non-stationary certificates.
pub fn default_suite() -> Vec<(String, ExperimentConfig)> {
    use wemm_core::datagen::{GeneratorKind, GeneratorSpec};

    let cert = |id: CertificationId| CertificationConfig {
        id,
        rel_tol: wemm_core::certify::REL_TOL,
    };
    let learners = vec![
        LearnerConfig {
            algorithm: Algorithm::Wemm,
            b: 2.0,
            r: None,
            kernel: None,
        },
        LearnerConfig {
            algorithm: Algorithm::Aar,
            b: 2.0,
            r: None,
            kernel: None,
        },
        LearnerConfig {
            algorithm: Algorithm::Ridge,
            b: 2.0,
            r: None,
            kernel: None,
        },
        LearnerConfig {
            algorithm: Algorithm::Rls,
            b: 2.0,
            r: Some(0.98),
            kernel: None,
        },
        LearnerConfig {
            algorithm: Algorithm::Arowr,
            b: 2.0,
            r: Some(1.0),
            kernel: None,
        },
    ];

    vec![
        (
            "stationary_noisy".to_string(),
            ExperimentConfig {
                schema: config::SCHEMA_VERSION,
                stream: StreamSource::Generator {
                    generator: GeneratorSpec {
                        kind: GeneratorKind::GaussianNoise { sigma: 0.3 },
                        dim: 3,
                        rounds: 400,
                        seed: 2024,
                        input_scale: 1.0,
                    },
                },
                learners: learners.clone(),
                certifications: vec![
                    cert(CertificationId::Theorem2),
                    cert(CertificationId::Theorem3),
                    cert(CertificationId::Theorem4),
                    cert(CertificationId::Lemma5),
                ],
                nonstationary: None,
                norm_policy: Default::default(),
                output_dir: None,
            },
        ),
        (
            "realizable".to_string(),
            ExperimentConfig {
                schema: config::SCHEMA_VERSION,
                stream: StreamSource::Generator {
                    generator: GeneratorSpec {
                        kind: GeneratorKind::Realizable,
                        dim: 2,
                        rounds: 300,
                        seed: 77,
                        input_scale: 1.0,
                    },
                },
                learners: vec![learners[0].clone()],
                certifications: vec![cert(CertificationId::Theorem2)],
                nonstationary: None,
                norm_policy: Default::default(),
                output_dir: None,
            },
        ),
        (
            "drifting".to_string(),
            ExperimentConfig {
                schema: config::SCHEMA_VERSION,
                stream: StreamSource::Generator {
                    generator: GeneratorSpec {
                        kind: GeneratorKind::Drift {
                            step: 0.01,
                            anchor_pull: 0.05,
                        },
                        dim: 2,
                        rounds: 400,
                        seed: 3111,
                        input_scale: 1.0,
                    },
                },
                learners: vec![learners[0].clone()],
                certifications: vec![
                    cert(CertificationId::Theorem2),
                    cert(CertificationId::Corollaries),
                ],
                nonstationary: Some(NonstationaryConfig {
                    c: DriftPrice::Fixed(8.0),
                }),
                norm_policy: Default::default(),
                output_dir: None,
            },
        ),
    ]
}
