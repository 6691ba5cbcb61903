//! Experiment configuration: a versioned JSON document naming the stream
//! source, the learners to run, and the certificates to evaluate.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use wemm_core::datagen::GeneratorSpec;
use wemm_core::kernel::KernelSpec;
use wemm_core::stream::NormPolicy;

use crate::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

fn default_rel_tol() -> f64 {
    wemm_core::certify::REL_TOL
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub stream: StreamSource,
    pub learners: Vec<LearnerConfig>,
    #[serde(default)]
    pub certifications: Vec<CertificationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonstationary: Option<NonstationaryConfig>,
    #[serde(default)]
    pub norm_policy: NormPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StreamSource {
    Generator { generator: GeneratorSpec },
    Csv { csv: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Wemm,
    KernelWemm,
    Arowr,
    Aar,
    Ridge,
    Rls,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Wemm => "wemm",
            Algorithm::KernelWemm => "kernel_wemm",
            Algorithm::Arowr => "arowr",
            Algorithm::Aar => "aar",
            Algorithm::Ridge => "ridge",
            Algorithm::Rls => "rls",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub algorithm: Algorithm,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificationId {
    Theorem2,
    Theorem3,
    Theorem4,
    Lemma5,
    Corollaries,
}

impl CertificationId {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "theorem2" => Some(Self::Theorem2),
            "theorem3" => Some(Self::Theorem3),
            "theorem4" => Some(Self::Theorem4),
            "lemma5" => Some(Self::Lemma5),
            "corollaries" => Some(Self::Corollaries),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationConfig {
    pub id: CertificationId,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

/// Drift price for the non-stationary certificates: a number, or `"c_V"`
/// to use the bound-minimizing value derived from the run itself.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DriftPrice {
    Fixed(f64),
    Named(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonstationaryConfig {
    pub c: DriftPrice,
}

impl ExperimentConfig {
    /// Surfaces every parameter problem before any computation runs.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.learners.is_empty() {
            return Err(HarnessError::Config("no learners configured".into()));
        }
        if let StreamSource::Generator { generator } = &self.stream {
            generator
                .validate()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        for (i, l) in self.learners.iter().enumerate() {
            let tag = format!("learner {i} ({})", l.algorithm.name());
            match l.algorithm {
                Algorithm::Wemm | Algorithm::KernelWemm => {
                    if !(l.b > 1.0) {
                        return Err(HarnessError::Config(format!(
                            "{tag}: b must be > 1, got {}",
                            l.b
                        )));
                    }
                }
                _ => {
                    if !(l.b > 0.0) {
                        return Err(HarnessError::Config(format!(
                            "{tag}: b must be > 0, got {}",
                            l.b
                        )));
                    }
                }
            }
            match l.algorithm {
                Algorithm::Arowr => {
                    let r = l.r.ok_or_else(|| {
                        HarnessError::Config(format!("{tag}: parameter r is required"))
                    })?;
                    if !(r > 0.0) {
                        return Err(HarnessError::Config(format!(
                            "{tag}: r must be > 0, got {r}"
                        )));
                    }
                }
                Algorithm::Rls => {
                    let r = l.r.ok_or_else(|| {
                        HarnessError::Config(format!("{tag}: parameter r is required"))
                    })?;
                    if !(r > 0.0 && r <= 1.0) {
                        return Err(HarnessError::Config(format!(
                            "{tag}: r must lie in (0, 1], got {r}"
                        )));
                    }
                }
                Algorithm::KernelWemm => {
                    let kernel = l.kernel.as_ref().ok_or_else(|| {
                        HarnessError::Config(format!("{tag}: kernel spec is required"))
                    })?;
                    kernel
                        .validate()
                        .map_err(|e| HarnessError::Config(format!("{tag}: {e}")))?;
                }
                _ => {}
            }
        }
        if !self.certifications.is_empty()
            && !self.learners.iter().any(|l| l.algorithm == Algorithm::Wemm)
        {
            return Err(HarnessError::Config(
                "certifications require a wemm learner in the experiment".into(),
            ));
        }
        for cert in &self.certifications {
            if !(cert.rel_tol > 0.0) {
                return Err(HarnessError::Config(format!(
                    "certification tolerance must be > 0, got {}",
                    cert.rel_tol
                )));
            }
        }
        if let Some(ns) = &self.nonstationary {
            match &ns.c {
                DriftPrice::Fixed(c) if !(*c > 0.0) => {
                    return Err(HarnessError::Config(format!(
                        "nonstationary c must be > 0, got {c}"
                    )));
                }
                DriftPrice::Named(name) if name != "c_V" => {
                    return Err(HarnessError::Config(format!(
                        "unknown drift price {name:?} (expected a number or \"c_V\")"
                    )));
                }
                _ => {}
            }
        } else if self
            .certifications
            .iter()
            .any(|c| c.id == CertificationId::Corollaries)
        {
            return Err(HarnessError::Config(
                "the corollaries certification needs a nonstationary block".into(),
            ));
        }
        Ok(())
    }
}
