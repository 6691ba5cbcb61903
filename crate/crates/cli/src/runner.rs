//! Runs a configured experiment end to end: stream acquisition, learners,
//! comparator oracle, certificates, and artifact emission.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use wemm_core::certify::{
    c_v, certify_corollaries, certify_theorem2, certify_theorem3, certify_theorem4,
    nonstationary_weights, BoundReport,
};
use wemm_core::datagen::generate;
use wemm_core::oracle::{comparator_report, ComparatorReport, DriftComparator};
use wemm_core::stream::Stream;
use wemm_core::trace::{max_self_kernel, run_baseline, run_kernel, run_wemm, RunTrace};
use wemm_core::BaselineKind;

use crate::config::{
    Algorithm, CertificationConfig, CertificationId, DriftPrice, ExperimentConfig, StreamSource,
};
use crate::HarnessError;

#[derive(Debug, Serialize)]
pub struct LearnerSummary {
    pub name: String,
    #[serde(rename = "L_T")]
    pub l_t: f64,
    pub runtime_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct ComparatorSummary {
    pub u_star: Vec<f64>,
    #[serde(rename = "L_T")]
    pub l_t: f64,
    #[serde(rename = "L_T_weighted")]
    pub l_t_weighted: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonstationary: Option<DriftSummary>,
}

#[derive(Debug, Serialize)]
pub struct DriftSummary {
    pub u_bar: Vec<f64>,
    #[serde(rename = "V_m")]
    pub v_m: f64,
    #[serde(rename = "J_min")]
    pub j_min: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "L_T_tuple")]
    pub l_t_tuple: f64,
    pub c: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub config_hash: String,
    pub learners: Vec<LearnerSummary>,
    pub comparator: Option<ComparatorSummary>,
    pub bounds: Vec<BoundReport>,
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub all_pass: bool,
    pub traces: Vec<RunTrace>,
    pub stream: Stream,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolves the stream per config: generated (with optional seed override)
/// or loaded from CSV under the configured norm policy.
fn acquire_stream(config: &ExperimentConfig, out_dir: &Path) -> Result<Stream, HarnessError> {
    match &config.stream {
        StreamSource::Generator { generator } => {
            let (stream, truth) =
                generate(generator).map_err(|e| HarnessError::Config(e.to_string()))?;
            fs::write(out_dir.join("stream.csv"), stream.to_csv())
                .map_err(|e| HarnessError::Io(e.to_string()))?;
            let truth_json = serde_json::to_string_pretty(&truth)
                .map_err(|e| HarnessError::Io(e.to_string()))?;
            fs::write(out_dir.join("stream.truth.json"), truth_json)
                .map_err(|e| HarnessError::Io(e.to_string()))?;
            Ok(stream)
        }
        StreamSource::Csv { csv } => {
            let text = fs::read_to_string(csv)
                .map_err(|e| HarnessError::Io(format!("cannot read {}: {e}", csv.display())))?;
            let mut stream = Stream::from_csv(&text, &csv.display().to_string())
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            stream
                .apply_norm_policy(config.norm_policy)
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            // Record the effective stream (post norm policy) so traces can
            // be re-certified from the output directory alone.
            fs::write(out_dir.join("stream.csv"), stream.to_csv())
                .map_err(|e| HarnessError::Io(e.to_string()))?;
            Ok(stream)
        }
    }
}

fn run_learner(
    learner: &crate::config::LearnerConfig,
    stream: &Stream,
) -> Result<RunTrace, HarnessError> {
    let cfg_err = |e: wemm_core::LearnerError| HarnessError::Config(e.to_string());
    match learner.algorithm {
        Algorithm::Wemm => run_wemm(stream, learner.b).map_err(cfg_err),
        Algorithm::KernelWemm => {
            let kernel = learner.kernel.clone().expect("validated");
            let worst = max_self_kernel(stream, &kernel);
            if worst > 1.0 + 1e-12 {
                eprintln!(
                    "warning: max K(x, x) = {worst} exceeds 1; the regret analysis \
                     assumes unit-ball inputs"
                );
            }
            run_kernel(stream, kernel, learner.b).map_err(cfg_err)
        }
        Algorithm::Arowr => run_baseline(
            BaselineKind::Arowr,
            stream,
            learner.b,
            learner.r.expect("validated"),
        )
        .map_err(cfg_err),
        Algorithm::Aar => run_baseline(BaselineKind::Aar, stream, learner.b, 1.0).map_err(cfg_err),
        Algorithm::Ridge => {
            run_baseline(BaselineKind::Ridge, stream, learner.b, 1.0).map_err(cfg_err)
        }
        Algorithm::Rls => run_baseline(
            BaselineKind::Rls,
            stream,
            learner.b,
            learner.r.expect("validated"),
        )
        .map_err(cfg_err),
    }
}

/// The drifting comparator at the resolved drift price. Under `"c_V"` the
/// price is bootstrapped: a provisional strictly-feasible price yields a
/// first tuple, whose `(S, V_m)` define `c_V`, and the final comparator is
/// rebuilt there.
fn drift_comparator(
    stream: &Stream,
    trace: &RunTrace,
    price: &DriftPrice,
) -> Result<(DriftComparator, f64), HarnessError> {
    let weights = trace
        .weights()
        .ok_or_else(|| HarnessError::Config("trace lacks a_t weights".into()))?;
    let b = trace.b_reg;
    let cfg = |e: wemm_core::CertifyError| HarnessError::Config(e.to_string());
    let build = |c: f64| -> Result<DriftComparator, HarnessError> {
        let tilde = nonstationary_weights(stream, &weights, b, c).map_err(cfg)?;
        wemm_core::oracle::nonstationary_optimum(stream, &tilde, b, c)
            .map_err(|e| HarnessError::Config(e.to_string()))
    };
    match price {
        DriftPrice::Fixed(c) => Ok((build(*c)?, *c)),
        DriftPrice::Named(_) => {
            let provisional = 2.0 * b / (b - 1.0);
            let first = build(provisional)?;
            if first.v_m == 0.0 {
                return Ok((first, provisional));
            }
            let c = c_v(b, first.worst_loss, stream.len(), first.v_m);
            Ok((build(c)?, c))
        }
    }
}

fn certify(
    cert: &CertificationConfig,
    stream: &Stream,
    trace: &RunTrace,
    comp: &ComparatorReport,
    drift: Option<&(DriftComparator, f64)>,
) -> Result<Vec<BoundReport>, HarnessError> {
    let cfg = |e: wemm_core::CertifyError| HarnessError::Config(e.to_string());
    match cert.id {
        CertificationId::Theorem2 => Ok(vec![
            certify_theorem2(stream, trace, comp, cert.rel_tol).map_err(cfg)?
        ]),
        CertificationId::Theorem3 => {
            certify_theorem3(stream, trace, comp, cert.rel_tol).map_err(cfg)
        }
        CertificationId::Theorem4 => {
            certify_theorem4(stream, trace, comp, cert.rel_tol).map_err(cfg)
        }
        CertificationId::Lemma5 => {
            let weights = trace
                .weights()
                .ok_or_else(|| HarnessError::Config("trace lacks a_t weights".into()))?;
            let s = comp.worst_loss;
            let lhs: f64 = comp
                .per_round_loss
                .iter()
                .zip(weights.iter())
                .map(|(l, a)| l * (a - 1.0))
                .sum();
            let (rhs, pass) = if s == 0.0 {
                // All comparator losses vanish; the stacked bound degenerates.
                (0.0, lhs <= 1e-9)
            } else {
                let verdict = wemm_core::certify::check_lemma5(&comp.per_round_loss, &weights, s)
                    .map_err(cfg)?;
                let total: f64 = comp.per_round_loss.iter().sum();
                let t_prime = ((total / s).ceil() as usize).min(weights.len());
                let mut order: Vec<usize> = (0..weights.len()).collect();
                order
                    .sort_by(|&i, &j| weights[j].partial_cmp(&weights[i]).unwrap().then(i.cmp(&j)));
                let rhs = s * order
                    .iter()
                    .take(t_prime)
                    .map(|&i| weights[i] - 1.0)
                    .sum::<f64>();
                (rhs, verdict)
            };
            let mut terms = std::collections::BTreeMap::new();
            terms.insert("stacked_bound".to_string(), rhs);
            Ok(vec![BoundReport {
                theorem: "lemma5".into(),
                lhs,
                rhs,
                slack: rhs - lhs,
                pass,
                tol: 1e-9,
                two_sided: false,
                terms,
            }])
        }
        CertificationId::Corollaries => {
            let (drift, c) = drift.ok_or_else(|| {
                HarnessError::Config("corollaries need a nonstationary block".into())
            })?;
            certify_corollaries(stream, trace, drift, *c, cert.rel_tol).map_err(cfg)
        }
    }
}

/// Runs the whole experiment and writes `stream.csv`, one
/// `trace_<learner>.csv` per learner, and `report.json` into `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<Outcome, HarnessError> {
    let mut config = config.clone();
    if let (Some(seed), StreamSource::Generator { generator }) = (seed_override, &mut config.stream)
    {
        generator.seed = seed;
    }
    config.validate()?;

    fs::create_dir_all(out_dir).map_err(|e| HarnessError::Io(e.to_string()))?;
    let stream = acquire_stream(&config, out_dir)?;

    // The hash covers the effective config, after any seed override.
    let canonical = serde_json::to_string(&config).map_err(|e| HarnessError::Io(e.to_string()))?;
    let config_hash = sha256_hex(canonical.as_bytes());

    let mut traces = Vec::new();
    let mut names_seen: std::collections::BTreeMap<String, usize> = Default::default();
    for learner in &config.learners {
        let trace = run_learner(learner, &stream)?;
        let base = learner.algorithm.name().to_string();
        let count = names_seen.entry(base.clone()).or_insert(0);
        *count += 1;
        let name = if *count == 1 {
            base
        } else {
            format!("{base}_{count}")
        };
        let path = out_dir.join(format!("trace_{name}.csv"));
        fs::write(&path, trace.to_csv()).map_err(|e| HarnessError::Io(e.to_string()))?;
        let mut named = trace;
        named.learner = name;
        traces.push(named);
    }

    // Certificates run against the first min-max trace.
    let wemm_trace = traces
        .iter()
        .find(|t| t.learner.starts_with("wemm"))
        .cloned();
    let mut comparator = match &wemm_trace {
        Some(trace) if !config.certifications.is_empty() => {
            let weights = trace
                .weights()
                .ok_or_else(|| HarnessError::Config("trace lacks a_t weights".into()))?;
            Some(
                comparator_report(&stream, &weights, trace.b_reg)
                    .map_err(|e| HarnessError::Config(e.to_string()))?,
            )
        }
        _ => None,
    };

    let drift = match (&config.nonstationary, &wemm_trace) {
        (Some(ns), Some(trace)) => Some(drift_comparator(&stream, trace, &ns.c)?),
        _ => None,
    };
    if let (Some(comp), Some((d, _))) = (comparator.as_mut(), drift.as_ref()) {
        comp.nonstationary = Some(d.clone());
    }

    let mut bounds = Vec::new();
    for cert in &config.certifications {
        let trace = wemm_trace
            .as_ref()
            .ok_or_else(|| HarnessError::Config("certifications need a wemm learner".into()))?;
        let comp = comparator
            .as_ref()
            .expect("built when certifications exist");
        bounds.extend(certify(cert, &stream, trace, comp, drift.as_ref())?);
    }

    let report = Report {
        config_hash,
        learners: traces
            .iter()
            .map(|t| LearnerSummary {
                name: t.learner.clone(),
                l_t: t.total_loss(),
                runtime_ms: t.wall_ms,
            })
            .collect(),
        comparator: comparator.as_ref().map(|c| ComparatorSummary {
            u_star: c.u_star.to_vec(),
            l_t: c.total_loss,
            l_t_weighted: c.weighted_loss,
            s: c.worst_loss,
            nonstationary: drift.as_ref().map(|(d, c_used)| DriftSummary {
                u_bar: d.u_bar.to_vec(),
                v_m: d.v_m,
                j_min: d.j_min,
                s: d.worst_loss,
                l_t_tuple: d.tuple_loss,
                c: *c_used,
            }),
        }),
        bounds,
    };

    let all_pass = report.bounds.iter().all(|b| b.pass);
    let json =
        serde_json::to_string_pretty(&report).map_err(|e| HarnessError::Io(e.to_string()))?;
    fs::write(out_dir.join("report.json"), json + "\n")
        .map_err(|e| HarnessError::Io(e.to_string()))?;

    Ok(Outcome {
        report,
        all_pass,
        traces,
        stream,
    })
}
