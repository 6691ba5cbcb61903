use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wemm_cli::{run_experiment, ExperimentConfig, HarnessError, EXIT_CERTIFICATION_FAILURE};
use wemm_core::certify::{
    certify_corollaries, certify_theorem2, certify_theorem3, certify_theorem4,
    nonstationary_weights, BoundReport, REL_TOL,
};
use wemm_core::datagen::{generate, GeneratorSpec};
use wemm_core::oracle::{comparator_report, nonstationary_optimum};
use wemm_core::stream::Stream;
use wemm_core::trace::RunTrace;

#[derive(Parser)]
#[command(
    name = "wemm",
    about = "Weighted last-step min-max online regression: experiments and bound certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write traces plus a report.
    Run {
        /// Experiment config JSON.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replaces the generator seed.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Generate a synthetic stream CSV (plus a ground-truth sidecar JSON).
    Gen {
        /// Generator spec JSON.
        #[arg(long)]
        spec: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-certify a bound from a recorded trace and its stream.
    Certify {
        /// Trace CSV (t,y,yhat,loss,a_t,cum_loss).
        #[arg(long)]
        trace: PathBuf,
        /// Stream CSV (t,y,x_0,...).
        #[arg(long)]
        stream: PathBuf,
        /// One of: theorem2, theorem3, theorem4, corollaries.
        #[arg(long)]
        theorem: String,
        /// Regularizer the trace was produced with (not stored in the CSV).
        #[arg(long)]
        b: f64,
        /// Drift price, required for the corollaries.
        #[arg(long)]
        c: Option<f64>,
        /// Relative certification tolerance.
        #[arg(long, default_value_t = REL_TOL)]
        rel_tol: f64,
    },
}

fn fail(err: HarnessError) -> ExitCode {
    eprintln!("{err}");
    ExitCode::from(err.exit_code() as u8)
}

fn cmd_run(config: PathBuf, out: Option<PathBuf>, seed_override: Option<u64>) -> ExitCode {
    let text = match fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => {
            return fail(HarnessError::Io(format!(
                "cannot read {}: {e}",
                config.display()
            )))
        }
    };
    let parsed: ExperimentConfig = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(e) => return fail(HarnessError::Config(format!("cannot parse config: {e}"))),
    };
    let out_dir = match out.or_else(|| parsed.output_dir.clone()) {
        Some(dir) => dir,
        None => {
            return fail(HarnessError::Config(
                "no output directory (set output_dir or pass --out)".into(),
            ))
        }
    };
    match run_experiment(&parsed, &out_dir, seed_override) {
        Ok(outcome) => {
            for bound in &outcome.report.bounds {
                println!(
                    "{} {}: lhs={} rhs={} slack={}",
                    if bound.pass { "PASS" } else { "FAIL" },
                    bound.theorem,
                    bound.lhs,
                    bound.rhs,
                    bound.slack
                );
            }
            println!(
                "report written to {}",
                out_dir.join("report.json").display()
            );
            if outcome.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CERTIFICATION_FAILURE as u8)
            }
        }
        Err(e) => fail(e),
    }
}

fn cmd_gen(spec: PathBuf, out: PathBuf) -> ExitCode {
    let text = match fs::read_to_string(&spec) {
        Ok(t) => t,
        Err(e) => {
            return fail(HarnessError::Io(format!(
                "cannot read {}: {e}",
                spec.display()
            )))
        }
    };
    let parsed: GeneratorSpec = match serde_json::from_str(&text) {
        Ok(s) => s,
        Err(e) => return fail(HarnessError::Config(format!("cannot parse spec: {e}"))),
    };
    let (stream, truth) = match generate(&parsed) {
        Ok(pair) => pair,
        Err(e) => return fail(HarnessError::Config(e.to_string())),
    };
    if let Err(e) = fs::write(&out, stream.to_csv()) {
        return fail(HarnessError::Io(format!(
            "cannot write {}: {e}",
            out.display()
        )));
    }
    let truth_path = out.with_extension("truth.json");
    let truth_json = serde_json::to_string_pretty(&truth).expect("serializable");
    if let Err(e) = fs::write(&truth_path, truth_json + "\n") {
        return fail(HarnessError::Io(format!(
            "cannot write {}: {e}",
            truth_path.display()
        )));
    }
    println!("wrote {} and {}", out.display(), truth_path.display());
    ExitCode::SUCCESS
}

#[allow(clippy::too_many_arguments)]
fn cmd_certify(
    trace_path: PathBuf,
    stream_path: PathBuf,
    theorem: String,
    b: f64,
    c: Option<f64>,
    rel_tol: f64,
) -> ExitCode {
    let read = |p: &PathBuf| {
        fs::read_to_string(p)
            .map_err(|e| HarnessError::Io(format!("cannot read {}: {e}", p.display())))
    };
    let stream_text = match read(&stream_path) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let stream = match Stream::from_csv(&stream_text, &stream_path.display().to_string()) {
        Ok(s) => s,
        Err(e) => return fail(HarnessError::Config(e.to_string())),
    };
    let trace_text = match read(&trace_path) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let trace = match RunTrace::from_csv(&trace_text, "wemm", b) {
        Ok(t) => t,
        Err(e) => return fail(HarnessError::Config(e.to_string())),
    };
    let weights = match trace.weights() {
        Some(w) => w,
        None => {
            return fail(HarnessError::Config(
                "trace has no a_t column; only min-max runs can be certified".into(),
            ))
        }
    };

    let cfg = |e: wemm_core::CertifyError| HarnessError::Config(e.to_string());
    let reports: Result<Vec<BoundReport>, HarnessError> = match theorem.as_str() {
        "theorem2" => {
            let comp = comparator_report(&stream, &weights, b)
                .map_err(|e| HarnessError::Config(e.to_string()));
            comp.and_then(|c| {
                certify_theorem2(&stream, &trace, &c, rel_tol)
                    .map(|r| vec![r])
                    .map_err(cfg)
            })
        }
        "theorem3" | "theorem4" => {
            let comp = comparator_report(&stream, &weights, b)
                .map_err(|e| HarnessError::Config(e.to_string()));
            comp.and_then(|comp| {
                if theorem == "theorem3" {
                    certify_theorem3(&stream, &trace, &comp, rel_tol).map_err(cfg)
                } else {
                    certify_theorem4(&stream, &trace, &comp, rel_tol).map_err(cfg)
                }
            })
        }
        "corollaries" => match c {
            Some(c) => nonstationary_weights(&stream, &weights, b, c)
                .map_err(cfg)
                .and_then(|tilde| {
                    nonstationary_optimum(&stream, &tilde, b, c)
                        .map_err(|e| HarnessError::Config(e.to_string()))
                })
                .and_then(|drift| {
                    certify_corollaries(&stream, &trace, &drift, c, rel_tol).map_err(cfg)
                }),
            None => Err(HarnessError::Config(
                "the corollaries certification needs --c".into(),
            )),
        },
        other => Err(HarnessError::Config(format!(
            "unknown theorem id {other:?} (expected theorem2, theorem3, theorem4, corollaries)"
        ))),
    };

    match reports {
        Ok(reports) => {
            let mut all_pass = true;
            for r in &reports {
                all_pass &= r.pass;
                println!(
                    "{} {}: lhs={} rhs={} slack={}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.theorem,
                    r.lhs,
                    r.rhs,
                    r.slack
                );
            }
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CERTIFICATION_FAILURE as u8)
            }
        }
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            seed_override,
        } => cmd_run(config, out, seed_override),
        Command::Gen { spec, out } => cmd_gen(spec, out),
        Command::Certify {
            trace,
            stream,
            theorem,
            b,
            c,
            rel_tol,
        } => cmd_certify(trace, stream, theorem, b, c, rel_tol),
    }
}
