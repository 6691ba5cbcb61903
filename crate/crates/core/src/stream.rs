//! Example streams and their CSV wire format.
//!
//! A stream is an ordered sequence of `(x, y)` pairs of one fixed dimension.
//! The CSV layout is `t,y,x_0,...,x_{d-1}` with `t` starting at 1. Floats are
//! written with the shortest round-tripping representation, so a
//! write-then-read cycle reproduces the stream bit-exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Vector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StreamError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("stream is empty")]
    Empty,
    #[error("max input norm {max_norm} exceeds 1 under the reject policy")]
    NormViolation { max_norm: f64 },
}

/// One observed pair: input vector and scalar label.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x: Vector,
    pub y: f64,
}

impl Example {
    pub fn new(x: Vector, y: f64) -> Self {
        assert!(y.is_finite(), "label must be finite");
        Example { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.norm()
    }
}

/// Provenance and shape metadata carried alongside the examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamMeta {
    pub generator: String,
    pub seed: u64,
    pub dim: usize,
    pub len: usize,
    pub max_norm: f64,
    /// Set when the whole stream was rescaled at ingestion (`1 / max_norm`).
    pub prescale_factor: Option<f64>,
}

/// How inputs with norm above 1 are handled at ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormPolicy {
    #[default]
    Reject,
    Prescale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    examples: Vec<Example>,
    meta: StreamMeta,
}

impl Stream {
    /// Builds a stream, validating uniform dimension and recording the
    /// maximum input norm. An empty example list is allowed (dimension is
    /// taken from `dim`).
    pub fn new(examples: Vec<Example>, dim: usize, generator: String, seed: u64) -> Self {
        for (i, ex) in examples.iter().enumerate() {
            assert_eq!(ex.x.dim(), dim, "example {i} has wrong dimension");
        }
        let max_norm = examples.iter().fold(0.0f64, |m, ex| m.max(ex.norm()));
        let len = examples.len();
        Stream {
            examples,
            meta: StreamMeta {
                generator,
                seed,
                dim,
                len,
                max_norm,
                prescale_factor: None,
            },
        }
    }

    pub fn meta(&self) -> &StreamMeta {
        &self.meta
    }

    pub fn dim(&self) -> usize {
        self.meta.dim
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn max_norm(&self) -> f64 {
        self.meta.max_norm
    }

    pub fn get(&self, i: usize) -> &Example {
        &self.examples[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Example> {
        self.examples.iter()
    }

    /// Applies the ingestion norm policy in place.
    ///
    /// Under `Reject`, a max norm above `1 + 1e-12` is an error. Under
    /// `Prescale`, all inputs are divided by the max norm when it exceeds 1
    /// and the factor is recorded; streams already inside the unit ball are
    /// left untouched.
    pub fn apply_norm_policy(&mut self, policy: NormPolicy) -> Result<(), StreamError> {
        match policy {
            NormPolicy::Reject => {
                if self.meta.max_norm > 1.0 + 1e-12 {
                    return Err(StreamError::NormViolation {
                        max_norm: self.meta.max_norm,
                    });
                }
                Ok(())
            }
            NormPolicy::Prescale => {
                if self.meta.max_norm > 1.0 {
                    let factor = 1.0 / self.meta.max_norm;
                    for ex in self.examples.iter_mut() {
                        let mut x = ex.x.clone();
                        x.scale(factor);
                        ex.x = x;
                    }
                    self.meta.max_norm = self.examples.iter().fold(0.0f64, |m, e| m.max(e.norm()));
                    self.meta.prescale_factor = Some(factor);
                }
                Ok(())
            }
        }
    }

    /// Serializes to the `t,y,x_0,...,x_{d-1}` CSV layout.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::from("t,y");
        for j in 0..d {
            out.push_str(&format!(",x_{j}"));
        }
        out.push('\n');
        for (i, ex) in self.examples.iter().enumerate() {
            out.push_str(&format!("{},{}", i + 1, ex.y));
            for j in 0..d {
                out.push_str(&format!(",{}", ex.x[j]));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV layout produced by [`Stream::to_csv`].
    ///
    /// `source` labels the stream's provenance in its metadata. Errors carry
    /// the 1-based line number of the offending row.
    pub fn from_csv(text: &str, source: &str) -> Result<Stream, StreamError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(StreamError::Empty)?;
        let fields: Vec<&str> = header.split(',').collect();
        if fields.len() < 3 || fields[0] != "t" || fields[1] != "y" {
            return Err(StreamError::Parse {
                line: 1,
                msg: format!("bad header {header:?}, expected t,y,x_0,..."),
            });
        }
        let d = fields.len() - 2;
        for (j, f) in fields[2..].iter().enumerate() {
            if *f != format!("x_{j}") {
                return Err(StreamError::Parse {
                    line: 1,
                    msg: format!("bad header column {f:?}, expected x_{j}"),
                });
            }
        }

        let mut examples = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d + 2 {
                return Err(StreamError::DimensionMismatch {
                    line: lineno,
                    expected: d + 2,
                    found: fields.len(),
                });
            }
            let parse = |s: &str, what: &str| -> Result<f64, StreamError> {
                let v: f64 = s.parse().map_err(|_| StreamError::Parse {
                    line: lineno,
                    msg: format!("cannot parse {what} value {s:?}"),
                })?;
                if !v.is_finite() {
                    return Err(StreamError::Parse {
                        line: lineno,
                        msg: format!("{what} value {s:?} is not finite"),
                    });
                }
                Ok(v)
            };
            let y = parse(fields[1], "label")?;
            let mut x = Vec::with_capacity(d);
            for (j, f) in fields[2..].iter().enumerate() {
                x.push(parse(f, &format!("x_{j}"))?);
            }
            examples.push(Example::new(Vector::from_slice(&x), y));
        }
        Ok(Stream::new(examples, d, source.to_string(), 0))
    }
}
