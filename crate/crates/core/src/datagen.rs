//! Deterministic synthetic stream generators.
//!
//! Four regimes are covered: noiseless realizable labels, stationary labels
//! with Gaussian noise, a drifting target following a random walk pulled
//! toward an anchor, and inputs pinned to the sphere surface to exercise the
//! norm boundary.
//!
//! All randomness flows through [`SplitMix64`], a portable 64-bit generator.
//! Seed 0 yields the reference outputs
//! `0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F`, so any
//! implementation in any language can reproduce the exact u64 stream.
//! Per round, draws happen in a fixed order: input direction (d Gaussians),
//! ball radius (one uniform, skipped on the sphere), then label noise or
//! drift innovation. Gaussians come from Box-Muller pairs; the second value
//! of each pair is cached and consumed before new u64s are drawn.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Vector;
use crate::stream::{Example, Stream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatagenError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

/// SplitMix64 (Steele, Lea, Flood 2014). State advances by the golden-ratio
/// increment; output runs through two xor-multiply finalizers.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` using the top 53 bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `(0, 1]`, safe under `ln`.
    fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Standard normal source over SplitMix64 via Box-Muller.
#[derive(Debug, Clone)]
pub struct Rng {
    mix: SplitMix64,
    cached_gauss: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            mix: SplitMix64::new(seed),
            cached_gauss: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.mix.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        self.mix.uniform()
    }

    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.cached_gauss.take() {
            return z;
        }
        let u1 = self.mix.uniform_open();
        let u2 = self.mix.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.cached_gauss = Some(r * angle.sin());
        r * angle.cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// `y_t = u' x_t` exactly; the comparator oracle recovers zero loss.
    Realizable,
    /// `y_t = u' x_t + sigma * eps_t` with standard normal noise.
    GaussianNoise { sigma: f64 },
    /// Target random-walks around an anchor:
    /// `u_t = (1 - anchor_pull) u_{t-1} + anchor_pull * u_bar + step * eta_t`.
    Drift { step: f64, anchor_pull: f64 },
    /// Noiseless labels with inputs on the sphere surface (norm exactly at
    /// `input_scale`), probing the norm precondition boundary.
    UnitSphereEdge,
}

fn default_input_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub dim: usize,
    pub rounds: usize,
    pub seed: u64,
    #[serde(default = "default_input_scale")]
    pub input_scale: f64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.dim < 1 {
            return Err(DatagenError::InvalidSpec("dim must be >= 1".into()));
        }
        if !(self.input_scale > 0.0 && self.input_scale <= 1.0) {
            return Err(DatagenError::InvalidSpec(format!(
                "input_scale must lie in (0, 1], got {}",
                self.input_scale
            )));
        }
        match &self.kind {
            GeneratorKind::GaussianNoise { sigma } if !(*sigma >= 0.0 && sigma.is_finite()) => Err(
                DatagenError::InvalidSpec(format!("sigma must be >= 0, got {sigma}")),
            ),
            GeneratorKind::Drift { step, anchor_pull } => {
                if !(*step >= 0.0 && step.is_finite()) {
                    return Err(DatagenError::InvalidSpec(format!(
                        "step must be >= 0, got {step}"
                    )));
                }
                if !(*anchor_pull >= 0.0 && *anchor_pull <= 1.0) {
                    return Err(DatagenError::InvalidSpec(format!(
                        "anchor_pull must lie in [0, 1], got {anchor_pull}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Stable id for stream metadata and reports.
    pub fn id(&self) -> String {
        match &self.kind {
            GeneratorKind::Realizable => "realizable".to_string(),
            GeneratorKind::GaussianNoise { sigma } => format!("gaussian_noise(sigma={sigma})"),
            GeneratorKind::Drift { step, anchor_pull } => {
                format!("drift(step={step},anchor_pull={anchor_pull})")
            }
            GeneratorKind::UnitSphereEdge => "unit_sphere_edge".to_string(),
        }
    }
}

/// The target the generator used, returned so oracles can cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroundTruth {
    Stationary {
        u_true: Vec<f64>,
    },
    Drifting {
        u_bar: Vec<f64>,
        u_path: Vec<Vec<f64>>,
        v_m: f64,
    },
}

impl GroundTruth {
    pub fn u_true(&self) -> Option<Vector> {
        match self {
            GroundTruth::Stationary { u_true } => Some(Vector::from_slice(u_true)),
            GroundTruth::Drifting { .. } => None,
        }
    }
}

fn gaussian_vector(rng: &mut Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gaussian()).collect()
}

/// Scales `g` to norm exactly `target` (up to a final corrective pass so the
/// computed norm never exceeds it).
fn with_norm(g: &[f64], target: f64) -> Vector {
    let norm: f64 = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x: Vec<f64> = if norm < 1e-300 {
        let mut e = vec![0.0; g.len()];
        e[0] = target;
        e
    } else {
        g.iter().map(|v| v * target / norm).collect()
    };
    // Rounding can leave the norm an ulp above the cap.
    loop {
        let n: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n <= target {
            break;
        }
        for v in x.iter_mut() {
            *v *= target / n;
        }
    }
    Vector::from_slice(&x)
}

/// Generates the stream and the ground truth behind it.
pub fn generate(spec: &GeneratorSpec) -> Result<(Stream, GroundTruth), DatagenError> {
    spec.validate()?;
    let d = spec.dim;
    let mut rng = Rng::new(spec.seed);

    // Anchor target, unit norm.
    let u_true = with_norm(&gaussian_vector(&mut rng, d), 1.0);

    let mut examples = Vec::with_capacity(spec.rounds);
    let mut u_path: Vec<Vector> = Vec::new();
    let mut u_prev = u_true.clone();

    for _ in 0..spec.rounds {
        let dir = gaussian_vector(&mut rng, d);
        let radius = match spec.kind {
            GeneratorKind::UnitSphereEdge => spec.input_scale,
            _ => spec.input_scale * rng.uniform().powf(1.0 / d as f64),
        };
        let x = with_norm(&dir, radius);

        let y = match &spec.kind {
            GeneratorKind::Realizable | GeneratorKind::UnitSphereEdge => u_true.dot(&x),
            GeneratorKind::GaussianNoise { sigma } => u_true.dot(&x) + sigma * rng.gaussian(),
            GeneratorKind::Drift { step, anchor_pull } => {
                let eta = gaussian_vector(&mut rng, d);
                let mut u_t = Vector::zeros(d);
                u_t.add_scaled(1.0 - anchor_pull, &u_prev);
                u_t.add_scaled(*anchor_pull, &u_true);
                u_t.add_scaled(*step, &Vector::from_slice(&eta));
                let y = u_t.dot(&x);
                u_prev = u_t.clone();
                u_path.push(u_t);
                y
            }
        };
        examples.push(Example::new(x, y));
    }

    let stream = Stream::new(examples, d, spec.id(), spec.seed);
    let truth = match spec.kind {
        GeneratorKind::Drift { .. } => {
            let v_m = u_path.iter().map(|u| u.sub(&u_true).norm_sq()).sum();
            GroundTruth::Drifting {
                u_bar: u_true.to_vec(),
                u_path: u_path.iter().map(|u| u.to_vec()).collect(),
                v_m,
            }
        }
        _ => GroundTruth::Stationary {
            u_true: u_true.to_vec(),
        },
    };
    Ok((stream, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_vector() {
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220A8397B1DCDAF);
        assert_eq!(rng.next_u64(), 0x6E789E6AA1B965F4);
        assert_eq!(rng.next_u64(), 0x06C45D188009454F);
        assert_eq!(rng.next_u64(), 0xF88BB8A8724C81EC);
    }

    fn spec(kind: GeneratorKind, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            kind,
            dim: 3,
            rounds: 40,
            seed,
            input_scale: 1.0,
        }
    }

    #[test]
    fn realizable_labels_interpolate_exactly() {
        let (stream, truth) = generate(&spec(GeneratorKind::Realizable, 9)).unwrap();
        let u = truth.u_true().unwrap();
        for ex in stream.iter() {
            assert_eq!(ex.y, u.dot(&ex.x));
        }
    }

    #[test]
    fn degenerate_drift_pins_target() {
        let (_, truth) = generate(&spec(
            GeneratorKind::Drift {
                step: 0.0,
                anchor_pull: 1.0,
            },
            5,
        ))
        .unwrap();
        match truth {
            GroundTruth::Drifting { u_bar, u_path, v_m } => {
                assert_eq!(v_m, 0.0);
                for u in &u_path {
                    assert_eq!(u, &u_bar);
                }
            }
            _ => panic!("expected drifting truth"),
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let s = spec(GeneratorKind::GaussianNoise { sigma: 0.3 }, 123);
        let (a, _) = generate(&s).unwrap();
        let (b, _) = generate(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sphere_edge_hits_the_boundary() {
        let (stream, _) = generate(&spec(GeneratorKind::UnitSphereEdge, 4)).unwrap();
        for ex in stream.iter() {
            let n = ex.norm();
            assert!(n <= 1.0 && n > 1.0 - 1e-12, "norm {n}");
        }
    }

    #[test]
    fn norm_contract_holds_across_specs() {
        for seed in 0..200u64 {
            let s = GeneratorSpec {
                kind: GeneratorKind::GaussianNoise { sigma: 0.1 },
                dim: 1 + (seed % 4) as usize,
                rounds: 20,
                seed,
                input_scale: 0.25 + 0.75 * ((seed % 7) as f64 / 7.0),
            };
            let (stream, _) = generate(&s).unwrap();
            assert!(stream.max_norm() <= s.input_scale);
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = spec(GeneratorKind::GaussianNoise { sigma: -1.0 }, 0);
        assert!(matches!(generate(&s), Err(DatagenError::InvalidSpec(_))));
        s = spec(GeneratorKind::Realizable, 0);
        s.input_scale = 1.5;
        assert!(matches!(generate(&s), Err(DatagenError::InvalidSpec(_))));
    }

    #[test]
    fn drift_vm_matches_recomputation() {
        let (_, truth) = generate(&spec(
            GeneratorKind::Drift {
                step: 0.05,
                anchor_pull: 0.1,
            },
            77,
        ))
        .unwrap();
        match truth {
            GroundTruth::Drifting { u_bar, u_path, v_m } => {
                let anchor = Vector::from_slice(&u_bar);
                let recomputed: f64 = u_path
                    .iter()
                    .map(|u| Vector::from_slice(u).sub(&anchor).norm_sq())
                    .sum();
                assert!((v_m - recomputed).abs() <= 1e-12 * (1.0 + v_m));
            }
            _ => panic!("expected drifting truth"),
        }
    }
}
