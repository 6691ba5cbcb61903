//! Frozen-output tests.
//!
//! Golden files live in `tests/golden/` (override with `WEMM_GOLDEN_DIR`).
//! Run with `WEMM_REGEN_GOLDEN=1` to rewrite them after an intentional
//! change to the generator or the learners.

use std::fs;
use std::path::PathBuf;

use wemm_core::baselines::BaselineLearner;
use wemm_core::datagen::{generate, GeneratorKind, GeneratorSpec};
use wemm_core::primal::WemmLearner;
use wemm_core::stream::Stream;

fn golden_dir() -> PathBuf {
    match std::env::var("WEMM_GOLDEN_DIR") {
        Ok(dir) => PathBuf::from(dir),
        Err(_) => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden"),
    }
}

fn check_or_regen(name: &str, produced: &str) {
    let path = golden_dir().join(name);
    if std::env::var("WEMM_REGEN_GOLDEN").is_ok() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, produced).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden file {}: {e}", path.display()));
    assert_eq!(
        produced,
        expected,
        "output diverged from {}",
        path.display()
    );
}

fn frozen_spec() -> GeneratorSpec {
    GeneratorSpec {
        kind: GeneratorKind::GaussianNoise { sigma: 0.1 },
        dim: 2,
        rounds: 5,
        seed: 42,
        input_scale: 1.0,
    }
}

#[test]
fn generated_stream_bytes_are_frozen() {
    let (stream, _) = generate(&frozen_spec()).unwrap();
    check_or_regen("stream_seed42_d2_t5_gauss01.csv", &stream.to_csv());
}

#[test]
fn golden_stream_reloads_bit_exactly() {
    let (stream, _) = generate(&frozen_spec()).unwrap();
    let back = Stream::from_csv(&stream.to_csv(), "golden").unwrap();
    for (a, b) in stream.iter().zip(back.iter()) {
        assert_eq!(a.y.to_bits(), b.y.to_bits());
        for j in 0..2 {
            assert_eq!(a.x[j].to_bits(), b.x[j].to_bits());
        }
    }
}

#[test]
fn per_round_predictions_are_frozen() {
    // Pins wemm/aar/ridge predictions on one stream so the documented
    // update formulas cannot drift silently.
    let spec = GeneratorSpec {
        kind: GeneratorKind::GaussianNoise { sigma: 0.3 },
        dim: 2,
        rounds: 50,
        seed: 7,
        input_scale: 1.0,
    };
    let (stream, _) = generate(&spec).unwrap();
    let b = 2.0;
    let mut wemm = WemmLearner::new(2, b).unwrap();
    let mut aar = BaselineLearner::aar(2, b).unwrap();
    let mut ridge = BaselineLearner::ridge(2, b).unwrap();

    let mut out = String::from("t,wemm,aar,ridge\n");
    for (i, ex) in stream.iter().enumerate() {
        let yw = wemm.predict(&ex.x).unwrap();
        let ya = aar.predict(&ex.x);
        let yr = ridge.predict(&ex.x);
        out.push_str(&format!("{},{},{},{}\n", i + 1, yw, ya, yr));
        wemm.update(&ex.x, ex.y).unwrap();
        aar.update(&ex.x, ex.y);
        ridge.update(&ex.x, ex.y);
    }
    check_or_regen("predictions_b2_seed7.csv", &out);
}

#[test]
fn norm_contract_across_a_thousand_specs() {
    for seed in 0..1000u64 {
        let spec = GeneratorSpec {
            kind: match seed % 3 {
                0 => GeneratorKind::Realizable,
                1 => GeneratorKind::GaussianNoise { sigma: 0.5 },
                _ => GeneratorKind::UnitSphereEdge,
            },
            dim: 1 + (seed % 4) as usize,
            rounds: 10,
            seed,
            input_scale: 0.2 + 0.8 * ((seed % 11) as f64 / 11.0),
        };
        let (stream, _) = generate(&spec).unwrap();
        assert!(
            stream.max_norm() <= spec.input_scale,
            "seed {seed}: {} > {}",
            stream.max_norm(),
            spec.input_scale
        );
    }
}
