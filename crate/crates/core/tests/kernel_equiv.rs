//! Primal/dual equivalence and cost behavior of the kernel learner.

use std::hint::black_box;
use std::time::Instant;

use wemm_core::datagen::{generate, GeneratorKind, GeneratorSpec};
use wemm_core::kernel::{KernelSpec, KernelWemm};
use wemm_core::primal::WemmLearner;
use wemm_core::stream::Stream;

fn noisy_stream(seed: u64, d: usize, t: usize) -> Stream {
    let spec = GeneratorSpec {
        kind: GeneratorKind::GaussianNoise { sigma: 0.4 },
        dim: d,
        rounds: t,
        seed,
        input_scale: 1.0,
    };
    generate(&spec).unwrap().0
}

#[test]
fn linear_kernel_matches_primal_for_500_rounds() {
    for seed in 0..3u64 {
        let stream = noisy_stream(seed, 3, 500);
        let b = 2.0;
        let mut primal = WemmLearner::new(3, b).unwrap();
        let mut dual = KernelWemm::new(KernelSpec::Linear, b).unwrap();
        for ex in stream.iter() {
            let yp = primal.predict(&ex.x).unwrap();
            let yd = dual.predict(&ex.x);
            assert!((yp - yd).abs() <= 1e-8, "prediction drift {}", yp - yd);
            primal.update(&ex.x, ex.y).unwrap();
            dual.update(ex.x.clone(), ex.y);
            assert!(dual.beta_asymmetry() <= 1e-10);
        }
    }
}

#[test]
fn implied_primal_state_matches() {
    let stream = noisy_stream(7, 3, 200);
    let b = 2.0;
    let mut primal = WemmLearner::new(3, b).unwrap();
    let mut dual = KernelWemm::new(KernelSpec::Linear, b).unwrap();
    for ex in stream.iter() {
        primal.update(&ex.x, ex.y).unwrap();
        dual.update(ex.x.clone(), ex.y);
    }
    let w = dual.implied_weights(3);
    assert!(w.sub(primal.weights()).norm_inf() <= 1e-8);
    let sigma = dual.implied_sigma(3);
    assert!(sigma.max_abs_diff(primal.sigma()) <= 1e-7);
}

#[test]
fn nonlinear_kernels_run_and_stay_symmetric() {
    let stream = noisy_stream(2, 2, 120);
    for kernel in [
        KernelSpec::Rbf { gamma: 0.7 },
        KernelSpec::Polynomial {
            degree: 3,
            offset: 1.0,
        },
    ] {
        let mut learner = KernelWemm::new(kernel, 1.5).unwrap();
        for ex in stream.iter() {
            learner.update(ex.x.clone(), ex.y);
        }
        assert!(learner.beta_asymmetry() <= 1e-10);
        assert_eq!(learner.rounds(), 120);
    }
}

#[test]
fn update_cost_grows_quadratically_not_quartically() {
    // Time a block of updates around t = 200 and around t = 1000; quadratic
    // per-round cost means the ratio stays well under 50 (quartic would be
    // around 600).
    let stream = noisy_stream(5, 3, 1010);
    let mut learner = KernelWemm::new(KernelSpec::Linear, 2.0).unwrap();
    let block = 10;

    let timed = |learner: &mut KernelWemm, from: usize| {
        let start = Instant::now();
        for i in from..from + block {
            let ex = stream.get(i);
            learner.update(ex.x.clone(), ex.y);
        }
        black_box(learner.alpha().len());
        start.elapsed().as_secs_f64()
    };

    for i in 0..195 {
        let ex = stream.get(i);
        learner.update(ex.x.clone(), ex.y);
    }
    let t_small = timed(&mut learner, 195);
    for i in 205..995 {
        let ex = stream.get(i);
        learner.update(ex.x.clone(), ex.y);
    }
    let t_large = timed(&mut learner, 995);

    let ratio = t_large / t_small.max(1e-9);
    assert!(
        ratio < 50.0,
        "cost ratio {ratio} (t_small {t_small}s, t_large {t_large}s)"
    );
}
